import random

import pytest

from engines.errors import NonsplitUnavailable, NoSeparatingElement, UnrealizableModule
from engines.finite_fields import FiniteField
from engines.local_algebra import LocalAlgebra, Mat2Ring
from engines.reptheory_engine import (
    C_EPS,
    C_ONE,
    I_MOD,
    DihedralGroupData,
    ModuleLabel,
    adjoint_decompose,
    build_infinitesimal_lift,
    classify_frattini_module,
    frattini_quotient,
    induce_character,
    is_dihedral_deformation,
    max_order_above_sigma,
    random_coprime_pair,
    remark_fixture,
    s4_example,
    s4_representation,
    teichmuller_basis,
    truncate,
)


@pytest.fixture
def data():
    return DihedralGroupData.standard(5, 3)


def test_standard_data(data):
    assert data.field.order == 25
    assert data.q_ad == 3
    assert data.i_dimension == 2


def test_residual_data_must_separate():
    with pytest.raises(NoSeparatingElement):
        DihedralGroupData(FiniteField(7), 2, 2, 1)


@pytest.mark.parametrize("module", [C_ONE, C_EPS])
def test_induced_lifts_are_dihedral(data, module):
    rep = build_infinitesimal_lift(data, module)
    verdict = is_dihedral_deformation(rep)
    assert verdict.dihedral
    assert [lab.tag for lab in verdict.classification.labels] == [module]
    assert len(rep.gamma) == 5
    assert rep.residual_image_order() == 6
    assert "sigma2" in verdict.character


def test_lift_by_I_is_not_dihedral(data):
    rep = build_infinitesimal_lift(data, I_MOD)
    verdict = is_dihedral_deformation(rep)
    assert not verdict.dihedral
    assert len(rep.gamma) == 25
    assert [str(lab) for lab in verdict.classification.labels] == [I_MOD]
    assert verdict.witness is not None


def test_unrealizable_modules():
    quadratic = DihedralGroupData.standard(3, 2)
    with pytest.raises(UnrealizableModule):
        build_infinitesimal_lift(quadratic, I_MOD)
    with pytest.raises(UnrealizableModule):
        build_infinitesimal_lift(quadratic, ModuleLabel(C_ONE, 2))


def test_nonsplit_lift_raises_sigma_order():
    data = DihedralGroupData.standard(2, 3, c_order=3)
    split = build_infinitesimal_lift(data, C_ONE)
    nonsplit = build_infinitesimal_lift(data, C_ONE, "nonsplit")
    assert max_order_above_sigma(split) == 6
    assert max_order_above_sigma(nonsplit) == 12


def test_nonsplit_needs_p_two(data):
    with pytest.raises(NonsplitUnavailable):
        build_infinitesimal_lift(data, C_ONE, "nonsplit")


def test_s4_is_not_dihedral():
    rep = s4_representation()
    assert rep.image.order == 24
    verdict = s4_example(rep)
    assert not verdict.dihedral
    assert [str(lab) for lab in verdict.classification.labels] == [I_MOD]


def test_dihedral_truncation_of_a_non_dihedral_lift():
    rep = remark_fixture()
    assert len(rep.gamma) == 7 ** 4
    assert not is_dihedral_deformation(rep).dihedral
    assert is_dihedral_deformation(truncate(rep, 2)).dihedral


def test_truncate_range():
    with pytest.raises(ValueError):
        truncate(remark_fixture(), 4)


def test_teichmuller_basis_diagonalizes_H(data):
    rep = build_infinitesimal_lift(data, C_EPS)
    basis = teichmuller_basis(rep)
    diag = rep.conjugate(basis)
    assert diag.ring.is_diagonal(diag.matrix("h"))
    assert diag.ring.is_antidiagonal(diag.matrix("s"))


def test_adjoint_decomposition(data):
    rep = induce_character(data, LocalAlgebra(data.field, 2))
    decomposition = adjoint_decompose(rep)
    R, A = rep.ring, rep.algebra
    E11 = R.matrix(1, 0, 0, 0)
    (a, d), (u, v) = decomposition.to_components(E11)
    assert (a, d) == (A.one, A.zero)
    assert (u, v) == (A.zero, A.zero)
    trace, traceless = decomposition.trace_split(E11)
    assert trace == A.one
    assert R.trace(traceless) == A.zero


def test_frattini_quotient_of_cyclic_group():
    A = LocalAlgebra(FiniteField(2), 3)
    R = Mat2Ring(A)
    fq = frattini_quotient(R, [R.scalar(A.element(1, 1))])
    assert fq.order == 4
    assert fq.phi_order == 2
    assert fq.dimension == 1


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("seed", range(34))
def test_coprime_action_is_seen_on_the_frattini_quotient(p, seed):
    pair = random_coprime_pair(p, random.Random(seed))
    fq = frattini_quotient(pair.ring, pair.generators, [pair.automorphism])
    acts_trivially = all(pair.automorphism(g) == g for g in fq.vectors)
    assert fq.is_trivial_action(fq.actions[0]) == acts_trivially


def test_trivial_kernel_classifies_empty(data):
    verdict = classify_frattini_module(induce_character(data))
    assert verdict.labels == []
    assert verdict.trivial


RESIDUAL_PAIRS = [(2, 3), (2, 5), (2, 7), (3, 5), (3, 7), (5, 3), (5, 7)]

# 7 pairs x 29 seeds covers 203 lifts; all but the first four seeds are slow
LIFT_SEEDS = [*range(4), *(pytest.param(s, marks=pytest.mark.slow) for s in range(4, 29))]


@pytest.mark.parametrize("p, q_ad", RESIDUAL_PAIRS)
@pytest.mark.parametrize("seed", LIFT_SEEDS)
def test_honestly_induced_lifts_are_dihedral(p, q_ad, seed):
    rng = random.Random(seed)
    data = DihedralGroupData.standard(p, q_ad)
    A = LocalAlgebra(data.field, 2)
    chi = {
        "h": A.element(data.alpha, rng.randrange(p)),
        "h_sigma": A.element(data.beta, rng.randrange(p)),
        "sigma2": A.element(data.c, rng.randrange(p)),
    }
    assert is_dihedral_deformation(induce_character(data, A, chi)).dihedral


@pytest.mark.parametrize("p, q_ad", [pair for pair in RESIDUAL_PAIRS if pair != (5, 7)])
def test_I_lifts_are_never_dihedral(p, q_ad):
    data = DihedralGroupData.standard(p, q_ad)
    rep = build_infinitesimal_lift(data, I_MOD)
    assert not is_dihedral_deformation(rep).dihedral
    assert len(rep.gamma) == p ** data.i_dimension


@pytest.mark.slow
def test_I_lift_over_large_field():
    data = DihedralGroupData.standard(5, 7)
    assert not is_dihedral_deformation(build_infinitesimal_lift(data, I_MOD)).dihedral
