import pytest

from engines.errors import InfiniteGroup
from engines.exact_algebra import (
    IntMatrix,
    abelian_group_structure,
    eliminate_unit_columns,
    hnf,
    hnf_lower,
    kernel_mod_p,
    kronecker_symbol,
    rank_mod_p,
    snf_with_transforms,
    subgroup_structure,
    valuation,
)


def test_hnf_drops_dependent_rows():
    assert hnf([(4, 6), (2, 3)]) == [(2, 3)]


def test_hnf_modular_matches_plain():
    rows = [(2, 1), (0, 3)]
    assert hnf(rows, modulus=6) == hnf(rows) == [(2, 1), (0, 3)]


def test_hnf_lower_pivots_on_diagonal():
    assert hnf_lower([(2, 0), (1, 3)], 2) == [(2, 0), (1, 3)]


def test_bareiss_determinant():
    assert IntMatrix([[2, 1], [1, 1]]).det() == 1
    assert IntMatrix([[3, 0, 0], [5, 2, 0], [7, 1, 4]]).det() == 24


def test_snf_is_unimodular_equivalence():
    m = IntMatrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    D, U, V = snf_with_transforms(m)
    assert U * m * V == D
    assert D.is_diagonal()
    diag = [abs(x) for x in D.diagonal_entries()]
    assert diag == [2, 6, 12]


@pytest.mark.parametrize("relations, factors", [
    ([(2, 0), (0, 3)], (6,)),
    ([(2, 0), (0, 4)], (2, 4)),
    ([(1, 0), (0, 5)], (5,)),
])
def test_abelian_group_structure(relations, factors):
    structure = abelian_group_structure(relations, 2)
    assert structure.invariant_factors == factors


def test_coordinates_invert_element():
    structure = abelian_group_structure([(2, 0), (0, 3)], 2)
    assert structure.coordinates(structure.element((5,))) == (5,)


def test_p_part_exponents():
    structure = abelian_group_structure([(2, 0), (0, 4)], 2)
    assert structure.p_exponents(2) == [1, 2]
    assert structure.p_exponents(3) == []


def test_rank_deficient_relations_are_infinite():
    with pytest.raises(InfiniteGroup):
        abelian_group_structure([(1, 0)], 2)


def test_subgroup_structure():
    sub = subgroup_structure([(2,)], [6])
    assert sub.invariant_factors == (3,)
    assert sub.order == 3


def test_eliminate_unit_columns():
    rows, keep = eliminate_unit_columns([(1, 2, 0), (0, 3, 1), (2, 4, 6)], [0])
    assert keep == [1, 2]
    assert rows == [(3, 1), (0, 6)]


def test_eliminate_unit_columns_needs_pivot():
    with pytest.raises(ValueError):
        eliminate_unit_columns([(2, 1)], [0])


@pytest.mark.parametrize("a, n, expected", [
    (-4, 3, -1),
    (5, 2, -1),
    (-7, 2, 1),
    (-3, 7, 1),
    (6, 3, 0),
])
def test_kronecker_symbol(a, n, expected):
    assert kronecker_symbol(a, n) == expected


def test_valuation():
    assert valuation(250, 5) == 3
    assert valuation(7, 5) == 0
    with pytest.raises(ValueError):
        valuation(0, 5)


def test_kernel_and_rank_mod_p():
    assert kernel_mod_p([[1, 1], [1, 1]], 2) == [[1, 1]]
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_p([[1, 0], [0, 1]], 3) == 2
