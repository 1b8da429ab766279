import pytest

from engines.errors import EvenPrime, PContainedInS
from engines.rayclass_engine import (
    constant_det_presentation,
    omega_polynomial,
    p_rank_check,
    parse_presentation,
    primes_above,
    ray_class_group_quadratic,
    sigma_eigenspace_split,
    universal_ring_presentation,
)


def test_omega_polynomial():
    assert omega_polynomial(-4) == (1, 0, 1)
    assert omega_polynomial(-23) == (1, -1, 6)


def test_primes_above_by_splitting_type():
    assert [P.kind for P in primes_above(-4, 5)] == ["split", "split"]
    inert = primes_above(-4, 7)
    assert len(inert) == 1 and inert[0].norm == 49
    assert primes_above(-23, 23)[0].norm == 23


def test_empty_modulus_is_the_class_group():
    rcd = ray_class_group_quadratic(-23, (), 3)
    assert rcd.order == 3
    assert rcd.p_exponents() == [1]
    assert p_rank_check(rcd) == (1, 1)


def test_conjugation_inverts_the_class_group():
    split = sigma_eigenspace_split(ray_class_group_quadratic(-23, (), 3))
    assert split.minus == (1,)
    assert split.plus == ()


def test_inert_modulus_exact_sequence():
    # (O/7)^x = F_49^x modulo the image of <i>
    rcd = ray_class_group_quadratic(-4, (7,), 3)
    assert rcd.order == 12
    assert rcd.unit_image_order == 4
    assert rcd.p_exponents() == [1]
    split = sigma_eigenspace_split(rcd)
    assert split.minus == ()
    assert split.plus == (1,)


def test_coprime_part_is_empty():
    rcd = ray_class_group_quadratic(-23, (), 5)
    assert rcd.p_exponents() == []
    assert sigma_eigenspace_split(rcd).minus == ()


def test_p_in_S_is_rejected():
    with pytest.raises(PContainedInS):
        ray_class_group_quadratic(-23, (5,), 5)


def test_no_eigenspace_split_at_two():
    with pytest.raises(EvenPrime):
        sigma_eigenspace_split(ray_class_group_quadratic(-23, (), 2))


def test_presentation_text():
    ring = universal_ring_presentation((1,), 5, 2)
    assert ring.text == "W(F_25)[X1]/((1+X1)^5-1)"
    assert ring.variable_count == 1
    assert str(universal_ring_presentation((), 3, 1)) == "W(F_3)"
    assert constant_det_presentation((2,), 3, 1).text == "W(F_3)[X1]/((1+X1)^9-1)"


@pytest.mark.parametrize("ring", [
    universal_ring_presentation((), 7, 1),
    universal_ring_presentation((1, 2), 5, 2),
    universal_ring_presentation((1,), 5, 1, r_free=1),
])
def test_presentation_parses_back(ring):
    assert parse_presentation(ring.text) == ring


def test_bad_presentation():
    with pytest.raises(ValueError):
        parse_presentation("Z[x]")
    with pytest.raises(ValueError):
        universal_ring_presentation((0,), 5, 1)
