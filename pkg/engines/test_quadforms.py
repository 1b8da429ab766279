import pytest

from engines.errors import DiscriminantMismatch, NonFundamental, NotPositiveDefinite, SubgroupNotUnique
from engines.quadform_engine import (
    QuadraticForm,
    analytic_class_number,
    class_group,
    compose_forms,
    fundamental_discriminants,
    is_fundamental,
    prime_frobenius_class,
    reduce_form,
    reduced_forms,
    sqrt_mod_prime,
    transform_to_coprime,
)


def test_fundamental_discriminants():
    assert list(fundamental_discriminants(20)) == [-3, -4, -7, -8, -11, -15, -19, -20]
    assert is_fundamental(-4219)
    assert not is_fundamental(-12)
    assert not is_fundamental(-27)


@pytest.mark.parametrize("d, h, factors", [
    (-3, 1, []),
    (-4, 1, []),
    (-23, 3, [3]),
    (-47, 5, [5]),
    (-56, 4, [4]),
    (-84, 4, [2, 2]),
    (-4219, 15, [15]),
])
def test_class_group(d, h, factors):
    group = class_group(d)
    assert group.order == h
    assert group.invariant_factors == factors


def test_class_number_matches_character_sum():
    for d in fundamental_discriminants(600):
        assert class_group(d).order == analytic_class_number(d)


@pytest.mark.slow
def test_class_number_matches_character_sum_to_5000():
    for d in fundamental_discriminants(5000):
        assert len(reduced_forms(d)) == analytic_class_number(d)


def test_non_fundamental_rejected():
    with pytest.raises(NonFundamental):
        class_group(-12)


def test_reduction_and_composition():
    assert reduce_form(QuadraticForm(3, 5, 4)) == QuadraticForm(2, 1, 3)
    f = QuadraticForm(2, 1, 3)
    square = compose_forms(f, f)
    assert square == QuadraticForm(2, -1, 3)
    assert compose_forms(square, f) == QuadraticForm.principal(-23)
    with pytest.raises(NotPositiveDefinite):
        reduce_form(QuadraticForm(-1, 0, 5))
    with pytest.raises(DiscriminantMismatch):
        compose_forms(f, QuadraticForm(1, 1, 1))


def test_reduced_forms_are_reduced():
    forms = reduced_forms(-4219)
    assert len(forms) == 15
    assert all(f.is_reduced() and f.discriminant == -4219 for f in forms)


def test_group_operations():
    group = class_group(-47)
    g = group.generators[0]
    assert group.order_of(g) == 5
    assert group.power(g, 5) == group.identity
    assert group.dlog(group.inverse(g)) == (4,)
    assert group.is_p_elementary(5)
    assert group.p_rank(5) == 1


def test_quotient_character():
    group = class_group(-4219)
    character = group.quotient_character(3)
    cosets = character.cosets(group)
    assert [len(c) for c in cosets] == [5, 5, 5]
    assert group.identity in character.kernel(group)
    with pytest.raises(SubgroupNotUnique):
        class_group(-199).quotient_character(3)


def test_prime_splitting():
    assert prime_frobenius_class(-23, 2).is_split
    assert prime_frobenius_class(-23, 5).is_inert
    assert prime_frobenius_class(-23, 23).is_ramified
    datum = prime_frobenius_class(-23, 2)
    assert class_group(-23).order_of(datum.form) == 3


def test_sqrt_mod_prime():
    assert sqrt_mod_prime(2, 7) == 3
    assert sqrt_mod_prime(-1, 13) == 5


def test_transform_to_coprime_keeps_class():
    group = class_group(-23)
    f = QuadraticForm(2, 1, 3)
    g = transform_to_coprime(f, 2)
    assert g.a % 2 == 1
    assert g.discriminant == -23
    assert group.dlog(g) == group.dlog(f)
