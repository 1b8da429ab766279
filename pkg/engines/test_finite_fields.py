import random

import pytest

from engines.errors import ZeroElement
from engines.finite_fields import (
    FiniteField,
    expand_factors,
    ff_discrete_log,
    ff_mult_order,
    ff_primitive_element,
    poly_factor_mod_p,
    roots_mod_p,
)


def test_field_size_and_inverses():
    F = FiniteField(5, 2)
    elements = list(F.elements())
    assert len(elements) == 25
    for x in F.nonzero_elements():
        assert x * x.inverse() == F.one


def test_root_of_unity_is_primitive():
    F = FiniteField(5, 2)
    zeta = F.root_of_unity(3)
    assert zeta ** 3 == F.one
    assert zeta != F.one
    assert ff_mult_order(F.root_of_unity(8)) == 8


def test_missing_root_of_unity():
    with pytest.raises(ValueError):
        FiniteField(7).root_of_unity(5)


def test_primitive_element_and_discrete_log():
    F = FiniteField(3, 3)
    g = ff_primitive_element(F)
    assert ff_mult_order(g) == 26
    assert ff_discrete_log(g ** 7, g) == 7
    h = ff_primitive_element(F, random.Random(4))
    assert ff_mult_order(h) == 26


def test_order_of_zero():
    with pytest.raises(ZeroElement):
        ff_mult_order(FiniteField(7).zero)


def test_frobenius_fixes_prime_field():
    F = FiniteField(2, 2)
    assert F(1).frobenius() == F(1)
    assert F.subfield_contains(F(1), 1)
    assert not F.subfield_contains(F.gen(), 1)


def test_factor_mod_p():
    # x^2 + 1 = (x + 2)(x + 3) mod 5
    factors = poly_factor_mod_p([1, 0, 1], 5)
    assert factors == [((1, 2), 1), ((1, 3), 1)]
    assert roots_mod_p([1, 0, 1], 5) == [2, 3]
    assert roots_mod_p([1, 0, 1], 7) == []


def test_factor_mod_p_round_trips():
    f = [1, 0, -1, 1, 4, 2]
    factors = poly_factor_mod_p(f, 11, seed=3)
    assert expand_factors(factors, 11) == tuple(c % 11 for c in f)


SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


@pytest.mark.parametrize("case", range(1000))
def test_random_factorizations_expand_back(case):
    rng = random.Random(case)
    p = rng.choice(SMALL_PRIMES)
    degree = rng.randint(1, 8)
    f = [1] + [rng.randrange(p) for _ in range(degree)]
    factors = poly_factor_mod_p(f, p, seed=case)
    assert expand_factors(factors, p) == tuple(f)
    assert sum((len(h) - 1) * m for h, m in factors) == degree
    assert all(h[0] == 1 for h, _ in factors)
