from itertools import islice

import pytest

from engines.classgroup_engine import class_group_general
from engines.errors import NotIrreducible, NotMaximal
from engines.numfield_engine import (
    IdealHNF,
    dedekind_criterion,
    factor_rational_prime,
    maximal_order,
    minkowski_bound,
    order_from_polynomial,
)
from engines.quadform_engine import class_group, fundamental_discriminants


@pytest.mark.parametrize("poly, disc", [
    ([1, 0, 1], -4),
    ([1, 0, 5], -20),
    ([1, 0, -5], 5),
    ([1, 0, 23], -23),
    ([1, 0, 0, -2], -108),
    ([1, -1, -2, -8], -503),
])
def test_maximal_order_discriminant(poly, disc):
    order = maximal_order(poly)
    assert order.is_maximal
    assert order.discriminant == disc


def test_dedekind_criterion():
    assert dedekind_criterion([1, 0, 1], 5)[0]
    maximal, u = dedekind_criterion([1, 0, -5], 2)
    assert not maximal
    assert u is not None


def test_reducible_polynomial_rejected():
    with pytest.raises(NotIrreducible):
        order_from_polynomial([1, 0, -1])


@pytest.mark.parametrize("ell, shape", [
    (5, [(1, 1), (1, 1)]),
    (3, [(2, 1)]),
    (2, [(1, 2)]),
])
def test_prime_decomposition_gaussian(ell, shape):
    order = maximal_order([1, 0, 1])
    primes = factor_rational_prime(order, ell)
    assert [(P.residue_degree, P.ramification) for P in primes] == shape
    for P in primes:
        assert P.norm == ell ** P.residue_degree


def test_prime_decomposition_at_index_divisor():
    # 2 divides the index of Z[x]/(x^3 - x^2 - 2x - 8) and splits completely
    order = maximal_order([1, -1, -2, -8])
    primes = factor_rational_prime(order, 2)
    assert [(P.residue_degree, P.ramification) for P in primes] == [(1, 1), (1, 1), (1, 1)]


def test_ideal_arithmetic():
    order = maximal_order([1, 0, 1])
    two = IdealHNF.principal(order, (2, 0))
    assert two.norm == 4
    P = factor_rational_prime(order, 2)[0].ideal
    assert P * P == two


def test_minkowski_bound():
    assert minkowski_bound(maximal_order([1, 0, 23])) == 3


@pytest.mark.parametrize("poly, d", [
    ([1, 0, 23], -23),
    ([1, 1, 12], -47),
    ([1, 0, 14], -56),
    ([1, 0, 26], -104),
])
def test_class_group_general_matches_forms(poly, d, run_config):
    result = class_group_general(maximal_order(poly), "certified", run_config)
    assert result.h == class_group(d).order
    assert list(result.invariant_factors) == class_group(d).invariant_factors
    assert result.certification == "minkowski-certified"


def quadratic_polynomial(d):
    if d % 4 == 1:
        return [1, -1, (1 - d) // 4]
    return [1, 0, -d // 4]


@pytest.mark.slow
@pytest.mark.parametrize("d", list(islice(fundamental_discriminants(200), 30)))
def test_class_group_general_matches_forms_first_30(d, run_config):
    result = class_group_general(maximal_order(quadratic_polynomial(d)), "certified", run_config)
    assert result.h == class_group(d).order
    assert list(result.invariant_factors) == list(class_group(d).invariant_factors)


def test_minkowski_bound_of_gaussian_field_is_one():
    assert minkowski_bound(maximal_order([1, 0, 1])) == 1


def test_class_group_does_not_depend_on_worker_count(run_config):
    order = maximal_order([1, 0, 26])
    serial = class_group_general(order, "certified", run_config.with_overrides(jobs=1))
    parallel = class_group_general(order, "certified", run_config.with_overrides(jobs=2))
    assert serial.to_dict() == parallel.to_dict()
    assert serial.relation_count == parallel.relation_count


def test_class_group_of_pure_cubic(run_config):
    result = class_group_general(maximal_order([1, 0, 0, -2]), "certified", run_config)
    assert result.h == 1
    assert result.to_dict()["h"] == "1"


def test_class_group_needs_maximal_order(run_config):
    with pytest.raises(NotMaximal):
        class_group_general(order_from_polynomial([1, 0, -5]), "certified", run_config)
