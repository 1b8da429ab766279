import mpmath
import pytest
from sympy import primerange

from engines.cm_classfield_engine import (
    SubfieldPolynomial,
    eval_j,
    frobenius_signature,
    hilbert_class_polynomial,
    predicted_frobenius_order,
    subfield_defining_polynomial,
)
from engines.cubic_model import cubic_field_model, reduce_model
from engines.errors import SubgroupNotUnique
from engines.quadform_engine import class_group


def test_j_at_i_is_1728():
    value = eval_j(mpmath.mpc(0, 1), 120)
    assert int(mpmath.nint(value.real)) == 1728
    assert abs(value.imag) < mpmath.mpf(2) ** -60


@pytest.mark.parametrize("d, coeffs", [
    (-3, [1, 0]),
    (-4, [1, -1728]),
    (-7, [1, 3375]),
    (-23, [1, 3491750, -5151296875, 12771880859375]),
    (-31, [1, 39491307, -58682638134, 1566028350940383]),
])
def test_hilbert_class_polynomial(d, coeffs):
    assert hilbert_class_polynomial(d) == coeffs


def test_class_polynomial_stable_under_precision_doubling():
    low = hilbert_class_polynomial(-23)
    high = hilbert_class_polynomial(-23, precision=400)
    assert low == high


def test_cubic_model():
    assert cubic_field_model(-23) == (1, 0, -1, 1)


@pytest.mark.parametrize("d", [-23, -31, -59, -83, -107])
def test_subfield_signatures_match_dihedral_frobenius(d):
    group = class_group(d)
    character = group.quotient_character(3)
    sub = subfield_defining_polynomial(d, 3, group=group)
    assert sub.degree == 6
    checked = 0
    for ell in primerange(5, 400):
        sig = frobenius_signature(sub.polynomial, ell)
        if sig is None or d % ell == 0:
            continue
        order = predicted_frobenius_order(group, character, ell)
        assert sig == (order,) * (6 // order)
        checked += 1
        if checked == 25:
            break
    assert checked == 25


def test_reduced_model_defines_the_same_field():
    sub = subfield_defining_polynomial(-23, 3)
    small = reduce_model(sub)
    assert small.model == "reduced"
    assert small.degree == 6
    for ell in primerange(5, 200):
        a = frobenius_signature(sub.polynomial, ell)
        b = frobenius_signature(small.polynomial, ell)
        if a is not None and b is not None:
            assert a == b


def test_subfield_polynomial_serializes():
    sub = subfield_defining_polynomial(-23, 3)
    assert SubfieldPolynomial.from_dict(sub.to_dict()) == sub


def test_subfield_needs_unique_subgroup():
    with pytest.raises(SubgroupNotUnique):
        subfield_defining_polynomial(-199, 3)
