import pytest

from engines.errors import ZeroElement
from engines.finite_fields import FiniteField
from engines.local_algebra import LocalAlgebra, Mat2Ring, prime_field_algebra


@pytest.fixture
def algebra():
    return prime_field_algebra(5, 3)


def test_eps_is_nilpotent(algebra):
    e = algebra.eps()
    assert algebra.mul(e, e) == algebra.eps(2)
    assert algebra.power(e, 3) == algebra.zero
    assert algebra.eps(3) == algebra.zero


def test_inverse(algebra):
    a = algebra.element(2, 1, 3)
    assert algebra.mul(a, algebra.inv(a)) == algebra.one
    assert algebra.power(a, -2) == algebra.inv(algebra.mul(a, a))
    with pytest.raises(ZeroElement):
        algebra.inv(algebra.eps())


def test_one_plus_eps_has_order_p(algebra):
    x = algebra.element(1, 1)
    assert algebra.power(x, 5) == algebra.one
    assert algebra.power(x, 1) != algebra.one


def test_truncation_and_lift(algebra):
    a = algebra.element(3, 4, 2)
    low = algebra.truncated(2)
    assert algebra.truncate(a, 2) == low.element(3, 4)
    assert algebra.lift(algebra.truncate(a, 2), low) == algebra.element(3, 4)
    assert algebra.residue(a) == 3


def test_extension_field_coefficients():
    F = FiniteField(2, 2)
    A = LocalAlgebra(F, 2)
    w = F.root_of_unity(3)
    a = A.element(w, 1)
    assert A.mul(a, A.inv(a)) == A.one
    assert A.power(A.element(1, 1), 2) == A.one


def test_matrix_ring():
    A = prime_field_algebra(7, 2)
    R = Mat2Ring(A)
    m = R.matrix(A.element(2, 1), 3, A.element(0, 1), 5)
    assert R.mul(m, R.inverse(m)) == R.identity
    assert R.det(m) == A.sub(A.mul(m[0], m[3]), A.mul(m[1], m[2]))
    kernel = R.add(R.identity, R.scale(A.eps(), R.antidiag(1, 1)))
    assert R.is_residually_identity(kernel)
    assert R.element_order(kernel) == 7
    assert R.element_order(R.antidiag(1, 1)) == 2
    assert R.is_antidiagonal(R.antidiag(2, 3))
    assert R.is_diagonal(R.diag(2, 3))
    assert R.commutator(R.diag(2, 3), R.diag(4, 5)) == R.identity


def test_nilpotency_index_must_be_positive():
    with pytest.raises(ValueError):
        LocalAlgebra(FiniteField(3), 0)
