"""
Finite fields F_{p^r} and polynomial factorization modulo p.

Polynomials handed to galoistools are dense coefficient lists, highest degree
first. Field elements store their coefficient vector lowest degree first.
"""

from itertools import product
from math import isqrt

from sympy import factorint, isprime
from sympy.core.random import seed as seed_sympy_random
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import (
    gf_from_int_poly,
    gf_gcdex,
    gf_irreducible_p,
    gf_monic,
    gf_mul,
    gf_pow_mod,
    gf_rem,
    gf_sqf_list,
    gf_zassenhaus,
)

from engines.errors import ZeroElement, ZeroPolynomial
from engines.logging_config import get_logger

logger = get_logger(__name__)


def _ints(poly):
    return [int(c) for c in poly]


def find_irreducible(p, r):
    """
    Monic irreducible polynomial of degree r over F_p with the fewest nonzero
    coefficients, lexicographically smallest (highest degree first) among those.
    """
    if r == 1:
        return (1, 0)
    for weight in range(2, r + 2):
        for tail in product(range(p), repeat=r):
            if tail[-1] == 0:
                continue
            if 1 + sum(1 for c in tail if c) != weight:
                continue
            candidate = [1, *tail]
            if gf_irreducible_p(candidate, p, ZZ):
                return tuple(candidate)
    raise ArithmeticError(f"no irreducible polynomial of degree {r} over F_{p}")


class FiniteField:
    """F_{p^r} = F_p[a]/(modulus(a))."""

    def __init__(self, p, r=1, modulus=None):
        if not isprime(p):
            raise ValueError(f"Characteristic must be prime: {p}")
        if modulus is None:
            modulus = find_irreducible(p, r)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != r + 1 or modulus[0] != 1:
            raise ValueError(f"Modulus must be monic of degree {r}: {modulus}")
        if r > 1 and not gf_irreducible_p(list(modulus), p, ZZ):
            raise ValueError(f"Modulus {modulus} is reducible mod {p}")
        self.p = p
        self.r = r
        self.modulus = modulus
        self.order = p ** r
        self._hash = hash((p, modulus))
        self.zero = FiniteFieldElement(self, (0,) * r)
        self.one = FiniteFieldElement(self, (1,) + (0,) * (r - 1))

    def __eq__(self, other):
        return isinstance(other, FiniteField) and self.p == other.p and self.modulus == other.modulus

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"F_{self.order}"

    def __call__(self, value):
        if isinstance(value, FiniteFieldElement):
            if value.field != self:
                raise ValueError(f"{value!r} is not in {self!r}")
            return value
        if isinstance(value, int):
            return FiniteFieldElement(self, (value % self.p,) + (0,) * (self.r - 1))
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.r:
            return self.from_poly(list(reversed(coeffs)))
        return FiniteFieldElement(self, tuple(coeffs + [0] * (self.r - len(coeffs))))

    def from_poly(self, high_first):
        """Reduce a polynomial (highest degree first) modulo the defining polynomial."""
        rem = gf_rem(gf_from_int_poly(high_first, self.p), list(self.modulus), self.p, ZZ)
        return self._from_gf(rem)

    def _from_gf(self, poly):
        low = [int(c) for c in reversed(poly)]
        return FiniteFieldElement(self, tuple(low + [0] * (self.r - len(low))))

    def gen(self):
        """The class of the variable, a root of the defining polynomial."""
        if self.r == 1:
            return self(-self.modulus[1])
        return self((0, 1))

    def elements(self):
        for coeffs in product(range(self.p), repeat=self.r):
            yield FiniteFieldElement(self, tuple(reversed(coeffs)))

    def nonzero_elements(self):
        return (x for x in self.elements() if x)

    def root_of_unity(self, n):
        """A fixed primitive n-th root of unity (n must divide the group order)."""
        if (self.order - 1) % n:
            raise ValueError(f"{self!r} has no primitive {n}-th root of unity")
        g = ff_primitive_element(self)
        return g ** ((self.order - 1) // n)

    def subfield_contains(self, x, k):
        """True if x lies in the subfield F_{p^k}."""
        return x ** (self.p ** k) == x


class FiniteFieldElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other):
        if isinstance(other, FiniteFieldElement):
            if other.field is not self.field and other.field != self.field:
                raise ValueError(f"Mixed fields {self.field!r} and {other.field!r}")
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self):
        return not any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field(other)
        if not isinstance(other, FiniteFieldElement):
            return NotImplemented
        return self.coeffs == other.coeffs and self.field == other.field

    def __hash__(self):
        return hash((self.field._hash, self.coeffs))

    def __lt__(self, other):
        return self.coeffs[::-1] < other.coeffs[::-1]

    def __repr__(self):
        if self.field.r == 1:
            return str(self.coeffs[0])
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(str(c) if i == 0 else (f"{c}*a" if i == 1 else f"{c}*a^{i}"))
        return " + ".join(reversed(terms)) or "0"

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return FiniteFieldElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FiniteFieldElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _gf(self):
        poly = list(reversed(self.coeffs))
        while poly and poly[0] == 0:
            poly.pop(0)
        return poly

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        field = self.field
        if field.r == 1:
            return FiniteFieldElement(field, ((self.coeffs[0] * other.coeffs[0]) % field.p,))
        prod = gf_mul(self._gf(), other._gf(), field.p, ZZ)
        return field._from_gf(gf_rem(prod, list(field.modulus), field.p, ZZ))

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroElement("inverse of zero")
        field = self.field
        if field.r == 1:
            return FiniteFieldElement(field, (pow(self.coeffs[0], -1, field.p),))
        s, _, h = gf_gcdex(self._gf(), list(field.modulus), field.p, ZZ)
        # h is the monic gcd, which is 1 for a nonzero element
        return field._from_gf(s)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.field(other) * self.inverse()

    def __pow__(self, n):
        field = self.field
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return field.one
        if not self:
            return field.zero
        if field.r == 1:
            return FiniteFieldElement(field, (pow(self.coeffs[0], n, field.p),))
        return field._from_gf(gf_pow_mod(self._gf(), n, list(field.modulus), field.p, ZZ))

    def frobenius(self, k=1):
        return self ** (self.field.p ** k)

    def to_int(self):
        if any(self.coeffs[1:]):
            raise ValueError(f"{self!r} is not in the prime field")
        return self.coeffs[0]


def ff_mult_order(x):
    """Multiplicative order of a nonzero finite field element."""
    if not x:
        raise ZeroElement("order of zero")
    n = x.field.order - 1
    for ell, e in factorint(n).items():
        for _ in range(e):
            if x ** (n // ell) == x.field.one:
                n //= ell
            else:
                break
    return n


def ff_primitive_element(field, rng=None):
    """
    A generator of the multiplicative group. Scans elements in order, or draws
    them from rng when one is given.
    """
    n = field.order - 1
    primes = list(factorint(n).keys())

    def is_generator(x):
        return all(x ** (n // ell) != field.one for ell in primes)

    if rng is None:
        for x in field.nonzero_elements():
            if is_generator(x):
                return x
    else:
        while True:
            x = field(tuple(rng.randrange(field.p) for _ in range(field.r)))
            if x and is_generator(x):
                return x
    raise ArithmeticError(f"{field!r} has no primitive element")


def ff_discrete_log(x, g, order=None):
    """Least k >= 0 with g^k = x, by baby-step giant-step."""
    if not x:
        raise ZeroElement("discrete log of zero")
    if order is None:
        order = ff_mult_order(g)
    m = isqrt(order) + 1
    table = {}
    e = x.field.one
    for j in range(m):
        table.setdefault(e, j)
        e = e * g
    giant = g ** (-m)
    y = x
    for i in range(m + 1):
        j = table.get(y)
        if j is not None:
            return (i * m + j) % order
        y = y * giant
    raise ValueError(f"{x!r} is not a power of {g!r}")


def poly_factor_mod_p(f, p, seed=0):
    """
    Factor an integer polynomial modulo p.

    f is a coefficient list (highest degree first) or anything with all_coeffs().
    Returns sorted (monic factor, multiplicity) pairs, factors as tuples of ints
    highest degree first. The equal-degree splitting is randomized; seed fixes it.
    """
    coeffs = _ints(f.all_coeffs()) if hasattr(f, "all_coeffs") else _ints(f)
    g = gf_from_int_poly(coeffs, p)
    if not g:
        raise ZeroPolynomial(f"polynomial vanishes mod {p}")
    _, g = gf_monic(g, p, ZZ)
    if len(g) == 1:
        return []
    seed_sympy_random(seed)
    _, sqf = gf_sqf_list(g, p, ZZ)
    factors = []
    for part, mult in sqf:
        part = _ints(part)
        if len(part) == 2:
            pieces = [part]
        else:
            pieces = [_ints(h) for h in gf_zassenhaus(part, p, ZZ)]
        for h in pieces:
            if not gf_irreducible_p(h, p, ZZ):
                raise ArithmeticError(f"factor {h} mod {p} is reducible")
            factors.append((tuple(h), mult))
    factors.sort(key=lambda item: (len(item[0]), item[0], item[1]))
    return factors


def roots_mod_p(f, p, seed=0):
    """Sorted roots in F_p of an integer polynomial."""
    roots = []
    for h, _ in poly_factor_mod_p(f, p, seed):
        if len(h) == 2:
            roots.append((-h[1]) % p)
    return sorted(roots)


def expand_factors(factors, p):
    """Product of (factor, multiplicity) pairs mod p, highest degree first."""
    out = [1]
    for h, mult in factors:
        for _ in range(mult):
            out = _ints(gf_mul(out, list(h), p, ZZ))
    return tuple(out)
