"""
Orders, ideals and prime decomposition in number fields Q[x]/(f).

An order is stored by a Z-basis w_0..w_{n-1} in power-basis coordinates: the
rows of a lower triangular integer matrix over a common denominator, so
w_i = sum_j basis[i][j] * theta^j / denominator and w_0 = 1. Elements of an
order are integer coordinate tuples in that basis. Ideals are upper triangular
row HNF matrices in the same coordinates.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial, gcd

import mpmath
import numpy as np
from sympy import Poly, factorint, symbols
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_from_int_poly, gf_gcd, gf_quo

from engines.errors import (
    EnlargementDiverged,
    NotIrreducible,
    NotMaximalAt,
    ZeroElement,
)
from engines.exact_algebra import bareiss_det, hnf, hnf_lower, kernel_mod_p, valuation
from engines.finite_fields import poly_factor_mod_p
from engines.logging_config import get_logger

logger = get_logger(__name__)

X = symbols("x")

ROOT_DPS = 60


def _reduce_low(coeffs, f_low):
    """Reduce a lowest-first coefficient list modulo the monic f (lowest first)."""
    n = len(f_low) - 1
    c = list(coeffs)
    for k in range(len(c) - 1, n - 1, -1):
        t = c[k]
        if t:
            for j in range(n + 1):
                c[k - n + j] -= t * f_low[j]
    c = c[:n]
    return c + [0] * (n - len(c))


def _mul_low(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _solve_upper(rows, v):
    """Integer a with a * rows = v for an upper triangular basis, or None."""
    n = len(rows)
    a = []
    for j in range(n):
        s = v[j] - sum(a[i] * rows[i][j] for i in range(j))
        if s % rows[j][j]:
            return None
        a.append(s // rows[j][j])
    return tuple(a)


class NumberFieldOrder:
    """An order of Q[x]/(f), f monic integral."""

    def __init__(self, poly, basis=None, denominator=1, maximal_at=frozenset(), is_maximal=False):
        self.poly = tuple(int(c) for c in poly)
        if self.poly[0] != 1:
            raise ValueError(f"Defining polynomial must be monic: {self.poly}")
        self.n = n = len(self.poly) - 1
        self._f_low = list(reversed(self.poly))
        if basis is None:
            basis = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        self.basis = tuple(tuple(int(v) for v in row) for row in basis)
        self.denominator = int(denominator)
        if self.basis[0][0] != self.denominator:
            raise ValueError("first basis element must be 1")

        det = 1
        for i in range(n):
            det *= self.basis[i][i]
        index, rem = divmod(self.denominator ** n, abs(det))
        if rem:
            raise ArithmeticError(f"basis does not contain the equation order: {self.basis}")
        self.index = index
        self.poly_discriminant = 1 if n == 1 else int(Poly(self.poly, X).discriminant())
        self.discriminant = self.poly_discriminant // index ** 2
        self.maximal_at = frozenset(maximal_at)
        self.is_maximal = is_maximal
        self._table = self._multiplication_table()
        self._primes = {}

    def __repr__(self):
        return f"NumberFieldOrder(poly={list(self.poly)}, index={self.index})"

    def is_equation_order(self):
        return self.index == 1

    def marked(self, primes, is_maximal=False):
        """Same order with extra primes recorded as certified maximal."""
        return NumberFieldOrder(self.poly, self.basis, self.denominator,
                                self.maximal_at | set(primes), is_maximal or self.is_maximal)

    # coordinates

    def from_power(self, coeffs_low, denom=1):
        """Order coordinates of sum coeffs_low[j] theta^j / denom, or None if not in the order."""
        n = self.n
        target = [Fraction(c * self.denominator, denom) for c in coeffs_low] + [Fraction(0)] * (n - len(coeffs_low))
        a = [Fraction(0)] * n
        for j in range(n - 1, -1, -1):
            s = target[j] - sum(a[i] * self.basis[i][j] for i in range(j + 1, n))
            a[j] = s / self.basis[j][j]
        if any(v.denominator != 1 for v in a):
            return None
        return tuple(int(v) for v in a)

    def to_power(self, a):
        """(numerator coefficients lowest first, denominator) of an element."""
        num = [0] * self.n
        for ai, row in zip(a, self.basis):
            if ai:
                for j, b in enumerate(row):
                    num[j] += ai * b
        return num, self.denominator

    def _multiplication_table(self):
        n = self.n
        den2 = self.denominator ** 2
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                prod = _reduce_low(_mul_low(self.basis[i], self.basis[j]), self._f_low)
                coords = self.from_power(prod, den2)
                if coords is None:
                    raise ArithmeticError("basis is not closed under multiplication")
                row.append(coords)
            table.append(row)
        return table

    # arithmetic

    @property
    def one(self):
        return (1,) + (0,) * (self.n - 1)

    def unit_vector(self, k):
        return tuple(1 if i == k else 0 for i in range(self.n))

    def theta(self):
        return self.from_power(_reduce_low([0, 1], self._f_low))

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def scale(self, a, k):
        return tuple(k * x for x in a)

    def mul(self, a, b):
        out = [0] * self.n
        for i, ai in enumerate(a):
            if not ai:
                continue
            ti = self._table[i]
            for j, bj in enumerate(b):
                if not bj:
                    continue
                for k, t in enumerate(ti[j]):
                    if t:
                        out[k] += ai * bj * t
        return tuple(out)

    def mul_mod(self, a, b, m):
        return tuple(x % m for x in self.mul(a, b))

    def pow_mod(self, a, e, m):
        result = self.one
        base = tuple(x % m for x in a)
        while e:
            if e & 1:
                result = self.mul_mod(result, base, m)
            base = self.mul_mod(base, base, m)
            e >>= 1
        return result

    def mult_matrix(self, a):
        """Rows are the coordinates of a * w_k."""
        return [self.mul(a, self.unit_vector(k)) for k in range(self.n)]

    def norm(self, a):
        return bareiss_det([list(r) for r in self.mult_matrix(a)])

    def eval_poly(self, coeffs_high, a):
        """coeffs_high(a) by Horner, integer coefficients highest degree first."""
        result = tuple(0 for _ in range(self.n))
        for c in coeffs_high:
            result = self.mul(result, a)
            result = (result[0] + c,) + result[1:]
        return result

    # embeddings

    @cached_property
    def roots(self):
        with mpmath.workdps(ROOT_DPS):
            if self.n == 1:
                return [mpmath.mpc(-self.poly[1])]
            return list(mpmath.polyroots(self.poly, maxsteps=500, extraprec=4 * ROOT_DPS))

    @cached_property
    def signature(self):
        with mpmath.workdps(ROOT_DPS):
            r1 = sum(1 for z in self.roots if abs(mpmath.im(z)) < mpmath.mpf(10) ** (-ROOT_DPS // 2))
        return r1, (self.n - r1) // 2

    @cached_property
    def embedding_matrix(self):
        """E[i, k] = w_i evaluated at the k-th complex root."""
        roots = [complex(z) for z in self.roots]
        E = np.zeros((self.n, self.n), dtype=complex)
        for i, row in enumerate(self.basis):
            for k, z in enumerate(roots):
                E[i, k] = sum(b * z ** j for j, b in enumerate(row)) / self.denominator
        return E

    @cached_property
    def t2_gram(self):
        E = self.embedding_matrix
        return np.real(E @ E.conj().T)

    def t2(self, a):
        v = np.array(a, dtype=float)
        return float(v @ self.t2_gram @ v)

    # primes

    def prime_ideals(self, ell, seed=0):
        if ell not in self._primes:
            self._primes[ell] = factor_rational_prime(self, ell, seed)
        return self._primes[ell]

    def to_dict(self):
        return {
            "polynomial": [str(c) for c in self.poly],
            "basis": [[str(v) for v in row] for row in self.basis],
            "denominator": str(self.denominator),
            "discriminant": str(self.discriminant),
            "index": str(self.index),
        }


class IdealHNF:
    """An ideal of an order as an upper triangular row HNF in order coordinates."""

    def __init__(self, order, rows):
        rows = [tuple(int(v) for v in r) for r in rows]
        if len(rows) != order.n:
            raise ArithmeticError(f"ideal lattice has rank {len(rows)} < {order.n}")
        self.order = order
        self.rows = tuple(rows)
        norm = 1
        for i, r in enumerate(rows):
            norm *= r[i]
        self.norm = norm

    @classmethod
    def unit(cls, order):
        return cls(order, [order.unit_vector(k) for k in range(order.n)])

    @classmethod
    def from_generators(cls, order, elements, modulus):
        """
        Ideal generated by elements; modulus is a nonzero integer known to lie
        in the ideal.
        """
        rows = []
        for a in elements:
            rows.extend(order.mult_matrix(a))
        return cls(order, hnf(rows, ncols=order.n, modulus=modulus))

    @classmethod
    def principal(cls, order, a):
        if not any(a):
            raise ZeroElement("principal ideal of zero")
        return cls.from_generators(order, [a], order.norm(a))

    def __eq__(self, other):
        return isinstance(other, IdealHNF) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"IdealHNF(norm={self.norm})"

    def contains(self, a):
        return _solve_upper(self.rows, a) is not None

    def coordinates(self, a):
        return _solve_upper(self.rows, a)

    def __add__(self, other):
        return IdealHNF(self.order, hnf(list(self.rows) + list(other.rows), ncols=self.order.n,
                                        modulus=gcd(self.norm, other.norm)))

    def __mul__(self, other):
        order = self.order
        gens = [order.mul(a, b) for a in self.rows for b in other.rows]
        return IdealHNF(order, hnf(gens, ncols=order.n, modulus=self.norm * other.norm))

    def power(self, k):
        result = IdealHNF.unit(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_closed(self):
        """Every product of a basis element with an order generator stays inside."""
        order = self.order
        return all(self.contains(order.mul(r, order.unit_vector(k)))
                   for r in self.rows for k in range(order.n))


@dataclass
class PrimeIdeal:
    ideal: IdealHNF
    ell: int
    residue_degree: int
    ramification: int = 0
    anti_uniformizer: tuple = field(default=(), repr=False)

    @property
    def norm(self):
        return self.ideal.norm

    @property
    def order(self):
        return self.ideal.order

    def contains(self, a):
        return self.ideal.contains(a)

    def valuation(self, a):
        """P-adic valuation of a nonzero order element."""
        if not any(a):
            raise ZeroElement("valuation of zero")
        order, ell, gamma = self.order, self.ell, self.anti_uniformizer
        v = 0
        while True:
            y = order.mul(a, gamma)
            if any(c % ell for c in y):
                return v
            a = tuple(c // ell for c in y)
            v += 1

    def to_dict(self):
        return {
            "ell": str(self.ell),
            "norm": str(self.norm),
            "residue_degree": self.residue_degree,
            "ramification": self.ramification,
        }


def order_from_polynomial(poly):
    """Equation order Z[x]/(f); f monic and irreducible over Q."""
    if hasattr(poly, "all_coeffs"):
        poly = poly.all_coeffs()
    coeffs = [int(c) for c in poly]
    if not coeffs or coeffs[0] != 1:
        raise ValueError(f"Defining polynomial must be monic: {coeffs}")
    if len(coeffs) > 2 and not Poly(coeffs, X).is_irreducible:
        raise NotIrreducible(f"{Poly(coeffs, X).as_expr()} is reducible over Q")
    return NumberFieldOrder(coeffs)


def dedekind_criterion(poly, ell, seed=0):
    """
    Dedekind's test at ell for the equation order of poly.

    Returns (maximal, u) where u is the lift of f/Z mod ell (highest degree
    first) describing the enlargement when the order is not ell-maximal.
    """
    f = [int(c) for c in poly]
    factors = poly_factor_mod_p(f, ell, seed)
    g = [1]
    h = [1]
    for fac, mult in factors:
        g = _mul_high(g, list(fac))
        for _ in range(mult - 1):
            h = _mul_high(h, list(fac))
    gh = _mul_high(g, h)
    diff = [a - b for a, b in zip(gh, f)]
    if any(c % ell for c in diff):
        raise ArithmeticError("radical factorization does not reproduce f mod ell")
    F = gf_from_int_poly([c // ell for c in diff], ell)
    Z = gf_gcd(gf_gcd(F, gf_from_int_poly(g, ell), ell, ZZ), gf_from_int_poly(h, ell), ell, ZZ)
    if len(Z) <= 1:
        return True, None
    U = gf_quo(gf_from_int_poly(f, ell), Z, ell, ZZ)
    return False, [int(c) for c in U]


def _mul_high(a, b):
    return list(reversed(_mul_low(list(reversed(a)), list(reversed(b)))))


def _normalized_order(order, rows, denom):
    """Order spanned by power-basis rows over denom, in lower HNF with reduced denominator."""
    n = order.n
    basis = hnf_lower(rows, ncols=n)
    if len(basis) != n:
        raise ArithmeticError("enlarged lattice lost rank")
    g = denom
    for row in basis:
        for v in row:
            g = gcd(g, v)
    basis = [[v // g for v in row] for row in basis]
    return NumberFieldOrder(order.poly, basis, denom // g, order.maximal_at)


def _dedekind_enlarge(order, ell, u):
    n = order.n
    rows = [[ell if i == j else 0 for j in range(n)] for i in range(n)]
    power = list(reversed(u))
    for _ in range(n):
        rows.append(_reduce_low(power, order._f_low))
        power = [0] + power
    return _normalized_order(order, rows, ell)


def radical(order, ell):
    """The ell-radical: elements some power of which lies in ell*O."""
    n = order.n
    e = ell
    while e < n:
        e *= ell
    images = [order.pow_mod(order.unit_vector(k), e, ell) for k in range(n)]
    gens = kernel_mod_p(images, ell)
    rows = [tuple(g) for g in gens] + [tuple(ell if i == j else 0 for j in range(n)) for i in range(n)]
    return IdealHNF(order, hnf(rows, ncols=n, modulus=ell))


def _enlarge(order, ell):
    """One round-2 step: the multiplier ring of the ell-radical, or None if ell-maximal."""
    n = order.n
    rad = radical(order, ell)
    mat = []
    for k in range(n):
        w = order.unit_vector(k)
        row = []
        for gamma in rad.rows:
            coords = rad.coordinates(order.mul(w, gamma))
            row.extend(c % ell for c in coords)
        mat.append(row)
    kernel = kernel_mod_p(mat, ell)
    if not kernel:
        return None
    u_rows = [tuple(v) for v in kernel] + [tuple(ell if i == j else 0 for j in range(n)) for i in range(n)]
    power_rows = []
    for u in u_rows:
        num, _ = order.to_power(u)
        power_rows.append(num)
    return _normalized_order(order, power_rows, order.denominator * ell)


def maximalize_at(order, primes, seed=0):
    """Enlarge the order until it is maximal at every listed prime."""
    for ell in primes:
        if ell in order.maximal_at:
            continue
        if order.discriminant % (ell * ell):
            order = order.marked([ell])
            continue
        limit = valuation(order.poly_discriminant, ell) // 2 + 1
        steps = 0
        if order.is_equation_order():
            maximal, u = dedekind_criterion(order.poly, ell, seed)
            if maximal:
                order = order.marked([ell])
                continue
            order = _dedekind_enlarge(order, ell, u)
            steps += 1
        while True:
            bigger = _enlarge(order, ell)
            if bigger is None:
                break
            steps += 1
            if steps > limit:
                raise EnlargementDiverged(f"more than {limit} enlargements at {ell}")
            order = bigger
        logger.debug(f"Order maximal at {ell} after {steps} enlargements, index {order.index}")
        order = order.marked([ell])
    return order


def maximal_order(poly, seed=0):
    """Ring of integers of Q[x]/(poly); factors the polynomial discriminant."""
    order = order_from_polynomial(poly)
    primes = sorted(ell for ell, e in factorint(abs(order.poly_discriminant)).items() if e >= 2)
    order = maximalize_at(order, primes, seed)
    order = order.marked(primes, is_maximal=True)
    logger.info(f"Maximal order of {list(order.poly)}: discriminant {order.discriminant}")
    return order


def _anti_uniformizer(order, prime_rows, ell):
    """gamma in ell*P^-1 outside ell*O, found as a kernel vector mod ell."""
    mats = [order.mult_matrix(pi) for pi in prime_rows]
    rows = []
    for k in range(order.n):
        row = []
        for m in mats:
            row.extend(m[k])
        rows.append(row)
    kernel = kernel_mod_p(rows, ell)
    if not kernel:
        raise ArithmeticError(f"no anti-uniformizer for a prime above {ell}")
    return tuple(kernel[0])


def _echelon_mod(rows, ell):
    basis = []
    for r in rows:
        v = _reduce_vector(list(r), basis, ell)
        piv = next((j for j, x in enumerate(v) if x), None)
        if piv is None:
            continue
        inv = pow(v[piv], -1, ell)
        v = [(x * inv) % ell for x in v]
        basis.append((piv, v))
    return basis


def _reduce_vector(v, basis, ell):
    v = [x % ell for x in v]
    for piv, row in basis:
        if v[piv]:
            f = v[piv]
            v = [(x - f * y) % ell for x, y in zip(v, row)]
    return v


def _minimal_polynomial_mod(order, alpha, ideal_basis, ell):
    """Monic minimal polynomial (highest first) of alpha in O/J over F_ell."""
    powers = []
    current = order.one
    for _ in range(order.n + 1):
        powers.append(_reduce_vector(list(current), ideal_basis, ell))
        kernel = kernel_mod_p(powers, ell)
        if kernel:
            c = kernel[0]
            k = max(i for i, x in enumerate(c) if x)
            inv = pow(c[k], -1, ell)
            return [(c[i] * inv) % ell for i in range(k, -1, -1)]
        current = order.mul_mod(current, alpha, ell)
    raise ArithmeticError("minimal polynomial search overflowed the degree")


def _split_radical(order, ell, seed):
    """Split O/rad into residue fields; returns (ideal, residue degree) pairs."""
    n = order.n
    rng = random.Random(f"split:{ell}:{seed}")
    pending = [radical(order, ell)]
    done = []
    ell_rows = [tuple(ell if i == j else 0 for j in range(n)) for i in range(n)]
    while pending:
        J = pending.pop()
        dim = valuation(J.norm, ell)
        if dim == 1:
            done.append((J, 1))
            continue
        ideal_basis = _echelon_mod(J.rows, ell)
        for _ in range(200):
            alpha = tuple(rng.randrange(ell) for _ in range(n))
            mu = _minimal_polynomial_mod(order, alpha, ideal_basis, ell)
            factors = poly_factor_mod_p(mu, ell, seed)
            if len(factors) > 1:
                for fac, _ in factors:
                    value = order.eval_poly(list(fac), alpha)
                    rows = list(J.rows) + order.mult_matrix(value) + ell_rows
                    pending.append(IdealHNF(order, hnf(rows, ncols=n, modulus=ell)))
                break
            if len(mu) - 1 == dim:
                done.append((J, dim))
                break
        else:
            raise ArithmeticError(f"could not split the residue algebra at {ell}")
    return done


def factor_rational_prime(order, ell, seed=0):
    """
    Prime ideals above ell as PrimeIdeal records, sorted by (f, e, basis).

    Uses Kummer-Dedekind when ell does not divide the index of the equation
    order, otherwise splits O/ell O into residue fields.
    """
    if ell not in order.maximal_at and order.discriminant % (ell * ell) == 0:
        raise NotMaximalAt(ell)
    n = order.n
    ell_rows = [tuple(ell if i == j else 0 for j in range(n)) for i in range(n)]
    found = []
    if order.index % ell:
        theta = order.theta()
        for fac, mult in poly_factor_mod_p(order.poly, ell, seed):
            value = order.eval_poly(list(fac), theta)
            rows = order.mult_matrix(value) + ell_rows
            ideal = IdealHNF(order, hnf(rows, ncols=n, modulus=ell))
            found.append(PrimeIdeal(ideal, ell, len(fac) - 1, mult))
    else:
        for ideal, f in _split_radical(order, ell, seed):
            found.append(PrimeIdeal(ideal, ell, f))

    ell_elt = order.scale(order.one, ell)
    for P in found:
        P.anti_uniformizer = _anti_uniformizer(order, P.ideal.rows, ell)
        e = P.valuation(ell_elt)
        if P.ramification and P.ramification != e:
            raise ArithmeticError(f"ramification mismatch above {ell}: {P.ramification} != {e}")
        P.ramification = e
        if P.norm != ell ** P.residue_degree:
            raise ArithmeticError(f"prime above {ell} has norm {P.norm}")
    total = sum(P.ramification * P.residue_degree for P in found)
    if total != n:
        raise ArithmeticError(f"sum of e*f above {ell} is {total}, expected {n}")
    found.sort(key=lambda P: (P.residue_degree, P.ramification, P.ideal.rows))
    return found


def minkowski_bound(order):
    """Largest integer not exceeding the Minkowski bound of the field."""
    n = order.n
    _, r2 = order.signature
    with mpmath.workdps(50):
        value = (4 / mpmath.pi) ** r2 * mpmath.mpf(factorial(n)) / mpmath.mpf(n) ** n \
            * mpmath.sqrt(abs(order.discriminant))
        # ideal norms are integers, so the floor loses no prime ideal; Q(i) gives 1
        bound = int(mpmath.floor(value))
    return max(bound, 1)


def bach_bound(order):
    with mpmath.workdps(30):
        return int(mpmath.floor(12 * mpmath.log(abs(order.discriminant)) ** 2)) if abs(order.discriminant) > 1 else 1
