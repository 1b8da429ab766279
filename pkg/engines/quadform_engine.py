"""
Binary quadratic forms of negative discriminant and their class groups.

Features:
- Reduction and Gauss composition of positive definite forms
- Class group structure from the reduced forms, with a discrete-log table
- Prime forms: splitting type of a rational prime and the class of a prime above it
- Analytic class number as an independent check
"""

from dataclasses import dataclass
from math import gcd, isqrt

from sympy import factorint
from sympy.core.intfunc import igcdex

from engines.errors import (
    DiscriminantMismatch,
    NonFundamental,
    NoSquareRoot,
    NotPositiveDefinite,
    SubgroupNotUnique,
)
from engines.exact_algebra import abelian_group_structure, kronecker_symbol
from engines.logging_config import get_logger

logger = get_logger(__name__)


def is_fundamental(d):
    """Fundamental discriminant test (any sign, d != 0, 1)."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return all(e == 1 for e in factorint(abs(d)).values())
    if d % 4 == 0:
        m = d // 4
        if m % 4 not in (2, 3):
            return False
        return all(e == 1 for e in factorint(abs(m)).values())
    return False


@dataclass(frozen=True)
class Discriminant:
    d: int

    def __post_init__(self):
        if self.d >= 0 or self.d % 4 not in (0, 1):
            raise ValueError(f"Not a negative discriminant: {self.d}")

    @property
    def fundamental(self):
        return is_fundamental(self.d)

    @property
    def roots_of_unity(self):
        return {-3: 6, -4: 4}.get(self.d, 2)


def fundamental_discriminants(bound, start=3):
    """Negative fundamental discriminants d with start <= |d| <= bound, by |d|."""
    for n in range(max(start, 3), bound + 1):
        if is_fundamental(-n):
            yield -n


@dataclass(frozen=True, order=True)
class QuadraticForm:
    a: int
    b: int
    c: int

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c

    @classmethod
    def principal(cls, d):
        b = d % 2
        return cls(1, b, (b * b - d) // 4)

    def is_positive_definite(self):
        return self.a > 0 and self.discriminant < 0

    def is_reduced(self):
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def conjugate(self):
        return QuadraticForm(self.a, -self.b, self.c)

    def evaluate(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def as_tuple(self):
        return (self.a, self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


def _normalize(a, b, c):
    # bring b into (-a, a] by x -> x + k y
    r = b % (2 * a)
    if r > a:
        r -= 2 * a
    k = (r - b) // (2 * a)
    return a, r, a * k * k + b * k + c


def reduce_form(f):
    """The reduced form properly equivalent to a positive definite form."""
    if not f.is_positive_definite():
        raise NotPositiveDefinite(f"{f} is not positive definite")
    a, b, c = f.a, f.b, f.c
    a, b, c = _normalize(a, b, c)
    while a > c:
        a, b, c = _normalize(c, -b, a)
    if a == c and b < 0:
        b = -b
    return QuadraticForm(a, b, c)


def compose_forms(f, g):
    """Reduced representative of the Gauss composition of f and g."""
    D = f.discriminant
    if g.discriminant != D:
        raise DiscriminantMismatch(f"{f} has discriminant {D}, {g} has {g.discriminant}")
    a1, b1, _ = f.a, f.b, f.c
    a2, b2, c2 = g.a, g.b, g.c
    if a1 > a2:
        a1, b1, a2, b2, c2 = a2, b2, a1, b1, f.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        u, _, d = igcdex(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        u, v, d1 = igcdex(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - D) // (4 * a3)
    return reduce_form(QuadraticForm(a3, b3, c3))


def reduced_forms(d):
    """All primitive reduced forms of discriminant d < 0, sorted."""
    forms = []
    for a in range(1, isqrt(-d // 3) + 1):
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            forms.append(QuadraticForm(a, b, c))
    return sorted(forms)


@dataclass(frozen=True)
class QuotientCharacter:
    """
    The surjection Cl(L) -> Z/q, unique up to automorphisms of Z/q when q || h.

    Read off the single invariant factor divisible by q.
    """
    q: int
    component: int

    def value(self, group, form):
        return group.dlog(form)[self.component] % self.q

    def kernel(self, group):
        return [f for f in group.forms if self.value(group, f) == 0]

    def cosets(self, group):
        """Forms grouped by character value 0, 1, ..., q-1."""
        out = [[] for _ in range(self.q)]
        for f in group.forms:
            out[self.value(group, f)].append(f)
        return out


class FormClassGroup:
    def __init__(self, d, forms, structure, dlog_table):
        self.d = d
        self.forms = forms
        self.structure = structure
        self._dlog = dlog_table
        self._form_of = {v: f for f, v in dlog_table.items()}
        self.identity = QuadraticForm.principal(d)
        self.generators = [self._form_of[self._unit_vector(i)] for i in range(len(structure.invariant_factors))]

    def _unit_vector(self, i):
        k = len(self.structure.invariant_factors)
        return tuple(1 if j == i else 0 for j in range(k))

    @property
    def order(self):
        return len(self.forms)

    @property
    def invariant_factors(self):
        return list(self.structure.invariant_factors)

    def dlog(self, form):
        form = reduce_form(form)
        try:
            return self._dlog[form]
        except KeyError:
            raise DiscriminantMismatch(f"{form} is not a form of discriminant {self.d}")

    def form_of(self, vector):
        factors = self.structure.invariant_factors
        return self._form_of[tuple(v % m for v, m in zip(vector, factors))]

    def compose(self, f, g):
        return compose_forms(f, g)

    def power(self, form, k):
        vec = self.dlog(form)
        return self.form_of(tuple(k * v for v in vec))

    def inverse(self, form):
        return reduce_form(form.conjugate())

    def order_of(self, form):
        vec = self.dlog(form)
        n = 1
        for v, m in zip(vec, self.structure.invariant_factors):
            n = n * (m // gcd(m, v)) // gcd(n, m // gcd(m, v))
        return n

    def p_rank(self, p):
        return len(self.structure.p_part(p))

    def p_part_exponents(self, p):
        return self.structure.p_exponents(p)

    def is_p_elementary(self, p):
        return all(e == 1 for e in self.structure.p_exponents(p))

    def quotient_character(self, q):
        if self.order % q:
            raise ValueError(f"{q} does not divide h({self.d}) = {self.order}")
        if self.order % (q * q) == 0:
            raise SubgroupNotUnique(f"{q}^2 divides h({self.d}) = {self.order}")
        component = next(i for i, m in enumerate(self.structure.invariant_factors) if m % q == 0)
        return QuotientCharacter(q, component)

    def to_dict(self):
        return {
            "discriminant": str(self.d),
            "h": str(self.order),
            "invariant_factors": [str(m) for m in self.structure.invariant_factors],
            "generators": [str(g) for g in self.generators],
        }


def class_group(d):
    """Class group of the imaginary quadratic order of fundamental discriminant d."""
    if d >= 0 or not is_fundamental(d):
        raise NonFundamental(f"{d} is not a negative fundamental discriminant")
    forms = reduced_forms(d)
    identity = QuadraticForm.principal(d)

    # grow the group one generator at a time; each step adds the relation n*e_t = (vector of f^n)
    chosen = []
    relations = []
    table = {identity: ()}
    for f in forms:
        if f in table:
            continue
        t = len(chosen)
        table = {g: v + (0,) for g, v in table.items()}
        power = f
        n = 1
        while power not in table:
            power = compose_forms(power, f)
            n += 1
        back = table[power]
        relations = [r + (0,) for r in relations]
        relations.append(tuple(-x for x in back[:t]) + (n,))
        coset = dict(table)
        step = f
        for i in range(1, n):
            for g, v in table.items():
                coset[compose_forms(g, step)] = v[:t] + (i,)
            step = compose_forms(step, f)
        table = coset
        chosen.append(f)
    if len(table) != len(forms):
        raise ArithmeticError(f"class group enumeration mismatch for {d}")

    k = len(chosen)
    structure = abelian_group_structure(relations, k)
    dlog_table = {g: structure.coordinates(v) for g, v in table.items()}
    logger.info(f"Class group of {d}: h = {len(forms)}, invariants {list(structure.invariant_factors)}")
    return FormClassGroup(d, forms, structure, dlog_table)


def nonresidue(p):
    """Smallest quadratic nonresidue mod an odd prime."""
    for z in range(2, p):
        if pow(z, (p - 1) // 2, p) == p - 1:
            return z
    raise NoSquareRoot(f"no nonresidue mod {p}")


def sqrt_mod_prime(a, p):
    """Smallest square root of a modulo a prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        raise NoSquareRoot(f"{a} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return min(r, p - r)


@dataclass(frozen=True)
class SplittingDatum:
    """
    Splitting of a rational prime in L. form is the reduced class of the prime
    above ell picked by the smallest square root (None when inert).
    """
    kind: str
    ell: int
    form: QuadraticForm = None

    @property
    def is_split(self):
        return self.kind == "split"

    @property
    def is_inert(self):
        return self.kind == "inert"

    @property
    def is_ramified(self):
        return self.kind == "ramified"


def prime_form(d, ell):
    """Prime form (ell, b, (b^2 - d)/(4 ell)) with b >= 0 minimal, not reduced."""
    if ell == 2:
        for b in range(0, 4):
            if (b * b - d) % 8 == 0 and (b - d) % 2 == 0:
                return QuadraticForm(2, b, (b * b - d) // 8)
        raise NoSquareRoot(f"{d} is not a square mod 8")
    s = sqrt_mod_prime(d, ell)
    b = s if (s - d) % 2 == 0 else s + ell
    if (b * b - d) % (4 * ell):
        raise NoSquareRoot(f"{b}^2 is not {d} mod {4 * ell}")
    return QuadraticForm(ell, b, (b * b - d) // (4 * ell))


def prime_frobenius_class(d, ell):
    symbol = kronecker_symbol(d, ell)
    if symbol == -1:
        return SplittingDatum("inert", ell)
    form = reduce_form(prime_form(d, ell))
    return SplittingDatum("split" if symbol == 1 else "ramified", ell, form)


def analytic_class_number(d):
    """h(d) from the finite character sum h = |sum_{k<|d|} k (d|k)| / |d| (d < -4)."""
    if d in (-3, -4):
        return 1
    if d >= 0 or not is_fundamental(d):
        raise NonFundamental(f"{d} is not a negative fundamental discriminant")
    n = -d
    total = sum(k * kronecker_symbol(d, k) for k in range(1, n))
    return abs(total) // n


def transform_to_coprime(form, modulus, search=50):
    """
    A properly equivalent form whose first coefficient is coprime to modulus.

    The result is not reduced; it represents the same class.
    """
    if gcd(form.a, modulus) == 1:
        return form
    for size in range(1, search + 1):
        for x in range(-size, size + 1):
            for y in (size - abs(x), abs(x) - size):
                if gcd(x, y) != 1:
                    continue
                n = form.evaluate(x, y)
                if gcd(n, modulus) != 1:
                    continue
                s, t, _ = igcdex(x, y)
                u, v = s, -t
                # x*u - v*y = 1
                b = 2 * form.a * x * v + form.b * (x * u + y * v) + 2 * form.c * y * u
                c = form.evaluate(v, u)
                return QuadraticForm(n, b, c)
    raise ArithmeticError(f"no representative of {form} coprime to {modulus}")
