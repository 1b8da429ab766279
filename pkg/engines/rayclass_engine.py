"""
Ray class groups of imaginary quadratic fields for squarefree moduli supported
above a set of rational primes, their p-parts with the action of complex
conjugation, and presentations of the universal deformation rings built from
them.
"""

import re
from dataclasses import dataclass, field
from functools import reduce

from engines.errors import EvenPrime, PContainedInS
from engines.exact_algebra import abelian_group_structure, kronecker_symbol, subgroup_structure
from engines.finite_fields import FiniteField, ff_discrete_log, ff_primitive_element, roots_mod_p
from engines.logging_config import get_logger
from engines.numfield_engine import IdealHNF, NumberFieldOrder
from engines.quadform_engine import class_group, transform_to_coprime
from engines.settings import DEFAULT_CONFIG

logger = get_logger(__name__)


def omega_polynomial(d):
    """Minimal polynomial (1, -t, n) of omega, O_L = Z[omega]."""
    if d % 4 == 0:
        return (1, 0, -d // 4)
    return (1, -1, (1 - d) // 4)


@dataclass
class ResiduePrime:
    """A prime q of L above ell with its residue field and a fixed generator of (O/q)^x."""
    ell: int
    kind: str
    field: FiniteField
    omega_image: object
    generator: object = None

    @property
    def norm(self):
        return self.field.order

    @property
    def unit_order(self):
        return self.field.order - 1

    def residue(self, elt):
        a, b = elt
        return self.field(a) + self.field(b) * self.omega_image

    def dlog(self, elt):
        return ff_discrete_log(self.residue(elt), self.generator, self.unit_order)

    def to_dict(self):
        return {"ell": str(self.ell), "kind": self.kind, "norm": str(self.norm)}


def primes_above(d, ell):
    """Residue data of the primes of L above ell, the split pair ordered by root."""
    _, t_neg, n = omega_polynomial(d)
    symbol = kronecker_symbol(d, ell)
    if symbol == -1:
        F = FiniteField(ell, 2, (1, t_neg % ell, n % ell))
        return [ResiduePrime(ell, "inert", F, F.gen())]
    F = FiniteField(ell)
    roots = roots_mod_p([1, t_neg, n], ell)
    if symbol == 0:
        return [ResiduePrime(ell, "ramified", F, F(roots[0]))]
    return [ResiduePrime(ell, "split", F, F(r)) for r in roots]


def _crt_pair(residues):
    """Integer pair (a, b) matching each (a_l, b_l) modulo its prime l."""
    a, b, m = 0, 0, 1
    for ell, (al, bl) in residues:
        inv = pow(m, -1, ell)
        a += m * (((al - a) * inv) % ell)
        b += m * (((bl - b) * inv) % ell)
        m *= ell
    return a, b


def _local_lift(prime, siblings, value):
    """(a, b) mod ell with residue value at prime and 1 at its siblings above ell."""
    ell = prime.ell
    if prime.kind == "inert":
        c0, c1 = value.coeffs
        return c0 % ell, c1 % ell
    if prime.kind == "ramified":
        return value.to_int(), 0
    other = next(s for s in siblings if s is not prime)
    r, r2 = prime.omega_image.to_int(), other.omega_image.to_int()
    b = ((value.to_int() - 1) * pow(r - r2, -1, ell)) % ell
    return (1 - b * r2) % ell, b


def shortest_generator(order, ideal):
    """A generator of a principal ideal of an imaginary quadratic order, or None."""
    u, v = ideal.rows

    def norm(x):
        return order.norm(x)

    def pair(x, y):
        return norm(order.add(x, y)) - norm(x) - norm(y)

    while True:
        if norm(v) < norm(u):
            u, v = v, u
        nu = norm(u)
        mu = (2 * pair(u, v) + 2 * nu) // (4 * nu)
        if mu == 0:
            break
        v = tuple(a - mu * b for a, b in zip(v, u))
        if norm(v) >= nu:
            break
    if norm(v) < norm(u):
        u = v
    return u if norm(u) == ideal.norm else None


@dataclass
class RayClassData:
    d: int
    S: tuple
    p: int
    primes: list
    structure: object
    h_L: int
    unit_image_order: int
    sigma: list = field(repr=False)
    class_exponents: tuple = ()

    @property
    def order(self):
        return self.structure.order

    @property
    def ngens(self):
        return len(self.sigma)

    def p_part(self):
        return self.structure.p_part(self.p)

    def p_exponents(self):
        return [e for _, e in self.p_part()]

    def apply_sigma(self, vector):
        out = [0] * self.ngens
        for v, image in zip(vector, self.sigma):
            if v:
                for j, x in enumerate(image):
                    out[j] += v * x
        return tuple(out)

    def unit_group_order(self):
        return reduce(lambda x, y: x * y, (P.unit_order for P in self.primes), 1)

    def to_dict(self):
        return {
            "d": str(self.d),
            "S": [str(ell) for ell in self.S],
            "p": str(self.p),
            "modulus": [P.to_dict() for P in self.primes],
            "invariant_factors": [str(m) for m in self.structure.invariant_factors],
            "order": str(self.order),
            "p_exponents": self.p_exponents(),
            "h_L": str(self.h_L),
            "unit_image_order": str(self.unit_image_order),
        }


def _roots_of_unity(d):
    # omega is i for d = -4 and a primitive sixth root of unity for d = -3
    if d in (-3, -4):
        return (0, 1)
    return (-1, 0)


def ray_class_group_quadratic(d, S, p, config=DEFAULT_CONFIG):
    """Ray class group of Q(sqrt d) modulo the product of the primes above S."""
    S = tuple(sorted(set(S)))
    if p in S:
        raise PContainedInS(f"{p} is in the ramification set {list(S)}")
    group = class_group(d)
    order = NumberFieldOrder(omega_polynomial(d))
    rng = config.rng(f"rayclass:{d}:{S}")

    primes = []
    for ell in S:
        local = primes_above(d, ell)
        for P in local:
            P.generator = ff_primitive_element(P.field, rng)
        primes.append(local)
    flat = [P for local in primes for P in local]
    nq = len(flat)
    modulus_int = reduce(lambda x, y: x * y, S, 1)

    def dlog_vector(elt):
        return tuple(P.dlog(elt) for P in flat)

    # class group generators as ideals coprime to the modulus
    class_ideals = []
    for form, n_i in zip(group.generators, group.invariant_factors):
        f = transform_to_coprime(form, modulus_int) if modulus_int > 1 else form
        beta = (-(f.b + 1) // 2, 1) if d % 4 == 1 else (-(f.b // 2), 1)
        ideal = IdealHNF.from_generators(order, [(f.a, 0), beta], f.a)
        class_ideals.append((ideal, n_i, f.a))

    k = nq + len(class_ideals)
    rows = []
    for i, P in enumerate(flat):
        rows.append(tuple(P.unit_order if j == i else 0 for j in range(k)))
    zeta = _roots_of_unity(d)
    unit_image = dlog_vector(zeta) if nq else ()
    if nq:
        rows.append(unit_image + (0,) * len(class_ideals))
    for idx, (ideal, n_i, _) in enumerate(class_ideals):
        alpha = shortest_generator(order, ideal.power(n_i))
        if alpha is None:
            raise ArithmeticError(f"power {n_i} of a class generator of {d} is not principal")
        dl = dlog_vector(alpha) if nq else ()
        rows.append(tuple(-x for x in dl) + tuple(n_i if j == idx else 0 for j in range(len(class_ideals))))
    structure = abelian_group_structure(rows, k)

    moduli = [P.unit_order for P in flat]
    unit_image_order = subgroup_structure([unit_image], moduli).order if nq else 1

    # complex conjugation on the ambient generators
    sigma = []
    for i, P in enumerate(flat):
        residues = []
        for local in primes:
            ell = local[0].ell
            if P in local:
                residues.append((ell, _local_lift(P, local, P.generator)))
            else:
                residues.append((ell, (1, 0)))
        a, b = _crt_pair(residues)
        lift = (a, b)
        conj = (a + b * (-omega_polynomial(d)[1]), -b)
        sigma.append(dlog_vector(conj) + (0,) * len(class_ideals))
        if dlog_vector(lift) != tuple(1 if j == i else 0 for j in range(nq)):
            raise ArithmeticError("unit generator lift does not match its residues")
    for idx, (_, _, norm) in enumerate(class_ideals):
        image = dlog_vector((norm, 0)) if nq else ()
        sigma.append(image + tuple(-1 if j == idx else 0 for j in range(len(class_ideals))))

    expected = group.order * reduce(lambda x, y: x * y, moduli, 1)
    if structure.order * unit_image_order != expected:
        raise ArithmeticError(f"ray class group order {structure.order} fails the exact sequence check")
    logger.info(f"Ray class group of {d} mod {list(S)}: {list(structure.invariant_factors)}")
    return RayClassData(d, S, p, flat, structure, group.order, unit_image_order, sigma,
                        tuple(group.invariant_factors))


def sigma_eigenspace_split(rcd):
    """
    Exponents of the minus and plus eigenspaces of complex conjugation on the
    p-part, with generators in SNF coordinates.
    """
    p = rcd.p
    if p == 2:
        raise EvenPrime("no eigenspace split for p = 2")
    structure = rcd.structure
    part = rcd.p_part()
    if not part:
        return EigenSplit((), (), (), ())
    exponent = max(p ** e for _, e in part)
    half = pow(2, -1, exponent)
    factors = list(structure.invariant_factors)
    minus_vecs, plus_vecs = [], []
    for gen, _ in part:
        image = rcd.apply_sigma(gen)
        plus_vecs.append(structure.coordinates(tuple(half * (a + b) for a, b in zip(gen, image))))
        minus_vecs.append(structure.coordinates(tuple(half * (a - b) for a, b in zip(gen, image))))
    minus = subgroup_structure(minus_vecs, factors)
    plus = subgroup_structure(plus_vecs, factors)
    if minus.order * plus.order != reduce(lambda x, y: x * y, (p ** e for _, e in part), 1):
        raise ArithmeticError("eigenspaces do not span the p-part")
    split = EigenSplit(
        tuple(_p_exponent(m, p) for m in minus.invariant_factors),
        tuple(_p_exponent(m, p) for m in plus.invariant_factors),
        minus.generators,
        plus.generators,
    )
    logger.debug(f"sigma split of the {p}-part: minus {split.minus}, plus {split.plus}")
    return split


def _p_exponent(m, p):
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    return e


@dataclass(frozen=True)
class EigenSplit:
    minus: tuple
    plus: tuple
    minus_generators: tuple
    plus_generators: tuple


def sigma_acts_by(rcd, snf_vector, sign):
    """True if sigma maps the element with SNF coordinates to sign times itself."""
    structure = rcd.structure
    ambient = structure.element(snf_vector)
    image = structure.coordinates(rcd.apply_sigma(ambient))
    target = structure.coordinates(tuple(sign * x for x in ambient))
    return image == target


@dataclass(frozen=True)
class RingPresentation:
    """W(F_{p^r})[X1..Xm]/((1+Xi)^(p^ei) - 1)."""
    p: int
    r: int
    exponents: tuple
    r_free: int = 0

    @property
    def variable_count(self):
        return len(self.exponents) + self.r_free

    @property
    def coefficient_ring(self):
        return f"W(F_{self.p ** self.r})"

    @property
    def text(self):
        m = self.variable_count
        if m == 0:
            return self.coefficient_ring
        variables = ",".join(f"X{i}" for i in range(1, m + 1))
        out = f"{self.coefficient_ring}[{variables}]"
        if self.exponents:
            relations = ",".join(f"(1+X{i})^{self.p ** e}-1" for i, e in enumerate(self.exponents, 1))
            out += f"/({relations})"
        return out

    def __str__(self):
        return self.text

    def to_dict(self):
        return {
            "presentation": self.text,
            "p": str(self.p),
            "r": self.r,
            "exponents": list(self.exponents),
            "r_free": self.r_free,
        }


def universal_ring_presentation(exponents, p, r, r_free=0):
    if any(e < 1 for e in exponents):
        raise ValueError(f"Exponents must be positive: {exponents}")
    return RingPresentation(p, r, tuple(exponents), r_free)


def constant_det_presentation(minus_exponents, p, r):
    return universal_ring_presentation(minus_exponents, p, r)


_PRESENTATION = re.compile(r"^W\(F_(\d+)\)(?:\[([X\d,]+)\](?:/\((.*)\))?)?$")
_RELATION = re.compile(r"\(1\+X(\d+)\)\^(\d+)-1")


def parse_presentation(text):
    """Inverse of RingPresentation.text."""
    match = _PRESENTATION.match(text.replace(" ", "").replace("−", "-"))
    if not match:
        raise ValueError(f"Unknown presentation: {text}")
    q = int(match.group(1))
    p = _smallest_prime_factor(q)
    r = _p_exponent(q, p)
    variables = match.group(2).split(",") if match.group(2) else []
    exponents = []
    if match.group(3):
        for _, power in _RELATION.findall(match.group(3)):
            exponents.append(_p_exponent(int(power), p))
    return RingPresentation(p, r, tuple(exponents), len(variables) - len(exponents))


def _smallest_prime_factor(n):
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def p_rank_check(rcd):
    """p-rank of the ray class group against the class group for S = empty."""
    return len(rcd.p_exponents()), sum(1 for m in rcd.class_exponents if m % rcd.p == 0)

