"""
Dihedral representations over finite local algebras and their infinitesimal
deformations.

A residual representation is induced from a character of an index-2
subgroup H: h -> diag(chi(h), chi^sigma(h)) and sigma -> [[0, 1], [chi(sigma^2), 0]].
Lifts to F[eps]/(eps^k) are explicit finite matrix groups; Gamma is the kernel
of reduction and dihedrality is read off the conjugation action of H on the
Frattini quotient Gamma / Gamma^p [Gamma, Gamma].
"""

import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import gcd

from engines.errors import (
    CharacterNotLiftable,
    ImageEnumerationBudgetExceeded,
    NonsplitUnavailable,
    NoSeparatingElement,
    NotDiagonalBasis,
    NotPGroup,
    UnrealizableModule,
)
from engines.exact_algebra import kernel_mod_p
from engines.finite_fields import FiniteField, ff_mult_order
from engines.local_algebra import LocalAlgebra, Mat2Ring
from engines.logging_config import get_logger

logger = get_logger(__name__)

IMAGE_BUDGET = 10 ** 7

C_ONE = "C(1)"
C_EPS = "C(eps)"
I_MOD = "I(chi/chi^sigma)"
C_CHI1 = "C(chi1)"
C_CHI2 = "C(chi2)"
N_MOD = "N"
MODULE_TAGS = (C_ONE, C_EPS, I_MOD, C_CHI1, C_CHI2, N_MOD)

GENERATOR_KINDS = ("H", "sigma", "kernel")


@dataclass(frozen=True)
class DihedralGroupData:
    """
    Residual dihedral data: chi(h) = alpha, chi^sigma(h) = beta for a generator
    h of H, and c = chi(sigma^2).
    """

    field: FiniteField
    alpha: object
    beta: object
    c: object

    def __post_init__(self):
        for name in ("alpha", "beta", "c"):
            value = self.field(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must be a unit")
            object.__setattr__(self, name, value)
        if self.alpha == self.beta:
            raise NoSeparatingElement("chi and chi^sigma agree on H; the residual representation is reducible")
        if self.q_ad % self.p == 0:
            raise ValueError(f"|H^ad| = {self.q_ad} is divisible by p = {self.p}")

    @classmethod
    def standard(cls, p, q_ad, c_order=1):
        """The smallest field carrying chi with chi^sigma = chi^-1 and |H^ad| = q_ad."""
        if q_ad % p == 0 or q_ad < 2:
            raise ValueError(f"|H^ad| must be at least 2 and prime to p: {q_ad}")
        m = q_ad if q_ad % 2 else 2 * q_ad
        need = m * c_order // gcd(m, c_order)
        r = 1
        while (p ** r - 1) % need:
            r += 1
        F = FiniteField(p, r)
        if q_ad % 2:
            zeta = F.root_of_unity(q_ad)
            alpha, beta = zeta, zeta ** (q_ad - 1)
        else:
            alpha, beta = F.root_of_unity(q_ad), F.one
        c = F.root_of_unity(c_order) if c_order > 1 else F.one
        return cls(F, alpha, beta, c)

    @property
    def p(self):
        return self.field.p

    @property
    def ratio(self):
        return self.alpha / self.beta

    @property
    def q_ad(self):
        return ff_mult_order(self.alpha / self.beta)

    @property
    def c_order(self):
        return ff_mult_order(self.c)

    @property
    def i_dimension(self):
        """F_p-dimension of the simple module I(chi/chi^sigma)."""
        q, p = self.q_ad, self.p
        f, x = 1, p % q
        while x != 1 % q:
            x = (x * p) % q
            f += 1
        self_dual = any(pow(p, j, q) == q - 1 for j in range(f))
        return f if self_dual else 2 * f

    def to_dict(self):
        return {
            "field": repr(self.field),
            "alpha": repr(self.alpha),
            "beta": repr(self.beta),
            "chi_sigma2": repr(self.c),
            "q_ad": self.q_ad,
        }


@dataclass(frozen=True)
class ModuleLabel:
    tag: str
    multiplicity: int = 1

    def __post_init__(self):
        if self.tag not in MODULE_TAGS:
            raise ValueError(f"Unknown module tag {self.tag!r}; expected one of {MODULE_TAGS}")
        if self.multiplicity < 1:
            raise ValueError(f"Multiplicity must be positive: {self.multiplicity}")

    def __str__(self):
        return self.tag if self.multiplicity == 1 else f"{self.tag}^{self.multiplicity}"


def _closure(ring, generators, budget=IMAGE_BUDGET):
    """All products of the generators (a finite group), breadth first."""
    elements = {ring.identity}
    frontier = list(elements)
    while frontier:
        nxt = []
        for x in frontier:
            for g in generators:
                y = ring.mul(x, g)
                if y not in elements:
                    elements.add(y)
                    nxt.append(y)
                    if len(elements) > budget:
                        raise ImageEnumerationBudgetExceeded(f"group exceeds {budget} elements")
        frontier = nxt
    return elements


class MatrixGroup:
    """Finite subgroup of GL2 over a local algebra, enumerated lazily."""

    def __init__(self, ring, generators, budget=IMAGE_BUDGET):
        self.ring = ring
        self.generators = tuple(generators)
        self.budget = budget

    @cached_property
    def elements(self):
        elements = frozenset(_closure(self.ring, self.generators, self.budget))
        logger.debug(f"Enumerated matrix group of order {len(elements)} over {self.ring.algebra!r}")
        return elements

    @property
    def order(self):
        return len(self.elements)

    def __contains__(self, m):
        return m in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def element_order(self, m):
        return self.ring.element_order(m, limit=self.order)

    def kernel_of_reduction(self):
        return [g for g in sorted(self.elements) if self.ring.is_residually_identity(g)]

    def subgroup(self, generators):
        return MatrixGroup(self.ring, generators, self.budget)


@dataclass(frozen=True)
class RepGenerator:
    label: str
    kind: str
    matrix: tuple

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"Generator kind must be one of {GENERATOR_KINDS}: {self.kind!r}")


class LocalRingRep:
    """A representation given by generator images in GL2(F[eps]/(eps^k))."""

    def __init__(self, algebra, generators, residual, budget=IMAGE_BUDGET):
        self.algebra = algebra
        self.ring = Mat2Ring(algebra)
        self.generators = tuple(generators)
        self.residual = residual
        self.budget = budget
        for g in self.generators:
            if not self.ring.is_invertible(g.matrix):
                raise ValueError(f"Generator {g.label} is not invertible")
        if not any(g.kind == "sigma" for g in self.generators):
            raise ValueError("A dihedral representation needs a generator outside H")

    def __repr__(self):
        return f"LocalRingRep({self.algebra!r}, {[g.label for g in self.generators]})"

    @cached_property
    def image(self):
        return MatrixGroup(self.ring, [g.matrix for g in self.generators], self.budget)

    @cached_property
    def gamma(self):
        """Kernel of reduction restricted to the image."""
        return self.image.kernel_of_reduction()

    def matrix(self, label):
        return next(g.matrix for g in self.generators if g.label == label)

    def of_kind(self, kind):
        return [g for g in self.generators if g.kind == kind]

    def residual_image_order(self):
        return self.image.order // len(self.gamma)

    def conjugate(self, basis):
        """The representation in the basis given by the columns of basis: B^-1 rho B."""
        R = self.ring
        inv = R.inverse(basis)
        gens = [RepGenerator(g.label, g.kind, R.mul(R.mul(inv, g.matrix), basis)) for g in self.generators]
        return LocalRingRep(self.algebra, gens, self.residual, self.budget)

    def with_generators(self, generators):
        return LocalRingRep(self.algebra, generators, self.residual, self.budget)

    def to_dict(self):
        return {
            "ring": repr(self.algebra),
            "generators": {g.label: self.ring.format(g.matrix) for g in self.generators},
            "residual": self.residual.to_dict(),
        }


def induce_character(data, algebra=None, chi=None):
    """
    Ind_H^G(chi) over algebra. chi maps the labels "h", "h_sigma" and "sigma2"
    to algebra elements reducing to alpha, beta and c; omitted values take the
    Teichmueller lift of the residual value.
    """
    A = algebra or LocalAlgebra(data.field, 1)
    if A.field != data.field:
        raise CharacterNotLiftable(f"{A!r} does not have residue field {data.field!r}")
    R = Mat2Ring(A)
    chi = dict(chi or {})
    values = {}
    for label, residual in (("h", data.alpha), ("h_sigma", data.beta), ("sigma2", data.c)):
        value = chi.get(label)
        value = A.scalar(residual) if value is None else tuple(value)
        if len(value) != A.k or A.field_value(value[0]) != residual:
            raise CharacterNotLiftable(f"chi({label}) does not reduce to {residual!r}")
        values[label] = value
    gens = [
        RepGenerator("h", "H", R.diag(values["h"], values["h_sigma"])),
        RepGenerator("s", "sigma", R.antidiag(A.one, values["sigma2"])),
    ]
    return LocalRingRep(A, gens, data)


@dataclass
class AdjointDecomposition:
    """
    ad(rho) = N_R + I(chi/chi^sigma)_R via [[a, b], [c, d]] -> (a, d) + (b, c*t),
    where t = x/y for rho(sigma) = [[0, x], [y, 0]] (so t = 1/chi(sigma^2) when x = 1).
    """

    rep: LocalRingRep
    t: tuple

    dims = {"ad": (2, 2), "ad0": (1, 2)}

    def to_components(self, m):
        A = self.rep.algebra
        a, b, c, d = m
        return (a, d), (b, A.mul(c, self.t))

    def from_components(self, comps):
        A = self.rep.algebra
        (a, d), (u, v) = comps
        return (a, u, A.mul(v, A.inv(self.t)), d)

    def traceless_components(self, m):
        """ad0 = C(eps)_R + I_R: [[a, b], [c, -a]] -> a + (b, c*t)."""
        A = self.rep.algebra
        if A.add(m[0], m[3]) != A.zero:
            raise ValueError("matrix is not trace zero")
        return m[0], self.to_components(m)[1]

    def trace_split(self, m):
        """ad = R + ad0 when 2 is invertible: m -> (tr m, m - tr(m)/2)."""
        A, R = self.rep.algebra, self.rep.ring
        if A.p == 2:
            raise ValueError("the trace split needs 2 invertible")
        half = A.mul(R.trace(m), A.inv(A.scalar(2)))
        return R.trace(m), R.sub(m, R.scalar(half))

    def section(self, r):
        A = self.rep.algebra
        half = A.mul(r, A.inv(A.scalar(2)))
        return self.rep.ring.scalar(half)

    def act(self, g, comps):
        """Conjugation by g on the component side."""
        A, R = self.rep.algebra, self.rep.ring
        (a, d), (u, v) = comps
        if R.is_diagonal(g):
            lam = A.mul(g[0], A.inv(g[3]))
            return (a, d), (A.mul(lam, u), A.mul(A.inv(lam), v))
        x, y = g[1], g[2]
        ratio = A.mul(x, A.inv(y))
        tinv = A.inv(self.t)
        return (d, a), (A.mul(A.mul(ratio, v), tinv), A.mul(A.mul(A.inv(ratio), u), self.t))

    def verify(self):
        A, R = self.rep.algebra, self.rep.ring
        basis = [R.matrix(*(1 if i == j else 0 for j in range(4))) for i in range(4)]
        for E in basis:
            if self.from_components(self.to_components(E)) != E:
                raise ArithmeticError("adjoint decomposition is not bijective")
        for g in self.rep.generators:
            for E in basis:
                lhs = self.to_components(R.conj(g.matrix, E))
                rhs = self.act(g.matrix, self.to_components(E))
                if lhs != rhs:
                    raise ArithmeticError(f"adjoint decomposition not equivariant for {g.label}")
        if A.p != 2:
            for g in self.rep.generators:
                for r in (A.one, A.eps() if A.k > 1 else A.one):
                    if R.conj(g.matrix, self.section(r)) != self.section(r):
                        raise ArithmeticError("trace section is not a G-map")
        return True


def adjoint_decompose(rep):
    """Adjoint decomposition of a representation in its diagonal basis."""
    R = rep.ring
    for g in rep.generators:
        ok = R.is_antidiagonal(g.matrix) if g.kind == "sigma" else R.is_diagonal(g.matrix)
        if not ok:
            raise NotDiagonalBasis(f"generator {g.label} is not in diagonal form")
    s = rep.of_kind("sigma")[0].matrix
    A = rep.algebra
    decomposition = AdjointDecomposition(rep, A.mul(s[1], A.inv(s[2])))
    decomposition.verify()
    return decomposition


@dataclass
class FrattiniQuotient:
    """
    Gamma / Phi(Gamma) as F_p^dimension. Vectors are rows; an automorphism acts
    by the matrix whose j-th row is the image of the j-th basis element.
    """

    p: int
    order: int
    phi_order: int
    basis: list
    vectors: dict = field(repr=False)
    actions: list = field(default_factory=list)

    @property
    def dimension(self):
        return len(self.basis)

    def vector(self, g):
        return self.vectors[g]

    def action_matrix(self, automorphism):
        return [list(self.vectors[automorphism(b)]) for b in self.basis]

    def is_trivial_action(self, matrix):
        n = self.dimension
        return all(matrix[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))


def _p_power_exponent(n, p):
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e if n == 1 else None


def frattini_quotient(ring, generators, automorphisms=(), budget=IMAGE_BUDGET, elements=None):
    """
    Frattini quotient of the p-group generated by the given matrices (or of
    the already enumerated group elements).
    """
    p = ring.algebra.p
    if elements is None:
        elements = _closure(ring, list(generators), budget)
    exponent = _p_power_exponent(len(elements), p)
    if exponent is None:
        raise NotPGroup(f"group of order {len(elements)} is not a {p}-group")

    gens, span = [], {ring.identity}
    for g in sorted(elements):
        if g not in span:
            gens.append(g)
            span = _closure(ring, gens, budget)

    seeds = [ring.power(g, p) for g in gens]
    seeds += [ring.commutator(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]]
    seeds = [s for s in seeds if s != ring.identity]
    while True:
        phi = _closure(ring, seeds, budget)
        extra = [ring.conj(g, s) for g in gens for s in seeds]
        extra = [s for s in extra if s not in phi]
        if not extra:
            break
        seeds += extra

    basis, span = [], phi
    for g in gens:
        if g not in span:
            basis.append(g)
            span = _closure(ring, seeds + basis, budget)
    if p ** len(basis) * len(phi) != len(elements):
        raise ArithmeticError("Frattini quotient is not elementary abelian")

    vectors = {}
    for coords in product(range(p), repeat=len(basis)):
        rep = ring.identity
        for b, a in zip(basis, coords):
            if a:
                rep = ring.mul(rep, ring.power(b, a))
        for f in phi:
            vectors[ring.mul(rep, f)] = coords

    fq = FrattiniQuotient(p, len(elements), len(phi), basis, vectors)
    fq.actions = [fq.action_matrix(a) for a in automorphisms]
    logger.debug(f"Frattini quotient: |Gamma| = {len(elements)}, |Phi| = {len(phi)}, dimension {len(basis)}")
    return fq


def _minus_identity(matrix, p, scalar=1):
    return [[(x - (scalar if i == j else 0)) % p for j, x in enumerate(row)] for i, row in enumerate(matrix)]


def _fixed_dimension(blocks, p, n):
    """Dimension of {v : v * B = 0 for every block B}."""
    if not blocks:
        return n
    rows = [sum((b[i] for b in blocks), []) for i in range(n)]
    return len(kernel_mod_p(rows, p))


@dataclass
class FrattiniClassification:
    labels: list
    dimension: int
    gamma_order: int
    trivial: bool
    witness: object = None

    @property
    def s(self):
        return sum(lab.multiplicity for lab in self.labels if lab.tag in (I_MOD, C_CHI1, C_CHI2))

    def to_dict(self):
        return {
            "labels": [str(lab) for lab in self.labels],
            "dimension": self.dimension,
            "gamma_order": str(self.gamma_order),
            "h_action_trivial": self.trivial,
        }


def classify_frattini_module(rep):
    """Decompose Gamma/Phi(Gamma) under the conjugation action of H^ad and sigma."""
    R = rep.ring
    p = rep.algebra.p
    gamma = rep.gamma
    if _p_power_exponent(len(gamma), p) is None:
        raise NotPGroup(f"kernel of reduction has order {len(gamma)}")
    if len(gamma) == 1:
        return FrattiniClassification([], 0, 1, True)

    h_mats = [g.matrix for g in rep.of_kind("H")]
    s_mat = rep.of_kind("sigma")[0].matrix
    autos = [(lambda x, g=g: R.conj(g, x)) for g in h_mats + [s_mat]]
    fq = frattini_quotient(R, (), autos, rep.budget, elements=set(gamma))
    n = fq.dimension
    h_actions, s_action = fq.actions[:-1], fq.actions[-1]

    h_blocks = [_minus_identity(a, p) for a in h_actions]
    fixed = _fixed_dimension(h_blocks, p, n)
    nonfixed = n - fixed

    witness = None
    for a in h_actions:
        for j, row in enumerate(a):
            if any((x - (1 if i == j else 0)) % p for i, x in enumerate(row)):
                witness = fq.basis[j]
                break
        if witness is not None:
            break

    labels = []
    plus_fixed = _fixed_dimension(h_blocks + [_minus_identity(s_action, p)], p, n)
    if p == 2:
        n_count = fixed - plus_fixed
        c_one = plus_fixed - n_count
        if c_one:
            labels.append(ModuleLabel(C_ONE, c_one))
        if n_count:
            labels.append(ModuleLabel(N_MOD, n_count))
    else:
        minus_fixed = _fixed_dimension(h_blocks + [_minus_identity(s_action, p, -1)], p, n)
        if plus_fixed:
            labels.append(ModuleLabel(C_ONE, plus_fixed))
        if minus_fixed:
            labels.append(ModuleLabel(C_EPS, minus_fixed))

    if nonfixed:
        q_ad = rep.residual.q_ad
        if q_ad == 2:
            plus = _fixed_dimension([_minus_identity(s_action, p)], p, n) - plus_fixed
            minus = _fixed_dimension([_minus_identity(s_action, p, -1)], p, n) - minus_fixed
            if plus:
                labels.append(ModuleLabel(C_CHI1, plus))
            if minus:
                labels.append(ModuleLabel(C_CHI2, minus))
        else:
            dim_i = rep.residual.i_dimension
            if nonfixed % dim_i:
                raise ArithmeticError(f"non-fixed part of dimension {nonfixed} is not a multiple of {dim_i}")
            labels.append(ModuleLabel(I_MOD, nonfixed // dim_i))

    result = FrattiniClassification(labels, n, len(gamma), nonfixed == 0, witness)
    logger.debug(f"Frattini module {[str(lab) for lab in labels]} (|Gamma| = {len(gamma)})")
    return result


def _eigenvalues(A, m):
    """Residual eigenvalues of m, both in the residue field, or None."""
    F = A.field
    tr = A.field_value(m[0][0]) + A.field_value(m[3][0])
    det = A.field_value(m[0][0]) * A.field_value(m[3][0]) - A.field_value(m[1][0]) * A.field_value(m[2][0])
    roots = [x for x in F.elements() if x * x - tr * x + det == 0]
    if not roots:
        return None
    a = roots[0]
    if not m[1][0] and not m[2][0]:
        a = A.field_value(m[0][0])
    return a, tr - a


def _unit_column(A, col):
    """Column scaled so that its first unit entry is 1, or None."""
    for x in col:
        if A.is_unit(x):
            inv = A.inv(x)
            return tuple(A.mul(inv, y) for y in col)
    return None


def _prime_to_p_part(R, m):
    p = R.algebra.p
    order = R.element_order(m)
    p_part = 1
    while order % (p_part * p) == 0:
        p_part *= p
    rest = order // p_part
    if rest == 1:
        return R.identity
    e = p_part * pow(p_part, -1, rest)
    return R.power(m, e)


def teichmuller_basis(rep):
    """
    Columns form a basis in which the prime-to-p part of some rho(h), h in H,
    is diagonal with Teichmueller entries.
    """
    A, R = rep.algebra, rep.ring
    for g in rep.of_kind("H"):
        section = _prime_to_p_part(R, g.matrix)
        eig = _eigenvalues(A, section)
        if eig is None or eig[0] == eig[1]:
            continue
        a, b = (A.scalar(x) for x in eig)
        first = R.sub(section, R.scalar(b))
        second = R.sub(section, R.scalar(a))
        v1 = _unit_column(A, (first[0], first[2])) or _unit_column(A, (first[1], first[3]))
        v2 = _unit_column(A, (second[1], second[3])) or _unit_column(A, (second[0], second[2]))
        if v1 is None or v2 is None:
            continue
        basis = (v1[0], v2[0], v1[1], v2[1])
        if not R.is_invertible(basis):
            continue
        if R.mul(R.mul(R.inverse(basis), section), basis) != R.diag(a, b):
            raise NoSeparatingElement(f"section of {g.label} is not diagonalized by its eigenvectors")
        logger.debug(f"Teichmueller basis from {g.label}: {R.format(basis)}")
        return basis
    raise NoSeparatingElement("no element of H separates chi from chi^sigma")


@dataclass
class DihedralVerdict:
    dihedral: bool
    classification: FrattiniClassification
    character: dict = None
    basis: tuple = None
    witness: tuple = None

    def to_dict(self, ring=None):
        out = {"dihedral": self.dihedral, "frattini": self.classification.to_dict()}
        if self.character is not None:
            out["character"] = self.character
        if self.witness is not None and ring is not None:
            out["witness"] = ring.format(self.witness)
        return out


def _paired_traces_agree(rep, model):
    """Walk the image of rep and model together; traces must agree everywhere."""
    R = rep.ring
    pairs = list(zip([g.matrix for g in rep.generators], [g.matrix for g in model.generators]))
    seen = {R.identity: R.identity}
    frontier = [R.identity]
    while frontier:
        nxt = []
        for x in frontier:
            y = seen[x]
            for g, m in pairs:
                x2, y2 = R.mul(x, g), R.mul(y, m)
                if x2 in seen:
                    if seen[x2] != y2:
                        return False
                    continue
                if R.trace(x2) != R.trace(y2):
                    return False
                seen[x2] = y2
                nxt.append(x2)
                if len(seen) > rep.budget:
                    raise ImageEnumerationBudgetExceeded(f"image exceeds {rep.budget} elements")
        frontier = nxt
    return True


def is_dihedral_deformation(rep):
    """
    Dihedral iff H^ad acts trivially on Gamma/Phi(Gamma). A dihedral verdict
    carries the character chi with rep = Ind(chi), checked on every element.
    """
    classification = classify_frattini_module(rep)
    if not classification.trivial:
        logger.info(f"Non-dihedral: H acts on Gamma/Phi via {[str(x) for x in classification.labels]}")
        return DihedralVerdict(False, classification, witness=classification.witness)

    A, R = rep.algebra, rep.ring
    basis = teichmuller_basis(rep)
    diag_rep = rep.conjugate(basis)
    s = diag_rep.of_kind("sigma")[0].matrix
    if not R.is_antidiagonal(s):
        raise ArithmeticError("sigma is not antidiagonal in the Teichmueller basis")
    basis = R.mul(basis, R.diag(A.one, A.inv(s[1])))
    diag_rep = rep.conjugate(basis)

    model_gens, character = [], {}
    for g in diag_rep.generators:
        m = g.matrix
        if g.kind == "sigma":
            ok = R.is_antidiagonal(m)
            if ok and g.label == diag_rep.of_kind("sigma")[0].label:
                character["sigma2"] = A.format(A.mul(m[1], m[2]))
        else:
            ok = R.is_diagonal(m)
            if ok:
                character[g.label] = [A.format(m[0]), A.format(m[3])]
        if not ok:
            raise ArithmeticError(f"generator {g.label} is not monomial in the Teichmueller basis")
        model_gens.append(RepGenerator(g.label, g.kind, m))

    model = rep.with_generators(model_gens)
    if not _paired_traces_agree(rep, model):
        raise ArithmeticError("recovered character does not reproduce the traces of rep")
    logger.info(f"Dihedral: rep = Ind(chi) with chi = {character}")
    return DihedralVerdict(True, classification, character=character, basis=basis)


def build_infinitesimal_lift(data, module, variant="split"):
    """
    Lift of the residual representation to F[eps]/(eps^2) whose kernel of
    reduction is the module Z inside 1 + eps*ad. The nonsplit variant (p = 2,
    Z = C(1)) replaces rho(sigma) by [[0, 1 + eps], [chi(sigma^2), 0]].
    """
    label = module if isinstance(module, ModuleLabel) else ModuleLabel(module)
    if label.multiplicity != 1:
        raise UnrealizableModule(f"{label} does not occur in ad")
    A = LocalAlgebra(data.field, 2)
    R = Mat2Ring(A)
    rep = induce_character(data, A)
    p, q_ad, c = data.p, data.q_ad, A.scalar(data.c)

    if variant == "nonsplit":
        if p != 2:
            raise NonsplitUnavailable(f"every extension by {label.tag} splits for p = {p}")
        if label.tag != C_ONE:
            raise UnrealizableModule(f"the nonsplit extension exists only for {C_ONE}")
        gens = [g if g.kind != "sigma" else RepGenerator(g.label, "sigma", R.antidiag(A.element(1, 1), c))
                for g in rep.generators]
        logger.info(f"Nonsplit lift over {A!r}")
        return rep.with_generators(gens)
    if variant != "split":
        raise ValueError(f"variant must be split or nonsplit: {variant!r}")

    if label.tag == C_ONE:
        z = R.identity
    elif label.tag == C_EPS:
        z = R.diag(1, -1)
    elif label.tag == N_MOD:
        if p != 2:
            raise UnrealizableModule(f"{N_MOD} occurs only for p = 2")
        z = R.diag(1, 0)
    elif label.tag == I_MOD:
        if q_ad <= 2:
            raise UnrealizableModule(f"{I_MOD} splits when |H^ad| = {q_ad}")
        z = R.antidiag(A.one, c)
    else:
        if q_ad != 2:
            raise UnrealizableModule(f"{label.tag} needs |H^ad| = 2")
        z = R.antidiag(A.one, c if label.tag == C_CHI1 else A.neg(c))

    kernel = R.add(R.identity, R.scale(A.eps(), z))
    logger.info(f"Split lift over {A!r} by {label.tag}")
    return rep.with_generators(list(rep.generators) + [RepGenerator("z", "kernel", kernel)])


def max_order_above_sigma(rep):
    """Largest element order in the image among elements with antidiagonal residue."""
    R = rep.ring
    return max(R.element_order(m) for m in rep.image if not m[0][0] and not m[3][0])


def s4_representation():
    """S4 in SL2(F4[eps]/(eps^2)): S3 = SL2(F2) extended by the V4 of I(chi/chi^sigma)."""
    F = FiniteField(2, 2)
    omega = F.root_of_unity(3)
    data = DihedralGroupData(F, omega, omega * omega, F.one)
    return build_infinitesimal_lift(data, ModuleLabel(I_MOD))


def s4_example(rep=None):
    return is_dihedral_deformation(rep or s4_representation())


def remark_fixture():
    """
    A lift over F7[eps]/(eps^3) with kernel of reduction
    {1 + eps*diag(r, -r) + eps^2*[[a, b], [c, r^2 - a]]}, elementary abelian of
    order 7^4. Its mod eps^2 truncation is dihedral; the lift is not.
    """
    F = FiniteField(7)
    data = DihedralGroupData(F, 2, 4, 1)
    A = LocalAlgebra(F, 3)
    R = Mat2Ring(A)
    gens = list(induce_character(data, A).generators)
    kernel = {
        "g_r": R.matrix(A.element(1, 1, 0), 0, 0, A.element(1, -1, 1)),
        "g_a": R.matrix(A.element(1, 0, 1), 0, 0, A.element(1, 0, -1)),
        "g_b": R.matrix(1, A.element(0, 0, 1), 0, 1),
        "g_c": R.matrix(1, 0, A.element(0, 0, 1), 1),
    }
    gens += [RepGenerator(label, "kernel", m) for label, m in kernel.items()]
    return LocalRingRep(A, gens, data)


def truncate(rep, k):
    """Reduction of rep modulo eps^k."""
    if not 1 <= k <= rep.algebra.k:
        raise ValueError(f"cannot truncate {rep.algebra!r} to eps^{k}")
    A = rep.algebra.truncated(k)
    R = rep.ring
    gens = [RepGenerator(g.label, g.kind, R.truncate(g.matrix, k)) for g in rep.generators]
    return LocalRingRep(A, gens, rep.residual, rep.budget)


@dataclass
class CoprimePair:
    ring: Mat2Ring
    generators: list
    conjugator: tuple

    def automorphism(self, x):
        return self.ring.conj(self.conjugator, x)


def random_coprime_pair(p, rng=None, max_exponent=6, attempts=50):
    """
    A random p-group of 2x2 matrices congruent to 1 mod eps, stable under
    conjugation by a diagonal matrix of order prime to p.
    """
    rng = rng or random.Random(0)
    F = FiniteField(p, 2 if p == 2 else 1)
    A = LocalAlgebra(F, 3 if p == 3 else 2)
    R = Mat2Ring(A)
    units = list(F.nonzero_elements())

    def random_coeff():
        return units[rng.randrange(len(units))] if rng.random() < 0.7 else F.zero

    for _ in range(attempts):
        D = R.diag(A.scalar(rng.choice(units)), A.scalar(rng.choice(units)))
        d_order = R.element_order(D)
        seeds = []
        for _ in range(rng.randint(1, 2)):
            entries = [A.element(1 if i in (0, 3) else 0, *(random_coeff() for _ in range(A.k - 1)))
                       for i in range(4)]
            seeds.append(tuple(entries))
        gens = [R.mul(R.mul(R.power(D, i), g), R.power(D, -i)) for g in seeds for i in range(d_order)]
        try:
            _closure(R, gens, budget=p ** max_exponent)
        except ImageEnumerationBudgetExceeded:
            continue
        return CoprimePair(R, gens, D)
    raise ImageEnumerationBudgetExceeded(f"no p-group of order <= {p}^{max_exponent} found")
