"""
Decision pipeline for dihedral towers Q < L < M.

L is an imaginary quadratic field, M/L the unramified cyclic extension of
degree q, and the residual representation is induced from the character
chi = psi^b of Gal(M/L) = Z/q with values in F = F_{p^r}.

Stages:
- TowerSpec.build validates the tower and fixes F, zeta and the class character
- classify_prime sorts a rational prime into S1, S2, S3 or none
- check_case compares the p-parts of h(M) and h(L)
- decide_dihedral combines both with the ray class group of L
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache

from sympy import isprime, n_order, primefactors, primerange

from engines.classgroup_engine import class_group_general
from engines.cm_classfield_engine import (
    SubfieldPolynomial,
    hilbert_class_polynomial,
    subfield_defining_polynomial,
)
from engines.cubic_model import reduce_model
from engines.errors import (
    DihedralisError,
    EvenPrime,
    InvalidTower,
    PContainedInS,
    RelationSearchStalled,
    StageError,
)
from engines.exact_algebra import valuation
from engines.finite_fields import FiniteField
from engines.logging_config import get_logger
from engines.numfield_engine import maximal_order
from engines.quadform_engine import class_group, is_fundamental, prime_frobenius_class
from engines.rayclass_engine import (
    constant_det_presentation,
    ray_class_group_quadratic,
    sigma_eigenspace_split,
    universal_ring_presentation,
)
from engines.reptheory_engine import (
    I_MOD,
    DihedralGroupData,
    build_infinitesimal_lift,
    is_dihedral_deformation,
)
from engines.result_cache import classgroup_key, classpoly_key, rayclass_key
from engines.settings import DEFAULT_CONFIG

logger = get_logger(__name__)

VERDICTS = ("S1", "S2", "S3", "none", "excluded_p")
CASES = ("Case1", "Case2", "Indeterminate")
OUTCOMES = ("Dihedral", "NotDihedral", "HypothesesNotMet")

NO_CONCLUSION = "no conclusion from this method"


@lru_cache(maxsize=256)
def _form_group(d):
    return class_group(d)


@lru_cache(maxsize=64)
def _field_and_zeta(p, r, q):
    F = FiniteField(p, r)
    return F, F.root_of_unity(q)


@dataclass(frozen=True)
class TowerSpec:
    d: int
    q: int
    p: int
    b: int = 1
    S: tuple = ()
    r: int = 1
    h: int = 0

    @classmethod
    def build(cls, d, q, p, b=1, S=(), strict=True):
        """strict=False admits p | d, for class number comparisons only."""
        d, q, p, b = int(d), int(q), int(p), int(b)
        if d >= 0 or not is_fundamental(d):
            raise InvalidTower(f"{d} is not a negative fundamental discriminant")
        if q == 2 or not isprime(q):
            raise InvalidTower(f"q must be an odd prime: {q}")
        if not isprime(p) or p == q:
            raise InvalidTower(f"p must be a prime different from q: {p}")
        if b % q == 0:
            raise InvalidTower(f"b must be a unit mod q: {b}")
        S = tuple(sorted({int(ell) for ell in S}))
        bad = [ell for ell in S if not isprime(ell)]
        if bad:
            raise InvalidTower(f"ramification set contains non-primes: {bad}")
        if p in S:
            raise PContainedInS(f"{p} is in the ramification set {list(S)}")
        if strict and d % p == 0:
            raise InvalidTower(f"p = {p} ramifies in L = Q(sqrt {d})")
        h = _form_group(d).order
        if h % q or h % (q * q) == 0:
            raise InvalidTower(f"q = {q} must exactly divide h({d}) = {h}")
        r = n_order(p, q)
        tower = cls(d, q, p, b % q, S, r, h)
        logger.debug(f"Tower {tower.label}: F = F_{p}^{r}")
        return tower

    @property
    def label(self):
        return f"d={self.d}, q={self.q}, p={self.p}"

    @property
    def group(self):
        return _form_group(self.d)

    @property
    def character(self):
        return self.group.quotient_character(self.q)

    @property
    def field(self):
        return _field_and_zeta(self.p, self.r, self.q)[0]

    @property
    def zeta(self):
        return _field_and_zeta(self.p, self.r, self.q)[1]

    def with_S(self, S):
        return TowerSpec.build(self.d, self.q, self.p, self.b, S)

    def residual_data(self):
        """chi(h) = zeta^b, chi^sigma(h) = zeta^-b and chi(sigma^2) = 1."""
        zeta = self.zeta
        return DihedralGroupData(self.field, zeta ** self.b, zeta ** (self.q - self.b), self.field.one)

    def to_dict(self):
        return {
            "d": str(self.d),
            "q": str(self.q),
            "p": str(self.p),
            "b": str(self.b),
            "S": [str(ell) for ell in self.S],
            "r": self.r,
            "h_L": str(self.h),
        }


@dataclass(frozen=True)
class PrimeClassification:
    ell: int
    verdict: str
    evidence: dict = field(default_factory=dict)

    @property
    def in_S0(self):
        return self.verdict in ("S1", "S2", "S3")

    def to_dict(self):
        return {"ell": str(self.ell), "verdict": self.verdict, "evidence": dict(self.evidence)}


def classify_prime(tower, ell):
    """
    Place ell in S1, S2 or S3. With q odd the character chi/chi^sigma has odd
    order, so S3 stays empty and ramified primes can only land in S2.
    """
    ell = int(ell)
    if not isprime(ell):
        raise ValueError(f"Not a prime: {ell}")
    p, q = tower.p, tower.q
    if ell == p:
        return PrimeClassification(ell, "excluded_p", {"reason": "prime above p"})

    datum = prime_frobenius_class(tower.d, ell)
    mu_degree = n_order(ell, p)
    evidence = {"splitting": datum.kind, "ell_mod_p_order": mu_degree}

    if datum.is_split:
        k = tower.character.value(tower.group, datum.form)
        frob_order = 1 if k == 0 else q
        F = tower.field
        ratio = tower.zeta ** (2 * tower.b * k % q)
        cyclotomic = F(ell % p)
        matches = cyclotomic == ratio or cyclotomic == ratio.inverse()
        evidence.update({
            "frobenius_order": frob_order,
            "class_value": k,
            "decomposition_group": "trivial" if k == 0 else f"Z/{q}",
            "local_degree": frob_order,
            "mu_p_in_local": matches,
        })
        return PrimeClassification(ell, "S1" if matches else "none", evidence)

    # the prime of L above ell has class of order <= 2, so it splits completely in M
    mu_in_local = (mu_degree <= 2) if datum.is_inert else (mu_degree == 1)
    evidence.update({
        "frobenius_order": 1,
        "decomposition_group": "Z/2",
        "local_degree": 2,
        "mu_p_in_local": mu_in_local,
    })
    return PrimeClassification(ell, "S2" if mu_in_local else "none", evidence)


def scan_primes(tower, bound):
    return [classify_prime(tower, ell) for ell in primerange(2, bound)]


@dataclass(frozen=True)
class CaseDecision:
    case: str
    h_L: int
    h_M: int = None
    certification: str = ""
    elementary: bool = True
    reason: str = ""
    polynomial: tuple = ()

    def to_dict(self):
        return {
            "case": self.case,
            "h_L": str(self.h_L),
            "h_M": None if self.h_M is None else str(self.h_M),
            "certification": self.certification,
            "elementary_p_part": self.elementary,
            "reason": self.reason,
            "polynomial": [str(c) for c in self.polynomial],
        }


@dataclass(frozen=True)
class Decision:
    verdict: str
    tower: TowerSpec
    case: CaseDecision = None
    reason: str = ""
    violated: tuple = ()
    presentation: object = None
    constant_det: object = None
    image_order: int = None
    evidence: dict = field(default_factory=dict)

    @property
    def finite_image(self):
        return self.verdict == "Dihedral"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "tower": self.tower.to_dict(),
            "case": None if self.case is None else self.case.case,
            "hL": str(self.tower.h),
            "hM": None if self.case is None or self.case.h_M is None else str(self.case.h_M),
            "certification": None if self.case is None else self.case.certification,
            "reason": self.reason,
            "violated": list(self.violated),
            "ring_presentation": None if self.presentation is None else self.presentation.text,
            "constant_det_presentation": None if self.constant_det is None else self.constant_det.text,
            "finite_image": self.finite_image,
            "boston": boston_report(self),
            "evidence": self.evidence,
        }


class DihedralOrchestrator:
    def __init__(self, config=DEFAULT_CONFIG, cache=None):
        self.config = config
        self.cache = cache

    @contextmanager
    def stage(self, name):
        try:
            yield
        except StageError:
            raise
        except DihedralisError as e:
            logger.error(f"Stage {name} failed", exc_info=True)
            raise StageError(name, e) from e

    def _cached(self, kind, key, compute, accept=None):
        if self.cache is None:
            return compute()[0]
        return self.cache.fetch(kind, key, compute, accept)

    # stages

    def subfield_polynomial(self, d, q):
        def compute():
            sub = subfield_defining_polynomial(d, q, precision=self.config.precision, group=_form_group(d))
            sub = reduce_model(sub)
            return sub.to_dict(), sub.model

        with self.stage("cm-classfield"):
            payload = self._cached("classpoly", classpoly_key(d, q), compute)
        return SubfieldPolynomial.from_dict(payload)

    def class_polynomial(self, d):
        def compute():
            coeffs = hilbert_class_polynomial(d, precision=self.config.precision)
            return {"d": str(d), "coefficients": [str(c) for c in coeffs]}, "stable-precision"

        with self.stage("cm-classfield"):
            payload = self._cached("classpoly", classpoly_key(d), compute)
        return [int(c) for c in payload["coefficients"]]

    def class_group_of(self, poly):
        policy = self.config.bound_policy

        def compute():
            with self.stage("numfield"):
                order = maximal_order(poly, seed=self.config.seed)
            with self.stage("classgroup"):
                result = class_group_general(order, policy, self.config)
            return result.to_dict(), result.certification

        def accept(certification):
            return policy == "grh" or certification == "minkowski-certified"

        return self._cached("classgroup", classgroup_key(poly), compute, accept)

    def check_case(self, tower):
        p = tower.p
        group = tower.group
        h_L = group.order
        if not group.is_p_elementary(p):
            logger.warning(f"{tower.label}: p-part of Cl(L) {group.p_part_exponents(p)} is not elementary")
            return CaseDecision("Indeterminate", h_L, elementary=False,
                                reason="p-part of Cl(L) is not elementary abelian")

        sub = self.subfield_polynomial(tower.d, tower.q)
        try:
            payload = self.class_group_of(sub.polynomial)
        except StageError as e:
            if isinstance(e.cause, RelationSearchStalled):
                logger.warning(f"{tower.label}: class group of M stalled; case left open")
                return CaseDecision("Indeterminate", h_L, reason=str(e.cause), polynomial=sub.polynomial)
            raise

        h_M = int(payload["h"])
        certification = payload["certification"]
        v_M, v_L = valuation(h_M, p), valuation(h_L, p)
        if v_M == v_L:
            case, reason = "Case1", "p does not divide h(M)/h(L)"
        elif v_M > v_L:
            case, reason = "Case2", "p divides h(M)/h(L)"
        else:
            logger.warning(f"{tower.label}: v_p(h(M)) = {v_M} < v_p(h(L)) = {v_L}")
            case, reason = "Indeterminate", "p-part of h(M) smaller than that of h(L)"
        logger.info(f"{tower.label}: h(L) = {h_L}, h(M) = {h_M} ({certification}) -> {case}")
        return CaseDecision(case, h_L, h_M, certification, True, reason, sub.polynomial)

    def ray_class_split(self, tower, S):
        def compute():
            rcd = ray_class_group_quadratic(tower.d, S, tower.p, self.config)
            payload = {"ray_class": rcd.to_dict(), "p_exponents": list(rcd.p_exponents())}
            if tower.p != 2:
                split = sigma_eigenspace_split(rcd)
                payload["minus"] = list(split.minus)
                payload["plus"] = list(split.plus)
            return payload, "exact"

        with self.stage("rayclass"):
            return self._cached("rayclass", rayclass_key(tower.d, S, tower.p), compute)

    def infinitesimal_witness(self, tower):
        """The split lift with kernel I(chi/chi^sigma) and its dihedrality verdict."""
        with self.stage("reptheory"):
            rep = build_infinitesimal_lift(tower.residual_data(), I_MOD)
            verdict = is_dihedral_deformation(rep)
        return {
            "module": I_MOD,
            "gamma_order": len(rep.gamma),
            "dihedral": verdict.dihedral,
        }

    def decide_dihedral(self, tower, S=None):
        S = tower.S if S is None else tuple(sorted(set(int(ell) for ell in S)))
        if tower.p in S:
            raise PContainedInS(f"{tower.p} is in the ramification set {list(S)}")
        if S != tower.S:
            tower = tower.with_S(S)

        offending = [c for c in (classify_prime(tower, ell) for ell in S) if c.in_S0]
        if offending:
            violated = tuple(f"S meets S0 at {c.ell} ({c.verdict})" for c in offending)
            logger.info(f"{tower.label}: hypotheses not met: {list(violated)}")
            return Decision("HypothesesNotMet", tower, violated=violated, reason="S meets S0",
                            evidence={"primes": [c.to_dict() for c in offending]})

        case = self.check_case(tower)
        if case.case == "Indeterminate":
            return Decision("HypothesesNotMet", tower, case, reason=case.reason,
                            violated=(f"Hom vanishing undetermined: {case.reason}",))
        if case.case == "Case2":
            witness = self.infinitesimal_witness(tower)
            return Decision("NotDihedral", tower, case, reason="Case2-Hom-nonvanishing",
                            evidence={"infinitesimal_lift": witness})

        payload = self.ray_class_split(tower, S)
        exponents = payload["p_exponents"]
        presentation = universal_ring_presentation(exponents, tower.p, tower.r)
        constant_det = None
        if "minus" in payload:
            constant_det = constant_det_presentation(payload["minus"], tower.p, tower.r)
        image_order = tower.p ** sum(exponents) * 2 * tower.q
        logger.info(f"{tower.label}: dihedral, R = {presentation.text}")
        evidence = {"p_exponents": exponents, "ray_class": payload["ray_class"]}
        if constant_det is None:
            evidence["constant_det"] = f"{EvenPrime.__name__}: no eigenspace split for p = 2"
        return Decision("Dihedral", tower, case, reason="Case1", presentation=presentation,
                        constant_det=constant_det, image_order=image_order, evidence=evidence)


def check_case(tower, config=DEFAULT_CONFIG, cache=None):
    return DihedralOrchestrator(config, cache).check_case(tower)


def decide_dihedral(tower, S=None, config=DEFAULT_CONFIG, cache=None):
    return DihedralOrchestrator(config, cache).decide_dihedral(tower, S)


def boston_report(decision):
    if decision.verdict != "Dihedral":
        return {"finite_image": None, "statement": NO_CONCLUSION}
    return {
        "finite_image": True,
        "statement": "universal deformation has finite image",
        "image_order": str(decision.image_order),
    }


@dataclass(frozen=True)
class MinimalSetEntry:
    ell: int
    local_image_order: int
    absolutely_irreducible: bool
    mu_p_degree: int
    vexing: bool
    in_S: bool

    def to_dict(self):
        return {
            "ell": str(self.ell),
            "local_image_order": self.local_image_order,
            "absolutely_irreducible": self.absolutely_irreducible,
            "mu_p_degree": self.mu_p_degree,
            "vexing": self.vexing,
            "in_S": self.in_S,
        }


def minimal_S(tower):
    """
    Finite primes of the minimal ramification set, with one entry per prime
    dividing d. An empty tuple means S is the set of infinite places.
    """
    if tower.p == 2:
        raise EvenPrime("minimal deformation sets need p odd")
    entries = []
    for ell in primefactors(tower.d):
        datum = prime_frobenius_class(tower.d, ell)
        # inertia has order 2; Frobenius of the prime of L above ell is trivial in Z/q
        value = tower.character.value(tower.group, datum.form)
        image_order = 2 if value == 0 else 2 * tower.q
        irreducible = image_order > 2
        mu_degree = n_order(ell, tower.p)
        inertia_irreducible = False
        vexing = irreducible and not inertia_irreducible and mu_degree == 2
        entries.append(MinimalSetEntry(ell, image_order, irreducible, mu_degree, vexing,
                                       irreducible and not vexing))
    primes = tuple(e.ell for e in entries if e.in_S)
    logger.info(f"{tower.label}: minimal S = S_inf + {list(primes)}")
    return primes, entries


def prime_discriminant(ell):
    """Discriminant of Q(sqrt(-ell)) for a prime ell."""
    if not isprime(ell):
        raise ValueError(f"Not a prime: {ell}")
    if ell == 2:
        return -8
    return -ell if ell % 4 == 3 else -4 * ell
