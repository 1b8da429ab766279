"""
Class groups of maximal orders by relation collection over a factor base of
prime ideals.
"""

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from sympy import primerange

from engines.errors import InfiniteGroup, NotMaximal, RelationSearchStalled
from engines.exact_algebra import (
    AbelianGroupStructure,
    abelian_group_structure,
    eliminate_unit_columns,
    valuation,
)
from engines.logging_config import get_logger
from engines.numfield_engine import IdealHNF, bach_bound, minkowski_bound
from engines.settings import DEFAULT_CONFIG

logger = get_logger(__name__)

CERTIFICATION_LEVELS = ("minkowski-certified", "grh-bach", "heuristic-doubling")

SMALL_BASE_FLOOR = 30
RELATION_EXCESS = 10
ELEMENTS_PER_IDEAL = 24
COVERAGE_ATTEMPTS = 400
MAX_HARVEST_ROUNDS = 60
HARVEST_BATCHES = 4
STABILITY_ROUNDS = 3


@dataclass(frozen=True)
class ClassGroupResult:
    structure: AbelianGroupStructure
    factor_base: tuple
    certification: str
    bound: int
    relation_count: int
    seed: int = 0

    @property
    def h(self):
        return self.structure.order

    @property
    def invariant_factors(self):
        return self.structure.invariant_factors

    def to_dict(self):
        return {
            "h": str(self.h),
            "invariant_factors": [str(d) for d in self.invariant_factors],
            "certification": self.certification,
            "bound": str(self.bound),
            "factor_base_size": len(self.factor_base),
            "relation_count": self.relation_count,
            "seed": self.seed,
        }


def size_reduced_basis(order, rows, passes=30):
    """
    Pairwise size reduction of a lattice basis with respect to the T2 form.
    A cheap stand-in for lattice reduction: short vectors, no LLL guarantee.
    """
    G = order.t2_gram
    basis = [list(r) for r in rows]

    def inner(u, v):
        return sum(u[i] * G[i][j] * v[j] for i in range(len(u)) if u[i] for j in range(len(v)) if v[j])

    for _ in range(passes):
        changed = False
        basis.sort(key=lambda v: inner(v, v))
        for i in range(len(basis)):
            for j in range(len(basis)):
                if i == j:
                    continue
                njj = inner(basis[j], basis[j])
                if njj <= 0:
                    continue
                mu = round(inner(basis[i], basis[j]) / njj)
                if mu:
                    basis[i] = [a - mu * b for a, b in zip(basis[i], basis[j])]
                    changed = True
        if not changed:
            break
    return [tuple(v) for v in basis if any(v)]


def factor_base(order, bound, seed=0):
    """Every prime ideal of norm at most bound, sorted by (norm, ell, basis)."""
    primes = []
    for ell in primerange(2, bound + 1):
        for P in order.prime_ideals(ell, seed):
            if P.norm <= bound:
                primes.append(P)
    primes.sort(key=lambda P: (P.norm, P.ell, P.ideal.rows))
    return primes


def _primes_by_ell(order, columns, seed=0):
    """ell -> [(column or None, prime)] covering every prime above ell."""
    index = {(P.ell, P.ideal.rows): c for c, P in enumerate(columns)}
    table = {}
    for ell in sorted({P.ell for P in columns}):
        table[ell] = [(index.get((ell, P.ideal.rows)), P) for P in order.prime_ideals(ell, seed)]
    return table


def factor_element(order, x, by_ell, ncols):
    """Exponent row of the principal ideal (x) over the columns, or None if not smooth."""
    norm = abs(order.norm(x))
    if norm == 0:
        return None
    row = [0] * ncols
    for ell, plist in by_ell.items():
        if norm % ell:
            continue
        v = valuation(norm, ell)
        norm //= ell ** v
        seen = 0
        for col, P in plist:
            k = P.valuation(x)
            if k and col is None:
                return None
            if k:
                row[col] = k
                seen += k * P.residue_degree
        if seen != v:
            return None
        if norm == 1:
            break
    if norm != 1:
        return None
    return tuple(row)


def _random_element(basis, rng, coeff_bound):
    n = len(basis[0])
    out = [0] * n
    for b in basis:
        c = rng.randint(-coeff_bound, coeff_bound)
        if c:
            for j in range(n):
                out[j] += c * b[j]
    return tuple(out)


def _harvest_batch(order, columns, n_small, seed, ideals, coeff_bound, prime_seed=0):
    """Relations from short elements of random products of small primes."""
    rng = random.Random(seed)
    by_ell = _primes_by_ell(order, columns, prime_seed)
    ncols = len(columns)
    found = []
    for _ in range(ideals):
        ideal = IdealHNF.unit(order)
        for _ in range(rng.randint(0, 2)):
            ideal = ideal * columns[rng.randrange(n_small)].ideal
        basis = size_reduced_basis(order, ideal.rows)
        for _ in range(ELEMENTS_PER_IDEAL):
            x = _random_element(basis, rng, coeff_bound)
            if not any(x):
                continue
            row = factor_element(order, x, by_ell, ncols)
            if row is not None and any(row):
                found.append(row)
    return found


def _cover_prime(order, columns, n_small, col, by_ell, rng):
    """A relation with exponent 1 at column col and no other large prime, or None."""
    P = columns[col]
    basis = size_reduced_basis(order, P.ideal.rows)
    ncols = len(columns)
    coeff_bound = 1
    for attempt in range(COVERAGE_ATTEMPTS):
        if attempt and attempt % 50 == 0:
            coeff_bound += 1
        x = _random_element(basis, rng, coeff_bound)
        if not any(x):
            continue
        row = factor_element(order, x, by_ell, ncols)
        if row is None or row[col] != 1:
            continue
        if any(row[j] for j in range(n_small, ncols) if j != col):
            continue
        return row
    return None


class RelationCollector:
    """Collects relations for one factor base split into small and large primes."""

    def __init__(self, order, primes, n_small, rng, pool=None, prime_seed=0):
        self.order = order
        self.rng = rng
        self.pool = pool
        self.prime_seed = prime_seed
        self._split(list(primes), n_small)

    def _split(self, primes, n_small):
        self.columns = primes
        self.n_small = n_small
        self.by_ell = _primes_by_ell(self.order, self.columns, self.prime_seed)

    def cover_large(self):
        """Coverage rows for the large primes; uncovered primes move into the small part."""
        rows = {}
        uncovered = []
        for col in range(self.n_small, len(self.columns)):
            row = _cover_prime(self.order, self.columns, self.n_small, col, self.by_ell, self.rng)
            if row is None:
                uncovered.append(col)
            else:
                rows[col] = row
        if uncovered:
            logger.warning(f"{len(uncovered)} large primes without coverage relations; kept as columns")
            keep_small = list(range(self.n_small)) + uncovered
            rest = [c for c in range(self.n_small, len(self.columns)) if c not in set(uncovered)]
            order_map = keep_small + rest
            primes = [self.columns[c] for c in order_map]
            self._split(primes, len(keep_small))
            return self.cover_large()
        return [rows[c] for c in sorted(rows)]

    def harvest(self, target):
        """At least target distinct relation rows, merged in sorted order."""
        relations = set()
        coeff_bound = 3
        for round_no in range(MAX_HARVEST_ROUNDS):
            # the batch count is fixed so the rng stream does not depend on the worker count
            seeds = [self.rng.getrandbits(64) for _ in range(HARVEST_BATCHES)]
            args = [(self.order, self.columns, self.n_small, s, 4, coeff_bound, self.prime_seed) for s in seeds]
            if self.pool is not None:
                batches = list(self.pool.map(_harvest_star, args))
            else:
                batches = [_harvest_batch(*a) for a in args]
            for batch in batches:
                relations.update(batch)
            logger.debug(f"Harvest round {round_no}: {len(relations)} relations, coefficients <= {coeff_bound}")
            if len(relations) >= target:
                break
            if round_no % 5 == 4:
                coeff_bound += 1
        return sorted(relations)

    def structure(self, coverage, relations):
        large = list(range(self.n_small, len(self.columns)))
        rows = list(coverage) + list(relations)
        if large:
            rows, _ = eliminate_unit_columns(rows, large)
        return abelian_group_structure(rows, self.n_small)


def _harvest_star(args):
    return _harvest_batch(*args)


def _small_count(primes, order, bound):
    disc = abs(order.discriminant)
    small_bound = min(bound, max(SMALL_BASE_FLOOR, int(0.3 * math.log(disc) ** 2)))
    count = sum(1 for P in primes if P.norm <= small_bound)
    return max(count, 1)


def _solve(order, primes, n_small, rng, pool, relation_target):
    collector = RelationCollector(order, primes, n_small, rng, pool)
    coverage = collector.cover_large()
    target = max(relation_target, collector.n_small + RELATION_EXCESS)
    relations = []
    for _ in range(8):
        relations = collector.harvest(target)
        try:
            return collector.structure(coverage, relations), collector, len(coverage) + len(relations)
        except InfiniteGroup:
            logger.debug(f"Relation lattice not full rank with {len(relations)} relations")
            target = int(target * 1.5) + 1
    raise RelationSearchStalled(f"no full-rank relation lattice after {len(relations)} relations")


def class_group_general(order, policy="certified", config=DEFAULT_CONFIG):
    """Class group of a maximal order with certification level."""
    if not order.is_maximal:
        raise NotMaximal(f"{order!r} is not known to be maximal")
    seed = config.seed
    if order.n == 1 or abs(order.discriminant) <= 4:
        level = "grh-bach" if policy == "grh" else "minkowski-certified"
        return ClassGroupResult(AbelianGroupStructure((), ()), (), level, 1, 0, seed)

    bound = minkowski_bound(order)
    level = "minkowski-certified"
    if policy == "grh":
        bound = min(bound, bach_bound(order))
        level = "grh-bach"
    primes = factor_base(order, bound, seed)
    logger.info(f"Class group of {list(order.poly)}: bound {bound}, {len(primes)} prime ideals")
    if not primes:
        return ClassGroupResult(AbelianGroupStructure((), ()), (), level, bound, 0, seed)

    rng = config.rng(f"classgroup:{order.poly}")
    n_small = _small_count(primes, order, bound)
    pool = ProcessPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else None
    try:
        structure, collector, count = _solve(order, primes, n_small, rng, pool, 0)

        stable = False
        for _ in range(STABILITY_ROUNDS):
            bigger = min(len(primes), max(collector.n_small + 1, math.ceil(1.25 * collector.n_small)))
            again, collector2, count2 = _solve(order, primes, bigger, rng, pool, 2 * count)
            if again.order == structure.order:
                stable = True
                break
            logger.warning(f"Class number moved from {structure.order} to {again.order}; enlarging again")
            structure, collector, count = again, collector2, count2
    finally:
        if pool is not None:
            pool.shutdown()
    if not stable:
        level = "heuristic-doubling"
        logger.warning(f"Class number {structure.order} not confirmed stable")

    factor_base_used = tuple(collector.columns[:collector.n_small])
    logger.info(f"h = {structure.order}, invariants {list(structure.invariant_factors)} ({level})")
    return ClassGroupResult(structure, factor_base_used, level, bound, count, seed)
