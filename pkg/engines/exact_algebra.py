"""
Exact integer linear algebra.

Features:
- IntMatrix: immutable matrices of Python integers
- Row Hermite normal form, optionally modulo a multiple of the lattice determinant
- Smith normal form with unimodular transforms
- Abelian group structure of a relation matrix (invariant factors + generators)
- Subgroup structure inside a finite abelian group
- Kronecker symbol
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd

from sympy import factorint, jacobi_symbol, nextprime

from engines.errors import InfiniteGroup
from engines.logging_config import get_logger

logger = get_logger(__name__)


class IntMatrix:
    """Matrix of arbitrary-precision integers, stored as a tuple of row tuples."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        rows = tuple(tuple(int(x) for x in row) for row in rows)
        if ncols is None:
            if not rows:
                raise ValueError("Column count required for an empty matrix")
            ncols = len(rows[0])
        if any(len(row) != ncols for row in rows):
            raise ValueError("Ragged rows in IntMatrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, m, n):
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def diagonal(cls, entries):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.ncols == other.ncols and self.rows == other.rows

    def __hash__(self):
        return hash((self.ncols, self.rows))

    def __repr__(self):
        return f"IntMatrix({[list(r) for r in self.rows]})"

    def __mul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError(f"Shape mismatch: {self.nrows}x{self.ncols} * {other.nrows}x{other.ncols}")
        cols = other.transpose().rows
        return IntMatrix([[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows],
                         other.ncols)

    def transpose(self):
        if self.nrows == 0:
            return IntMatrix([[] for _ in range(self.ncols)], 0)
        return IntMatrix(list(zip(*self.rows)), self.nrows)

    def to_lists(self):
        return [list(r) for r in self.rows]

    def is_diagonal(self):
        return all(self.rows[i][j] == 0
                   for i in range(self.nrows) for j in range(self.ncols) if i != j)

    def diagonal_entries(self):
        return [self.rows[i][i] for i in range(min(self.nrows, self.ncols))]

    def det(self):
        if self.nrows != self.ncols:
            raise ValueError("Determinant of a non-square matrix")
        return bareiss_det(self.to_lists())

    def rank(self):
        return len(hnf(self.rows, ncols=self.ncols))


def bareiss_det(a):
    """Fraction-free determinant of a square list-of-lists (copied, not modified)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _rank_mod_prime_rows(rows, ncols, prime):
    """Indices of a maximal set of rows independent modulo a prime."""
    basis = {}
    chosen = []
    for idx, row in enumerate(rows):
        v = [x % prime for x in row]
        for col in range(ncols):
            if v[col] == 0:
                continue
            if col in basis:
                b = basis[col]
                f = v[col]
                v = [(x - f * y) % prime for x, y in zip(v, b)]
            else:
                inv = pow(v[col], -1, prime)
                basis[col] = [(x * inv) % prime for x in v]
                chosen.append(idx)
                break
        if len(chosen) == ncols:
            break
    return chosen


def full_rank_multiple(rows, ncols):
    """
    A nonzero multiple of the determinant of the lattice spanned by rows, or
    None if the rows do not span a full-rank lattice.
    """
    prime = nextprime(2**61)
    chosen = _rank_mod_prime_rows(rows, ncols, prime)
    if len(chosen) < ncols:
        # a second prime guards against an unlucky rank drop
        prime = nextprime(prime)
        chosen = _rank_mod_prime_rows(rows, ncols, prime)
        if len(chosen) < ncols:
            return None
    return abs(bareiss_det([list(rows[i]) for i in chosen]))


def hnf(rows, ncols=None, modulus=None):
    """
    Row Hermite normal form of the lattice spanned by rows.

    Returns the nonzero echelon rows: pivots positive and increasing in column,
    entries above each pivot reduced into [0, pivot). If modulus is given it
    must be a multiple of the lattice determinant (full-rank lattices only) and
    intermediate entries are kept below it.
    """
    work = [list(r) for r in rows]
    if ncols is None:
        if not work:
            return []
        ncols = len(work[0])
    if modulus is not None:
        modulus = abs(modulus)
        work = [[x % modulus for x in r] for r in work]
        work.extend([modulus if i == j else 0 for j in range(ncols)] for i in range(ncols))

    result = []
    active = [r for r in work if any(r)]
    for col in range(ncols):
        with_entry = [r for r in active if r[col] != 0]
        if not with_entry:
            continue
        rest = [r for r in active if r[col] == 0]
        # Euclid on the column, always pivoting on the smallest absolute entry
        while len(with_entry) > 1:
            with_entry.sort(key=lambda r: abs(r[col]))
            pivot = with_entry[0]
            reduced = [pivot]
            for r in with_entry[1:]:
                f = r[col] // pivot[col]
                r = [x - f * y for x, y in zip(r, pivot)]
                if modulus is not None:
                    # only columns right of the pivot; their D*e_j rows are still intact
                    r = r[:col + 1] + [x % modulus for x in r[col + 1:]]
                if r[col] != 0:
                    reduced.append(r)
                elif any(r):
                    rest.append(r)
            with_entry = reduced
        pivot = with_entry[0]
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        result.append(pivot)
        active = rest
    # reduce entries above pivots, left to right
    pivots = []
    for r in result:
        pivots.append(next(j for j, x in enumerate(r) if x != 0))
    for i in range(len(result)):
        pc = pivots[i]
        p = result[i][pc]
        for k in range(i):
            f = result[k][pc] // p
            if f:
                result[k] = [x - f * y for x, y in zip(result[k], result[i])]
    return [tuple(r) for r in result]


def _snf_core(a, with_u=True):
    """
    In-place Smith normal form of the list-of-lists a.

    Returns (U, V, Vinv) as lists of lists with diag = U * a_original * V.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)] if with_u else None
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Vinv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_sub(i, j, f):
        # row_i -= f * row_j
        a[i] = [x - f * y for x, y in zip(a[i], a[j])]
        if U is not None:
            U[i] = [x - f * y for x, y in zip(U[i], U[j])]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def col_sub(i, j, f):
        # col_i -= f * col_j
        for row in a:
            row[i] -= f * row[j]
        for row in V:
            row[i] -= f * row[j]
        Vinv[j] = [x + f * y for x, y in zip(Vinv[j], Vinv[i])]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    t = 0
    while t < min(m, n):
        # smallest nonzero entry of the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = a[i][j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            row_swap(t, i)
        if j != t:
            col_swap(t, j)

        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if a[i][t] != 0:
                    f = a[i][t] // a[t][t]
                    row_sub(i, t, f)
                    if a[i][t] != 0:
                        row_swap(t, i)
                        done = False
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    f = a[t][j] // a[t][t]
                    col_sub(j, t, f)
                    if a[t][j] != 0:
                        col_swap(t, j)
                        done = False
            if done:
                pivot = a[t][t]
                offender = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if a[i][j] % pivot != 0:
                            offender = i
                            break
                    if offender is not None:
                        break
                if offender is not None:
                    # fold the offending row into the pivot row and go again
                    row_sub(t, offender, -1)
                    done = False
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
        t += 1
    return U, V, Vinv


def snf_with_transforms(m):
    """
    Smith normal form D = U * m * V with U, V unimodular and d1 | d2 | ...

    Zero diagonal entries (rank deficiency) come last.
    """
    a = m.to_lists()
    if m.nrows == 0 or m.ncols == 0:
        return (IntMatrix(a, m.ncols), IntMatrix.identity(m.nrows) if m.nrows else IntMatrix([], 0),
                IntMatrix.identity(m.ncols) if m.ncols else IntMatrix([], 0))
    U, V, _ = _snf_core(a)
    return IntMatrix(a, m.ncols), IntMatrix(U, m.nrows), IntMatrix(V, m.ncols)


@dataclass(frozen=True)
class AbelianGroupStructure:
    """
    Z^k / (row span of relations), written as Z/d1 + ... + Z/dt + Z^free_rank.

    generators[i] is the i-th cyclic generator as an integer vector in the k
    ambient generators; transform maps ambient vectors to SNF coordinates.
    """
    invariant_factors: tuple
    generators: tuple
    free_rank: int = 0
    transform: tuple = ()
    positions: tuple = ()

    @property
    def order(self):
        if self.free_rank:
            return 0
        return reduce(lambda x, y: x * y, self.invariant_factors, 1)

    @property
    def rank(self):
        return len(self.invariant_factors) + self.free_rank

    def is_trivial(self):
        return not self.invariant_factors and not self.free_rank

    def coordinates(self, vector):
        """SNF coordinates of an ambient vector, reduced mod the invariant factors."""
        coords = []
        for idx, pos in enumerate(self.positions):
            value = sum(v * row[pos] for v, row in zip(vector, self.transform))
            if idx < len(self.invariant_factors):
                value %= self.invariant_factors[idx]
            coords.append(value)
        return tuple(coords)

    def element(self, coords):
        """Ambient vector of the element with the given SNF coordinates."""
        k = len(self.transform)
        out = [0] * k
        for c, gen in zip(coords, self.generators):
            for j in range(k):
                out[j] += c * gen[j]
        return tuple(out)

    def p_part(self, p):
        """
        The p-primary component as a list of (ambient generator, exponent e),
        the generator having order p^e.
        """
        parts = []
        for d, gen in zip(self.invariant_factors, self.generators):
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            if e:
                parts.append((tuple(d * x for x in gen), e))
        return parts

    def p_exponents(self, p):
        return [e for _, e in self.p_part(p)]

    def to_dict(self):
        return {
            "invariant_factors": [str(d) for d in self.invariant_factors],
            "free_rank": self.free_rank,
            "order": str(self.order),
        }


def abelian_group_structure(relations, ngens=None, finite=True):
    """
    Structure of the abelian group on ngens generators subject to the relation rows.

    Raises InfiniteGroup when the group has positive free rank and finite is set.
    """
    if isinstance(relations, IntMatrix):
        rows, k = list(relations.rows), relations.ncols
    else:
        rows = [tuple(int(x) for x in r) for r in relations]
        k = ngens if ngens is not None else (len(rows[0]) if rows else 0)
    if ngens is not None and ngens != k:
        raise ValueError(f"Relation width {k} does not match generator count {ngens}")
    if k == 0:
        return AbelianGroupStructure((), (), 0, (), ())

    D = full_rank_multiple(rows, k) if len(rows) >= k else None
    if D is None and finite:
        raise InfiniteGroup(f"relation lattice has rank below {k}")
    basis = hnf(rows, ncols=k, modulus=D) if D else hnf(rows, ncols=k)
    logger.debug(f"Relation lattice: {len(rows)} rows -> {len(basis)} HNF rows on {k} generators")

    a = [list(r) for r in basis]
    if not a:
        a = [[0] * k]
    _, V, Vinv = _snf_core(a, with_u=False)
    diag = [a[i][i] if i < len(a) else 0 for i in range(k)]

    factors, gens, positions = [], [], []
    free = []
    for i, d in enumerate(diag):
        d = abs(d)
        if d == 1:
            continue
        if d == 0:
            free.append(i)
            continue
        factors.append(d)
        gens.append(tuple(Vinv[i]))
        positions.append(i)
    if free and finite:
        raise InfiniteGroup(f"free rank {len(free)}")
    for i in free:
        gens.append(tuple(Vinv[i]))
        positions.append(i)
    return AbelianGroupStructure(tuple(factors), tuple(gens), len(free),
                                 tuple(tuple(r) for r in V), tuple(positions))


def _inverse_rational(rows):
    """Exact inverse of a square integer matrix as Fractions (Gauss-Jordan)."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [r[n:] for r in a]


def subgroup_structure(vectors, moduli):
    """
    Structure of the subgroup of Z/m1 + ... + Z/mk generated by vectors.

    Generators of the result are returned as ambient vectors reduced mod the moduli.
    """
    k = len(moduli)
    if k == 0:
        return AbelianGroupStructure((), (), 0, (), ())
    lattice = [tuple(v) for v in vectors] + [tuple(m if i == j else 0 for j in range(k))
                                             for i, m in enumerate(moduli)]
    det = reduce(lambda x, y: x * y, moduli, 1)
    B = hnf(lattice, ncols=k, modulus=det)
    Binv = _inverse_rational(B)
    # coordinates of the modulus lattice in the basis B
    C = []
    for i, m in enumerate(moduli):
        row = [m * Binv[i][j] for j in range(k)]
        if any(x.denominator != 1 for x in row):
            raise ArithmeticError("modulus lattice not contained in subgroup lattice")
        C.append([int(x) for x in row])
    inner = abelian_group_structure(C, k)
    gens = []
    for g in inner.generators:
        amb = [sum(g[i] * B[i][j] for i in range(k)) % moduli[j] for j in range(k)]
        gens.append(tuple(amb))
    # coordinates() is not meaningful for ambient vectors here, so no transform
    return AbelianGroupStructure(inner.invariant_factors, tuple(gens), 0, (), ())


def eliminate_unit_columns(rows, columns):
    """
    Remove the given columns by pivoting on rows with a +-1 entry there.

    Each listed column must have at least one row with entry +-1; that row is
    used to clear the column from every other row and then dropped along with
    the column. Returns (remaining rows, kept column indices).
    """
    work = [list(r) for r in rows]
    ncols = len(work[0]) if work else 0
    for col in columns:
        pivot_idx = next((i for i, r in enumerate(work) if abs(r[col]) == 1), None)
        if pivot_idx is None:
            raise ValueError(f"column {col} has no unit pivot")
        pivot = work.pop(pivot_idx)
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        for i, r in enumerate(work):
            f = r[col]
            if f:
                work[i] = [x - f * y for x, y in zip(r, pivot)]
    dropped = set(columns)
    keep = [j for j in range(ncols) if j not in dropped]
    return [tuple(r[j] for j in keep) for r in work], keep


def kronecker_symbol(a, n):
    """Kronecker symbol (a|n), defined for every integer n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi_symbol(a % n, n)


def valuation(n, p):
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def prime_divisors(n):
    return sorted(factorint(abs(n)).keys()) if abs(n) > 1 else []


def lcm_list(values):
    return reduce(lambda x, y: x * y // gcd(x, y), values, 1)


def hnf_lower(rows, ncols, modulus=None):
    """Lower-triangular row HNF: row i has its pivot in column i, zeros to the right."""
    upper = hnf([tuple(r)[::-1] for r in rows], ncols=ncols, modulus=modulus)
    return [tuple(r[::-1]) for r in reversed(upper)]


def kernel_mod_p(rows, p):
    """
    Basis of the left kernel {a : a * M = 0 mod p} of the matrix with the given
    rows, as lists of ints in [0, p).
    """
    if not rows:
        return []
    n = len(rows)
    m = len(rows[0])
    aug = [[x % p for x in row] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(rows)]
    r = 0
    for col in range(m):
        piv = next((i for i in range(r, n) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][col], -1, p)
        aug[r] = [(x * inv) % p for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
        r += 1
        if r == n:
            break
    return [row[m:] for row in aug[r:]]


def rank_mod_p(rows, p):
    if not rows:
        return 0
    return len(rows) - len(kernel_mod_p(rows, p))
