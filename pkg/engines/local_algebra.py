"""
Finite local algebras F[eps]/(eps^k) and 2x2 matrices over them.

Elements are plain tuples of k coefficients (lowest eps-degree first) so that
matrices hash cheaply during group enumeration. Over a prime field the
coefficients are ints in [0, p); otherwise FiniteFieldElements.
"""

from engines.errors import ZeroElement
from engines.finite_fields import FiniteField, FiniteFieldElement


class LocalAlgebra:
    """F[eps]/(eps^k); k = 1 is the field itself."""

    def __init__(self, field, k=2):
        if k < 1:
            raise ValueError(f"Nilpotency index must be positive: {k}")
        self.field = field
        self.p = field.p
        self.k = k
        self.prime = field.r == 1
        self.czero = 0 if self.prime else field.zero
        self.cone = 1 if self.prime else field.one
        self.zero = (self.czero,) * k
        self.one = (self.cone,) + (self.czero,) * (k - 1)

    def __eq__(self, other):
        return isinstance(other, LocalAlgebra) and self.field == other.field and self.k == other.k

    def __hash__(self):
        return hash((self.field, self.k))

    def __repr__(self):
        if self.k == 1:
            return repr(self.field)
        return f"{self.field!r}[eps]/(eps^{self.k})"

    # coefficients

    def coeff(self, x):
        if self.prime:
            if isinstance(x, FiniteFieldElement):
                return x.to_int()
            return int(x) % self.p
        return self.field(x)

    def _cmul(self, x, y):
        return (x * y) % self.p if self.prime else x * y

    def _cadd(self, x, y):
        return (x + y) % self.p if self.prime else x + y

    def _csub(self, x, y):
        return (x - y) % self.p if self.prime else x - y

    def _cinv(self, x):
        if not x:
            raise ZeroElement("inverse of a non-unit")
        return pow(x, -1, self.p) if self.prime else x.inverse()

    def field_value(self, x):
        """A coefficient as a FiniteFieldElement."""
        return self.field(x) if self.prime else x

    # elements

    def element(self, *coeffs):
        out = [self.coeff(c) for c in coeffs[:self.k]]
        return tuple(out) + (self.czero,) * (self.k - len(out))

    def scalar(self, x):
        return self.element(x)

    def eps(self, power=1):
        if power >= self.k:
            return self.zero
        return tuple(self.cone if i == power else self.czero for i in range(self.k))

    def add(self, a, b):
        return tuple(self._cadd(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(self._csub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self._csub(self.czero, x) for x in a)

    def mul(self, a, b):
        k = self.k
        if k == 1:
            return (self._cmul(a[0], b[0]),)
        out = [self.czero] * k
        for i, x in enumerate(a):
            if not x:
                continue
            for j in range(k - i):
                y = b[j]
                if y:
                    out[i + j] = self._cadd(out[i + j], self._cmul(x, y))
        return tuple(out)

    def is_unit(self, a):
        return bool(a[0])

    def inv(self, a):
        inv0 = self._cinv(a[0])
        unit = tuple(self._cmul(inv0, x) for x in a)
        nil = (self.czero,) + unit[1:]
        # (1 + n)^-1 = sum (-n)^i, n nilpotent
        result = self.one
        term = self.one
        minus_nil = self.neg(nil)
        for _ in range(1, self.k):
            term = self.mul(term, minus_nil)
            result = self.add(result, term)
        return tuple(self._cmul(inv0, x) for x in result)

    def power(self, a, e):
        if e < 0:
            return self.power(self.inv(a), -e)
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def residue(self, a):
        return a[0]

    def truncate(self, a, j):
        return tuple(a[:j])

    def truncated(self, j):
        return LocalAlgebra(self.field, j)

    def residue_algebra(self):
        return LocalAlgebra(self.field, 1)

    def lift(self, a, algebra):
        """Embed an element of a truncation of this algebra (zero padding)."""
        return tuple(a) + (self.czero,) * (self.k - len(a))

    def format(self, a):
        terms = []
        for i, c in enumerate(a):
            if c:
                terms.append(str(c) if i == 0 else (f"{c}*e" if i == 1 else f"{c}*e^{i}"))
        return " + ".join(terms) or "0"


class Mat2Ring:
    """2x2 matrices (a, b, c, d) = [[a, b], [c, d]] over a LocalAlgebra."""

    def __init__(self, algebra):
        self.algebra = algebra
        A = algebra
        self.identity = (A.one, A.zero, A.zero, A.one)

    def __eq__(self, other):
        return isinstance(other, Mat2Ring) and self.algebra == other.algebra

    def __hash__(self):
        return hash(("mat2", self.algebra))

    def matrix(self, a, b, c, d):
        A = self.algebra
        return tuple(x if isinstance(x, tuple) else A.scalar(x) for x in (a, b, c, d))

    def diag(self, x, y):
        return self.matrix(x, 0, 0, y)

    def antidiag(self, x, y):
        """[[0, x], [y, 0]]."""
        return self.matrix(0, x, y, 0)

    def scalar(self, x):
        return self.matrix(x, 0, 0, x)

    def mul(self, m, n):
        A = self.algebra
        a, b, c, d = m
        e, f, g, h = n
        return (
            A.add(A.mul(a, e), A.mul(b, g)),
            A.add(A.mul(a, f), A.mul(b, h)),
            A.add(A.mul(c, e), A.mul(d, g)),
            A.add(A.mul(c, f), A.mul(d, h)),
        )

    def add(self, m, n):
        A = self.algebra
        return tuple(A.add(x, y) for x, y in zip(m, n))

    def sub(self, m, n):
        A = self.algebra
        return tuple(A.sub(x, y) for x, y in zip(m, n))

    def scale(self, x, m):
        A = self.algebra
        return tuple(A.mul(x, y) for y in m)

    def det(self, m):
        A = self.algebra
        a, b, c, d = m
        return A.sub(A.mul(a, d), A.mul(b, c))

    def trace(self, m):
        return self.algebra.add(m[0], m[3])

    def is_invertible(self, m):
        return self.algebra.is_unit(self.det(m))

    def inverse(self, m):
        A = self.algebra
        a, b, c, d = m
        inv = A.inv(self.det(m))
        return (A.mul(inv, d), A.mul(inv, A.neg(b)), A.mul(inv, A.neg(c)), A.mul(inv, a))

    def power(self, m, e):
        if e < 0:
            return self.power(self.inverse(m), -e)
        result, base = self.identity, m
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def conj(self, g, m):
        """g m g^-1."""
        return self.mul(self.mul(g, m), self.inverse(g))

    def commutator(self, x, y):
        return self.mul(self.mul(x, y), self.mul(self.inverse(x), self.inverse(y)))

    def is_diagonal(self, m):
        z = self.algebra.zero
        return m[1] == z and m[2] == z

    def is_antidiagonal(self, m):
        z = self.algebra.zero
        return m[0] == z and m[3] == z

    def residue(self, m):
        return tuple(x[:1] for x in m)

    def truncate(self, m, j):
        return tuple(x[:j] for x in m)

    def lift(self, m):
        """Embed a matrix over a truncation by zero padding."""
        A = self.algebra
        return tuple(A.lift(x, None) for x in m)

    def is_residually_identity(self, m):
        A = self.algebra
        return (m[0][0] == A.cone and m[3][0] == A.cone and not m[1][0] and not m[2][0])

    def element_order(self, m, limit=10 ** 6):
        x = m
        for n in range(1, limit + 1):
            if x == self.identity:
                return n
            x = self.mul(x, m)
        raise ArithmeticError(f"element order exceeds {limit}")

    def format(self, m):
        A = self.algebra
        a, b, c, d = (A.format(x) for x in m)
        return f"[[{a}, {b}], [{c}, {d}]]"


def prime_field_algebra(p, k=2, r=1):
    return LocalAlgebra(FiniteField(p, r), k)
