"""
Class polynomials from CM values of the modular j-function.

j is evaluated through the eta quotient h = (eta(2 tau)/eta(tau))^24, with
j = (1 + 256 h)^3 / h, both eta products summed as pentagonal-number series.
All evaluation happens at the working precision plus GUARD_BITS.
"""

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp
from sympy import Poly, integer_nthroot, primerange, resultant, symbols

from engines.errors import DegenerateGenerator, PrecisionExhausted
from engines.finite_fields import poly_factor_mod_p
from engines.logging_config import get_logger
from engines.quadform_engine import class_group, prime_frobenius_class

logger = get_logger(__name__)

GUARD_BITS = 24
TAIL_MARGIN = 16
MAX_DOUBLINGS = 4
MAX_GENERATOR_OFFSET = 12
MAX_SERIES_TERMS = 10 ** 6

X, Z = symbols("x z")


@dataclass(frozen=True)
class CMPoint:
    form: tuple
    precision: int
    tau: object = field(compare=False, repr=False)

    @classmethod
    def from_form(cls, form, precision):
        a, b, c = form.as_tuple() if hasattr(form, "as_tuple") else form
        d = b * b - 4 * a * c
        with mp.workprec(precision + GUARD_BITS):
            tau = (-b + mpmath.sqrt(mpmath.mpf(d))) / (2 * a)
        return cls((a, b, c), precision, tau)


def _reduce_tau(tau):
    # move tau into the standard fundamental domain; j is SL2(Z)-invariant
    for _ in range(1000):
        tau = tau - mpmath.nint(tau.real)
        if abs(tau) < 1:
            tau = -1 / tau
        else:
            return tau
    return tau


def _pentagonal_sum(q, prec_bits):
    """prod (1 - q^n) = sum_k (-1)^k q^(k(3k-1)/2) over all integers k."""
    log2q = -float(mpmath.log(abs(q), 2)) if q != 0 else float("inf")
    total = mpmath.mpc(1)
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 * log2q > prec_bits + TAIL_MARGIN:
            return total
        if k > MAX_SERIES_TERMS:
            raise PrecisionExhausted(f"eta series did not converge at |q| = {mpmath.nstr(abs(q), 5)}")
        e2 = k * (3 * k + 1) // 2
        sign = -1 if k % 2 else 1
        total += sign * (q ** e1 + q ** e2)
        k += 1


def eval_j(tau, precision):
    """j(tau) with relative accuracy about 2^-precision."""
    with mp.workprec(precision + GUARD_BITS):
        tau = mpmath.mpmathify(tau)
        if tau.imag <= 0:
            raise ValueError(f"tau must lie in the upper half plane: {tau}")
        tau = _reduce_tau(mpmath.mpc(tau))
        q = mpmath.exp(2j * mpmath.pi * tau)
        bits = precision + GUARD_BITS
        ratio = _pentagonal_sum(q * q, bits) / _pentagonal_sum(q, bits)
        h = q * ratio ** 24
        return (1 + 256 * h) ** 3 / h


def starting_precision(forms, d):
    return 64 + math.ceil(3.5 * sum(math.pi * math.sqrt(abs(d)) / f.a for f in forms))


def _product_coefficients(values):
    """Coefficients (highest first) of prod (x - v)."""
    coeffs = [mpmath.mpc(1)]
    for v in values:
        nxt = coeffs + [mpmath.mpc(0)]
        for i in range(1, len(nxt)):
            nxt[i] -= v * coeffs[i - 1]
        coeffs = nxt
    return coeffs


def _round_integers(coeffs, precision):
    ints, residual = [], mpmath.mpf(0)
    for c in coeffs:
        r = int(mpmath.nint(c.real))
        residual = max(residual, abs(c.real - r), abs(c.imag))
        ints.append(r)
    return ints, residual


def hilbert_class_polynomial(d, precision=None, max_doublings=MAX_DOUBLINGS):
    """
    Monic integer polynomial prod (x - j(tau_f)) over the reduced forms of d.

    Coefficients are accepted once they round identically at P and 2P with a
    residual below 2^(-P/4).
    """
    group = class_group(d)
    forms = group.forms
    precision = precision or starting_precision(forms, d)
    for _ in range(max_doublings + 1):
        results = []
        for prec in (precision, 2 * precision):
            with mp.workprec(prec + GUARD_BITS):
                roots = [eval_j(CMPoint.from_form(f, prec).tau, prec) for f in forms]
                ints, residual = _round_integers(_product_coefficients(roots), prec)
                ok = residual < mpmath.mpf(2) ** (-prec // 4)
            results.append((ints, ok, residual))
        (first, ok1, res1), (second, ok2, _) = results
        if ok1 and ok2 and first == second:
            logger.info(f"Class polynomial of {d}: degree {len(forms)}, precision {precision} bits")
            logger.debug(f"rounding residual {mpmath.nstr(res1, 5)}")
            return first
        logger.warning(f"Class polynomial of {d} unstable at {precision} bits; doubling")
        precision *= 2
    raise PrecisionExhausted(f"class polynomial of {d} not stable after {max_doublings} doublings")


@dataclass(frozen=True)
class SubfieldPolynomial:
    d: int
    q: int
    polynomial: tuple
    real_polynomial: tuple
    generator_offset: int
    precision: int
    residual: str
    cosets: tuple = ()
    model: str = "cm"

    @property
    def degree(self):
        return len(self.polynomial) - 1

    def as_poly(self):
        return Poly(list(self.polynomial), X)

    def to_dict(self):
        return {
            "d": str(self.d),
            "q": self.q,
            "polynomial": [str(c) for c in self.polynomial],
            "real_polynomial": [[str(u), str(v)] for u, v in self.real_polynomial],
            "generator_offset": self.generator_offset,
            "precision": self.precision,
            "residual": self.residual,
            "cosets": [list(c) for c in self.cosets],
            "model": self.model,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            d=int(data["d"]),
            q=int(data["q"]),
            polynomial=tuple(int(c) for c in data["polynomial"]),
            real_polynomial=tuple((int(u), int(v)) for u, v in data["real_polynomial"]),
            generator_offset=int(data["generator_offset"]),
            precision=int(data["precision"]),
            residual=data["residual"],
            cosets=tuple(tuple(c) for c in data.get("cosets", ())),
            model=data.get("model", "cm"),
        )


def omega_data(d):
    """(trace, norm) of omega with O_L = Z[omega]."""
    if d % 4 == 0:
        return 0, -d // 4
    return 1, (1 - d) // 4


def _recognize(coeffs, d, precision):
    """Write complex coefficients as u + v*omega with integers u, v."""
    with mp.workprec(precision + GUARD_BITS):
        if d % 4 == 0:
            omega = mpmath.sqrt(mpmath.mpf(d)) / 2
        else:
            omega = (1 + mpmath.sqrt(mpmath.mpf(d))) / 2
        out, residual = [], mpmath.mpf(0)
        for c in coeffs:
            v = c.imag / omega.imag
            u = c.real - v * omega.real
            ru, rv = int(mpmath.nint(u)), int(mpmath.nint(v))
            residual = max(residual, abs(u - ru), abs(v - rv))
            out.append((ru, rv))
    return out, residual


def compose_with_quadratic(real_poly, d, offset):
    """
    Integer polynomial (highest first) of y + offset*omega where y runs over
    roots of the O_L-polynomial real_poly given as (u, v) pairs.
    """
    trace, norm = omega_data(d)
    deg = len(real_poly) - 1
    g = sum((u + v * Z) * (X - offset * Z) ** (deg - k) for k, (u, v) in enumerate(real_poly))
    res = resultant(g, Z ** 2 - trace * Z + norm, Z)
    return tuple(int(c) for c in Poly(res, X).all_coeffs())


def frobenius_signature(poly, ell, seed=0):
    """Sorted factor degrees of poly mod ell, or None when ell divides the discriminant."""
    factors = poly_factor_mod_p(list(poly), ell, seed)
    if any(mult > 1 for _, mult in factors):
        return None
    return tuple(sorted(len(f) - 1 for f, _ in factors))


def _irreducible_by_signatures(poly, limit=400):
    """
    Irreducibility certificate from factor patterns mod small primes: the
    possible degrees of a rational factor are the subset sums of every pattern.
    """
    n = len(poly) - 1
    possible = set(range(1, n + 1))
    for ell in primerange(3, limit):
        if poly[0] % ell == 0:
            continue
        sig = frobenius_signature(poly, ell)
        if sig is None:
            continue
        sums = {0}
        for deg in sig:
            sums |= {s + deg for s in sums}
        possible &= sums
        if possible == {n}:
            return True
    return Poly(list(poly), X).is_irreducible


def _check_unramified(poly, d, q):
    disc = int(Poly(list(poly), X).discriminant())
    base = d ** q
    if disc % base:
        raise DegenerateGenerator(f"polynomial discriminant not divisible by {d}^{q}")
    quotient = disc // base
    root, exact = integer_nthroot(abs(quotient), 2) if quotient > 0 else (0, False)
    if not exact:
        raise DegenerateGenerator("discriminant quotient is not a square; M/L would ramify")
    return root


def degree_2q_polynomial(real_poly, d, q, start_offset=0):
    """First offset u with a squarefree, irreducible minimal polynomial of degree 2q."""
    for offset in range(start_offset, start_offset + MAX_GENERATOR_OFFSET):
        poly = compose_with_quadratic(real_poly, d, offset)
        P = Poly(list(poly), X)
        if P.degree() != 2 * q or P.gcd(P.diff(X)).degree() > 0:
            logger.debug(f"generator offset {offset} degenerate")
            continue
        if not _irreducible_by_signatures(poly):
            continue
        _check_unramified(poly, d, q)
        return poly, offset
    raise DegenerateGenerator(f"no generator offset below {start_offset + MAX_GENERATOR_OFFSET} works")


def subfield_defining_polynomial(d, q, precision=None, max_doublings=MAX_DOUBLINGS, group=None):
    """
    Degree-2q polynomial of the unramified cyclic degree-q extension M of
    L = Q(sqrt d), via traces of j over the cosets of the index-q subgroup.
    """
    group = group or class_group(d)
    character = group.quotient_character(q)
    cosets = character.cosets(group)
    forms = group.forms
    precision = precision or starting_precision(forms, d)

    for _ in range(max_doublings + 1):
        results = []
        for prec in (precision, 2 * precision):
            with mp.workprec(prec + GUARD_BITS):
                values = {f: eval_j(CMPoint.from_form(f, prec).tau, prec) for f in forms}
                traces = [mpmath.fsum(values[f] for f in coset) for coset in cosets]
                coeffs = _product_coefficients(traces)
                recognized, residual = _recognize(coeffs, d, prec)
                ok = residual < mpmath.mpf(2) ** (-prec // 4)
            results.append((recognized, ok, residual))
        (first, ok1, res1), (second, ok2, _) = results
        if ok1 and ok2 and first == second:
            break
        logger.warning(f"Coset-trace polynomial for ({d}, {q}) unstable at {precision} bits; doubling")
        precision *= 2
    else:
        raise PrecisionExhausted(f"coset traces for ({d}, {q}) not recognized after {max_doublings} doublings")

    poly, offset = degree_2q_polynomial(first, d, q)
    if offset:
        logger.info(f"Generator perturbed by {offset}*omega for ({d}, {q})")
    coset_labels = tuple(tuple(str(f) for f in c) for c in cosets)
    logger.info(f"Subfield polynomial for ({d}, {q}): degree {len(poly) - 1}, precision {precision}")
    return SubfieldPolynomial(d, q, poly, tuple(first), offset, precision,
                              mpmath.nstr(res1, 5), coset_labels)


def predicted_frobenius_order(group, character, ell):
    """
    Order of Frobenius at an unramified ell in Gal(M/Q) = D_q: the order of the
    class of a prime above ell in Z/q when ell splits in L, 2 when inert.
    """
    datum = prime_frobenius_class(group.d, ell)
    if datum.is_inert:
        return 2
    if datum.is_ramified:
        return None
    value = character.value(group, datum.form)
    return 1 if value == 0 else character.q
