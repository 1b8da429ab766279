"""
Small models of the cubic subfield for q = 3.

The CM coset-trace polynomial of a class-number-15 field has coefficients of
several hundred digits; the cubic field of discriminant d it defines also has
a trace-zero model y^3 + u y + v with -4u^3 - 27v^2 = d k^2 and small u, v.
The search below finds one, proves its field discriminant is d and checks it
against the CM polynomial prime by prime.
"""

from dataclasses import replace
from math import isqrt

from sympy import Poly, primerange

from engines.cm_classfield_engine import X, degree_2q_polynomial, frobenius_signature
from engines.errors import DegenerateGenerator
from engines.logging_config import get_logger
from engines.numfield_engine import maximal_order

logger = get_logger(__name__)

SIGNATURE_PRIMES = 30


def _is_irreducible(u, v):
    return v != 0 and Poly([1, 0, u, v], X).is_irreducible


def trace_zero_candidates(d, max_k=None):
    """
    (u, v, k) with -4u^3 - 27v^2 = d k^2, k increasing then |u|, then v >= 0,
    searched inside |u| <= 3 sqrt|d|.
    """
    D = -d
    u_bound = 3 * isqrt(D) + 3
    v_square_bound = (2 * isqrt(D) + 2) ** 3
    k_limit = max_k or isqrt((4 * u_bound ** 3 + 27 * v_square_bound) // D) + 1
    for k in range(1, k_limit + 1):
        rhs_const = D * k * k
        for au in range(0, u_bound + 1):
            for u in ((au, -au) if au else (0,)):
                rest = rhs_const - 4 * u ** 3
                if rest < 0 or rest % 27:
                    continue
                v2 = rest // 27
                v = isqrt(v2)
                if v * v != v2:
                    continue
                if not _is_irreducible(u, v):
                    continue
                yield u, v, k


def _signatures_agree(small, large, count=SIGNATURE_PRIMES):
    checked = 0
    for ell in primerange(5, 10 ** 5):
        a = frobenius_signature(small, ell)
        if a is None:
            continue
        b = frobenius_signature(large, ell)
        if b is None:
            continue
        if a != b:
            logger.debug(f"Frobenius patterns differ at {ell}: {a} vs {b}")
            return False
        checked += 1
        if checked >= count:
            return True
    return checked > 0


def cubic_field_model(d):
    """Trace-zero cubic y^3 + u y + v generating the cubic field of discriminant d."""
    for u, v, k in trace_zero_candidates(d):
        poly = (1, 0, u, v)
        if k > 1:
            order = maximal_order(poly)
            if order.discriminant != d:
                continue
        logger.debug(f"cubic model for {d}: y^3 + {u} y + {v} (index {k})")
        return poly
    raise DegenerateGenerator(f"no trace-zero cubic of field discriminant {d} in the search box")


def reduce_model(sub):
    """
    SubfieldPolynomial with the same field M and a small defining polynomial.
    Only q = 3 has a reduced model; other q are returned unchanged.
    """
    if sub.q != 3:
        return sub
    cubic = cubic_field_model(sub.d)
    real_cm = [u for u, v in sub.real_polynomial]
    if any(v for _, v in sub.real_polynomial):
        raise DegenerateGenerator("coset-trace polynomial is not rational")
    if not _signatures_agree(cubic, real_cm):
        raise DegenerateGenerator(f"small cubic model disagrees with the CM polynomial for {sub.d}")
    real_poly = tuple((c, 0) for c in cubic)
    poly, offset = degree_2q_polynomial(real_poly, sub.d, 3, start_offset=1)
    logger.info(f"Reduced model for ({sub.d}, 3): {list(poly)}")
    return replace(sub, polynomial=poly, real_polynomial=real_poly, generator_offset=offset, model="reduced")
