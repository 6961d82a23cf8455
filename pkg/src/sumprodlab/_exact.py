"""Certified comparisons for quantities of the form ``n * 2**(j * p/q)``.

The regularity and content code needs to order sums of dyadic powers with an
irrational exponent.  Everything funnels through three layers:

1. an exact zero test by grouping exponents modulo q (valid because
   ``x**q - 2`` is Eisenstein-irreducible, so ``{2**(r/q)}`` is a Q-basis),
2. a float evaluation with a conservative error envelope,
3. a ``decimal`` evaluation with precision escalation for the rare near-ties.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Mapping

__all__ = [
    "compare_rational_pow2",
    "iroot_floor",
    "nth_root_bounds",
    "pow2_bounds",
    "power_sum_sign",
    "power_sum_value",
]


def iroot_floor(n: int, q: int) -> int:
    """floor(n ** (1/q)) for n >= 0 by Newton iteration on big ints."""
    if n < 0:
        raise ValueError("iroot_floor requires n >= 0")
    if q < 1:
        raise ValueError("iroot_floor requires q >= 1")
    if n in (0, 1) or q == 1:
        return n
    x = 1 << -(-n.bit_length() // q)  # 2**ceil(bits/q) >= true root
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x ** q > n:
        x -= 1
    return x


def nth_root_bounds(value: Fraction, q: int, bits: int = 48) -> tuple[Fraction, Fraction]:
    """Certified enclosure of value**(1/q) with relative width about 2**-bits."""
    if value < 0:
        raise ValueError("nth_root_bounds requires value >= 0")
    if value == 0:
        return (Fraction(0), Fraction(0))
    scaled = (value.numerator << (q * bits)) // value.denominator
    lo = iroot_floor(scaled, q)
    return (Fraction(lo, 1 << bits), Fraction(lo + 2, 1 << bits))


def _zero_by_residues(terms: Mapping[int, int], alpha: Fraction) -> bool:
    """Exact test of ``sum n_j * 2**(-j*alpha) == 0`` via residue grouping.

    Each term is ``n * 2**(e/q)`` with ``e = -j*p``; splitting ``e = q*k + r``
    groups the sum as ``sum_r a_r * 2**(r/q)`` with dyadic-rational ``a_r``.
    The powers ``2**(r/q)`` are linearly independent over Q, so the sum
    vanishes iff every ``a_r`` does.
    """
    p, q = alpha.numerator, alpha.denominator
    parts: list[tuple[int, int, int]] = []
    for j, n in terms.items():
        if n == 0:
            continue
        e = -j * p
        r = e % q
        parts.append((r, (e - r) // q, n))
    if not parts:
        return True
    kmin = min(k for _, k, _ in parts)
    acc: dict[int, int] = {}
    for r, k, n in parts:
        acc[r] = acc.get(r, 0) + (n << (k - kmin))
    return all(v == 0 for v in acc.values())


def _float_sign(terms: Mapping[int, int], alpha_f: float) -> int | None:
    total = 0.0
    envelope = 0.0
    for j, n in terms.items():
        if n == 0:
            continue
        t = float(n) * 2.0 ** (-j * alpha_f)
        total += t
        envelope += abs(t)
    bound = envelope * 1e-12 + 5e-324
    if total > bound:
        return 1
    if total < -bound:
        return -1
    return None


def _decimal_sign(terms: Mapping[int, int], alpha: Fraction) -> int:
    prec = 40
    while prec <= 2500:
        with localcontext() as ctx:
            ctx.prec = prec
            ln2 = Decimal(2).ln()
            a = Decimal(alpha.numerator) / Decimal(alpha.denominator)
            total = Decimal(0)
            envelope = Decimal(0)
            for j, n in terms.items():
                if n == 0:
                    continue
                t = Decimal(n) * (-(Decimal(j) * a) * ln2).exp()
                total += t
                envelope += abs(t)
            err = envelope * Decimal(10) ** (4 - prec)
            if total > err:
                return 1
            if total < -err:
                return -1
        prec *= 2
    raise ArithmeticError("could not certify the sign of a dyadic power sum")


def power_sum_sign(terms: Mapping[int, int], alpha: Fraction) -> int:
    """Certified sign of ``sum_j terms[j] * 2**(-j*alpha)`` (-1, 0 or 1)."""
    live = {j: n for j, n in terms.items() if n != 0}
    if not live:
        return 0
    if all(n > 0 for n in live.values()):
        return 1
    if all(n < 0 for n in live.values()):
        return -1
    if _zero_by_residues(live, alpha):
        return 0
    s = _float_sign(live, float(alpha))
    if s is not None:
        return s
    return _decimal_sign(live, alpha)


def power_sum_value(terms: Mapping[int, int], alpha: Fraction) -> float:
    """Plain float value of the power sum (reporting only, not for comparisons)."""
    af = float(alpha)
    return math.fsum(float(n) * 2.0 ** (-j * af) for j, n in terms.items())


def _log2_fraction(r: Fraction) -> float:
    return math.log2(r.numerator) - math.log2(r.denominator)


def compare_rational_pow2(
    r1: Fraction, t1: Fraction, r2: Fraction, t2: Fraction
) -> int:
    """Certified sign of ``r1 * 2**t1 - r2 * 2**t2`` for nonnegative rationals.

    Exact ties are detected algebraically (the ratio must be an integer power
    of two matching the exponent gap); everything else resolves through a
    float log comparison with an error envelope, escalating to ``decimal``.
    """
    if r1 < 0 or r2 < 0:
        raise ValueError("compare_rational_pow2 expects nonnegative bases")
    if r1 == 0 or r2 == 0:
        return (r1 > 0) - (r2 > 0)
    ratio = r1 / r2
    num, den = ratio.numerator, ratio.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        u = num.bit_length() - den.bit_length()
        if Fraction(u) == t2 - t1:
            return 0
    d1 = _log2_fraction(r1) + float(t1)
    d2 = _log2_fraction(r2) + float(t2)
    envelope = 1e-12 * (abs(d1) + abs(d2) + 4.0)
    if d1 - d2 > envelope:
        return 1
    if d2 - d1 > envelope:
        return -1
    prec = 60
    while prec <= 2500:
        with localcontext() as ctx:
            ctx.prec = prec
            ln2 = Decimal(2).ln()
            l1 = (
                Decimal(r1.numerator).ln()
                - Decimal(r1.denominator).ln()
                + Decimal(t1.numerator) / Decimal(t1.denominator) * ln2
            )
            l2 = (
                Decimal(r2.numerator).ln()
                - Decimal(r2.denominator).ln()
                + Decimal(t2.numerator) / Decimal(t2.denominator) * ln2
            )
            err = (abs(l1) + abs(l2) + 4) * Decimal(10) ** (4 - prec)
            if l1 - l2 > err:
                return 1
            if l2 - l1 > err:
                return -1
        prec *= 2
    raise ArithmeticError("could not certify a rational-power comparison")


def pow2_bounds(t: Fraction, margin_exp: int = -30) -> tuple[Fraction, Fraction]:
    """Certified enclosure of ``2**t`` with relative width about 10**margin_exp."""
    with localcontext() as ctx:
        ctx.prec = 45
        x = Decimal(t.numerator) / Decimal(t.denominator) * Decimal(2).ln()
        v = Fraction(x.exp())
    slack = Fraction(10) ** margin_exp
    return (v * (1 - slack), v * (1 + slack))
