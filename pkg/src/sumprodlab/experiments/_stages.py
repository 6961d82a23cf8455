"""Stages shared by the difference-product and sum-product pipelines.

Both runs start the same way: build the ground set, check the theorem
hypotheses (reject degenerate inputs with the measured constant attached),
extract a uniform part along the tolerance ladder, and record the
bookkeeping entries.  They also share the scale-range exponent ``upsilon``
of the product set and a couple of small brute-force recounts used by
``--brute-check``.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import numpy as np

from ..energy import delta_power
from ..grid import GridSet
from ..regularity import frostman_constant
from ..uniformize import extract_uniform, ladder_period
from .config import ExperimentConfig, HypothesisError
from .ledger import InequalityLedger

__all__ = [
    "prepare_ground_set",
    "upsilon_exponent",
    "brute_rich_degrees",
    "brute_pair_shift_count",
    "brute_collision_sum",
    "brute_moment",
]


def prepare_ground_set(
    cfg: ExperimentConfig, ledger: InequalityLedger
) -> tuple[GridSet, GridSet, int]:
    """Build A, verify the hypotheses, and return (raw, uniform part, period).

    Gate: at least two cells, ``#A <= delta**-(s+eps)`` and the measured
    non-concentration constant within ``max(delta**-eps, m**2)`` -- the same
    polylog cushion the random generator applies, since the clean power-law
    budget is unreachable at desk scales (the stock construction already
    measures 2.0 while ``delta**-eps`` can be below that for small eps*m).
    """
    a_raw = cfg.generator.build()
    m, s = cfg.m, cfg.s
    n_raw = len(a_raw)
    if n_raw < 2:
        raise HypothesisError(
            f"ground set must contain at least two cells, got {n_raw}",
            measured=float(n_raw),
        )
    size_budget = 1 / delta_power(m, s + Fraction(cfg.eps), "floor")
    if n_raw > size_budget:
        raise HypothesisError(
            f"ground set too large for the size hypothesis: {n_raw} > {size_budget}",
            measured=float(n_raw),
        )
    fro = frostman_constant(a_raw, s, kind="set")
    budget = max(1 / delta_power(m, Fraction(cfg.eps), "floor"), Fraction(m * m))
    if not fro.satisfies(budget):
        raise HypothesisError(
            f"ground set fails the non-concentration check: measured constant "
            f"{fro.value:.6g} exceeds the budget {float(budget):.6g}",
            measured=fro.value,
        )
    ledger.log(
        "ground-frostman-constant",
        "measured non-concentration constant of A against the eps budget",
        fro.value,
        2.0 ** (cfg.eps * m),
    )
    kt = frostman_constant(a_raw, s, kind="kt")
    ledger.log(
        "ground-kt-constant",
        "measured ball-count constant of A against the doubled eps budget",
        kt.value,
        2.0 ** (2 * cfg.eps * m),
    )

    period = ladder_period(m, cfg.eps)
    a_uni, cert = extract_uniform(a_raw, period)
    ledger.hard(
        "ground-uniform-retention",
        "pigeonhole guarantee of the uniform extraction on A",
        cert.guaranteed_fraction() * n_raw <= len(a_uni),
        cert.guaranteed_fraction() * n_raw,
        len(a_uni),
    )
    return a_raw, a_uni, period


def upsilon_exponent(g: GridSet, eps: float, c_scale: float) -> tuple[float, int]:
    """Smallest x with ``N_rho(g) <= rho**-x`` across the restricted scale range.

    The range starts at level ``ceil(c_scale * eps * m)`` (the resolution of
    the ``delta**O(eps)`` cutoff) and runs to the finest scale; the value is
    the max of ``log2(N_j) / j``, with the achieving level returned.
    """
    m = g.m
    arr = g.as_array()
    lo = max(1, math.ceil(c_scale * eps * m))
    best, best_j = 0.0, lo
    for j in range(lo, m + 1):
        n_j = int(np.unique(arr >> (m - j)).size)
        val = math.log2(n_j) / j
        if val > best:
            best, best_j = val, j
    return best, best_j


# -- small independent recounts for --brute-check ------------------------------------


def brute_rich_degrees(a: GridSet, near_target: GridSet) -> list[int]:
    """deg(x) = #{y in A : x - y in near_target}, by plain set lookups."""
    target = set(near_target.cells)
    return [sum(1 for y in a.cells if x - y in target) for x in a.cells]


def brute_pair_shift_count(u: GridSet, shifts: GridSet) -> int:
    """#{(x, y) in U^2 : x - y in shifts}, one vectorized pass per shift."""
    arr = u.as_array()
    total = 0
    for x in shifts.cells:
        total += int(np.isin(arr - x, arr).sum())
    return total


def brute_collision_sum(rich: GridSet, a: GridSet) -> int:
    """sum over pairs (r, r') of R^2 of (#{(x, y) in A^2 : x - y = r - r'})^2."""
    fib = Counter(x - y for x in a.cells for y in a.cells)
    return sum(fib[r - rp] ** 2 for r in rich.cells for rp in rich.cells)


def brute_moment(a: GridSet, b: GridSet, k: int, mode: str, w: int) -> int:
    """k-th windowed moment of the pair histogram, by Counter arithmetic."""
    if mode == "difference":
        fib = Counter(x - y for x in a.cells for y in b.cells)
    else:
        fib = Counter(x + y for x in a.cells for y in b.cells)
    centers = set()
    for z in fib:
        centers.update(range(z - w, z + w + 1))
    return sum(
        sum(fib[z + t] for t in range(-w, w + 1)) ** k for z in centers
    )
