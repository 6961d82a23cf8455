"""Branching regularization along a ladder of intermediate scales.

A grid set is *uniform* along a ladder ``0 < T < 2T < ... < m`` when, between
consecutive ladder levels, every occupied coarse cell contains roughly the
same number of occupied fine cells (within a fixed factor).  Arbitrary sets
are far from uniform, but a positive proportion of any set can be made
uniform by pigeonholing the child counts into dyadic classes and keeping the
class carrying the most mass, sweeping rungs from the finest scale upward.
Removing whole subtrees at a coarse rung never disturbs the counts certified
at finer rungs, which is what makes the bottom-up order correct.

All selections are deterministic: class ties keep the smaller class index,
and the per-rung pigeonhole guarantee ``kept * n_classes >= total`` is
asserted exactly on integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grid import GridSet

__all__ = [
    "solve_T_eps",
    "ladder_period",
    "ladder_levels",
    "UniformityCheck",
    "is_uniform",
    "RungRecord",
    "UniformCertificate",
    "extract_uniform",
    "partition_uniform",
]


def solve_T_eps(eps: float) -> float:
    """Root of ``log2(2*T) / T = eps`` on the decreasing branch.

    The map ``T -> log2(2*T)/T`` rises to its maximum at ``T = e/2`` and then
    decays to zero; the meaningful solution (a period that *grows* as the
    tolerance shrinks) is the one beyond the maximum.  Anchors: ``eps = 1``
    gives ``T = 2`` and ``eps = 0.5`` gives ``T = 8``.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")

    def f(t: float) -> float:
        return math.log2(2.0 * t) / t

    lo = math.e / 2.0
    hi = 4.0
    while f(hi) > eps:
        hi *= 2.0
    while hi - lo > 1e-13 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) > eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ladder_period(m: int, eps: float) -> int:
    """Smallest divisor of m at least ``solve_T_eps(eps)``; m itself if none."""
    if m < 1:
        raise ValueError("m must be positive")
    # a hair of tolerance so bisection wobble cannot skip an exact-integer root
    target = solve_T_eps(eps) - 1e-9
    divisors = sorted(d for d in range(1, m + 1) if m % d == 0)
    for d in divisors:
        if d >= target:
            return d
    return m


def ladder_levels(m: int, period: int) -> tuple[int, ...]:
    if not 1 <= period <= m:
        raise ValueError(f"period must lie in [1, {m}], got {period}")
    levels = list(range(0, m, period))
    levels.append(m)
    return tuple(dict.fromkeys(levels))


@dataclass(frozen=True)
class UniformityCheck:
    ok: bool
    factor: int
    # (child_level, ancestor_min, count_min, ancestor_max, count_max) of the
    # coarsest failing rung, or None when the set is uniform.
    witness: tuple[int, int, int, int, int] | None


def _rung_counts(arr: np.ndarray, m: int, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Occupied level-`lo` ancestors and their occupied level-`hi` child counts."""
    children = np.unique(arr >> (m - hi))
    parents = children >> (hi - lo)
    return np.unique(parents, return_counts=True)


def is_uniform(a: GridSet, period: int, factor: int = 2) -> UniformityCheck:
    """Check child-count uniformity of ``a`` along the ladder of given period."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if a.is_empty():
        return UniformityCheck(True, factor, None)
    arr = a.as_array()
    levels = ladder_levels(a.m, period)
    for lo, hi in zip(levels, levels[1:]):
        ids, counts = _rung_counts(arr, a.m, lo, hi)
        i_min = int(np.argmin(counts))
        i_max = int(np.argmax(counts))
        if int(counts[i_max]) > factor * int(counts[i_min]):
            witness = (
                hi,
                int(ids[i_min]),
                int(counts[i_min]),
                int(ids[i_max]),
                int(counts[i_max]),
            )
            return UniformityCheck(False, factor, witness)
    return UniformityCheck(True, factor, None)


@dataclass(frozen=True)
class RungRecord:
    """One pigeonhole step: what was kept between two ladder levels."""

    level: int
    child_level: int
    n_classes: int
    chosen_class: int
    kept_ancestors: int
    total_mass: int
    kept_mass: int


@dataclass(frozen=True)
class UniformCertificate:
    period: int
    levels: tuple[int, ...]
    rungs: tuple[RungRecord, ...]  # finest rung first
    retention_bound: Fraction

    def guaranteed_fraction(self) -> Fraction:
        return self.retention_bound


def extract_uniform(a: GridSet, period: int) -> tuple[GridSet, UniformCertificate]:
    """Largest pigeonholed uniform piece of ``a`` along the given ladder.

    Sweeps rungs from the finest to the coarsest.  At each rung the occupied
    coarse cells are binned by ``floor(log2(child count))`` and only the bin
    with the largest surviving mass is kept, so within every kept coarse cell
    the child count varies by a factor below 2.  The returned certificate
    records every rung decision together with the exact product pigeonhole
    bound on the retained fraction.
    """
    if a.is_empty():
        raise ValueError("cannot extract a uniform part of an empty set")
    m = a.m
    levels = ladder_levels(m, period)
    arr = a.as_array().copy()
    rungs: list[RungRecord] = []
    retention = Fraction(1)
    for lo, hi in zip(levels[:-1][::-1], levels[1:][::-1]):
        total_mass = int(arr.size)
        ids, counts = _rung_counts(arr, m, lo, hi)
        # floor(log2) via frexp is exact on integer-valued doubles.
        classes = np.frexp(counts.astype(np.float64))[1] - 1
        cell_parents = arr >> (m - lo)
        pids, parent_mass = np.unique(cell_parents, return_counts=True)
        if not np.array_equal(pids, ids):
            raise AssertionError("ancestor bookkeeping out of sync")
        class_mass = np.zeros(int(classes.max()) + 1, dtype=np.int64)
        np.add.at(class_mass, classes, parent_mass)
        chosen = int(np.argmax(class_mass))
        kept_ids = ids[classes == chosen]
        keep = np.isin(cell_parents, kept_ids)
        arr = arr[keep]
        n_classes = int(np.unique(classes).size)
        kept_mass = int(arr.size)
        if kept_mass * n_classes < total_mass:
            raise AssertionError("pigeonhole accounting failed")
        rungs.append(
            RungRecord(
                level=lo,
                child_level=hi,
                n_classes=n_classes,
                chosen_class=chosen,
                kept_ancestors=int(kept_ids.size),
                total_mass=total_mass,
                kept_mass=kept_mass,
            )
        )
        retention /= n_classes
    part = GridSet(m, [int(i) for i in arr])
    return part, UniformCertificate(period, levels, tuple(rungs), retention)


def partition_uniform(a: GridSet, period: int) -> list[tuple[GridSet, UniformCertificate]]:
    """Decompose ``a`` into disjoint uniform pieces by repeated extraction."""
    parts: list[tuple[GridSet, UniformCertificate]] = []
    rest = a
    while not rest.is_empty():
        part, cert = extract_uniform(rest, period)
        parts.append((part, cert))
        rest = rest.difference(part)
    return parts
