"""Frostman-type regularity diagnostics for grid sets.

Two flavours of the non-concentration condition are measured, both over
closed balls centered at representative points of A and dyadic radii
``r = 2**-j``:

* ``kind="set"``:  ``#(A ∩ B(x, r)) <= C * r**s * #A``
* ``kind="kt"``:   ``#(A ∩ B(x, r)) <= C * (r/delta)**s``

``frostman_constant`` returns the smallest admissible ``C`` together with an
extremal witness; the comparisons behind the scan are certified exactly (no
float ties), which is what makes the "C_min passes / C_min*(1-1e-9) fails"
round-trip testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._exact import compare_rational_pow2, pow2_bounds
from .grid import GridSet

__all__ = [
    "BoxDimEstimate",
    "BranchingProfile",
    "FrostmanReport",
    "SigmaReport",
    "box_dim_estimate",
    "branching_profile",
    "frostman_constant",
    "sigma_exponent",
]


def _as_exponent(s: float | Fraction) -> Fraction:
    s = Fraction(s)
    if not 0 < s <= 1:
        raise ValueError(f"dimension exponent must lie in (0, 1], got {s}")
    return s


@dataclass(frozen=True)
class FrostmanReport:
    """Result of a Frostman-constant scan.

    ``value`` is a float for reporting; the witness triple plus
    :meth:`satisfies` give the exact semantics.  ``level_max`` holds, for each
    dyadic level j, the largest ball count observed at radius ``2**-j`` so the
    defining inequality can be re-checked exactly for any rational C.
    """

    kind: str
    s: Fraction
    m: int
    n_cells: int
    value: float
    witness_center: int
    witness_level: int
    witness_count: int
    level_max: tuple[tuple[int, int, int], ...] = field(repr=False)  # (j, count, center)

    def _candidate(self, j: int, count: int) -> tuple[Fraction, Fraction]:
        """The admissible-C lower bound count/scale as (rational, pow2 exponent)."""
        if self.kind == "set":
            return (Fraction(count, self.n_cells), j * self.s)
        return (Fraction(count), -(self.m - j) * self.s)

    def satisfies(self, c: float | Fraction) -> bool:
        """Exact check that every scanned (center, radius) obeys the bound with C=c."""
        c = Fraction(c)
        for j, count, _center in self.level_max:
            r, t = self._candidate(j, count)
            if compare_rational_pow2(r, t, c, Fraction(0)) > 0:
                return False
        return True

    def c_min_bounds(self) -> tuple[Fraction, Fraction]:
        """Certified rational enclosure of the exact minimal constant."""
        r, t = self._candidate(self.witness_level, self.witness_count)
        lo, hi = pow2_bounds(t)
        return (r * lo, r * hi)


def frostman_constant(a: GridSet, s: float | Fraction, kind: str = "set") -> FrostmanReport:
    """Smallest C for which A is a (delta, s, C)-set (or KT-set), with witness.

    Scans every representative point of A as a ball center and every dyadic
    radius ``2**-j``, ``0 <= j <= m``.  Ties between levels resolve to the
    coarsest scale (smallest j), which fixes the witness deterministically.
    """
    if kind not in ("set", "kt"):
        raise ValueError(f"kind must be 'set' or 'kt', got {kind!r}")
    s = _as_exponent(s)
    if a.is_empty():
        raise ValueError("frostman_constant requires a nonempty set")
    arr = a.as_array()
    n = len(a)
    level_max: list[tuple[int, int, int]] = []
    for j in range(a.m + 1):
        radius = 1 << (a.m - j)
        lo = np.searchsorted(arr, arr - radius, side="left")
        hi = np.searchsorted(arr, arr + radius, side="right")
        counts = hi - lo
        k = int(np.argmax(counts))
        level_max.append((j, int(counts[k]), int(arr[k])))

    report = FrostmanReport(
        kind=kind,
        s=s,
        m=a.m,
        n_cells=n,
        value=0.0,
        witness_center=0,
        witness_level=0,
        witness_count=0,
        level_max=tuple(level_max),
    )
    best: tuple[int, int, int] | None = None
    for j, count, center in level_max:
        if best is None:
            best = (j, count, center)
            continue
        r_new, t_new = report._candidate(j, count)
        r_old, t_old = report._candidate(best[0], best[1])
        if compare_rational_pow2(r_new, t_new, r_old, t_old) > 0:
            best = (j, count, center)
    assert best is not None
    j, count, center = best
    if kind == "set":
        value = count / n * 2.0 ** (j * float(s))
    else:
        value = count * 2.0 ** (-(a.m - j) * float(s))
    return FrostmanReport(
        kind=kind,
        s=s,
        m=a.m,
        n_cells=n,
        value=value,
        witness_center=center,
        witness_level=j,
        witness_count=count,
        level_max=tuple(level_max),
    )


@dataclass(frozen=True)
class BranchingProfile:
    """Covering numbers N at radii 2**-(j*T) for j = 0..m/T, with ratios."""

    m: int
    step: int
    counts: tuple[int, ...]

    @property
    def levels(self) -> tuple[tuple[int, int], ...]:
        return tuple((j, c) for j, c in enumerate(self.counts))

    def ratio(self, j: int) -> Fraction:
        return Fraction(self.counts[j + 1], self.counts[j])

    def to_csv(self) -> str:
        lines = ["level,count,ratio"]
        last = len(self.counts) - 1
        for j, c in enumerate(self.counts):
            if j < last:
                lines.append(f"{j * self.step},{c},{self.counts[j + 1] / c!r}")
            else:
                lines.append(f"{j * self.step},{c},")
        return "\n".join(lines) + "\n"


def branching_profile(a: GridSet, step: int = 1) -> BranchingProfile:
    """Covering numbers along the ladder 2**-(j*step); step must divide m."""
    if a.is_empty():
        raise ValueError("branching profile of an empty set is undefined")
    if step < 1 or a.m % step:
        raise ValueError(f"ladder step must be >= 1 and divide m={a.m}, got {step}")
    counts = tuple(a.covering_number(j * step) for j in range(a.m // step + 1))
    return BranchingProfile(a.m, step, counts)


@dataclass(frozen=True)
class SigmaReport:
    """The single-scale lower exponent sigma and the level realizing the min."""

    value: float
    argmin_level: int
    eps: float
    terms: tuple[float, ...]  # (log2 N_j - eps*m)/j for j = 1..m


def sigma_exponent(a: GridSet, eps: float) -> SigmaReport:
    """Largest sigma with ``N_rho(A) >= delta^eps * rho^-sigma`` at every dyadic rho.

    Computed as ``max(0, min_{1<=j<=m} (log2 N_{2^-j}(A) - eps*m) / j)`` with
    the convention that the weakening factor is measured against delta = 2**-m.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if a.is_empty():
        raise ValueError("sigma exponent of an empty set is undefined")
    m = a.m
    terms = []
    for j in range(1, m + 1):
        nj = a.covering_number(j)
        terms.append((math.log2(nj) - eps * m) / j)
    k = int(np.argmin(terms))
    return SigmaReport(
        value=max(0.0, terms[k]),
        argmin_level=k + 1,
        eps=eps,
        terms=tuple(terms),
    )


@dataclass(frozen=True)
class BoxDimEstimate:
    """Least-squares slope of log2 N_{2^-j}(A) against j over the full ladder."""

    dimension: float
    intercept: float
    levels: tuple[int, ...]
    log_counts: tuple[float, ...]


def box_dim_estimate(a: GridSet) -> BoxDimEstimate:
    prof = branching_profile(a)
    js = np.arange(a.m + 1, dtype=float)
    ys = np.log2(np.asarray(prof.counts, dtype=float))
    jbar, ybar = js.mean(), ys.mean()
    denom = float(((js - jbar) ** 2).sum())
    slope = float(((js - jbar) * (ys - ybar)).sum() / denom) if denom else 0.0
    return BoxDimEstimate(
        dimension=slope,
        intercept=float(ybar - slope * jbar),
        levels=tuple(range(a.m + 1)),
        log_counts=tuple(float(v) for v in ys),
    )
