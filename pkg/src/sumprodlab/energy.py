"""Separated additive energies and popularity machinery on grid sets.

The central object is the pair histogram ``h(d) = #{(a,b) : a op b = d}``
(op = difference or sum, evaluated exactly on cell indices).  Everything else
is derived from it:

* fiber counts ``r(z) = sum_{|d-z|<=w} h(d)`` -- the number of pairs whose
  op-value lands within ``w`` cells of the center ``z``;
* energies ``E_k = sum_z r(z)**k`` over all lattice centers, exact integers
  for integer ``k`` and compensated floating point for fractional ``k``;
* quadruple counts (autocorrelation of ``h``), popular subsets of an op-set,
  rich elements of ``A``, and dyadic level sets of fiber counts.

Counts never leave integer arithmetic: histogram values are bounded by
``#A * #B``, moment accumulations switch from int64 to Python big ints the
moment an overflow guard trips, and popularity thresholds are Fractions so
selection decisions have no rounding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import DyadicCell, GridSet, neighborhood
from .uniformize import UniformCertificate, extract_uniform, ladder_period, partition_uniform

__all__ = [
    "FiberCounts",
    "fiber_counts",
    "energy",
    "quadruple_count",
    "PopularSet",
    "popular_set",
    "RichSet",
    "rich_elements",
    "LevelSet",
    "LevelDecomposition",
    "dyadic_level_sets",
    "delta_power",
]

MODES = ("difference", "sum")


# -- dense pair histograms ------------------------------------------------------


@dataclass
class _Hist:
    """Dense nonnegative counts over the contiguous index range starting at offset."""

    offset: int
    counts: np.ndarray  # int64

    def value_at(self, z: int | np.ndarray) -> np.ndarray:
        idx = np.asarray(z, dtype=np.int64) - self.offset
        out = np.zeros(idx.shape, dtype=np.int64)
        ok = (idx >= 0) & (idx < self.counts.size)
        out[ok] = self.counts[idx[ok]]
        return out

    def support(self) -> np.ndarray:
        (nz,) = np.nonzero(self.counts)
        return nz + self.offset


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _meets_threshold(counts: np.ndarray, threshold: Fraction) -> np.ndarray:
    """Exact mask: count >= threshold.  Integer counts meet a rational
    threshold iff they meet its ceiling, which keeps the comparison in int64
    no matter how wide the fraction is."""
    num, den = threshold.numerator, threshold.denominator
    ceil = -((-num) // den)
    if ceil >= 2**62:
        return np.zeros(counts.shape, dtype=bool)
    return counts >= ceil


def _pair_histogram(a: GridSet, b: GridSet, mode: str) -> _Hist:
    """h(d) = #{(x, y) in A x B : x op y = d}, dense over the exact value range."""
    _check_mode(mode)
    a._require_same_scale(b)
    xa, xb = a.as_array(), b.as_array()
    if xa.size == 0 or xb.size == 0:
        return _Hist(0, np.zeros(1, dtype=np.int64))
    if mode == "difference":
        lo = int(xa[0] - xb[-1])
        hi = int(xa[-1] - xb[0])
    else:
        lo = int(xa[0] + xb[0])
        hi = int(xa[-1] + xb[-1])
    length = hi - lo + 1
    counts = np.zeros(length, dtype=np.int64)
    step = max(1, (1 << 22) // xb.size)
    for k in range(0, xa.size, step):
        blk = xa[k : k + step, None]
        vals = blk - xb[None, :] if mode == "difference" else blk + xb[None, :]
        counts += np.bincount((vals - lo).ravel(), minlength=length)
    return _Hist(lo, counts)


def _windowed(h: _Hist, w: int) -> _Hist:
    """r(z) = sum_{|d-z| <= w} h(d), dense over the padded range."""
    if w < 0:
        raise ValueError(f"window must be >= 0, got {w}")
    if w == 0:
        return h
    counts = h.counts
    length = counts.size
    pre = np.concatenate(([0], np.cumsum(counts)))
    new_len = length + 2 * w
    idx = np.arange(new_len, dtype=np.int64)
    hi = np.clip(idx + 1, 0, length)
    lo = np.clip(idx - 2 * w, 0, length)
    return _Hist(h.offset - w, pre[hi] - pre[lo])


# -- exact reductions ------------------------------------------------------------


def _exact_moment(values: np.ndarray, k: int) -> int:
    """sum v**k over the array, exact (big-int fallback past the int64 guard)."""
    nz = values[values > 0]
    if nz.size == 0:
        return 0
    mx = int(nz.max())
    if mx**k * nz.size < 2**62:
        return int(np.sum(nz.astype(np.int64) ** k))
    return sum(int(v) ** k for v in nz)


def _exact_dot(u: np.ndarray, v: np.ndarray) -> int:
    if u.size == 0 or v.size == 0:
        return 0
    mu, mv = int(u.max(initial=0)), int(v.max(initial=0))
    if mu * mv * min(u.size, v.size) < 2**62:
        return int(np.dot(u.astype(np.int64), v.astype(np.int64)))
    return sum(int(x) * int(y) for x, y in zip(u, v) if x and y)


def _float_moment(values: np.ndarray, k: float) -> float:
    """Compensated sum of v**k; counts < 2**53 are exact in float64, so the
    relative error is a few ulps per term, far below the 1e-12 contract."""
    nz = values[values > 0]
    if nz.size == 0:
        return 0.0
    return math.fsum(np.power(nz.astype(np.float64), k).tolist())


# -- fiber counts -----------------------------------------------------------------


@dataclass(frozen=True)
class FiberCounts:
    """Pair counts around centers: r(z) = #{(a,b) : |a op b - z| <= w cells}."""

    mode: str
    w: int
    centers: GridSet
    counts: tuple[int, ...]

    def total(self) -> int:
        return sum(self.counts)

    def count_at(self, cell: int) -> int:
        i = self.centers.cells.index(cell)
        return self.counts[i]

    def to_csv(self) -> str:
        lines = ["center,count"]
        lines.extend(f"{z},{c}" for z, c in zip(self.centers.cells, self.counts))
        return "\n".join(lines) + "\n"


def fiber_counts(
    a: GridSet,
    b: GridSet,
    mode: str = "difference",
    w: int = 1,
    centers: GridSet | None = None,
) -> FiberCounts:
    """Windowed pair counts at the given centers.

    With ``centers=None`` the centers are all lattice cells with a nonzero
    count (the lattice sum has finite support, so nothing is lost).
    """
    h = _windowed(_pair_histogram(a, b, mode), w)
    if centers is None:
        support = h.support()
        counts = h.counts[support - h.offset]
        centers = GridSet(a.m, support.tolist())
        return FiberCounts(mode, w, centers, tuple(int(c) for c in counts))
    if centers.m != a.m:
        raise ValueError(f"scale mismatch: m={a.m} vs centers m={centers.m}")
    vals = h.value_at(centers.as_array())
    return FiberCounts(mode, w, centers, tuple(int(c) for c in vals))


def energy(
    a: GridSet,
    b: GridSet | None = None,
    k: float | Fraction = 2,
    mode: str = "difference",
    w: int = 1,
) -> int | float:
    """k-th separated energy: sum over all lattice centers of r(z)**k.

    Integer ``k`` gives an exact integer; fractional ``k`` a float whose
    relative error is certified below 1e-12 by compensated summation.
    """
    if b is None:
        b = a
    kf = Fraction(k)
    if kf <= 0:
        raise ValueError(f"moment order must be positive, got {k}")
    r = _windowed(_pair_histogram(a, b, mode), w).counts
    if kf.denominator == 1:
        return _exact_moment(r, int(kf))
    return _float_moment(r, float(kf))


def quadruple_count(a: GridSet, b: GridSet, mode: str = "difference", w: int = 1) -> int:
    """#{(a,b,a',b') : |(a op b) - (a' op b')| <= w cells}, exact.

    Computed as the window-summed autocorrelation of the pair histogram:
    sum_d h(d) * sum_{|e|<=w} h(d+e).
    """
    h = _pair_histogram(a, b, mode)
    r = _windowed(h, w)
    aligned = r.counts[w : w + h.counts.size] if w else r.counts
    return _exact_dot(h.counts, aligned)


# -- popular subsets --------------------------------------------------------------


@dataclass(frozen=True)
class PopularSet:
    """Cells of a base op-set whose exact pair fiber meets a rational threshold."""

    mode: str
    base: GridSet
    threshold: Fraction
    selected_intervals: tuple[DyadicCell, ...]
    points: GridSet
    captured_mass: int
    total_mass: int
    certificate: UniformCertificate | None = None

    def mass_lower_bound(self) -> Fraction:
        """Exact pigeonhole guarantee: captured >= total - #base * threshold."""
        return self.total_mass - len(self.base) * self.threshold

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "m": self.base.m,
                "threshold": [self.threshold.numerator, self.threshold.denominator],
                "n_base": len(self.base),
                "n_selected": len(self.points),
                "captured_mass": self.captured_mass,
                "total_mass": self.total_mass,
                "points": list(self.points.cells),
                "refined": self.certificate is not None,
            },
            separators=(",", ":"),
        )


def popular_set(
    a: GridSet,
    base: GridSet,
    mode: str = "difference",
    threshold: Fraction = Fraction(0),
    refine: bool = False,
    eps: float | None = None,
    period: int | None = None,
) -> PopularSet:
    """Select the cells of ``base`` receiving at least ``threshold`` exact pairs.

    The fiber of a cell ``z`` is the w=0 count ``#{(x,y) in A x A : x op y = z}``
    -- pair values land exactly on the lattice, so cell membership needs no
    window.  When ``refine`` is set the selection is decomposed into uniform
    parts (ladder period from ``period`` or ``eps``) and the part carrying the
    largest captured pair mass is kept, with its certificate attached.
    """
    _check_mode(mode)
    if threshold < 0:
        raise ValueError("threshold must be a nonnegative rational")
    h = _pair_histogram(a, a, mode)
    base_arr = base.as_array()
    fibers = h.value_at(base_arr)
    total_mass = int(fibers.sum())
    mask = _meets_threshold(fibers, threshold)
    cells = base_arr[mask]
    captured = int(fibers[mask].sum())
    points = GridSet(base.m, cells.tolist())
    certificate = None
    if refine and not points.is_empty():
        if period is None:
            if eps is None:
                raise ValueError("refine requires a ladder period or eps")
            period = ladder_period(base.m, eps)
        parts = partition_uniform(points, period)
        best = None
        best_mass = -1
        for part, cert in parts:
            mass = int(h.value_at(part.as_array()).sum())
            if mass > best_mass:
                best, best_mass = (part, cert), mass
        assert best is not None
        points, certificate = best
        captured = best_mass
    selected = tuple(DyadicCell(base.m, c) for c in points.cells)
    result = PopularSet(
        mode, base, threshold, selected, points, captured, total_mass, certificate
    )
    if not points.issubset(base):
        raise AssertionError("selected cells escaped the base set")
    return result


# -- rich elements -----------------------------------------------------------------


@dataclass(frozen=True)
class RichSet:
    """Elements of A whose op-translate meets a target neighborhood often."""

    sign: str  # "difference" -> x - A, "sum" -> x + A
    points: GridSet
    threshold: Fraction
    degrees: tuple[int, ...]  # aligned with the source set's cells
    source: GridSet
    neighborhood_w: int

    def degree_mass(self) -> int:
        return sum(self.degrees)


def rich_elements(
    a: GridSet,
    target: PopularSet,
    sign: str = "difference",
    threshold: Fraction = Fraction(1),
    neighborhood_w: int = 1,
) -> RichSet:
    """All x in A with #{y in A : x op y lands in the target's w-neighborhood}
    at or above the threshold; degrees are recounted exactly per element."""
    _check_mode(sign)
    if threshold <= 0:
        raise ValueError("richness threshold must be positive")
    nbhd = neighborhood(target.points, neighborhood_w).as_array()
    xa = a.as_array()
    degrees = np.zeros(xa.size, dtype=np.int64)
    if xa.size and nbhd.size:
        step = max(1, (1 << 22) // xa.size)
        for k in range(0, xa.size, step):
            blk = xa[k : k + step, None]
            vals = blk - xa[None, :] if sign == "difference" else blk + xa[None, :]
            pos = np.searchsorted(nbhd, vals)
            pos = np.minimum(pos, nbhd.size - 1)
            degrees[k : k + step] = np.sum(nbhd[pos] == vals, axis=1)
    mask = _meets_threshold(degrees, threshold)
    points = GridSet(a.m, xa[mask].tolist())
    return RichSet(sign, points, threshold, tuple(int(d) for d in degrees), a, neighborhood_w)


# -- dyadic level sets --------------------------------------------------------------


@dataclass(frozen=True)
class LevelSet:
    """Cells of R1 - R2 whose exact pair fiber lies in [Delta, 2*Delta)."""

    delta_class: int
    intervals: tuple[DyadicCell, ...]
    points: GridSet
    fiber_sum: int
    refined: GridSet | None = None
    certificate: UniformCertificate | None = None

    def count(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class LevelDecomposition:
    levels: tuple[LevelSet, ...]  # ascending by delta_class
    star_index: int

    @property
    def star(self) -> LevelSet:
        return self.levels[self.star_index]

    def class_sum_power(self) -> float:
        """sum over classes of Delta**(7/4) * count (the selection functional)."""
        return math.fsum(ls.delta_class ** 1.75 * ls.count() for ls in self.levels)


def dyadic_level_sets(
    r1: GridSet,
    r2: GridSet,
    base: GridSet | None = None,
    eps: float | None = None,
    period: int | None = None,
    refine: bool = True,
) -> LevelDecomposition:
    """Bucket the difference set of R1, R2 by dyadic fiber-count class.

    Each nonempty class [Delta, 2*Delta) becomes a LevelSet with an optional
    uniform refinement; the starred class maximizes Delta**(7/4) * count,
    compared exactly via fourth powers (Delta1^7 n1^4 vs Delta2^7 n2^4),
    ties resolved toward the larger Delta.
    """
    h = _pair_histogram(r1, r2, "difference")
    support = h.support()
    if support.size == 0:
        raise ValueError("difference set of the rich pair is empty")
    if base is not None and not GridSet(r1.m, support.tolist()).issubset(base):
        raise ValueError("difference cells are not contained in the supplied base")
    fibers = h.counts[support - h.offset]
    classes = np.frexp(fibers.astype(np.float64))[1] - 1  # floor(log2), exact
    if refine and period is None:
        if eps is None:
            raise ValueError("refinement requires a ladder period or eps")
        period = ladder_period(r1.m, eps)
    levels: list[LevelSet] = []
    for cls in sorted(set(int(c) for c in classes)):
        sel = support[classes == cls]
        pts = GridSet(r1.m, sel.tolist())
        fsum = int(fibers[classes == cls].sum())
        refined = certificate = None
        if refine:
            refined, certificate = extract_uniform(pts, period)
        levels.append(
            LevelSet(
                delta_class=1 << cls,
                intervals=tuple(DyadicCell(r1.m, int(c)) for c in sel),
                points=pts,
                fiber_sum=fsum,
                refined=refined,
                certificate=certificate,
            )
        )
    star = 0
    for i in range(1, len(levels)):
        a_, b_ = levels[star], levels[i]
        # Delta_i^{7/4} n_i >= Delta_*^{7/4} n_* <=> Delta_i^7 n_i^4 >= ...
        lhs = b_.delta_class**7 * b_.count() ** 4
        rhs = a_.delta_class**7 * a_.count() ** 4
        if lhs >= rhs:
            star = i
    return LevelDecomposition(tuple(levels), star)


# -- threshold helpers ---------------------------------------------------------------


def delta_power(m: int, exponent: Fraction | float, direction: str) -> Fraction:
    """Exact dyadic surrogate for (2**-m)**exponent.

    The true value 2**(-m*exponent) generally has an irrational dyadic
    logarithm; this returns 2**floor(-m*exponent) or 2**ceil(...) so callers
    can round in whichever direction weakens their threshold.
    """
    t = -Fraction(exponent) * m
    if direction == "floor":
        e = t.numerator // t.denominator
    elif direction == "ceil":
        e = -((-t.numerator) // t.denominator)
    else:
        raise ValueError("direction must be 'floor' or 'ceil'")
    return Fraction(2) ** e
