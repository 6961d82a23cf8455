"""Tube families over quasi-product sets and exact ball-tube incidences.

A tube is the ``w*delta`` vertical neighbourhood of a line ``y = x/a - b``
with slope parameter a in [1/2, 1] (so slopes 1/a lie in [1, 2]).  On the
grid everything reduces to integer arithmetic: the cell ``(i, j)`` meets the
tube of ``(i_a, i_b)`` at width ``w`` iff

    |(j + i_b) * i_a - i * 2**m| <= w * i_a,

which is the vertical-distance test evaluated at representative points and
cleared of denominators.  Tubes carry a shading -- an assigned set of cells
per tube -- and only assigned cells count as incidences.  Alongside exact
counts the module measures the Kakeya-type constants (K1 directions, K2
offsets per direction, K3 worst shading) that the incidence bound consumes.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .energy import fiber_counts
from .grid import GridSet, GridSet2D, neighborhood
from .regularity import frostman_constant

__all__ = [
    "Tube",
    "TubeFamily",
    "Shading",
    "build_tube_family",
    "build_shading",
    "count_incidences",
    "representation_count",
    "theorem_bound_ratio",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tube:
    """Width-w neighbourhood of y = x/a - b, stored by cell indices of (a, b)."""

    a: int
    b: int

    def direction_cell(self, m: int) -> int:
        """Cell index of the slope 1/a at scale m (exact floor of 2**2m / i_a)."""
        return (1 << (2 * m)) // self.a


@dataclass(frozen=True)
class TubeFamily:
    m: int
    w: int
    tubes: tuple[Tube, ...]
    directions: GridSet  # bucketed slope cells; one bucket per distinct cell
    k1: float  # measured KT constant of the direction set
    k2: float  # max over direction buckets of the offset-set KT constant

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2**self.m)

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.m,
                "w": self.w,
                "tubes": [[t.a, t.b] for t in self.tubes],
                "n_directions": len(self.directions),
                "k1": repr(self.k1),
                "k2": repr(self.k2),
            },
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class Shading:
    """Per-tube assigned cells, stored as sorted packed 2-D keys."""

    family: TubeFamily
    assignment: tuple[np.ndarray, ...] = field(repr=False)
    k3: float = 1.0
    sigma_prime: float = 0.0

    def size(self, i: int) -> int:
        return int(self.assignment[i].size)

    def total_assigned(self) -> int:
        """Sum over tubes of #Y(T) (with multiplicity across tubes)."""
        return sum(arr.size for arr in self.assignment)

    def union_cells(self) -> GridSet2D:
        """Y(T_family) = union of all assignments, as a 2-D grid set."""
        m = self.family.m
        parts = [arr for arr in self.assignment if arr.size]
        if not parts:
            return GridSet2D(m, [])
        keys = np.unique(np.concatenate(parts))
        xs, ys = _unpack(m, keys)
        return GridSet2D(m, zip(xs.tolist(), ys.tolist()))

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.family.m,
                "sizes": [int(a.size) for a in self.assignment],
                "union": len(self.union_cells()),
                "k3": repr(self.k3),
                "sigma_prime": repr(self.sigma_prime),
                "digest": self.digest(),
            },
            separators=(",", ":"),
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in self.assignment:
            h.update(arr.tobytes())
        return h.hexdigest()[:16]


def _kt_value(points: GridSet, exponent: float) -> float:
    if points.is_empty():
        return 1.0
    return frostman_constant(points, exponent, kind="kt").value


def build_tube_family(
    a: GridSet, b: GridSet, w: int = 3, s: float | Fraction = Fraction(1, 2), t: float | Fraction | None = None
) -> TubeFamily:
    """One tube per (a, b) pair, with measured direction/offset KT constants.

    ``s`` is the exponent for the direction-set constant K1, ``t`` (default s)
    the exponent for the per-direction offset constants whose max is K2.
    Slope parameters must lie in [1/2, 1] so that slopes stay in [1, 2].
    """
    if a.is_empty() or b.is_empty():
        raise ValueError("tube family needs nonempty slope and offset sets")
    if w < 0:
        raise ValueError(f"tube width must be >= 0, got {w}")
    a._require_same_scale(b)
    m = a.m
    half = 1 << (m - 1)
    if a.min_cell() < half or a.max_cell() > 2 * half:
        raise ValueError(
            f"slope parameters must lie in [1/2, 1] (cells {half}..{2 * half}); "
            f"got range {a.min_cell()}..{a.max_cell()}"
        )
    if t is None:
        t = s
    tubes = tuple(Tube(ia, ib) for ia in a.cells for ib in b.cells)
    dir_cells = [(1 << (2 * m)) // ia for ia in a.cells]
    directions = GridSet(m, dir_cells)
    if len(directions) > len(a):
        raise AssertionError("direction bucketing produced more buckets than slopes")
    k1 = _kt_value(directions, float(Fraction(s)))
    # The family is a full product, so every direction bucket carries exactly
    # the offset set B and the max over buckets collapses to one measurement.
    k2 = _kt_value(b, float(Fraction(t)))
    return TubeFamily(m, w, tubes, directions, k1, k2)


def _on_tube(m: int, ia: int, ib: int, w: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    lhs = (ys + ib) * ia - (xs << m)
    return np.abs(lhs) <= w * ia


def build_shading(
    family: TubeFamily,
    a: GridSet,
    c: GridSet,
    w: int = 1,
    s: float | Fraction = Fraction(1, 2),
    d: float | Fraction = Fraction(1, 2),
) -> Shading:
    """Assign to tube (a0, b) the cells (a0*a', a' - b) over a' in A whose
    difference cell a' - b lands within w cells of C.

    Every assigned cell is verified to meet its own tube at the family width
    (the product quantization costs at most 2 cells, so family w >= 2 always
    passes).  K3 is the worst per-tube KT constant of the assigned x-cells at
    exponent sigma' = min(s + d, 2 - s - d).
    """
    m = family.m
    if a.m != m or c.m != m:
        raise ValueError("scale mismatch between family, slope set, and target set")
    sigma_prime = float(min(Fraction(s) + Fraction(d), 2 - Fraction(s) - Fraction(d)))
    apts = a.as_array()
    near_c = neighborhood(c, w).as_array()
    half = 1 << (m + 3)
    assignment: list[np.ndarray] = []
    k3 = 1.0
    for tube in family.tubes:
        if apts.size == 0 or near_c.size == 0:
            assignment.append(np.empty(0, dtype=np.int64))
            continue
        ys = apts - tube.b
        pos = np.minimum(np.searchsorted(near_c, ys), near_c.size - 1)
        keep = near_c[pos] == ys
        ys = ys[keep]
        xs = (apts[keep] * tube.a) >> m
        ok = _on_tube(m, tube.a, tube.b, family.w, xs, ys)
        if not bool(np.all(ok)):
            raise ValueError(
                f"tube width {family.w} cannot hold its own shading "
                f"(quantization needs width >= 2)"
            )
        keys = np.unique((xs << (m + 4)) + (ys + half))
        assignment.append(keys)
        if xs.size:
            k3 = max(k3, _kt_value(GridSet(m, np.unique(xs).tolist()), sigma_prime))
    return Shading(family, tuple(assignment), k3, sigma_prime)


def _unpack(m: int, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 1 << (m + 3)
    return keys >> (m + 4), (keys & ((1 << (m + 4)) - 1)) - half


def count_incidences(p: GridSet2D, family: TubeFamily, shading: Shading, mode: str = "grid") -> int:
    """#{(T, B) : B in Y(T), B in P, B meets T}, exact in both modes.

    brute tests every (tube, point of P) pair; grid walks each tube's
    x-columns, turns the width test into an exact y-interval per column, and
    intersects with P's per-column sorted cells.  Shaded cells outside P are
    legal but dropped (and logged), per the point-set contract.
    """
    if p.m != family.m:
        raise ValueError(f"scale mismatch: P at m={p.m}, tubes at m={family.m}")
    m, w = family.m, family.w
    pkeys = p.packed_keys()
    union = shading.union_cells()
    dropped = len(union) - int(np.count_nonzero(p.contains_packed(union.packed_keys())))
    if dropped:
        logger.warning("count_incidences: %d shaded cells lie outside P and are dropped", dropped)
    if mode == "brute":
        if pkeys.size == 0:
            return 0
        xs, ys = _unpack(m, pkeys)
        total = 0
        for i, tube in enumerate(family.tubes):
            on = _on_tube(m, tube.a, tube.b, w, xs, ys)
            if not np.any(on):
                continue
            cand = pkeys[on]
            assigned = shading.assignment[i]
            if assigned.size == 0:
                continue
            pos = np.minimum(np.searchsorted(assigned, cand), assigned.size - 1)
            total += int(np.count_nonzero(assigned[pos] == cand))
        return total
    if mode != "grid":
        raise ValueError(f"mode must be 'brute' or 'grid', got {mode!r}")
    if pkeys.size == 0:
        return 0
    cols = np.unique(pkeys >> (m + 4))
    half = 1 << (m + 3)
    shifted = cols << m  # i * 2**m per column, reused across tubes
    total = 0
    for i, tube in enumerate(family.tubes):
        assigned = shading.assignment[i]
        if assigned.size == 0:
            continue
        ia, ib = tube.a, tube.b
        # |(j + ib) ia - i 2^m| <= w ia  <=>  ceil(i 2^m / ia) - w - ib <= j
        #                                 <=  floor(i 2^m / ia) + w - ib
        flo = shifted // ia
        fhi = flo + w - ib
        flo = flo + (shifted % ia != 0) - w - ib
        flo = np.clip(flo, -half, half - 1)
        fhi = np.clip(fhi, -half, half - 1)
        key_lo = (cols << (m + 4)) + (flo + half)
        key_hi = (cols << (m + 4)) + (fhi + half)
        lo_idx = np.searchsorted(pkeys, key_lo, side="left")
        hi_idx = np.searchsorted(pkeys, key_hi, side="right")
        counts = np.maximum(hi_idx - lo_idx, 0)
        n = int(counts.sum())
        if n == 0:
            continue
        starts = np.repeat(lo_idx, counts)
        offsets = np.arange(n) - np.repeat(np.cumsum(counts) - counts, counts)
        cand = pkeys[starts + offsets]
        pos = np.minimum(np.searchsorted(assigned, cand), assigned.size - 1)
        total += int(np.count_nonzero(assigned[pos] == cand))
    return total


def representation_count(a: GridSet, b: GridSet, c: GridSet, w: int = 1) -> int:
    """#{(a, b, c) in A x B x C : |c - (a - b)| <= w cells}, exact."""
    return fiber_counts(a, b, "difference", w, centers=c).total()


def theorem_bound_ratio(
    family: TubeFamily,
    shading: Shading,
    s: float,
    d: float,
    k1: float | None = None,
    k2: float | None = None,
    k3: float | None = None,
    incidences: int | None = None,
    points: GridSet2D | None = None,
) -> float:
    """Measured incidences divided by the quasi-product incidence bound
    K3^(1/3) (K1 K2)^(2/3) (delta^-(s+d) #T)^(1/3) #Y^(2/3).

    Constants default to the family's and shading's measured values.  When no
    count is supplied the incidences are taken over the full shading union
    (every assigned cell as a point).
    """
    k1 = family.k1 if k1 is None else k1
    k2 = family.k2 if k2 is None else k2
    k3 = shading.k3 if k3 is None else k3
    if incidences is None:
        if points is None:
            points = shading.union_cells()
        incidences = count_incidences(points, family, shading, mode="grid")
    n_union = len(shading.union_cells())
    if n_union == 0:
        return 0.0
    rhs = (
        k3 ** (1 / 3)
        * (k1 * k2) ** (2 / 3)
        * (2.0 ** (family.m * (s + d)) * len(family.tubes)) ** (1 / 3)
        * n_union ** (2 / 3)
    )
    return incidences / rhs
