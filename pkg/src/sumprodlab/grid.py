"""Dyadic grid sets with exact integer-index arithmetic.

Everything in this module works on cell indices of the grid ``delta * Z`` with
``delta = 2**-m``.  A :class:`GridSet` is a finite set of cells; the cell with
index ``i`` covers ``[i*delta, (i+1)*delta)`` and is *represented* by its left
endpoint ``i*delta``.  All arithmetic (sums, differences, products, quotients,
inversion, ball/tube membership) is evaluated on representative points and
floored back onto the grid, so every operation here is exact integer
arithmetic -- no floats anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "DyadicCell",
    "DyadicSquare",
    "GridSet",
    "GridSet2D",
    "arithmetic",
    "affine_image",
    "invert",
    "maximal_separated_subset",
    "negate",
    "neighborhood",
]

ARITHMETIC_OPS = ("sum", "diff", "prod", "quot")


@dataclass(frozen=True, order=True)
class DyadicCell:
    """The dyadic interval ``[index * 2**-level, (index+1) * 2**-level)``."""

    level: int
    index: int

    def interval(self) -> tuple[Fraction, Fraction]:
        width = Fraction(1, 2**self.level)
        return (self.index * width, (self.index + 1) * width)

    def parent(self) -> "DyadicCell":
        if self.level == 0:
            raise ValueError("level-0 cell has no parent")
        return DyadicCell(self.level - 1, self.index >> 1)

    def children(self) -> tuple["DyadicCell", "DyadicCell"]:
        return (
            DyadicCell(self.level + 1, 2 * self.index),
            DyadicCell(self.level + 1, 2 * self.index + 1),
        )


@dataclass(frozen=True, order=True)
class DyadicSquare:
    """Axis-parallel dyadic square of side ``2**-level``."""

    level: int
    ix: int
    iy: int

    def children(self) -> tuple["DyadicSquare", ...]:
        lv, x, y = self.level + 1, 2 * self.ix, 2 * self.iy
        return tuple(DyadicSquare(lv, x + a, y + b) for a in (0, 1) for b in (0, 1))


def _canonical_cells(cells: Iterable[int]) -> tuple[int, ...]:
    out = sorted({int(c) for c in cells})
    return tuple(out)


class GridSet:
    """Finite set of cells of the grid ``2**-m * Z``, kept sorted and unique."""

    __slots__ = ("m", "cells", "_arr", "_set")

    def __init__(self, m: int, cells: Iterable[int]):
        if m < 0:
            raise ValueError(f"scale exponent m must be >= 0, got {m}")
        self.m = int(m)
        self.cells = _canonical_cells(cells)
        self._arr: np.ndarray | None = None
        self._set: frozenset[int] | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_points(cls, points: Iterable[float | Fraction], m: int) -> "GridSet":
        """Quantize points onto the grid: ``x`` lands in cell ``floor(x * 2**m)``.

        Fractions are quantized exactly; floats go through Fraction first so
        the floor is taken on the exact binary value of the float.
        """
        scale = 2**m
        cells = []
        for x in points:
            q = Fraction(x) * scale
            cells.append(q.numerator // q.denominator)
        return cls(m, cells)

    @classmethod
    def from_json(cls, text: str) -> "GridSet":
        obj = json.loads(text)
        return cls(int(obj["m"]), [int(c) for c in obj["cells"]])

    def to_json(self) -> str:
        return json.dumps({"m": self.m, "cells": list(self.cells)}, separators=(",", ":"))

    @classmethod
    def load_text(cls, text: str) -> "GridSet":
        """Parse the plain-text format: header line ``m=<int>``, one cell per line."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("m="):
            raise ValueError("grid set text must start with an 'm=<int>' header")
        m = int(lines[0][2:])
        return cls(m, (int(ln) for ln in lines[1:]))

    def dump_text(self) -> str:
        body = "\n".join(str(c) for c in self.cells)
        return f"m={self.m}\n{body}\n" if body else f"m={self.m}\n"

    # -- basics --------------------------------------------------------------

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2**self.m)

    def as_array(self) -> np.ndarray:
        if self._arr is None:
            self._arr = np.asarray(self.cells, dtype=np.int64)
        return self._arr

    def as_set(self) -> frozenset[int]:
        if self._set is None:
            self._set = frozenset(self.cells)
        return self._set

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[int]:
        return iter(self.cells)

    def __contains__(self, cell: int) -> bool:
        return cell in self.as_set()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GridSet) and self.m == other.m and self.cells == other.cells
        )

    def __hash__(self) -> int:
        return hash((self.m, self.cells))

    def __repr__(self) -> str:
        preview = ",".join(map(str, self.cells[:6]))
        tail = ",..." if len(self.cells) > 6 else ""
        return f"GridSet(m={self.m}, #={len(self.cells)}, cells=[{preview}{tail}])"

    def is_empty(self) -> bool:
        return not self.cells

    def min_cell(self) -> int:
        if not self.cells:
            raise ValueError("empty grid set has no min cell")
        return self.cells[0]

    def max_cell(self) -> int:
        if not self.cells:
            raise ValueError("empty grid set has no max cell")
        return self.cells[-1]

    def representative_points(self) -> list[Fraction]:
        d = self.delta
        return [c * d for c in self.cells]

    # -- covering / dyadic structure -----------------------------------------

    def covering_number(self, level: int) -> int:
        """Number of level-``level`` dyadic cells meeting the set (``N_rho``, rho=2**-level)."""
        if not 0 <= level <= self.m:
            raise ValueError(f"level must lie in [0, m={self.m}], got {level}")
        if not self.cells:
            return 0
        shift = self.m - level
        arr = self.as_array() >> shift
        return int(np.unique(arr).size)

    def dyadic_cells(self, level: int) -> list[DyadicCell]:
        """The level-``level`` dyadic cells meeting the set, in increasing order."""
        if not 0 <= level <= self.m:
            raise ValueError(f"level must lie in [0, m={self.m}], got {level}")
        shift = self.m - level
        seen = sorted({c >> shift for c in self.cells})
        return [DyadicCell(level, i) for i in seen]

    def ancestors_at(self, level: int) -> tuple[int, ...]:
        """Sorted distinct level-``level`` indices above the cells (fast path, no objects)."""
        shift = self.m - level
        return tuple(sorted({c >> shift for c in self.cells}))

    # -- set algebra -----------------------------------------------------------

    def union(self, other: "GridSet") -> "GridSet":
        self._require_same_scale(other)
        return GridSet(self.m, self.cells + other.cells)

    def intersection(self, other: "GridSet") -> "GridSet":
        self._require_same_scale(other)
        small, big = sorted((self, other), key=len)
        return GridSet(self.m, (c for c in small.cells if c in big.as_set()))

    def difference(self, other: "GridSet") -> "GridSet":
        self._require_same_scale(other)
        return GridSet(self.m, (c for c in self.cells if c not in other.as_set()))

    def issubset(self, other: "GridSet") -> bool:
        self._require_same_scale(other)
        return self.as_set() <= other.as_set()

    def restrict(self, lo: int, hi: int) -> "GridSet":
        """Cells with index in the closed range [lo, hi]."""
        return GridSet(self.m, (c for c in self.cells if lo <= c <= hi))

    def _require_same_scale(self, other: "GridSet") -> None:
        if self.m != other.m:
            raise ValueError(f"scale mismatch: m={self.m} vs m={other.m}")

    # -- geometry ----------------------------------------------------------------

    def ball_count(self, center: int, radius_cells: int) -> int:
        """``#{i in A : |i - center| <= radius_cells}`` via bisection (closed ball)."""
        arr = self.as_array()
        lo = int(np.searchsorted(arr, center - radius_cells, side="left"))
        hi = int(np.searchsorted(arr, center + radius_cells, side="right"))
        return hi - lo


class GridSet2D:
    """Finite set of grid squares at scale ``2**-m``, stored as sorted (x, y) pairs."""

    __slots__ = ("m", "cells", "_xs", "_ys", "_keys")

    def __init__(self, m: int, cells: Iterable[tuple[int, int]]):
        if m < 0:
            raise ValueError(f"scale exponent m must be >= 0, got {m}")
        self.m = int(m)
        self.cells = tuple(sorted({(int(x), int(y)) for x, y in cells}))
        self._xs: np.ndarray | None = None
        self._ys: np.ndarray | None = None
        self._keys: np.ndarray | None = None

    @classmethod
    def product(cls, a: GridSet, b: GridSet) -> "GridSet2D":
        if a.m != b.m:
            raise ValueError(f"scale mismatch: m={a.m} vs m={b.m}")
        return cls(a.m, ((x, y) for x in a.cells for y in b.cells))

    @classmethod
    def from_points(
        cls, points: Iterable[tuple[float | Fraction, float | Fraction]], m: int
    ) -> "GridSet2D":
        scale = 2**m
        cells = []
        for x, y in points:
            qx, qy = Fraction(x) * scale, Fraction(y) * scale
            cells.append((qx.numerator // qx.denominator, qy.numerator // qy.denominator))
        return cls(m, cells)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._xs is None:
            if self.cells:
                arr = np.asarray(self.cells, dtype=np.int64)
                self._xs, self._ys = arr[:, 0].copy(), arr[:, 1].copy()
            else:
                self._xs = np.empty(0, dtype=np.int64)
                self._ys = np.empty(0, dtype=np.int64)
        return self._xs, self._ys

    def pack(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Pack (x, y) into a single sortable int64 key (y range ~ [-2**(m+3), 2**(m+3)))."""
        off = np.int64(1 << (self.m + 3))
        return (xs.astype(np.int64) << np.int64(self.m + 4)) + (ys + off)

    def packed_keys(self) -> np.ndarray:
        """Sorted packed keys of the cells, for vectorized membership tests."""
        if self._keys is None:
            xs, ys = self.arrays()
            self._keys = np.sort(self.pack(xs, ys)) if xs.size else np.empty(0, np.int64)
        return self._keys

    def contains_packed(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized membership for keys produced by :meth:`pack`."""
        table = self.packed_keys()
        if table.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        pos = np.searchsorted(table, keys)
        pos = np.minimum(pos, table.size - 1)
        return table[pos] == keys

    def covering_number(self, level: int) -> int:
        if not 0 <= level <= self.m:
            raise ValueError(f"level must lie in [0, m={self.m}], got {level}")
        if not self.cells:
            return 0
        shift = self.m - level
        return len({(x >> shift, y >> shift) for x, y in self.cells})

    def dyadic_cells(self, level: int) -> list[DyadicSquare]:
        shift = self.m - level
        seen = sorted({(x >> shift, y >> shift) for x, y in self.cells})
        return [DyadicSquare(level, x, y) for x, y in seen]

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell: tuple[int, int]) -> bool:
        xs, ys = self.arrays()
        if xs.size == 0:
            return False
        x, y = cell
        lo = int(np.searchsorted(xs, x, side="left"))
        hi = int(np.searchsorted(xs, x, side="right"))
        if lo == hi:
            return False
        return bool(np.any(ys[lo:hi] == y))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GridSet2D) and self.m == other.m and self.cells == other.cells
        )

    def __hash__(self) -> int:
        return hash((self.m, self.cells))

    def __repr__(self) -> str:
        return f"GridSet2D(m={self.m}, #={len(self.cells)})"


# -- pointwise arithmetic -------------------------------------------------------


def _pairwise_cells(a: GridSet, b: GridSet, op: str) -> np.ndarray:
    """All-pairs op on representative points, floored back to cell indices."""
    xa = a.as_array()
    xb = b.as_array()
    if xa.size == 0 or xb.size == 0:
        return np.empty(0, dtype=np.int64)
    scale = np.int64(2**a.m)
    # Chunk the outer product so huge sets stay within a bounded footprint.
    out: list[np.ndarray] = []
    step = max(1, (1 << 22) // max(1, xb.size))
    for k in range(0, xa.size, step):
        blk = xa[k : k + step, None]
        if op == "sum":
            vals = blk + xb[None, :]
        elif op == "diff":
            vals = blk - xb[None, :]
        elif op == "prod":
            if a.m > 24:
                raise ValueError("product arithmetic supported for m <= 24 (int64 bound)")
            vals = (blk * xb[None, :]) // scale
        elif op == "quot":
            if np.any(xb == 0):
                raise ValueError("quotient undefined: B contains the zero cell")
            vals = (blk * scale) // xb[None, :]
        else:
            raise ValueError(f"unknown op {op!r}; expected one of {ARITHMETIC_OPS}")
        out.append(np.unique(vals))
    return np.unique(np.concatenate(out)) if out else np.empty(0, dtype=np.int64)


def arithmetic(a: GridSet, b: GridSet, op: str) -> GridSet:
    """Cellwise A op B on representative points.

    sum:  i_a + i_b            (exact on the lattice)
    diff: i_a - i_b            (exact on the lattice)
    prod: floor(i_a * i_b / 2**m)
    quot: floor(i_a * 2**m / i_b), requires 0 not in B
    """
    a._require_same_scale(b)
    return GridSet(a.m, _pairwise_cells(a, b, op).tolist())


def invert(a: GridSet) -> GridSet:
    """Cell of 1/x for each representative point; requires A inside [1/2, 1].

    ``i -> floor(2**(2m) / i)``.  The result lives in ``[2**m, 2**(m+1)]`` --
    an allowed range extension of the unit-scale convention.
    """
    if a.is_empty():
        return GridSet(a.m, [])
    lo = 2 ** (a.m - 1) if a.m >= 1 else 1
    if a.min_cell() < lo:
        raise ValueError(
            f"invert requires all cell indices >= 2**(m-1)={lo} (A inside [1/2,1]); "
            f"got min index {a.min_cell()}"
        )
    sq = 2 ** (2 * a.m)
    return GridSet(a.m, (sq // i for i in a.cells))


def affine_image(a: GridSet, log2_scale: int, offset: Fraction | int = 0) -> GridSet:
    """Image under ``x -> 2**log2_scale * x + offset``, exact on indices.

    The offset must be a multiple of delta (``offset * 2**m`` integral) and for
    negative ``log2_scale`` the scaled indices must stay integral, so the map
    permutes grid cells exactly instead of resampling.
    """
    off = Fraction(offset) * 2**a.m
    if off.denominator != 1:
        raise ValueError(f"offset {offset} is not a multiple of delta=2**-{a.m}")
    shift = int(off)
    if log2_scale >= 0:
        cells = [(c << log2_scale) + shift for c in a.cells]
    else:
        k = -log2_scale
        bad = [c for c in a.cells if c % (1 << k) != 0]
        if bad:
            raise ValueError(
                f"scale 2**{log2_scale} does not map cell {bad[0]} to an exact cell"
            )
        cells = [(c >> k) + shift for c in a.cells]
    return GridSet(a.m, cells)


def negate(a: GridSet) -> GridSet:
    """Pointwise negation; representatives are lattice points, so -A is exact."""
    return GridSet(a.m, (-c for c in a.cells))


def neighborhood(a: GridSet, w: int = 1) -> GridSet:
    """Closed w-cell neighborhood: every cell within ``w`` of a cell of A."""
    if w < 0:
        raise ValueError(f"window must be >= 0, got {w}")
    if w == 0 or a.is_empty():
        return GridSet(a.m, a.cells)
    arr = a.as_array()
    offsets = np.arange(-w, w + 1, dtype=np.int64)
    return GridSet(a.m, np.unique(arr[:, None] + offsets[None, :]).tolist())


def maximal_separated_subset(a: GridSet, min_gap: int = 2) -> GridSet:
    """Greedy left-to-right maximal subset with index gaps >= ``min_gap``.

    With the default gap 2 the representative points are > delta apart, and
    maximality means every dropped cell is within ``min_gap - 1`` cells of a
    kept one.
    """
    if min_gap < 1:
        raise ValueError(f"min_gap must be >= 1, got {min_gap}")
    kept: list[int] = []
    last: int | None = None
    for c in a.cells:
        if last is None or c - last >= min_gap:
            kept.append(c)
            last = c
    return GridSet(a.m, kept)
