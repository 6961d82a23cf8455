"""Independent brute-force reference implementations for the test suite.

Everything here recomputes the library's quantities from first principles:
straight enumerations over pairs/quadruples/triples, a high-precision Decimal
dynamic program for dyadic contents, and a literal per-(tube, cell) incidence
scan.  Only cell indices and the scale exponent cross the boundary, so these
stay valid however the library's internals change.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

getcontext().prec = 60
_TIE_TOL = Decimal(10) ** -45


def op_values(a_cells: Sequence[int], b_cells: Sequence[int], mode: str) -> np.ndarray:
    xa = np.asarray(a_cells, dtype=np.int64)
    xb = np.asarray(b_cells, dtype=np.int64)
    if mode == "difference":
        return (xa[:, None] - xb[None, :]).ravel()
    if mode == "sum":
        return (xa[:, None] + xb[None, :]).ravel()
    raise ValueError(mode)


def brute_fiber(a_cells, b_cells, mode, w, center) -> int:
    vals = op_values(a_cells, b_cells, mode)
    return int(np.count_nonzero(np.abs(vals - center) <= w))


def brute_energy(a_cells, b_cells, k, mode, w) -> int | float:
    """sum over all lattice centers z of r(z)**k by direct center scan."""
    vals = op_values(a_cells, b_cells, mode)
    if vals.size == 0:
        return 0 if float(k).is_integer() else 0.0
    centers = np.arange(vals.min() - w, vals.max() + w + 1)
    r = np.count_nonzero(np.abs(vals[None, :] - centers[:, None]) <= w, axis=1)
    kf = Fraction(k)
    if kf.denominator == 1:
        return sum(int(c) ** int(kf) for c in r)
    return math.fsum(float(c) ** float(kf) for c in r if c)


def brute_quadruple(a_cells, b_cells, mode, w) -> int:
    vals = op_values(a_cells, b_cells, mode)
    if vals.size == 0:
        return 0
    return int(np.count_nonzero(np.abs(vals[:, None] - vals[None, :]) <= w))


def brute_representation(a_cells, b_cells, c_cells, w) -> int:
    diffs = op_values(a_cells, b_cells, "difference")
    c = np.asarray(c_cells, dtype=np.int64)
    if diffs.size == 0 or c.size == 0:
        return 0
    return int(np.count_nonzero(np.abs(c[None, :] - diffs[:, None]) <= w))


def brute_incidences(
    m: int,
    w: int,
    tubes: Sequence[tuple[int, int]],
    assignments: Sequence[Iterable[tuple[int, int]]],
    p_cells: Iterable[tuple[int, int]],
) -> int:
    """Literal scan: for every tube, every cell of P, test membership in the
    tube (integer vertical-distance predicate) and in the tube's assignment."""
    pts = list(p_cells)
    total = 0
    for (ia, ib), assigned in zip(tubes, assignments):
        ass = set(assigned)
        if not ass:
            continue
        for (i, j) in pts:
            if (i, j) in ass and abs((j + ib) * ia - (i << m)) <= w * ia:
                total += 1
    return total


# -- dyadic content ---------------------------------------------------------------


def _dec_pow(level: int, alpha: Fraction) -> Decimal:
    return Decimal(2) ** (Decimal(-level) * Decimal(alpha.numerator) / Decimal(alpha.denominator))


def brute_content(cells: Sequence[int], m: int, alpha) -> tuple[float, dict[int, int]]:
    """Decimal-precision greedy DP over the dyadic tree (ties go to the parent).

    Returns the optimal value and the cover profile {level: how many cover
    cells}, independent of the library's exact-sign machinery.
    """
    alpha = Fraction(alpha)
    if not cells:
        return 0.0, {}
    nodes: dict[int, tuple[Decimal, dict[int, int]]] = {
        c: (_dec_pow(m, alpha), {m: 1}) for c in set(cells)
    }
    for level in range(m - 1, -1, -1):
        parents: dict[int, tuple[Decimal, dict[int, int]]] = {}
        groups: dict[int, list[tuple[Decimal, dict[int, int]]]] = {}
        for idx, entry in nodes.items():
            groups.setdefault(idx >> 1, []).append(entry)
        for pidx, entries in groups.items():
            child_val = sum((e[0] for e in entries), Decimal(0))
            pterm = _dec_pow(level, alpha)
            if pterm <= child_val + _TIE_TOL:
                parents[pidx] = (pterm, {level: 1})
            else:
                terms: dict[int, int] = {}
                for _v, t in entries:
                    for lv, n in t.items():
                        terms[lv] = terms.get(lv, 0) + n
                parents[pidx] = (child_val, terms)
        nodes = parents
    (value, terms), = nodes.values()
    return float(value), terms


def enumerate_content_covers(cells: Sequence[int], m: int, alpha) -> float:
    """Minimum over ALL antichain covers, by exhaustive recursion (m <= 4)."""
    alpha = Fraction(alpha)
    cellset = set(cells)
    if not cellset:
        return 0.0

    def best(level: int, idx: int) -> Decimal:
        lo, hi = idx << (m - level), (idx + 1) << (m - level)
        if not any(lo <= c < hi for c in cellset):
            return Decimal(0)
        stop = _dec_pow(level, alpha)
        if level == m:
            return stop
        rec = best(level + 1, 2 * idx) + best(level + 1, 2 * idx + 1)
        return min(stop, rec)

    return float(best(0, 0))


def brute_content_2d(
    cells: Sequence[tuple[int, int]], m: int, alpha
) -> tuple[float, dict[int, int]]:
    """Same DP over the quadtree of 2-D dyadic squares."""
    alpha = Fraction(alpha)
    if not cells:
        return 0.0, {}
    nodes: dict[tuple[int, int], tuple[Decimal, dict[int, int]]] = {
        (x, y): (_dec_pow(m, alpha), {m: 1}) for x, y in set(cells)
    }
    for level in range(m - 1, -1, -1):
        groups: dict[tuple[int, int], list[tuple[Decimal, dict[int, int]]]] = {}
        for (x, y), entry in nodes.items():
            groups.setdefault((x >> 1, y >> 1), []).append(entry)
        parents: dict[tuple[int, int], tuple[Decimal, dict[int, int]]] = {}
        for key, entries in groups.items():
            child_val = sum((e[0] for e in entries), Decimal(0))
            pterm = _dec_pow(level, alpha)
            if pterm <= child_val + _TIE_TOL:
                parents[key] = (pterm, {level: 1})
            else:
                terms: dict[int, int] = {}
                for _v, t in entries:
                    for lv, n in t.items():
                        terms[lv] = terms.get(lv, 0) + n
                parents[key] = (child_val, terms)
        nodes = parents
    (value, terms), = nodes.values()
    return float(value), terms


# -- covering / regularity ----------------------------------------------------------


def brute_covering_number(cells: Sequence[int], m: int, level: int) -> int:
    return len({c >> (m - level) for c in cells})


def brute_kt_value(cells: Sequence[int], m: int, s) -> float:
    """max over centers in A and dyadic radii of count / (r/delta)**s."""
    s = float(s)
    arr = sorted(cells)
    best = 0.0
    for c in arr:
        for j in range(m + 1):
            radius = 1 << (m - j)
            count = sum(1 for x in arr if abs(x - c) <= radius)
            best = max(best, count / 2.0 ** ((m - j) * s))
    return best


def brute_set_frostman(cells: Sequence[int], m: int, s) -> float:
    """max over centers in A and dyadic radii of count / (r**s * #A)."""
    s = float(s)
    arr = sorted(cells)
    best = 0.0
    for c in arr:
        for j in range(m + 1):
            radius = 1 << (m - j)
            count = sum(1 for x in arr if abs(x - c) <= radius)
            best = max(best, count / len(arr) * 2.0 ** (j * s))
    return best


def brute_sigma(cells: Sequence[int], m: int, eps: float) -> float:
    """max(0, min over 1<=j<=m of (log2 N_j - eps*m)/j), by direct scan."""
    vals = []
    for j in range(1, m + 1):
        nj = brute_covering_number(cells, m, j)
        vals.append((math.log2(nj) - eps * m) / j)
    return max(0.0, min(vals))
