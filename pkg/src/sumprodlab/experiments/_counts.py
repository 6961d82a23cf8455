"""Exact bulk counting kernels for the pipeline chains.

Three jobs, all integer-exact:

* triple counts ``#{(r, a1, a2)}`` / ``#{(r1, r2, a)}`` with membership
  constraints, via 0/1 Gram matrices.  The matrix products run in float64
  BLAS, which is exact here: every entry and every partial sum is a
  nonnegative integer below 2**53 (guarded).
* correlation sums ``sum_x #{(u, v) in U x V : u - v = x}`` over a set of
  shifts, via big-integer bitmasks and popcounts -- the only approach that
  stays exact when U, V are 10^5-element neighborhoods whose pair set is
  far too large to enumerate.
* aligned products of w=0 fiber histograms (collision counts), in Python
  integers so triple products cannot overflow.
"""

from __future__ import annotations

import numpy as np

from ..energy import FiberCounts

__all__ = [
    "isin_sorted",
    "gram_triple_difference",
    "gram_triple_sum",
    "correlation_sum",
    "fiber_product_sum",
]

_EXACT_FLOAT_LIMIT = 2**53


def isin_sorted(values: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Membership of ``values`` in a sorted int64 ``table``, as a bool array."""
    if table.size == 0:
        return np.zeros(values.shape, dtype=bool)
    pos = np.minimum(np.searchsorted(table, values), table.size - 1)
    return table[pos] == values


def _exact_masked_total(weights: np.ndarray, mask: np.ndarray, bound: int) -> int:
    if bound >= _EXACT_FLOAT_LIMIT:
        raise OverflowError(
            f"triple count bound {bound} exceeds the exact float64 range; "
            "this instance is too large for the Gram kernel"
        )
    total = float(np.sum(weights * mask))
    assert total == int(total)
    return int(total)


def gram_triple_difference(
    rich: np.ndarray, a: np.ndarray, near_target: np.ndarray, near_pair: np.ndarray
) -> tuple[int, np.ndarray]:
    """Exact ``#{(r, a1, a2) : r-a1, r-a2 in near_target, a2-a1 in near_pair}``.

    Returns the count together with the per-``r`` degrees
    ``#{a : r - a in near_target}``.  ``near_target`` / ``near_pair`` must be
    sorted cell arrays.
    """
    if rich.size == 0 or a.size == 0:
        return 0, np.zeros(rich.size, dtype=np.int64)
    member = isin_sorted(rich[:, None] - a[None, :], near_target)
    m = member.astype(np.float64)
    degrees = member.sum(axis=1).astype(np.int64)
    weights = m.T @ m  # (a1, a2) -> #{r : both differences land in the target}
    pair_ok = isin_sorted(a[None, :] - a[:, None], near_pair)
    count = _exact_masked_total(weights, pair_ok, rich.size * a.size * a.size)
    return count, degrees


def gram_triple_sum(
    r1: np.ndarray,
    r2: np.ndarray,
    a: np.ndarray,
    near_first: np.ndarray,
    near_second: np.ndarray,
    near_pair: np.ndarray,
) -> tuple[int, int, np.ndarray, np.ndarray, np.ndarray]:
    """Exact ``#{(x, y, a) : x+a in near_first, y+a in near_second, x-y in near_pair}``.

    Returns ``(count, masked_pairs, deg1, deg2, mask)`` where ``masked_pairs``
    is the number of (x, y) pairs with ``x - y`` in ``near_pair`` and the
    degrees count translate hits per element of R1 / R2.
    """
    if r1.size == 0 or r2.size == 0 or a.size == 0:
        mask = np.zeros((r1.size, r2.size), dtype=bool)
        return 0, 0, np.zeros(r1.size, np.int64), np.zeros(r2.size, np.int64), mask
    m1 = isin_sorted(r1[:, None] + a[None, :], near_first)
    m2 = isin_sorted(r2[:, None] + a[None, :], near_second)
    deg1 = m1.sum(axis=1).astype(np.int64)
    deg2 = m2.sum(axis=1).astype(np.int64)
    weights = m1.astype(np.float64) @ m2.astype(np.float64).T  # (x, y) -> #{a}
    mask = isin_sorted(r1[:, None] - r2[None, :], near_pair)
    count = _exact_masked_total(weights, mask, r1.size * r2.size * a.size)
    return count, int(mask.sum()), deg1, deg2, mask


def _bitmask(cells: np.ndarray, lo: int, width: int) -> int:
    dense = np.zeros(width, dtype=np.uint8)
    dense[cells - lo] = 1
    return int.from_bytes(np.packbits(dense, bitorder="little").tobytes(), "little")


def correlation_sum(u: np.ndarray, v: np.ndarray, shifts: np.ndarray) -> int:
    """Exact ``sum over x in shifts of #{(a, b) in U x V : a - b = x}``.

    Each shift costs one big-int shift/and/popcount over the occupied range,
    so the total work is #shifts * range/64 machine words.
    """
    if u.size == 0 or v.size == 0 or shifts.size == 0:
        return 0
    lo_u, lo_v = int(u.min()), int(v.min())
    bits_u = _bitmask(u, lo_u, int(u.max()) - lo_u + 1)
    bits_v = _bitmask(v, lo_v, int(v.max()) - lo_v + 1)
    total = 0
    for x in shifts.tolist():
        t = x + lo_v - lo_u  # align bit positions: a - lo_u = (b - lo_v) + t
        if t >= 0:
            total += (bits_u & (bits_v << t)).bit_count()
        else:
            total += ((bits_u >> -t) & bits_v).bit_count()
    return total


def fiber_product_sum(*fcs: FiberCounts) -> int:
    """Exact ``sum_z prod_i fc_i(z)`` over the common support, in big ints."""
    maps = [dict(zip(fc.centers.cells, fc.counts)) for fc in fcs]
    pivot = min(maps, key=len)
    others = [mp for mp in maps if mp is not pivot]
    total = 0
    for z, c in pivot.items():
        prod = c
        for mp in others:
            v = mp.get(z)
            if not v:
                prod = 0
                break
            prod *= v
        total += prod
    return total
