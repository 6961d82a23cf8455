"""Dyadic alpha-content of grid sets by exact tree dynamic programming.

The content of A at exponent ``alpha`` is the minimum of
``sum_cells (side length)**alpha`` over all covers of A by dyadic cells of
side <= 1.  On the restricted dyadic tree this is the classic bottom-up
recursion ``value(node) = min(2**(-level*alpha), sum over children)``; the
twist here is that values are kept as exact formal sums ``{level: count}``
and compared with certified sign evaluation, so ties (ubiquitous for
self-similar sets at matching exponents) are decided exactly, never by float
luck.  Ties keep the coarser cell, which makes covers deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ._exact import power_sum_sign, power_sum_value
from .grid import DyadicCell, DyadicSquare, GridSet, GridSet2D

__all__ = [
    "ContentResult",
    "ContentResult2D",
    "dyadic_content",
    "dyadic_content_2d",
]

Terms = dict[int, int]


def _merge(into: Terms, other: Terms) -> None:
    for j, n in other.items():
        into[j] = into.get(j, 0) + n


def _parent_wins(level: int, child_sum: Terms, alpha: Fraction) -> bool:
    """True iff 2**(-level*alpha) <= sum of the children values (tie -> parent)."""
    diff = dict(child_sum)
    diff[level] = diff.get(level, 0) - 1
    # child_sum - own >= 0  <=>  parent is at most the children total.
    return power_sum_sign(diff, alpha) >= 0


def _normalize_alpha(alpha: float | Fraction, ambient_dim: int = 1) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 < alpha <= ambient_dim:
        raise ValueError(
            f"content exponent must lie in (0, {ambient_dim}], got {alpha}"
        )
    return alpha


def _flatten(cover: object, out: list) -> None:
    if isinstance(cover, list):
        for sub in cover:
            _flatten(sub, out)
    else:
        out.append(cover)


@dataclass(frozen=True)
class ContentResult:
    """Exact optimum: float value, formal terms {level: count}, optimal cover."""

    alpha: Fraction
    value: float
    terms: tuple[tuple[int, int], ...]
    cover: tuple[DyadicCell, ...]

    def terms_dict(self) -> Terms:
        return dict(self.terms)


@dataclass(frozen=True)
class ContentResult2D:
    alpha: Fraction
    value: float
    terms: tuple[tuple[int, int], ...]
    cover: tuple[DyadicSquare, ...]

    def terms_dict(self) -> Terms:
        return dict(self.terms)


def _pack_terms(terms: Terms) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((j, n) for j, n in terms.items() if n))


def dyadic_content(a: GridSet, alpha: float | Fraction) -> ContentResult:
    alpha = _normalize_alpha(alpha)
    if a.is_empty():
        return ContentResult(alpha, 0.0, (), ())
    m = a.m
    cur: dict[int, tuple[Terms, object]] = {
        i: ({m: 1}, DyadicCell(m, i)) for i in a.cells
    }
    for level in range(m - 1, -1, -1):
        grouped: dict[int, tuple[Terms, list]] = {}
        for idx, (terms, cov) in cur.items():
            p = idx >> 1
            slot = grouped.get(p)
            if slot is None:
                grouped[p] = ({**terms}, [cov])
            else:
                _merge(slot[0], terms)
                slot[1].append(cov)
        cur = {}
        for p, (child_sum, covs) in grouped.items():
            if _parent_wins(level, child_sum, alpha):
                cur[p] = ({level: 1}, DyadicCell(level, p))
            else:
                cur[p] = (child_sum, covs)
    total: Terms = {}
    covers: list = []
    for _idx, (terms, cov) in sorted(cur.items()):
        _merge(total, terms)
        covers.append(cov)
    flat: list = []
    _flatten(covers, flat)
    flat.sort()
    return ContentResult(
        alpha, power_sum_value(total, alpha), _pack_terms(total), tuple(flat)
    )


def dyadic_content_2d(p: GridSet2D, alpha: float | Fraction) -> ContentResult2D:
    """Quadtree analogue of :func:`dyadic_content` for planar grid sets."""
    alpha = _normalize_alpha(alpha, ambient_dim=2)
    if len(p) == 0:
        return ContentResult2D(alpha, 0.0, (), ())
    m = p.m
    cur: dict[tuple[int, int], tuple[Terms, object]] = {
        (x, y): ({m: 1}, DyadicSquare(m, x, y)) for x, y in p.cells
    }
    for level in range(m - 1, -1, -1):
        grouped: dict[tuple[int, int], tuple[Terms, list]] = {}
        for (x, y), (terms, cov) in cur.items():
            key = (x >> 1, y >> 1)
            slot = grouped.get(key)
            if slot is None:
                grouped[key] = ({**terms}, [cov])
            else:
                _merge(slot[0], terms)
                slot[1].append(cov)
        cur = {}
        for key, (child_sum, covs) in grouped.items():
            if _parent_wins(level, child_sum, alpha):
                cur[key] = ({level: 1}, DyadicSquare(level, key[0], key[1]))
            else:
                cur[key] = (child_sum, covs)
    total: Terms = {}
    covers: list = []
    for _key, (terms, cov) in sorted(cur.items()):
        _merge(total, terms)
        covers.append(cov)
    flat: list = []
    _flatten(covers, flat)
    flat.sort()
    return ContentResult2D(
        alpha, power_sum_value(total, alpha), _pack_terms(total), tuple(flat)
    )


def cover_is_antichain(cover: Iterable[DyadicCell]) -> bool:
    """No two cells of the cover overlap (sanity helper for tests)."""
    spans = sorted(c.interval() for c in cover)
    return all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
