"""Grid-set construction, serialization, and exact cell arithmetic."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sumprodlab import (
    DyadicCell,
    GridSet,
    GridSet2D,
    affine_image,
    arithmetic,
    invert,
    maximal_separated_subset,
    negate,
    neighborhood,
)

from .conftest import grid_pairs, grid_sets


class TestGridSet:
    def test_canonicalizes_cells(self):
        g = GridSet(3, [5, 1, 5, 3])
        assert g.cells == (1, 3, 5)
        assert len(g) == 3

    def test_from_points_floors_exactly(self):
        g = GridSet.from_points([Fraction(1, 3), 0.75, 1], m=2)
        # 1/3 -> cell 1, 3/4 -> cell 3, 1 -> cell 4
        assert g.cells == (1, 3, 4)

    def test_json_round_trip(self):
        g = GridSet(5, [1, 7, 19])
        assert GridSet.from_json(g.to_json()) == g

    def test_text_round_trip(self):
        g = GridSet(4, [0, 3, 15])
        assert GridSet.load_text(g.dump_text()) == g

    def test_delta(self):
        assert GridSet(6, [0]).delta == Fraction(1, 64)

    def test_representative_points(self):
        g = GridSet(2, [1, 3])
        assert list(g.representative_points()) == [Fraction(1, 4), Fraction(3, 4)]

    def test_covering_number_monotone(self):
        g = GridSet(6, [0, 1, 17, 33, 60])
        counts = [g.covering_number(j) for j in range(7)]
        for coarse, fine in zip(counts, counts[1:]):
            assert coarse <= fine <= 2 * coarse

    def test_set_algebra(self):
        a, b = GridSet(4, [1, 2, 3]), GridSet(4, [3, 4])
        assert a.union(b).cells == (1, 2, 3, 4)
        assert a.intersection(b).cells == (3,)
        assert a.difference(b).cells == (1, 2)
        assert a.intersection(b).issubset(a)

    def test_ball_count(self):
        g = GridSet(5, [10, 11, 14])
        assert g.ball_count(11, 1) == 2
        assert g.ball_count(12, 2) == 3
        assert g.ball_count(0, 1) == 0

    def test_scale_mismatch_rejected(self):
        with pytest.raises(ValueError, match="scale"):
            arithmetic(GridSet(3, [1]), GridSet(4, [1]), "sum")


class TestDyadicCell:
    def test_interval_and_parent(self):
        c = DyadicCell(3, 5)
        assert c.interval() == (Fraction(5, 8), Fraction(6, 8))
        assert c.parent() == DyadicCell(2, 2)
        assert c.parent().children() == (DyadicCell(3, 4), DyadicCell(3, 5))


class TestArithmetic:
    def test_sum_and_diff_are_index_exact(self):
        a, b = GridSet(4, [3, 5]), GridSet(4, [2])
        assert arithmetic(a, b, "sum").cells == (5, 7)
        assert arithmetic(a, b, "diff").cells == (1, 3)

    def test_product_floors(self):
        # representatives 3/4 * 3/4 = 9/16 -> cell 9 at m=4
        a = GridSet(4, [12])
        assert arithmetic(a, a, "prod").cells == (9,)

    def test_quotient_floors(self):
        a, b = GridSet(4, [9]), GridSet(4, [12])
        # (9/16) / (12/16) = 3/4 -> cell 12
        assert arithmetic(a, b, "quot").cells == (12,)

    def test_quotient_rejects_zero(self):
        with pytest.raises(ValueError, match="zero"):
            arithmetic(GridSet(3, [1]), GridSet(3, [0, 4]), "quot")

    def test_invert_on_upper_half(self):
        a = GridSet(4, [8])  # the point 1/2
        assert invert(a).cells == (32,)  # 1/(1/2) = 2 -> cell 32

    def test_invert_rejects_small_cells(self):
        with pytest.raises(ValueError, match="1/2"):
            invert(GridSet(4, [3]))

    @given(grid_pairs(max_size=24))
    def test_ops_match_rational_oracle(self, pair):
        a, b = pair
        scale = 2**a.m
        for op, fn in [
            ("sum", lambda x, y: x + y),
            ("diff", lambda x, y: x - y),
            ("prod", lambda x, y: x * y),
        ]:
            got = arithmetic(a, b, op).cells
            pts = {
                fn(Fraction(x, scale), Fraction(y, scale)) for x in a.cells for y in b.cells
            }
            want = sorted({(p * scale).numerator // (p * scale).denominator for p in pts})
            assert list(got) == want, op

    @given(grid_pairs(max_size=16))
    def test_diff_antisymmetry(self, pair):
        a, b = pair
        assert arithmetic(a, b, "diff") == negate(arithmetic(b, a, "diff"))

    @given(grid_pairs(max_size=16))
    def test_sumset_size_bounds(self, pair):
        a, b = pair
        n = len(arithmetic(a, b, "sum"))
        assert max(len(a), len(b)) <= n <= len(a) * len(b)


class TestNeighborhoodAndSeparation:
    def test_neighborhood_closed(self):
        g = GridSet(4, [5])
        assert neighborhood(g, 2).cells == (3, 4, 5, 6, 7)

    @given(grid_sets(max_size=20), st.integers(0, 3), st.integers(0, 3))
    def test_neighborhood_composes(self, g, u, v):
        assert neighborhood(neighborhood(g, u), v) == neighborhood(g, u + v)

    @given(grid_sets(max_size=32))
    def test_maximal_separated_subset(self, g):
        x = maximal_separated_subset(g, 2)
        kept = x.cells
        assert all(b - a >= 2 for a, b in zip(kept, kept[1:]))
        arr = np.asarray(kept)
        for c in g.cells:
            assert np.abs(arr - c).min() <= 1

    def test_affine_image_round_trip(self):
        g = GridSet(5, [4, 12, 28])
        shifted = affine_image(g, 0, Fraction(1, 32))
        assert shifted.cells == (5, 13, 29)
        halved = affine_image(g, -2)
        assert halved.cells == (1, 3, 7)
        with pytest.raises(ValueError, match="exact cell"):
            affine_image(GridSet(5, [5]), -1)


class TestGridSet2D:
    def test_product_and_membership(self):
        p = GridSet2D.product(GridSet(3, [1, 2]), GridSet(3, [5]))
        assert len(p) == 2
        assert (1, 5) in p and (2, 5) in p and (1, 6) not in p

    def test_packed_round_trip(self):
        p = GridSet2D(4, [(3, -7), (0, 0), (15, 9)])
        keys = p.packed_keys()
        assert bool(np.all(p.contains_packed(keys)))
        absent = p.pack(np.array([2]), np.array([2]))
        assert not p.contains_packed(absent)[0]

    def test_covering_number(self):
        p = GridSet2D(2, [(0, 0), (1, 1), (3, 3)])
        assert p.covering_number(1) == 2
        assert p.covering_number(0) == 1
