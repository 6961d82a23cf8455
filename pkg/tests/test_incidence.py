"""Tube incidences: grid walk vs brute scan vs a literal per-pair oracle."""

import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sumprodlab import (
    GridSet,
    GridSet2D,
    Tube,
    build_shading,
    build_tube_family,
    count_incidences,
    maximal_separated_subset,
    neighborhood,
    representation_count,
    theorem_bound_ratio,
)

from .conftest import grid_pairs, grid_sets
from .oracles import brute_incidences, brute_representation


def _expected_assignment(m, w_shade, tube, a: GridSet, c: GridSet):
    """Independent reconstruction of a tube's shading, straight off the docs."""
    near = set(neighborhood(c, w_shade).cells)
    return {((ap * tube.a) >> m, ap - tube.b) for ap in a.cells if ap - tube.b in near}


def _cells_of(shading, i):
    m = shading.family.m
    half = 1 << (m + 3)
    keys = shading.assignment[i]
    return {(int(k >> (m + 4)), int((k & ((1 << (m + 4)) - 1)) - half)) for k in keys}


@st.composite
def incidence_instances(draw):
    m = draw(st.integers(4, 6))
    slopes = draw(grid_sets(min_m=m, max_m=m, max_size=5, upper_half=True))
    offsets = draw(grid_sets(min_m=m, max_m=m, max_size=5))
    a = draw(grid_sets(min_m=m, max_m=m, max_size=10))
    c = draw(grid_sets(min_m=m, max_m=m, max_size=8))
    return slopes, offsets, a, c


class TestTube:
    def test_direction_cells_span_the_slope_range(self):
        m = 6
        assert Tube(1 << (m - 1), 0).direction_cell(m) == 1 << (m + 1)
        assert Tube(1 << m, 0).direction_cell(m) == 1 << m
        for ia in range(1 << (m - 1), (1 << m) + 1):
            assert (1 << m) <= Tube(ia, 0).direction_cell(m) <= 1 << (m + 1)


class TestBuildTubeFamily:
    def test_product_structure_and_constants(self):
        m = 6
        slopes = GridSet(m, [32, 40, 48, 64])
        offsets = GridSet(m, [0, 3, 5])
        fam = build_tube_family(slopes, offsets)
        assert len(fam.tubes) == len(slopes) * len(offsets)
        assert len(fam.directions) <= len(slopes)
        assert fam.k1 >= 1.0 and fam.k2 >= 1.0
        assert fam.delta == Fraction(1, 64)

    def test_rejects_small_slopes_and_bad_width(self):
        m = 6
        with pytest.raises(ValueError):
            build_tube_family(GridSet(m, [10, 40]), GridSet(m, [0]))
        with pytest.raises(ValueError):
            build_tube_family(GridSet(m, [40]), GridSet(m, [0]), w=-1)
        with pytest.raises(ValueError):
            build_tube_family(GridSet(m, []), GridSet(m, [0]))
        with pytest.raises(ValueError):
            build_tube_family(GridSet(6, [40]), GridSet(5, [0]))


class TestBuildShading:
    def test_matches_documented_construction(self):
        m = 5
        fam = build_tube_family(GridSet(m, [17, 24, 32]), GridSet(m, [0, 2]))
        a = GridSet(m, [3, 9, 14, 20])
        c = GridSet(m, [7, 12, 18])
        shading = build_shading(fam, a, c, w=1)
        for i, tube in enumerate(fam.tubes):
            assert _cells_of(shading, i) == _expected_assignment(m, 1, tube, a, c)
        assert shading.k3 >= 1.0
        assert shading.sigma_prime == 1.0  # min(1/2 + 1/2, 2 - 1)

    def test_assigned_cells_meet_their_tube(self):
        m = 6
        fam = build_tube_family(GridSet(m, [33, 48]), GridSet(m, [1, 6]))
        a = GridSet(m, [5, 21, 40, 59])
        shading = build_shading(fam, a, GridSet(m, [15, 34, 53]), w=2)
        for i, tube in enumerate(fam.tubes):
            for (x, y) in _cells_of(shading, i):
                assert abs((y + tube.b) * tube.a - (x << m)) <= fam.w * tube.a

    def test_narrow_family_cannot_hold_product_quantization(self):
        # a' = 10 against slope cell 9 at m=4: 90 = 5*16 + 10, and the
        # remainder 10 exceeds one tube width (9) but not two
        m = 4
        a, c = GridSet(m, [10]), GridSet(m, [10])
        narrow = build_tube_family(GridSet(m, [9]), GridSet(m, [0]), w=1)
        with pytest.raises(ValueError, match="width >= 2"):
            build_shading(narrow, a, c, w=0)
        wide = build_tube_family(GridSet(m, [9]), GridSet(m, [0]), w=2)
        assert build_shading(wide, a, c, w=0).total_assigned() == 1

    def test_empty_target_empties_the_shading(self):
        m = 5
        fam = build_tube_family(GridSet(m, [20, 28]), GridSet(m, [0, 4]))
        shading = build_shading(fam, GridSet(m, [6, 11]), GridSet(m, []))
        assert shading.total_assigned() == 0
        assert len(shading.union_cells()) == 0
        p = GridSet2D(m, [(3, 3)])
        assert count_incidences(p, fam, shading, mode="grid") == 0

    def test_scale_mismatch_rejected(self):
        fam = build_tube_family(GridSet(5, [20]), GridSet(5, [0]))
        with pytest.raises(ValueError):
            build_shading(fam, GridSet(6, [5]), GridSet(6, [5]))


class TestCountIncidences:
    def test_single_tube_single_cell(self):
        m = 4
        fam = build_tube_family(GridSet(m, [16]), GridSet(m, [0]))
        shading = build_shading(fam, GridSet(m, [12]), GridSet(m, [12]), w=0)
        p = GridSet2D(m, [(12, 12)])
        assert count_incidences(p, fam, shading, mode="grid") == 1
        assert count_incidences(p, fam, shading, mode="brute") == 1

    @given(incidence_instances())
    def test_grid_equals_brute_equals_oracle(self, inst):
        slopes, offsets, a, c = inst
        m = slopes.m
        fam = build_tube_family(slopes, offsets)
        shading = build_shading(fam, a, c, w=1)
        union = [(int(x), int(y)) for x, y in zip(*shading.union_cells().arrays())]
        extra = [(1, 1), (2, -3), (3, 5)]
        for pts in [union, union[::2] + extra]:
            p = GridSet2D(m, pts)
            grid = count_incidences(p, fam, shading, mode="grid")
            brute = count_incidences(p, fam, shading, mode="brute")
            oracle = brute_incidences(
                m,
                fam.w,
                [(t.a, t.b) for t in fam.tubes],
                [_expected_assignment(m, 1, t, a, c) for t in fam.tubes],
                pts,
            )
            assert grid == brute == oracle

    def test_separated_target_gives_exact_product_identity(self):
        # with C spread out by more than the window, every difference lands
        # near at most one target cell, so each of the #slopes tubes per
        # offset holds exactly one cell per representation triple
        m = 6
        slopes = GridSet(m, [33, 40, 501 >> 3])  # 62: three distinct slopes
        offsets = GridSet(m, [0, 3, 9])
        a = GridSet(m, [5, 12, 20, 33, 47])
        w = 1
        c = maximal_separated_subset(GridSet(m, [9, 10, 11, 24, 25, 44]), 2 * w + 1)
        fam = build_tube_family(slopes, offsets)
        shading = build_shading(fam, a, c, w=w)
        rep = representation_count(a, offsets, c, w=w)
        count = count_incidences(shading.union_cells(), fam, shading, mode="grid")
        assert count == shading.total_assigned() == len(slopes) * rep
        assert rep <= count

    def test_missing_points_are_dropped_and_logged(self, caplog):
        m = 5
        fam = build_tube_family(GridSet(m, [20, 28]), GridSet(m, [0, 4]))
        shading = build_shading(fam, GridSet(m, [6, 11, 25]), GridSet(m, [4, 13, 22]))
        union = [(int(x), int(y)) for x, y in zip(*shading.union_cells().arrays())]
        assert len(union) >= 2
        p = GridSet2D(m, union[1:])
        with caplog.at_level(logging.WARNING, logger="sumprodlab.incidence"):
            full = count_incidences(GridSet2D(m, union), fam, shading, mode="grid")
            part = count_incidences(p, fam, shading, mode="grid")
        assert part < full
        assert any("dropped" in rec.message for rec in caplog.records)

    def test_empty_point_set(self):
        m = 5
        fam = build_tube_family(GridSet(m, [20]), GridSet(m, [0]))
        shading = build_shading(fam, GridSet(m, [6]), GridSet(m, [6]))
        assert count_incidences(GridSet2D(m, []), fam, shading, mode="grid") == 0
        assert count_incidences(GridSet2D(m, []), fam, shading, mode="brute") == 0

    def test_mode_and_scale_validation(self):
        m = 5
        fam = build_tube_family(GridSet(m, [20]), GridSet(m, [0]))
        shading = build_shading(fam, GridSet(m, [6]), GridSet(m, [6]))
        with pytest.raises(ValueError):
            count_incidences(GridSet2D(m, [(1, 1)]), fam, shading, mode="fast")
        with pytest.raises(ValueError):
            count_incidences(GridSet2D(4, [(1, 1)]), fam, shading)


class TestRepresentationCount:
    @given(grid_pairs(min_m=3, max_m=7, max_size=16), st.integers(0, 2))
    def test_matches_brute(self, pair, w):
        a, b = pair
        c = GridSet(a.m, a.cells[: len(a) // 2 + 1])
        assert representation_count(a, b, c, w) == brute_representation(a.cells, b.cells, c.cells, w)

    def test_empty_factors(self):
        m = 4
        assert representation_count(GridSet(m, []), GridSet(m, [1]), GridSet(m, [1])) == 0
        assert representation_count(GridSet(m, [1]), GridSet(m, [1]), GridSet(m, [])) == 0


class TestTheoremBoundRatio:
    def _setup(self):
        m = 6
        fam = build_tube_family(GridSet(m, [33, 40, 62]), GridSet(m, [0, 3, 9]))
        shading = build_shading(fam, GridSet(m, [5, 12, 20, 33, 47]), GridSet(m, [9, 24, 44]))
        return fam, shading

    def test_default_call_matches_explicit_parts(self):
        fam, shading = self._setup()
        points = shading.union_cells()
        inc = count_incidences(points, fam, shading, mode="grid")
        assert theorem_bound_ratio(fam, shading, 0.5, 0.5) == theorem_bound_ratio(
            fam, shading, 0.5, 0.5, incidences=inc, points=points
        )

    def test_ratio_is_linear_in_the_count(self):
        fam, shading = self._setup()
        one = theorem_bound_ratio(fam, shading, 0.5, 0.5, incidences=10)
        two = theorem_bound_ratio(fam, shading, 0.5, 0.5, incidences=20)
        assert two == pytest.approx(2 * one)

    def test_denominator_wiring(self):
        fam, shading = self._setup()
        n_union = len(shading.union_cells())
        rhs = (2.0 ** fam.m * len(fam.tubes)) ** (1 / 3) * n_union ** (2 / 3)
        got = theorem_bound_ratio(fam, shading, 0.5, 0.5, k1=1, k2=1, k3=1, incidences=7)
        assert got == pytest.approx(7 / rhs)

    def test_empty_shading_gives_zero(self):
        m = 5
        fam = build_tube_family(GridSet(m, [20]), GridSet(m, [0]))
        shading = build_shading(fam, GridSet(m, [6]), GridSet(m, []))
        assert theorem_bound_ratio(fam, shading, 0.5, 0.5) == 0.0
