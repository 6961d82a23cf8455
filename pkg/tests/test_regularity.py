"""Frostman constants, branching profiles, sigma exponents, box dimension."""

import math
from fractions import Fraction

import pytest
from hypothesis import given

from sumprodlab import (
    GridSet,
    box_dim_estimate,
    branching_profile,
    cantor_set,
    frostman_constant,
    sigma_exponent,
)

from .conftest import grid_sets
from .oracles import (
    brute_covering_number,
    brute_kt_value,
    brute_set_frostman,
    brute_sigma,
)


class TestFrostman:
    def test_single_cell_kt(self):
        rep = frostman_constant(GridSet(5, [7]), Fraction(1, 2), kind="kt")
        assert rep.value == pytest.approx(1.0)
        assert rep.satisfies(1)

    def test_full_interval_kt_at_most_three(self):
        g = GridSet(6, range(64))
        rep = frostman_constant(g, 1, kind="kt")
        assert rep.satisfies(3)

    def test_cantor_kt_bounded_by_eight(self):
        a = cantor_set(4, {0, 2}, 6, 12)
        rep = frostman_constant(a, Fraction(1, 2), kind="kt")
        assert rep.satisfies(8)

    def test_witness_is_tight(self):
        g = GridSet(4, [0, 1, 2, 9, 13])
        rep = frostman_constant(g, Fraction(1, 2), kind="kt")
        lo, hi = rep.c_min_bounds()
        assert rep.satisfies(hi)
        assert not rep.satisfies(lo * (1 - Fraction(1, 10**9)))

    @given(grid_sets(max_size=24))
    def test_matches_scan_oracle(self, g):
        rep = frostman_constant(g, Fraction(1, 2), kind="kt")
        want = brute_kt_value(g.cells, g.m, 0.5)
        assert rep.value == pytest.approx(want, rel=1e-9)

    @given(grid_sets(max_size=24))
    def test_set_kind_matches_scan_oracle(self, g):
        rep = frostman_constant(g, Fraction(1, 2), kind="set")
        want = brute_set_frostman(g.cells, g.m, 0.5)
        assert rep.value == pytest.approx(want, rel=1e-9)

    def test_set_kind_flags_concentration(self):
        # a singleton is maximally concentrated relative to its own size
        rep = frostman_constant(GridSet(8, [5]), Fraction(1, 2), kind="set")
        assert rep.value == pytest.approx(2.0 ** (8 * 0.5))
        assert not rep.satisfies(2)

    @given(grid_sets(max_size=24))
    def test_kt_below_set_times_mass(self, g):
        # both scans see the same counts, so per level
        # count*(delta/r)**s == (count/#A * r**-s) * #A * delta**s
        s = Fraction(1, 2)
        kt = frostman_constant(g, s, kind="kt")
        st = frostman_constant(g, s, kind="set")
        rhs = st.value * len(g) * 2.0 ** (-g.m * float(s))
        assert kt.value <= rhs * (1 + 1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            frostman_constant(GridSet(3, []), Fraction(1, 2))


class TestBranchingProfile:
    def test_full_interval_step_two(self):
        g = GridSet(4, range(16))
        prof = branching_profile(g, 2)
        assert prof.levels == ((0, 1), (1, 4), (2, 16))

    def test_single_cell(self):
        prof = branching_profile(GridSet(6, [17]), 3)
        assert all(c == 1 for _j, c in prof.levels)

    def test_cantor_doubling(self):
        a = cantor_set(4, {0, 2}, 4, 8)
        prof = branching_profile(a, 2)
        assert [c for _j, c in prof.levels] == [1, 2, 4, 8, 16]

    def test_step_must_divide(self):
        with pytest.raises(ValueError, match="divide"):
            branching_profile(GridSet(6, [0]), 4)

    @given(grid_sets(max_size=32))
    def test_counts_match_oracle(self, g):
        prof = branching_profile(g)
        for j, c in prof.levels:
            assert c == brute_covering_number(g.cells, g.m, j)

    def test_csv_shape(self):
        prof = branching_profile(GridSet(2, [0, 3]), 1)
        lines = prof.to_csv().strip().splitlines()
        assert lines[0] == "level,count,ratio"
        assert len(lines) == 4


class TestSigma:
    def test_full_interval(self):
        assert sigma_exponent(GridSet(6, range(64)), 0.0).value == pytest.approx(1.0)

    def test_single_cell(self):
        assert sigma_exponent(GridSet(6, [3]), 0.0).value == 0.0

    def test_cantor_value_frozen(self):
        # the [1/2,1] shift makes the level-1 covering number 1, so the min
        # lands at j=1 and clamps to zero for this set...
        a = cantor_set(4, {0, 2}, 8, 16)
        rep = sigma_exponent(a, 0.01)
        assert rep.value == pytest.approx(brute_sigma(a.cells, 16, 0.01))
        assert rep.value == 0.0 and rep.argmin_level == 1

    def test_difference_set_sigma_positive(self):
        # ...while the spread-out difference set keeps a genuine exponent.
        from sumprodlab import arithmetic

        a = cantor_set(4, {0, 2}, 8, 16)
        d = arithmetic(a, a, "diff")
        rep = sigma_exponent(d, 0.01)
        assert rep.value == pytest.approx(brute_sigma(d.cells, 16, 0.01))
        assert rep.value > 0.3

    @given(grid_sets(max_size=40))
    def test_matches_oracle(self, g):
        got = sigma_exponent(g, 0.05).value
        assert got == pytest.approx(brute_sigma(g.cells, g.m, 0.05), abs=1e-12)


def test_box_dim_of_full_interval():
    est = box_dim_estimate(GridSet(8, range(256)))
    assert est.dimension == pytest.approx(1.0)


def test_box_dim_of_cantor():
    a = cantor_set(4, {0, 2}, 7, 14)
    est = box_dim_estimate(a)
    assert abs(est.dimension - 0.5) < 0.1
