"""Uniformization ladder: period solving, checks, extraction, partition."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sumprodlab import (
    GridSet,
    cantor_set,
    extract_uniform,
    is_uniform,
    ladder_levels,
    ladder_period,
    partition_uniform,
    random_frostman,
    solve_T_eps,
)

from .conftest import grid_sets


class TestSolveT:
    def test_eps_one(self):
        assert solve_T_eps(1.0) == pytest.approx(2.0)

    def test_eps_half(self):
        assert solve_T_eps(0.5) == pytest.approx(8.0)

    def test_eps_tenth(self):
        t = solve_T_eps(0.1)
        assert math.log2(2 * t) / t == pytest.approx(0.1, rel=1e-10)

    def test_monotone(self):
        assert solve_T_eps(0.3) < solve_T_eps(0.2) < solve_T_eps(0.1)

    @pytest.mark.parametrize("eps", [1.5, 0, -0.1])
    def test_domain(self, eps):
        with pytest.raises(ValueError):
            solve_T_eps(eps)


class TestLadder:
    def test_period_divides(self):
        assert ladder_period(20, 1.0) == 2
        assert ladder_period(20, 0.5) == 10
        # root ~71.66 exceeds m: fall back to the trivial ladder
        assert ladder_period(20, 0.1) == 20

    def test_levels(self):
        assert ladder_levels(12, 4) == (0, 4, 8, 12)
        assert ladder_levels(12, 12) == (0, 12)


class TestIsUniform:
    def test_full_interval_uniform(self):
        g = GridSet(4, range(16))
        assert is_uniform(g, 2).ok

    def test_cantor_uniform(self):
        a = cantor_set(4, {0, 2}, 4, 8)
        assert is_uniform(a, 2).ok

    def test_lopsided_set_fails(self):
        # one stray cell next to a solid right half: branching 1 vs 4 at level 2
        g = GridSet(4, [0] + list(range(8, 16)))
        chk = is_uniform(g, 2, factor=2)
        assert not chk.ok
        assert chk.witness is not None
        child_level, _amin, cmin, _amax, cmax = chk.witness
        assert cmax > 2 * cmin

    @given(grid_sets(min_m=4, max_m=8, max_size=40))
    def test_factor_one_means_exact_branching(self, g):
        period = 2 if g.m % 2 == 0 else 1
        chk = is_uniform(g, period, factor=1)
        if chk.ok:
            # every ancestor at each rung has identical child counts
            for lo, hi in zip(range(0, g.m, period), range(period, g.m + 1, period)):
                parents = {}
                for c in g.cells:
                    parents.setdefault(c >> (g.m - lo), set()).add(c >> (g.m - hi))
                counts = {len(v) for v in parents.values()}
                assert len(counts) == 1


class TestExtractUniform:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            extract_uniform(GridSet(4, []), 2)

    @given(grid_sets(min_m=4, max_m=8, max_size=64))
    def test_output_is_uniform_and_retained(self, g):
        period = next(p for p in (2, 3, 1) if g.m % p == 0)
        sub, cert = extract_uniform(g, period)
        assert sub.issubset(g)
        # class pigeonholing pins counts inside a dyadic window, i.e. F = 2
        assert is_uniform(sub, period, factor=2).ok
        # pigeonhole: retention at least the certificate's guarantee
        assert Fraction(len(sub), len(g)) >= cert.retention_bound
        assert cert.retention_bound >= Fraction(1, (g.m + 1) ** (g.m // period))

    def test_certificate_records_rungs(self):
        a = GridSet(6, [0, 1, 5, 9, 33, 34, 35, 60])
        sub, cert = extract_uniform(a, 3)
        assert cert.period == 3
        assert len(cert.rungs) == 2
        assert cert.levels == (0, 3, 6)


class TestPartitionUniform:
    @given(grid_sets(min_m=4, max_m=8, max_size=48))
    def test_partition_disjoint_exhaustive_uniform(self, g):
        period = next(p for p in (2, 3, 1) if g.m % p == 0)
        parts = partition_uniform(g, period)
        seen: set[int] = set()
        for part, _cert in parts:
            assert is_uniform(part, period, factor=2).ok
            assert not (seen & part.as_set())
            seen |= part.as_set()
        assert seen == g.as_set()

    def test_part_count_is_modest(self):
        a = cantor_set(4, {0, 2}, 5, 10)
        parts = partition_uniform(a, 2)
        assert 1 <= len(parts) <= 10


def test_random_frostman_uniformizes():
    a = random_frostman(Fraction(1, 2), 12, seed=7)
    sub, cert = extract_uniform(a, 3)
    assert is_uniform(sub, 3, factor=2).ok
    assert len(sub) >= len(a) * float(cert.retention_bound)
