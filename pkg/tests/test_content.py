"""Dyadic alpha-content: exact tree DP against Decimal and enumeration oracles."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sumprodlab import GridSet, GridSet2D, cantor_set, dyadic_content, dyadic_content_2d
from sumprodlab.content import cover_is_antichain

from .conftest import grid_sets
from .oracles import brute_content, brute_content_2d, enumerate_content_covers

ALPHAS = [Fraction(1), Fraction(1, 2), Fraction(3, 4), Fraction(5, 8)]


def test_empty_set_has_zero_content():
    res = dyadic_content(GridSet(4, []), Fraction(1, 2))
    assert res.value == 0.0
    assert res.cover == ()


def test_single_cell():
    res = dyadic_content(GridSet(3, [5]), Fraction(1, 2))
    # one cell of side 1/8: content 8^(-1/2)
    assert res.value == pytest.approx(2.0**-1.5)
    assert res.terms == ((3, 1),)


def test_full_interval_alpha_one_collapses_to_root():
    res = dyadic_content(GridSet(4, range(16)), Fraction(1))
    assert res.terms == ((0, 1),)
    assert res.value == pytest.approx(1.0)


def test_cantor_alpha_half_collapses_to_coarsest_cell():
    # at alpha = 1/2 every refinement of the level-1 cell holding the shifted
    # set ties with it (counts double as the side term halves its square
    # root), and ties collapse toward the coarser cover.
    a = cantor_set(4, {0, 2}, 4, 8)
    res = dyadic_content(a, Fraction(1, 2))
    assert res.terms == ((1, 1),)
    assert res.value == pytest.approx(2.0**-0.5)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_matches_decimal_oracle_on_cantor(alpha):
    a = cantor_set(4, {0, 2}, 3, 7)
    res = dyadic_content(a, alpha)
    want_value, want_terms = brute_content(a.cells, a.m, alpha)
    assert res.terms_dict() == want_terms
    assert res.value == pytest.approx(want_value, rel=1e-12)


@given(grid_sets(min_m=2, max_m=6, max_size=24), st.sampled_from(ALPHAS))
def test_matches_decimal_oracle(g, alpha):
    res = dyadic_content(g, alpha)
    want_value, want_terms = brute_content(g.cells, g.m, alpha)
    assert res.terms_dict() == want_terms
    assert res.value == pytest.approx(want_value, rel=1e-12)


@given(grid_sets(min_m=2, max_m=4, max_size=12), st.sampled_from(ALPHAS))
def test_is_minimum_over_all_covers(g, alpha):
    res = dyadic_content(g, alpha)
    best = enumerate_content_covers(g.cells, g.m, alpha)
    assert res.value == pytest.approx(best, rel=1e-12)


@given(grid_sets(max_size=32), st.sampled_from(ALPHAS))
def test_cover_is_antichain_and_covers(g, alpha):
    res = dyadic_content(g, alpha)
    assert cover_is_antichain(res.cover)
    # every cell of g lies under exactly one cover cell
    for c in g.cells:
        hits = [
            cov
            for cov in res.cover
            if cov.index == (c >> (g.m - cov.level))
        ]
        assert len(hits) == 1


def test_monotone_in_alpha():
    g = cantor_set(4, {0, 2}, 3, 6)
    values = [dyadic_content(g, a).value for a in (Fraction(1, 4), Fraction(1, 2), Fraction(1))]
    assert values[0] >= values[1] >= values[2]


class TestContent2D:
    def test_single_square(self):
        res = dyadic_content_2d(GridSet2D(3, [(1, 2)]), Fraction(1, 2))
        assert res.value == pytest.approx(2.0**-1.5)

    def test_full_square_alpha_one(self):
        p = GridSet2D(2, [(x, y) for x in range(4) for y in range(4)])
        res = dyadic_content_2d(p, Fraction(1))
        # 16 squares of side 1/4 at alpha=1: the root wins (1 <= 16/4)
        assert res.terms == ((0, 1),)

    @given(
        st.integers(2, 4),
        st.sets(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=20),
        st.sampled_from(ALPHAS),
    )
    def test_matches_decimal_oracle(self, m, cells, alpha):
        cells = {(x % 2**m, y % 2**m) for x, y in cells}
        p = GridSet2D(m, cells)
        res = dyadic_content_2d(p, alpha)
        want_value, want_terms = brute_content_2d(sorted(cells), m, alpha)
        assert res.terms_dict() == want_terms
        assert res.value == pytest.approx(want_value, rel=1e-12)

    def test_product_content_relates_to_factors(self):
        a = cantor_set(4, {0, 2}, 3, 6)
        p = GridSet2D.product(a, a)
        res = dyadic_content_2d(p, Fraction(1, 2))
        assert res.value <= 1.0 + 1e-12
