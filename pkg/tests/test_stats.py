from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats as sps

from oracles import ols_normal_equations, t_tail_quad
from railcarbon.errors import DegenerateVariance, EmptyInput, NonPositiveDf, RankDeficient, TooFewRows
from railcarbon.stats import (
    betainc_regularized,
    mean_sd,
    ols_fit,
    paired_t,
    t_critical,
    t_tail_two_sided,
    two_sample_t,
)


# -- descriptive ---------------------------------------------------------------


def test_mean_sd_constant():
    assert mean_sd([5, 5, 5]) == (5.0, 0.0)


def test_mean_sd_textbook():
    assert mean_sd([1, 2, 3]) == (2.0, 1.0)


def test_mean_sd_empty():
    with pytest.raises(EmptyInput):
        mean_sd([])


def test_mean_sd_single_value_has_undefined_sd():
    m, s = mean_sd([4.0])
    assert m == 4.0 and math.isnan(s)


# -- t tail --------------------------------------------------------------------


def test_t_tail_zero_is_one():
    for df in (1, 3.5, 100):
        assert t_tail_two_sided(0.0, df) == 1.0


def test_t_tail_df10():
    assert t_tail_two_sided(2.0, 10) == pytest.approx(0.0734, abs=5e-4)
    assert t_tail_two_sided(2.0, 10) == pytest.approx(t_tail_quad(2.0, 10), abs=1e-10)


def test_t_tail_normal_limit():
    assert t_tail_two_sided(1.96, 100_000) == pytest.approx(0.05, abs=5e-4)
    assert t_tail_two_sided(1.96, 1e9) == pytest.approx(2 * sps.norm.sf(1.96), abs=1e-8)


def test_t_tail_rejects_nonpositive_df():
    with pytest.raises(NonPositiveDf):
        t_tail_two_sided(1.0, 0)
    with pytest.raises(NonPositiveDf):
        t_tail_two_sided(1.0, -2)


def test_t_tail_infinite_and_symmetric():
    assert t_tail_two_sided(math.inf, 5) == 0.0
    assert t_tail_two_sided(-2.5, 7) == t_tail_two_sided(2.5, 7)


@pytest.mark.parametrize("df", [0.5, 1, 2, 3, 7.3, 30, 500])
def test_t_tail_matches_quadrature_to_1e8(df):
    for t in np.linspace(0.05, 8, 40):
        assert abs(t_tail_two_sided(float(t), df) - t_tail_quad(float(t), df)) <= 1e-8


@settings(max_examples=300)
@given(a=st.floats(0.05, 200), b=st.floats(0.05, 200), x=st.floats(0, 1))
def test_incomplete_beta_matches_special_function(a, b, x):
    assert betainc_regularized(a, b, x) == pytest.approx(float(special.betainc(a, b, x)), abs=1e-10)


@settings(max_examples=300)
@given(t1=st.floats(0, 50), t2=st.floats(0, 50), df=st.floats(0.5, 1e4))
def test_t_tail_monotone_in_abs_t(t1, t2, df):
    lo, hi = sorted((t1, t2))
    assert t_tail_two_sided(hi, df) <= t_tail_two_sided(lo, df) + 1e-15


def test_t_critical_inverts_tail():
    for df in (1, 4, 30, 318):
        c = t_critical(0.05, df)
        assert t_tail_two_sided(c, df) == pytest.approx(0.05, abs=1e-12)
        assert c == pytest.approx(sps.t.ppf(0.975, df), rel=1e-9)
    assert t_critical(0.05, 318) == pytest.approx(1.96745, abs=1e-5)


# -- t tests -------------------------------------------------------------------


def test_two_sample_pooled_hand_values():
    r = two_sample_t([1, 2, 3], [2, 3, 4], "pooled")
    assert r.statistic == pytest.approx(-1.2247, abs=1e-4)
    assert r.df == 4
    assert r.p_two_sided == pytest.approx(0.2878, abs=1e-3)
    assert r.mean_diff == -1


def test_two_sample_welch_equals_pooled_for_equal_variances():
    w = two_sample_t([1, 2, 3], [2, 3, 4], "welch")
    p = two_sample_t([1, 2, 3], [2, 3, 4], "pooled")
    assert w.df == pytest.approx(4.0, abs=1e-12)
    assert w.statistic == pytest.approx(p.statistic, abs=1e-12)
    assert w.p_two_sided == pytest.approx(p.p_two_sided, abs=1e-12)


def test_two_sample_identical_samples():
    r = two_sample_t([1.0, 4.0, 2.5], [1.0, 4.0, 2.5])
    assert r.statistic == 0 and r.p_two_sided == 1.0


def test_two_sample_degenerate():
    with pytest.raises(DegenerateVariance):
        two_sample_t([2, 2, 2], [2, 2])


def test_two_sample_needs_two_values():
    with pytest.raises(EmptyInput):
        two_sample_t([1], [2, 3])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=200)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30),
       st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30),
       st.sampled_from(["welch", "pooled"]))
def test_two_sample_matches_scipy(xs, ys, variant):
    if np.std(xs) < 1e-6 and np.std(ys) < 1e-6:
        return
    ours = two_sample_t(xs, ys, variant)
    ref = sps.ttest_ind(xs, ys, equal_var=(variant == "pooled"))
    assert ours.statistic == pytest.approx(ref.statistic, rel=1e-7, abs=1e-9)
    assert ours.p_two_sided == pytest.approx(ref.pvalue, abs=1e-8)


def test_paired_hand_values():
    r = paired_t([1, -1, 0, 2])
    assert r.statistic == pytest.approx(0.7746, abs=1e-4)
    assert r.df == 3
    assert r.p_two_sided == pytest.approx(0.495, abs=2e-3)


@pytest.mark.parametrize("diffs", [[0, 0, 0], [3.0, 3.0, 3.0, 3.0]])
def test_paired_degenerate(diffs):
    with pytest.raises(DegenerateVariance):
        paired_t(diffs)


# -- OLS -----------------------------------------------------------------------


def test_ols_exact_interpolation():
    fit = ols_fit([[1, 0], [1, 1], [1, 2]], [1, 3, 5])
    assert fit.coefficients == pytest.approx([1, 2], abs=1e-12)
    assert np.abs(fit.residuals).max() < 1e-12


def test_ols_intercept_only_constant_y():
    fit = ols_fit(np.ones((5, 1)), [7.0] * 5)
    assert fit.coefficients[0] == pytest.approx(7.0)
    assert fit.r_squared == 0.0


def test_ols_random_30x4_matches_normal_equations():
    rng = np.random.default_rng(12)
    X = np.column_stack([np.ones(30), rng.normal(size=(30, 3))])
    y = X @ [1.0, -2.0, 0.5, 3.0] + rng.normal(size=30)
    fit = ols_fit(X, y)
    beta, se = ols_normal_equations(X, y)
    np.testing.assert_allclose(fit.coefficients, beta, rtol=1e-8)
    np.testing.assert_allclose(fit.standard_errors, se, rtol=1e-8)


def test_ols_adj_r2_formula_and_p_values():
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    y = X @ [0.0, 1.0, 0.0] + rng.normal(size=40)
    fit = ols_fit(X, y, ["c", "a", "b"])
    assert fit.adj_r_squared == pytest.approx(1 - (1 - fit.r_squared) * 39 / 37)
    assert fit.adj_r_squared <= 1
    ref = 2 * sps.t.sf(np.abs(fit.t_values), 37)
    np.testing.assert_allclose(fit.p_values, ref, atol=1e-10)
    assert fit.coef("a") == fit.coefficients[1] and fit.se("b") == fit.standard_errors[2]


def test_ols_rank_deficient_names_column():
    X = np.column_stack([np.ones(10), np.arange(10.0), 2 * np.arange(10.0)])
    with pytest.raises(RankDeficient) as exc:
        ols_fit(X, np.arange(10.0), ["const", "x", "x2"])
    assert exc.value.column == 2
    assert "x2" in str(exc.value)


def test_ols_too_few_rows():
    with pytest.raises(TooFewRows):
        ols_fit(np.ones((2, 2)), [1, 2])


def test_ols_residuals_orthogonal():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(50, 6))
    y = rng.normal(size=50) * 100
    fit = ols_fit(X, y)
    assert np.abs(X.T @ fit.residuals).max() <= 1e-6 * max(1.0, np.abs(y).max())
