import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from blockboot.errors import ConfigError, InfeasibleParameterError
from blockboot.kernels import EPANECHNIKOV, GAUSSIAN, DensityEvalPoint, kde
from blockboot.process import REFERENCE_MODEL, marginal_density, simulate
from blockboot.resampler import (
    BootstrapParams,
    DiscreteLaw,
    Method,
    block_stats,
    bootstrap_cdf,
    conditional_mean,
    draw_indices,
    draw_t_star,
    enumerate_resample_mean,
    enumerate_t_star,
    make_ebc_params,
    make_nbc_params,
    make_uns_params,
    resample_means,
    t_star_draws,
    window_sums,
)
from blockboot.rng import generator


def direct_blocks(x, ell, k, x0, spec=EPANECHNIKOV):
    return np.array([spec((x[i : i + ell] - x0) / k).sum() / (ell * k) for i in range(x.size - ell + 1)])


@pytest.fixture
def series():
    return simulate(REFERENCE_MODEL, 200, 17).values


def test_block_stats_against_direct_sum():
    x = np.random.default_rng(0).normal(size=10)
    s = block_stats(x, 3, 0.8, 0.1)
    np.testing.assert_allclose(s.values, direct_blocks(x, 3, 0.8, 0.1), rtol=0, atol=1e-12)
    assert s.n_blocks == 8


def test_block_stats_edge_lengths(series):
    whole = block_stats(series, series.size, 0.7, 1.0)
    assert whole.n_blocks == 1
    assert whole.values[0] == pytest.approx(kde(series, DensityEvalPoint(1.0, 0.7)), rel=1e-14)
    single = block_stats(series, 1, 0.7, 1.0)
    np.testing.assert_array_equal(single.values, EPANECHNIKOV((series - 1.0) / 0.7) / 0.7)
    with pytest.raises(InfeasibleParameterError, match="block length exceeds sample"):
        block_stats(series, series.size + 1, 0.7, 1.0)


def test_window_sums_long_series_drift():
    x = simulate(REFERENCE_MODEL, 50_000, 3).values
    a = GAUSSIAN((x - 0.5) / 0.3)
    ws = window_sums(a, 37)
    direct = np.convolve(a, np.ones(37), mode="valid")
    assert np.max(np.abs(ws - direct)) < 1e-12
    assert np.all(ws >= 0)


def test_conditional_mean_identities(series):
    s = block_stats(series, 1, 0.6, 1.0)
    assert conditional_mean(s) == kde(series, DensityEvalPoint(1.0, 0.6))
    x = np.random.default_rng(5).normal(size=50)
    s7 = block_stats(x, 7, 0.9, 0.0)
    assert conditional_mean(s7) == pytest.approx(direct_blocks(x, 7, 0.9, 0.0).mean(), abs=1e-14)
    const = block_stats(np.zeros(10), 3, 1.0, 0.0)
    assert conditional_mean(const) == pytest.approx(0.75, abs=1e-15)


def test_ebc_params_formula():
    p = make_ebc_params(100, 0.625, 5, 2, 1.0, c0=0.5, c2=1.0)
    k2 = 100 ** (-1 / 9)
    assert p.k2 == pytest.approx(0.59948, abs=1e-5) and p.k2 == pytest.approx(k2, rel=1e-15)
    assert p.k3 == pytest.approx(0.29974, abs=1e-5)
    assert p.k3 / p.k2 == pytest.approx(0.5, rel=1e-15)
    assert p.tau == pytest.approx((4 / 3) * 10 * 0.625**2.5 / k2**2, rel=1e-13)
    tiny = make_ebc_params(100, 0.625, 5, 2, 1.0, c0=1e-9)
    assert p.tau / tiny.tau * tiny.k2**2 / p.k2**2 == pytest.approx(4 / 3, rel=1e-9)
    with pytest.raises(ConfigError, match="invalid c0"):
        make_ebc_params(100, 0.625, 5, 2, 1.0, c0=1.0)


def test_nbc_params_formula():
    p = make_nbc_params(100, 1.80, 5, 2, 0.5)
    assert p.k1 == pytest.approx(0.75 ** (-0.4) * 100**0.2 * 10 ** (-0.2) * 1.80, rel=1e-14)
    assert p.k1 == p.k2 and p.k3 == pytest.approx(0.5 * p.k1)
    assert p.tau**2 == pytest.approx(p.b * p.ell * p.k1, rel=1e-14)
    q = make_nbc_params(100, 0.7, 10, 10, 0.5)
    assert q.k1 == pytest.approx(0.75 ** (-0.4) * 0.7, rel=1e-14)


def test_uns_params_and_validation():
    p = make_uns_params(100, 1, 0.5)
    assert p.tau == 0 and p.method is Method.UNS
    with pytest.raises(ConfigError):
        BootstrapParams(2, 2, 1.0, 1.0, 1.0, 0.5, Method.UNS)
    with pytest.raises(ConfigError):
        BootstrapParams(2, 2, 1.0, 1.0, 0.9, 0.5, Method.NBC)
    with pytest.raises(ConfigError):
        BootstrapParams(0, 2, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        BootstrapParams(2, 2, 1.0, 1.0, 1.0, 2.0, Method.EBC)


def test_series_length_cap(series):
    with pytest.warns(UserWarning):
        make_uns_params(50, 20, 1.0).check_sample(200)
    with pytest.raises(InfeasibleParameterError):
        make_uns_params(500, 50, 1.0).check_sample(200)


def test_degenerate_single_block(series):
    p = make_uns_params(1, series.size, 0.8)
    s = block_stats(series, series.size, 0.8, 1.0)
    assert draw_t_star(s, None, 0.0, p, 3) == 0.0
    assert bootstrap_cdf(series, p, 1.0, 0.0, 500, rng=1).p_hat == 1.0
    assert bootstrap_cdf(series, make_ebc_params(200, 0.8, 5, 4, 0.5), 1.0, 1e9, 300, rng=1).p_hat == 1.0


def test_draw_t_star_incompatible(series):
    p = make_ebc_params(200, 0.8, 5, 4, 0.5)
    s1 = block_stats(series, 4, p.k1, 1.0)
    s2 = block_stats(series, 5, p.k2, 1.0)
    with pytest.raises(ValueError, match="incompatible block statistics"):
        draw_t_star(s1, s2, 0.1, p, 0)


def test_draw_t_star_matches_bootstrap_path(series):
    p = make_ebc_params(200, 0.8, 5, 4, 0.5, c2=2.0)
    s1 = block_stats(series, 4, p.k1, 1.0)
    s2 = block_stats(series, 4, p.k2, 1.0)
    f3 = kde(series, DensityEvalPoint(1.0, p.k3))
    t = draw_t_star(s1, s2, f3, p, 99)
    J = draw_indices(generator(99), s1.n_blocks, 5, 1)
    fstar = s1.values[J[0]].mean()
    expect = math.sqrt(20 * p.k1) * (fstar - s1.values.mean()) + p.tau * (s2.values.mean() - f3)
    assert t == pytest.approx(expect, rel=1e-10, abs=1e-12)


def test_uns_draws_centred(series):
    p = make_uns_params(10, 5, 0.7)
    s1 = block_stats(series, 5, 0.7, 1.0)
    d = t_star_draws(s1, 0.0, p, 100_000, generator(4))
    assert abs(d.mean()) < 3 * d.std() / math.sqrt(d.size)


def test_index_reuse_bitwise(series):
    p = make_ebc_params(200, 0.8, 7, 3, 0.5)
    a = bootstrap_cdf(series, p, 1.0, 0.1, 1000, rng=12345)
    b = bootstrap_cdf(series, p, 1.0, 0.1, 1000, rng=12345)
    assert a == b
    s1 = block_stats(series, 3, p.k1, 1.0)
    assert np.array_equal(t_star_draws(s1, 0.2, p, 50, generator(8)), t_star_draws(s1, 0.2, p, 50, generator(8)))


def test_resample_means_rows_match_single():
    rng = np.random.default_rng(2)
    vals = rng.random((4, 30))
    J = rng.integers(0, 30, size=(100, 6))
    many = resample_means(vals, J)
    for i in range(4):
        assert np.array_equal(many[i], resample_means(vals[i], J))


def test_subsampling_is_uniform_on_blocks(series):
    s = block_stats(series, 20, 0.9, 1.0)
    J = draw_indices(generator(21), s.n_blocks, 1, 100_000)
    counts = np.bincount(J[:, 0], minlength=s.n_blocks)
    assert sps.chisquare(counts).pvalue > 0.001
    law = enumerate_resample_mean(s, 1)
    assert law.total == s.n_blocks
    np.testing.assert_array_equal(np.sort(np.unique(s.values)), law.values)


def test_enumeration_properties(series):
    x = series[:6]
    p = make_uns_params(2, 2, 0.9)
    law = enumerate_t_star(x, p, 0.5)
    assert law.total == 25
    assert abs(law.probs.sum() - 1) < 1e-12
    assert abs(law.mean()) < 1e-12
    s = block_stats(x, 2, 0.9, 0.5)
    assert enumerate_resample_mean(s, 2).mean() == pytest.approx(conditional_mean(s), abs=1e-12)
    with pytest.raises(InfeasibleParameterError, match="enumeration too large"):
        enumerate_t_star(series, make_uns_params(5, 2, 0.9), 0.5)


def test_sampled_cdf_matches_enumeration(series):
    x = series[:6]
    p = make_ebc_params(6, 0.9, 2, 2, 1.2, c2=1.5)
    law = enumerate_t_star(x, p, 0.5)
    y = law.quantile(0.5)
    est = bootstrap_cdf(x, p, 0.5, y, 200_000, rng=77)
    assert abs(est.p_hat - law.cdf(y)) < 0.005


def test_discrete_law_basics():
    law = DiscreteLaw.from_draws(np.array([1.0, 1.0, 2.0, 3.0]))
    assert law.cdf(1.0) == 0.5 and law.cdf(0.5) == 0.0 and law.cdf(3.0) == 1.0
    assert law.mean() == 1.75
    assert law.quantile(0.5) == 1.0 and law.quantile(0.75) == 2.0


def test_mbb_needs_no_special_path(series):
    ell = 8
    p = make_uns_params(series.size // ell, ell, 0.8)
    est = bootstrap_cdf(series, p, 1.0, 0.0, 2000, rng=5)
    assert 0.0 < est.p_hat < 1.0


@pytest.mark.slow
def test_conditional_variance_trend():
    dev = []
    f0 = marginal_density(REFERENCE_MODEL, 1.0)
    for n in (500, 2000, 8000):
        x = simulate(REFERENCE_MODEL, n, 1000 + n).values
        ell = int(round(n ** (1 / 3)))
        k = n ** (-1 / 5)
        b = n // ell
        s = block_stats(x, ell, k, 1.0)
        d = t_star_draws(s, 0.0, make_uns_params(b, ell, k), 100_000, generator(n))
        dev.append(abs(d.var() / (f0 * 0.6) - 1))
    assert dev[0] > dev[2]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(1, 10), st.floats(0.1, 3.0), st.integers(0, 2**32))
def test_block_values_nonnegative_and_mean_identity(n, ell, k, seed):
    ell = min(ell, n)
    x = np.random.default_rng(seed).normal(size=n)
    s = block_stats(x, ell, k, 0.0)
    assert np.all(s.values >= 0)
    np.testing.assert_allclose(s.values, direct_blocks(x, ell, k, 0.0), rtol=1e-12, atol=1e-12)
    assert conditional_mean(s) == pytest.approx(s.values.mean(), rel=1e-12, abs=1e-14)
