"""The limiting Poisson cluster process and its Laplace functionals."""

import numpy as np
import pytest

from extclust.errors import DomainError, ParameterError, UnsupportedParameterError
from extclust.functionals import ramp_library, step_functional
from extclust.limitproc import (
    LimitSpec,
    catalog_limit_spec,
    cluster_index,
    laplace_closed_form,
    laplace_empirical,
    laplace_empirical_batch,
    limit_point_sampler,
    measure_from_lines,
    model_point_sampler,
    restrict_to_level,
    sample_limit,
    spectral_functional,
)
from extclust.models import ModelSpec, analytic_cluster_sampler, theoretical_theta
from extclust.seeds import derive_seed
from extclust.stats import combined_stderr, ks_test

from _oracles import step_laplace_exponent

IID = ModelSpec(kind="iid-pareto", alpha=1.0, seed=1)
MM = ModelSpec(kind="moving-maximum", alpha=1.0, c=(1.0, 1.0), seed=1)


def test_sample_limit_poisson_counts():
    ls = catalog_limit_spec(IID, u=1.0)
    counts = np.array([sample_limit(ls, derive_seed(61, i)).anchors.size for i in range(30_000)])
    p0 = np.mean(counts == 0)
    se = np.sqrt(np.exp(-1) * (1 - np.exp(-1)) / counts.size)
    assert abs(p0 - np.exp(-1)) < 3 * se
    # theta = 0.5: mean cluster count 0.5
    ls2 = catalog_limit_spec(MM, u=1.0)
    counts2 = np.array([sample_limit(ls2, derive_seed(62, i)).anchors.size for i in range(30_000)])
    se2 = np.sqrt(0.5 / counts2.size)
    assert abs(counts2.mean() - 0.5) < 3 * se2


def test_sample_limit_point_intensity_bins():
    # Q = {1}: point magnitudes above u form the pure Poisson layer
    ls = catalog_limit_spec(IID, u=1.0)
    n_samples = 30_000
    in_12, above_2 = [], []
    for i in range(n_samples):
        m = sample_limit(ls, derive_seed(63, i))
        mags = m.norms()
        in_12.append(np.sum((mags > 1.0) & (mags <= 2.0)))
        above_2.append(np.sum(mags > 2.0))
    for vals, mean in ((np.array(in_12), 0.5), (np.array(above_2), 0.5)):
        se = vals.std(ddof=1) / np.sqrt(n_samples)
        assert abs(vals.mean() - mean) < 3 * se
        # Poisson: P(0) = e^{-mean}
        se0 = np.sqrt(np.exp(-mean) * (1 - np.exp(-mean)) / n_samples)
        assert abs(np.mean(vals == 0) - np.exp(-mean)) < 3 * se0


def test_anchor_magnitudes_pareto():
    ls = catalog_limit_spec(MM, u=1.0)
    anchors = np.concatenate(
        [sample_limit(ls, derive_seed(64, i)).anchors for i in range(20_000)]
    )
    ks = ks_test(anchors, lambda v: 1.0 - v ** -1.0)
    assert ks.statistic < ks.crit_1pct


def test_laplace_closed_form_step_exact():
    # v-integral solved by hand: exp(-(1 - e^{-s})) for theta=1, Q={1}
    ls = catalog_limit_spec(IID, u=1.0)
    for s in (0.5, 1.0, 2.0):
        lv = laplace_closed_form(ls, step_functional(s))
        assert lv.value == pytest.approx(np.exp(-(1 - np.exp(-s))), abs=1e-9)
        # independent quadrature oracle in the original coordinates
        oracle = np.exp(-step_laplace_exponent(1.0, 1.0, s, [1.0]))
        assert lv.value == pytest.approx(oracle, abs=1e-6)
    # s -> infinity limit: void probability e^{-1}
    big = laplace_closed_form(ls, step_functional(50.0))
    assert big.value == pytest.approx(np.exp(-1.0), abs=1e-8)


def test_laplace_closed_form_zero_functional_is_one():
    # f == 0 is outside the functional type; the s -> 0 limit stands in
    ls = catalog_limit_spec(IID, u=1.0)
    tiny = laplace_closed_form(ls, step_functional(1e-12))
    assert tiny.value == pytest.approx(1.0, abs=1e-9)


def test_laplace_closed_form_mm_two_point_cluster():
    ls = catalog_limit_spec(MM, u=1.0)
    for s in (0.5, 1.0, 2.0):
        lv = laplace_closed_form(ls, step_functional(s))
        assert lv.value == pytest.approx(np.exp(-0.5 * (1 - np.exp(-2 * s))), abs=1e-9)
        oracle = np.exp(-step_laplace_exponent(0.5, 1.0, s, [1.0, 1.0]))
        assert lv.value == pytest.approx(oracle, abs=1e-6)


def test_laplace_monotone_in_functional():
    ls = catalog_limit_spec(MM, u=1.0)
    vals = [laplace_closed_form(ls, step_functional(s)).value for s in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_laplace_support_validation():
    ls = catalog_limit_spec(IID, u=1.0)
    with pytest.raises(DomainError):
        laplace_closed_form(ls, step_functional(1.0, support=0.5))


def test_laplace_empirical_matches_closed_form_limit_sampler():
    ls = catalog_limit_spec(IID, u=1.0)
    fs = list(ramp_library()) + [step_functional(s) for s in (0.5, 1.0, 2.0)]
    emp = laplace_empirical_batch(limit_point_sampler(ls), fs, reps=6000, seed=65)
    for f, ev in zip(fs, emp):
        cv = laplace_closed_form(ls, f)
        assert abs(ev.value - cv.value) < 3 * combined_stderr(ev.stderr, cv.stderr), f.label


def test_laplace_empirical_model_iid():
    f = step_functional(1.0)
    ev = laplace_empirical(model_point_sampler(IID, 100_000, floor=0.9), f, reps=1500, seed=66)
    target = np.exp(-(1 - np.exp(-1)))
    assert abs(ev.value - target) < 3 * ev.stderr


def test_laplace_empirical_model_mm_converges():
    # closed form with theta = 0.5 and the two-point cluster; the gap
    # shrinks through the n-grid
    f = step_functional(1.0)
    target = np.exp(-0.5 * (1 - np.exp(-2)))
    gaps = []
    for n, reps in ((1000, 4000), (10_000, 2000), (100_000, 1500)):
        ev = laplace_empirical(model_point_sampler(MM, n, floor=0.9), f, reps=reps, seed=67)
        gaps.append((abs(ev.value - target), ev.stderr))
    assert gaps[-1][0] < 3 * gaps[-1][1] + 0.01
    assert gaps[0][0] > gaps[-1][0] - 0.01  # no blow-up along the grid


def test_restriction_consistency():
    ls1 = catalog_limit_spec(MM, u=1.0)
    ls2 = catalog_limit_spec(MM, u=2.0)
    n = 10_000
    restricted, direct = [], []
    r_counts, d_counts = [], []
    for i in range(n):
        a = restrict_to_level(sample_limit(ls1, derive_seed(68, i)), 2.0)
        b = sample_limit(ls2, derive_seed(69, i))
        restricted.append(a.anchors)
        direct.append(b.anchors)
        r_counts.append(a.anchors.size)
        d_counts.append(b.anchors.size)
    ra = np.concatenate(restricted)
    da = np.concatenate(direct)
    # two-sample KS on anchor magnitudes at the 1% level
    from scipy.stats import ks_2samp

    assert ks_2samp(ra, da).pvalue > 0.01
    # exact Poisson count comparison: conditional binomial on the totals
    from scipy.stats import binomtest

    assert binomtest(ra.size, ra.size + da.size, 0.5).pvalue > 0.01
    # both count vectors Poisson(theta 2^-alpha) = Poisson(0.25)
    assert abs(np.mean(r_counts) - 0.25) < 3 * np.std(r_counts) / np.sqrt(n)


def test_restriction_keeps_whole_clusters():
    ls = catalog_limit_spec(MM, u=0.5)
    m = sample_limit(ls, 4242)
    r = restrict_to_level(m, 1.0)
    assert np.all(r.anchors > 1.0)
    if r.size:
        # two points per surviving cluster (the MM cluster is a pair)
        assert r.size == 2 * r.anchors.size
    with pytest.raises(DomainError):
        restrict_to_level(m, 0.25)


def test_spectral_functional_point_mass():
    sampler = analytic_cluster_sampler(ModelSpec(kind="iid-pareto", alpha=0.5, seed=0))
    mc = spectral_functional(sampler, 1.0, 0.5, [1.0], reps=100, seed=70)
    assert mc.value == pytest.approx(0.5 / 1.5)  # alpha/(2-alpha), E = 1
    mc_neg = spectral_functional(sampler, 1.0, 0.5, [-1.0], reps=100, seed=71)
    assert mc_neg.value == 0.0


def test_spectral_functional_mm_oracle():
    spec = ModelSpec(kind="moving-maximum", alpha=0.5, c=(1.0, 1.0), seed=0)
    mc = spectral_functional(
        analytic_cluster_sampler(spec), theoretical_theta(spec), 0.5, [1.0], reps=200, seed=72
    )
    # exact enumeration: cluster is the deterministic pair {1, 1}
    exact = 0.5 * (0.5 / 1.5) * 2.0 ** 0.5
    assert mc.value == pytest.approx(exact, abs=3 * mc.stderr + 1e-12)


def test_spectral_functional_validation():
    sampler = analytic_cluster_sampler(IID)
    with pytest.raises(ParameterError):
        spectral_functional(sampler, 1.0, 2.5, [1.0], reps=10, seed=0)
    with pytest.raises(ParameterError):
        spectral_functional(sampler, 1.0, 1.0, [0.5], reps=10, seed=0)


def test_cluster_index():
    from scipy.special import gamma

    expected = (0.5 / (gamma(1.5) * np.cos(np.pi / 4))) * (1.0 / 3.0)
    assert cluster_index(1.0 / 3.0, 0.5) == pytest.approx(expected)
    assert cluster_index(0.0, 0.5) == 0.0
    with pytest.raises(UnsupportedParameterError):
        cluster_index(1.0, 1.0)


def test_point_measure_serialization():
    ls = catalog_limit_spec(MM, u=1.0)
    m = sample_limit(ls, 123456)
    text = m.to_lines()
    back = measure_from_lines(text, floor=1.0)
    if m.size:
        np.testing.assert_array_equal(back.times, m.times)
        np.testing.assert_array_equal(back.values, m.values)


def test_limit_spec_validation():
    with pytest.raises(ParameterError):
        LimitSpec(alpha=1.0, theta=0.0, d=1, u=1.0, q_sampler=None)
    with pytest.raises(ParameterError):
        catalog_limit_spec(ModelSpec(kind="ar1", alpha=1.0, phi=0.5, p=0.9, seed=0))
