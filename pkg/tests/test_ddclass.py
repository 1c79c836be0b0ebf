import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from spikedepth.core import UNIT, SpikeTrain, TrainSample
from spikedepth.ddclass import (DD, F, G, IA, LM, MD, MM2, BinnedGaussian, BoundaryFunction,
                                ClassifierConfig, ClassifierSet, DDPoints, MahalanobisDepth,
                                OptimizerConfig, classify_lm, classify_md, classify_mm2,
                                classify_points, dd_plot, dd_plot_groups, fit_group,
                                misclassification_rate, smoothed_rate, train_boundary)
from spikedepth.scenarios import parabola_curve
from spikedepth.simulate import sample_hpp, sample_ipp


def points(d_f, d_g, labels=None, counts=None, fallback=None):
    d_f, d_g = np.asarray(d_f, float), np.asarray(d_g, float)
    n = d_f.size
    counts = np.zeros(n, int) if counts is None else np.asarray(counts)
    fallback = np.zeros(n, int) if fallback is None else np.asarray(fallback)
    lab = None if labels is None else np.asarray(labels)
    return DDPoints(d_f, d_g, counts, fallback, lab)


coefs = st.lists(st.floats(-4, 4), min_size=1, max_size=6)


@given(coefs)
def test_boundary_is_increasing_through_origin(a):
    f = BoundaryFunction(a)
    t, y = f.samples(1001)
    assert y[0] == 0.0
    assert np.all(np.diff(y) > 0)


def test_boundary_values_and_gradient():
    a = np.array([0.3, -1.0, 2.0])
    f = BoundaryFunction(a)
    for t in (0.2, 0.55, 1.0):
        exact = integrate.quad(lambda x: np.exp(a @ x ** np.arange(3)), 0, t)[0]
        assert f(t) == pytest.approx(exact, rel=1e-6)
    assert np.allclose(BoundaryFunction.identity(3)(np.linspace(0, 1, 11)), np.linspace(0, 1, 11))
    t = np.array([0.13, 0.5, 0.91])
    eps = 1e-6
    num = np.stack([(BoundaryFunction(a + eps * e)(t) - BoundaryFunction(a - eps * e)(t)) / (2 * eps)
                    for e in np.eye(3)], axis=1)
    assert np.allclose(f.gradient(t), num, rtol=1e-5, atol=1e-8)


def test_misclassification_examples():
    sep = points([0.9, 0.8, 0.1, 0.2], [0.1, 0.2, 0.9, 0.7], [F, F, G, G])
    assert misclassification_rate(sep, BoundaryFunction.identity()) == 0.0
    flipped = points(sep.d_f, sep.d_g, [G, G, F, F])
    assert misclassification_rate(flipped, BoundaryFunction.identity()) == 1.0


def test_classify_dd_examples_and_fallback():
    p = points([1.0, 0.0, 0.0], [0.0, 0.0, 0.5], fallback=[G, G, F])
    out = classify_points(p, BoundaryFunction([2.0, -1.0]))
    assert list(out) == [F, G, G]


def test_exact_tie_uses_fallback():
    p = points([0.5, 0.5], [0.5, 0.5], fallback=[F, G])
    assert list(classify_points(p, BoundaryFunction.identity())) == [F, G]


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_identity_boundary_equals_max_depth(xy):
    d = np.array(xy)
    p = points(d[:, 0], d[:, 1])
    assert np.array_equal(classify_points(p, BoundaryFunction.identity()), classify_md(p))


@given(st.integers(0, 10_000), coefs)
def test_depth_ordering_consistency(seed, a):
    rng = np.random.default_rng(seed)
    f = BoundaryFunction(a)
    d = rng.random((60, 2))
    lab = classify_points(points(d[:, 0], d[:, 1]), f)
    for i in np.flatnonzero(lab == G):
        dominated = (d[:, 0] <= d[i, 0]) & (d[:, 1] >= d[i, 1])
        assert np.all(lab[dominated] == G)


@given(st.integers(0, 10_000), coefs)
def test_smoothed_rate_close_to_hard_rate(seed, a):
    rng = np.random.default_rng(seed)
    tau = 100.0
    p = points(rng.random(80), rng.random(80), rng.integers(0, 2, 80))
    f = BoundaryFunction(a)
    near = np.abs(p.d_g - f(p.d_f)) < 5 / tau
    gap = abs(smoothed_rate(p, f, tau) - misclassification_rate(p, f))
    assert gap <= near.sum() / 80 + 80 * np.exp(-5) / 80


def test_separable_clouds_train_to_zero_error():
    rng = np.random.default_rng(0)
    a = rng.uniform(0.5, 1.0, (50, 2)) * [1, 0.3]
    b = rng.uniform(0.5, 1.0, (50, 2)) * [0.3, 1]
    p = points(np.r_[a[:, 0], b[:, 0]], np.r_[a[:, 1], b[:, 1]], [F] * 50 + [G] * 50)
    fit = train_boundary(p, OptimizerConfig(degree=3, restarts=2, max_iter=300))
    assert fit.train_error == 0.0


def test_curved_boundary_beats_diagonal():
    # G points sit above the curve t^2, F below; the diagonal misclassifies many
    rng = np.random.default_rng(1)
    x = rng.random(400)
    y = rng.random(400)
    lab = np.where(y > x ** 2, G, F)
    p = points(x, y, lab)
    fit = train_boundary(p, OptimizerConfig(degree=3, restarts=3, seed=2))
    assert misclassification_rate(p, BoundaryFunction.identity()) > 0.1
    assert fit.train_error < 0.05
    t, v = fit.boundary.samples()
    assert v[0] == 0 and np.all(np.diff(v) > 0)


def test_fixed_noise_variant_runs():
    rng = np.random.default_rng(3)
    p = points(rng.random(50), rng.random(50), rng.integers(0, 2, 50))
    fit = train_boundary(p, OptimizerConfig(redraw_noise=False, restarts=1, max_iter=50))
    assert 0 <= fit.train_error <= misclassification_rate(p, BoundaryFunction.identity())


def test_training_needs_both_labels():
    with pytest.raises(ValueError):
        train_boundary(points([0.2], [0.3], [F]))
    with pytest.raises(ValueError):
        OptimizerConfig(anneal=1.0)
    with pytest.raises(ValueError):
        OptimizerConfig(lr=0)


def _hpp_ipp(n=150, seed=0):
    return (sample_hpp(8.0, UNIT, n, seed), sample_ipp(parabola_curve(), n, seed + 1))


def test_same_sample_on_both_sides_gives_diagonal():
    f, _ = _hpp_ipp()
    g = fit_group(f)
    p = dd_plot(list(f), g, g)
    assert np.array_equal(p.d_f, p.d_g)


def test_unseen_cardinality_maps_to_origin():
    f, g = _hpp_ipp()
    gf, gg = fit_group(f), fit_group(g)
    big = SpikeTrain(np.linspace(0.01, 0.99, 60))
    p = dd_plot([big], gf, gg)
    assert p.d_f[0] == 0.0 and p.d_g[0] == 0.0


def test_lm_separates_disjoint_counts():
    lo = sample_hpp(2.0, UNIT, 60, 1)
    hi = sample_hpp(40.0, UNIT, 60, 2)
    lf, lg = BinnedGaussian.fit(lo), BinnedGaussian.fit(hi)
    trains = list(lo) + list(hi)
    pred = classify_lm(trains, lf, lg, np.zeros(120, int))
    assert np.array_equal(pred, np.r_[np.zeros(60, int), np.ones(60, int)])


def test_identical_lm_models_use_fallback():
    s = sample_hpp(5.0, UNIT, 30, 1)
    m = BinnedGaussian.fit(s)
    fb = np.arange(30) % 2
    assert np.array_equal(classify_lm(list(s), m, m, fb), fb)


def test_mm2_median_and_equidistant():
    a, b = SpikeTrain([0.2, 0.4]), SpikeTrain([0.6, 0.8, 0.9])
    assert list(classify_mm2([a, b], a, b, 20.0, np.array([G, F]))) == [F, G]
    # equidistant from identical medians -> fallback
    assert list(classify_mm2([a], b, b, 20.0, np.array([G]))) == [G]


def test_classifier_set_on_poisson_groups():
    f, g = _hpp_ipp(200, 4)
    tf, tg = _hpp_ipp(200, 40)
    cfg = ClassifierConfig(methods=(DD, MD, LM, MM2, IA),
                           optimizer=OptimizerConfig(restarts=2, max_iter=400))
    suite = ClassifierSet(f, g, cfg)
    err = suite.errors(tf, tg)
    assert set(err) == {DD, MD, LM, MM2, IA}
    assert err[DD] == err[IA]
    assert err[DD] < 0.25
    assert suite.boundary.boundary(0.0) == 0.0


def test_mahalanobis_depth():
    x = np.random.default_rng(0).normal(size=(500, 2))
    d = MahalanobisDepth.fit(x)
    assert d(d.mean[None, :])[0] == pytest.approx(1.0)
    v = np.array([[3.0, 0.0]]) + d.mean
    dev = v - d.mean
    assert d(v)[0] == pytest.approx(1 / (1 + dev @ d.cov_inv @ dev.T)[0, 0])
