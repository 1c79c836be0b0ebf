import json

import numpy as np
import pytest

from spikedepth.core import UNIT
from spikedepth.depth import SIMPLIFIED, CardinalityModel, DepthConfig
from spikedepth.intensity import Constant
from spikedepth.outlier import (ThresholdCache, detect_outliers, f1_score,
                                mc_spacing_product_quantile, threshold_tk)
from spikedepth.scenarios import outlier_sample
from spikedepth.simulate import sample_hpp


def c1_exact(delta):
    return (1 - (1 - delta) ** 2) / 4


def test_c0_is_total():
    assert mc_spacing_product_quantile(0, 3.5, 0.1) == 3.5


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.3])
def test_c1_matches_closed_form(delta):
    c = mc_spacing_product_quantile(1, 1.0, delta, n_mc=200_000, seed=3)
    assert c == pytest.approx(c1_exact(delta), abs=1e-3)


def test_quantile_scales_with_total():
    a = mc_spacing_product_quantile(4, 1.0, 0.05, 20_000, 1)
    b = mc_spacing_product_quantile(4, 2.5, 0.05, 20_000, 1)
    assert b == pytest.approx(a * 2.5 ** 5, rel=1e-12)


def test_quantile_bounded_by_equal_spacings():
    for k in (1, 3, 8):
        c = mc_spacing_product_quantile(k, 1.0, 0.999, 50_000, 2)
        assert c <= (1 / (k + 1)) ** (k + 1)


def test_t1_from_closed_form():
    cm = CardinalityModel.empirical([1])
    t1 = threshold_tk(1, cm, DepthConfig(), c1_exact(0.05), 1.0)
    assert t1 == pytest.approx(1 / (1 - np.log(4 * 0.024375)), abs=1e-12)
    assert t1 == pytest.approx(0.300490, abs=1e-6)


def test_threshold_at_maximal_quantile_is_weight():
    cm = CardinalityModel.empirical([1, 2, 2, 3])
    c_max = (1.0 / 3) ** 3
    assert threshold_tk(2, cm, DepthConfig(), c_max, 1.0) == pytest.approx(1.0)


def test_threshold_monotone_in_delta():
    caches = [ThresholdCache(d, 20_000, 0) for d in (0.001, 0.01, 0.1)]
    for k in range(0, 16):
        cuts = [c.cutoff(k) for c in caches]
        if k == 0:
            assert cuts == [1.0, 1.0, 1.0]
        else:
            assert cuts[0] < cuts[1] < cuts[2]


def test_cache_rejects_mismatched_settings():
    s = sample_hpp(5.0, UNIT, 20, 0)
    with pytest.raises(ValueError):
        detect_outliers(s, Constant(5.0), delta=0.05, cache=ThresholdCache(0.01))


def test_null_flag_rate_near_delta():
    delta = 0.01
    cache = ThresholdCache(delta, 100_000, 0)
    flagged = total = 0
    for rep in range(20):
        s = sample_hpp(10.0, UNIT, 1000, 500 + rep)
        r = detect_outliers(s, Constant(10.0), CardinalityModel.poisson(10.0), delta=delta,
                            cache=cache)
        flagged += r.n_flagged
        total += len(s)
    assert 0.5 * delta <= flagged / total <= 1.5 * delta


def test_simplified_variant_null_rate():
    delta = 0.05
    s = sample_hpp(10.0, UNIT, 2000, 8)
    r = detect_outliers(s, Constant(10.0), CardinalityModel.poisson(10.0),
                        DepthConfig(variant=SIMPLIFIED), delta=delta, n_mc=50_000)
    assert 0.5 * delta <= r.flagged_fraction <= 1.5 * delta


def test_detection_finds_window_outliers_and_reports():
    sample, truth = outlier_sample("sim3", 0, seed=4)
    r = detect_outliers(sample, Constant(10.0), delta=0.001, n_mc=50_000, truth=truth)
    assert r.recall >= 0.8 and r.precision >= 0.5
    assert r.f1 == pytest.approx(f1_score(r.precision, r.recall))
    rows = r.to_csv().strip().split("\n")
    assert rows[0] == "index,k,depth,threshold,flag" and len(rows) == len(sample) + 1
    back = [float(x.split(",")[2]) for x in rows[1:]]
    assert np.array_equal(back, r.depths)
    doc = json.loads(r.to_json())
    assert doc["f1"] == r.f1 and doc["n_flagged"] == r.n_flagged
    again = detect_outliers(sample, Constant(10.0), delta=0.001, n_mc=50_000, truth=truth)
    assert np.array_equal(again.flags, r.flags)


def test_precision_zero_when_nothing_flagged():
    s = sample_hpp(10.0, UNIT, 5, 1)
    r = detect_outliers(s, Constant(10.0), CardinalityModel.poisson(10.0), delta=1e-9,
                        n_mc=1000, truth=[True] + [False] * 4)
    assert r.n_flagged == 0
    assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0


def test_precision_recall_tradeoff_over_reps():
    deltas = (0.001, 0.01)
    caches = {d: ThresholdCache(d, 50_000, 0) for d in deltas}
    p = {d: [] for d in deltas}
    rec = {d: [] for d in deltas}
    for rep in range(20):
        sample, truth = outlier_sample("sim3", rep, seed=21)
        for d in deltas:
            r = detect_outliers(sample, Constant(10.0), delta=d, truth=truth, cache=caches[d])
            p[d].append(r.precision)
            rec[d].append(r.recall)
    assert np.mean(p[0.001]) >= np.mean(p[0.01])
    assert np.mean(rec[0.001]) <= np.mean(rec[0.01])
