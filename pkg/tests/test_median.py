import numpy as np
import pytest

from spikedepth.core import UNIT, SpikeTrain, TrainSample
from spikedepth.depth import CardinalityModel, depth
from spikedepth.intensity import Constant, IMIGrid, cumulative, estimate_intensity_kernel
from spikedepth.median import estimate_median, median_train, modal_cardinality
from spikedepth.scenarios import hawkes_model, parabola_curve, sim1_sample, sine_curve


def test_homogeneous_median_is_evenly_spaced():
    s = sim1_sample(500, 0)
    res = estimate_median(s, Constant(10.0))
    assert res.cardinality == 10
    assert np.allclose(res.median.times, np.arange(1, 11) / 11, atol=1e-12)
    assert res.depth.conditional == pytest.approx(1.0, abs=1e-9)


def test_parabola_median_positions():
    med = median_train(parabola_curve(), 8)
    y = 8 * np.arange(1, 9) / 9
    expected = 0.5 + np.cbrt((y - 4.0) / 32.0)
    assert np.allclose(med.times, expected, atol=1e-6)
    assert np.allclose(med.times + med.times[::-1], 1.0, atol=1e-6)


def test_identical_trains_are_their_own_median():
    tr = SpikeTrain([0.2, 0.4, 0.6, 0.8])
    s = TrainSample([tr] * 7)
    res = estimate_median(s, Constant(4.0))
    assert np.allclose(res.median.times, tr.times)


def test_median_beats_random_probes():
    curve = sine_curve()
    cm = CardinalityModel.poisson(10.0)
    k = modal_cardinality(cm)
    best = depth(median_train(curve, k), curve, cm).total
    rng = np.random.default_rng(1)
    ci = cumulative(curve)
    for _ in range(2000):
        times = np.sort(ci.inverse(rng.uniform(0, ci.total, k)))
        assert depth(SpikeTrain(times), curve, cm).total <= best + 1e-12


def test_modal_cardinality_tie_break():
    cm = CardinalityModel.empirical([2, 2, 5, 5])
    # every count from 2 to 5 has full weight; 3 and 4 tie nearest the mean 3.5
    assert modal_cardinality(cm) == 3
    assert modal_cardinality(cm, mean_count=4.9) == 5


def test_empty_median():
    s = TrainSample([SpikeTrain([])] * 3)
    res = estimate_median(s, Constant(1.0))
    assert res.cardinality == 0 and res.median.k == 0


def test_imi_median_uses_marginal():
    lag = np.linspace(0, 1, 5)
    model = IMIGrid(parabola_curve(), lag, np.full(5, 2.0))
    assert np.allclose(median_train(model, 8).times, median_train(parabola_curve(), 8).times)
    with pytest.raises(ValueError):
        median_train(hawkes_model(), 3)


def test_kernel_median_is_close_to_truth():
    s = sim1_sample(500, 3)
    res = estimate_median(s, estimate_intensity_kernel(s))
    assert res.cardinality == 10
    assert np.max(np.abs(res.median.times - np.arange(1, 11) / 11)) < 0.02
