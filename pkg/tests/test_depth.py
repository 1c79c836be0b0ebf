import numpy as np
import pytest
from hypothesis import given, strategies as st

from spikedepth.core import UNIT, SpikeTrain, TimeDomain
from spikedepth.depth import (ILR, SIMPLIFIED, CardinalityModel, DepthConfig,
                              cardinality_depth, cardinality_weight, conditional_depth_ilr,
                              conditional_depth_simplified, depth,
                              ilr_depth_from_spacings, simplified_depth_from_spacings)
from spikedepth.intensity import Constant, cumulative, time_rescale
from spikedepth.scenarios import hawkes_model, parabola_curve, sine_curve

from conftest import unit_trains

ILR_QUARTER = 1.0 / (1.0 - np.log(0.75))
# direct substitution: both log-ratios are +-log(3)/2
SIMPLIFIED_QUARTER = 1.0 / (1.0 + 0.25 * np.log(3.0) ** 2)


@pytest.mark.parametrize("k", [0, 1, 5, 20])
def test_equal_spacings_have_depth_one(k):
    tr = SpikeTrain(np.arange(1, k + 1) / (k + 1))
    ci = cumulative(Constant(3.0))
    assert abs(conditional_depth_ilr(tr, ci) - 1.0) <= 1e-12
    assert abs(conditional_depth_simplified(tr, ci) - 1.0) <= 1e-12


def test_hand_derived_single_spike_values():
    tr = SpikeTrain([0.25])
    ci = cumulative(Constant(1.0))
    assert conditional_depth_ilr(tr, ci) == pytest.approx(ILR_QUARTER, abs=1e-12)
    assert conditional_depth_ilr(tr, ci) == pytest.approx(0.7766, abs=1e-4)
    assert conditional_depth_simplified(tr, ci) == pytest.approx(SIMPLIFIED_QUARTER, abs=1e-12)


def test_equal_rescaled_spacings_under_a_curve():
    curve = parabola_curve()
    ci = cumulative(curve)
    k = 6
    tr = SpikeTrain(ci.inverse(np.arange(1, k + 1) * ci.total / (k + 1)))
    assert conditional_depth_ilr(tr, ci) == pytest.approx(1.0, abs=1e-9)


@given(st.integers(1, 15), st.integers(0, 10_000))
def test_perturbation_strictly_lowers_depth(k, seed):
    rng = np.random.default_rng(seed)
    v = np.full(k + 1, 1.0 / (k + 1))
    w = v * np.exp(rng.normal(0, 0.2, k + 1))
    w /= w.sum()
    assert ilr_depth_from_spacings(w) < 1.0
    assert simplified_depth_from_spacings(w) < 1.0


@given(unit_trains(min_k=1))
def test_depths_in_unit_interval(tr):
    ci = cumulative(sine_curve())
    for fn in (conditional_depth_ilr, conditional_depth_simplified):
        d = fn(tr, ci)
        assert 0.0 < d <= 1.0


def test_zero_spacing_gives_zero_depth():
    assert ilr_depth_from_spacings(np.array([0.5, 0.0, 0.5])) == 0.0
    assert simplified_depth_from_spacings(np.array([0.5, 0.0, 0.5])) == 0.0


def test_cardinality_depth_and_weight():
    cm = CardinalityModel.empirical([1, 2, 2, 3])
    assert [cardinality_depth(k, cm) for k in range(5)] == [0.0, 0.25, 0.75, 0.25, 0.0]
    assert cardinality_weight(2, cm) == 1.0
    assert cardinality_weight(1, cm) == pytest.approx(1 / 3)
    assert cardinality_weight(40, cm) == 0.0
    pois = CardinalityModel.poisson(10.0)
    assert pois.mean == pytest.approx(10.0, abs=1e-9)
    assert int(np.argmax(pois.d1_table)) == 10


def test_out_of_support_train_has_zero_depth():
    cm = CardinalityModel.empirical([2, 3])
    s = depth(SpikeTrain([0.1, 0.2, 0.3, 0.4, 0.5]), Constant(3.0), cm)
    assert s.total == 0.0 and s.weight == 0.0 and s.conditional > 0


def test_total_depth_composition():
    cm = CardinalityModel.empirical([1, 2, 2, 3])
    tr = SpikeTrain([0.25])
    s = depth(tr, Constant(1.0), cm, DepthConfig(r=2.0))
    assert s.total == pytest.approx((1 / 3) ** 2 * ILR_QUARTER)
    s2 = depth(tr, Constant(1.0), cm, DepthConfig(variant=SIMPLIFIED))
    assert s2.conditional == pytest.approx(SIMPLIFIED_QUARTER)


def test_depth_config_validation():
    with pytest.raises(ValueError):
        DepthConfig(r=0.0)
    with pytest.raises(ValueError):
        DepthConfig(variant="other")
    with pytest.raises(ValueError):
        CardinalityModel(np.array([0.5, 0.4]))


def _check_rescaling_invariance(tr, model, cm, variant):
    ci = cumulative(model, tr if model.history_dependent else None)
    before = depth(tr, model, cm, DepthConfig(variant=variant)).total
    rescaled = time_rescale(tr, ci)
    after = depth(rescaled, Constant(1.0, rescaled.domain), cm,
                  DepthConfig(variant=variant)).total
    return before, after


@given(unit_trains(min_k=0, max_k=15), st.sampled_from(["const", "sine", "hawkes"]),
       st.sampled_from([ILR, SIMPLIFIED]))
def test_depth_invariant_under_time_rescaling(tr, kind, variant):
    model = {"const": Constant(7.0), "sine": sine_curve(), "hawkes": hawkes_model()}[kind]
    cm = CardinalityModel.poisson(8.0)
    before, after = _check_rescaling_invariance(tr, model, cm, variant)
    assert abs(before - after) <= 1e-9


def test_depth_on_non_unit_domain():
    dom = TimeDomain(-1.0, 3.0)
    tr = SpikeTrain([0.0], dom)
    cm = CardinalityModel.empirical([1])
    assert depth(tr, Constant(0.5, dom), cm).total == pytest.approx(ILR_QUARTER)
