import numpy as np
import pytest
from hypothesis import given

from spikedepth.core import UNIT, SpikeTrain, TimeDomain, TrainSample, isi_vector

from conftest import unit_trains


def test_isi_examples():
    assert np.allclose(isi_vector(SpikeTrain([0.25, 0.5])), [0.25, 0.25, 0.5])
    assert np.allclose(isi_vector(SpikeTrain([])), [1.0])
    assert np.allclose(isi_vector(SpikeTrain(np.arange(1, 10) / 10)), np.full(10, 0.1))


@given(unit_trains())
def test_isi_sums_to_window_length(tr):
    u = isi_vector(tr)
    assert u.size == tr.k + 1
    assert abs(u.sum() - 1.0) <= 1e-12


def test_isi_on_shifted_domain():
    dom = TimeDomain(2.0, 5.0)
    assert np.allclose(isi_vector(SpikeTrain([3.0, 4.5], dom)), [1.0, 1.5, 0.5])


@pytest.mark.parametrize("times", [[0.5, 0.5], [0.6, 0.2], [0.0, 0.5], [0.5, 1.0],
                                   [-0.1], [1.2], [np.nan]])
def test_invalid_trains_rejected(times):
    with pytest.raises(ValueError):
        SpikeTrain(times)


def test_domain_validation():
    with pytest.raises(ValueError):
        TimeDomain(1.0, 1.0)
    assert TimeDomain(0.0, 2.0).length == 2.0


def test_train_is_immutable_value():
    a = SpikeTrain([0.1, 0.2])
    with pytest.raises(ValueError):
        a.times[0] = 0.3
    assert a == SpikeTrain([0.1, 0.2]) and hash(a) == hash(SpikeTrain([0.1, 0.2]))
    assert a != SpikeTrain([0.1, 0.2], TimeDomain(0.0, 2.0))


def test_sample_invariants():
    with pytest.raises(ValueError):
        TrainSample([])
    with pytest.raises(ValueError):
        TrainSample([SpikeTrain([0.5]), SpikeTrain([0.5], TimeDomain(0, 2))])
    with pytest.raises(ValueError):
        TrainSample([SpikeTrain([0.5])], labels=["a", "b"])
    s = TrainSample([SpikeTrain([0.5]), SpikeTrain([]), SpikeTrain([0.1, 0.9])])
    assert list(s.counts) == [1, 0, 2] and s.mean_count == 1.0
    assert s.domain == UNIT
    assert np.allclose(np.sort(s.pooled_times()), [0.1, 0.5, 0.9])
    sub = s.subset([2, 0])
    assert sub[0] == s[2] and len(sub) == 2
    lab = s.with_labels("F").concat(s.with_labels("G"))
    assert lab.labels == ("F",) * 3 + ("G",) * 3
    with pytest.raises(ValueError):
        s.concat(lab)
