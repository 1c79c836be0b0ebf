import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spikedepth.core import UNIT, SpikeTrain, TimeDomain
from spikedepth.metric import d_mu, distance_matrix, elastic_alignment

from conftest import unit_trains


def brute_force_sq(f, g, mu, lo=0.0, hi=1.0):
    """Minimise over every monotone matching by explicit enumeration."""
    t, s = f.times, g.times
    best = np.inf
    for m in range(min(t.size, s.size) + 1):
        for ii in itertools.combinations(range(t.size), m):
            for jj in itertools.combinations(range(s.size), m):
                a = np.r_[lo, t[list(ii)], hi]
                b = np.r_[lo, s[list(jj)], hi]
                pen = np.sum((np.sqrt(np.diff(a)) - np.sqrt(np.diff(b))) ** 2)
                best = min(best, t.size + s.size - 2 * m + mu * pen)
    return best


def test_simple_values():
    f = SpikeTrain([0.3, 0.6])
    assert d_mu(f, f) == 0.0
    assert d_mu(f, SpikeTrain([])) == pytest.approx(np.sqrt(2))
    # without a warping penalty only the count difference matters
    assert d_mu(f, SpikeTrain([0.1, 0.5, 0.9]), mu=0) == pytest.approx(1.0)


def test_single_spike_shift():
    f, g = SpikeTrain([0.5]), SpikeTrain([0.6])
    pen = (np.sqrt(0.5) - np.sqrt(0.6)) ** 2 + (np.sqrt(0.5) - np.sqrt(0.4)) ** 2
    # matching costs mu * pen; leaving both unmatched costs 2
    assert d_mu(f, g, 20) == pytest.approx(np.sqrt(min(20 * pen, 2.0)))
    assert d_mu(f, g, 1e4) == pytest.approx(np.sqrt(2.0))


@given(unit_trains(max_k=4), unit_trains(max_k=4), st.sampled_from([0.0, 1.0, 20.0, 300.0]))
def test_dp_equals_brute_force(f, g, mu):
    assert elastic_alignment(f, g, mu).cost == pytest.approx(brute_force_sq(f, g, mu), abs=1e-12)


@given(unit_trains(), unit_trains())
def test_symmetry_and_identity(f, g):
    assert d_mu(f, g) == pytest.approx(d_mu(g, f), abs=1e-12)
    assert d_mu(f, f) == 0.0


@given(unit_trains(), unit_trains())
def test_monotone_in_mu(f, g):
    vals = [d_mu(f, g, mu) for mu in (0, 5, 20, 100)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_alignment_pairs_are_monotone():
    f = SpikeTrain([0.1, 0.4, 0.45, 0.8])
    g = SpikeTrain([0.12, 0.41, 0.79])
    al = elastic_alignment(f, g, 20)
    assert al.pairs == ((0, 0), (1, 1), (3, 2))


def test_other_domain_and_errors():
    dom = TimeDomain(0, 2)
    f, g = SpikeTrain([0.5, 1.5], dom), SpikeTrain([0.6, 1.4], dom)
    assert elastic_alignment(f, g, 3.0).cost == pytest.approx(brute_force_sq(f, g, 3.0, 0, 2))
    with pytest.raises(ValueError):
        d_mu(f, SpikeTrain([0.5]))
    with pytest.raises(ValueError):
        d_mu(SpikeTrain([0.5]), SpikeTrain([0.5]), mu=-1)


def test_distance_matrix_shape():
    a = [SpikeTrain([0.2]), SpikeTrain([0.4, 0.6])]
    m = distance_matrix(a, a)
    assert m.shape == (2, 2) and np.allclose(np.diag(m), 0) and np.allclose(m, m.T)
