import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from spikedepth.core import UNIT, SpikeTrain

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def unit_trains(draw, min_k=0, max_k=12):
    """Spike trains on [0, 1] whose events are well separated from each other and the edges."""
    k = draw(st.integers(min_k, max_k))
    raw = draw(st.lists(st.floats(0.001, 0.999), min_size=k, max_size=k, unique=True))
    times = np.unique(np.round(np.sort(raw), 6))
    times = times[(times > 0) & (times < 1)]
    return SpikeTrain(times, UNIT)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
