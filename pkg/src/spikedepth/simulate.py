"""Samplers for homogeneous, inhomogeneous and Hawkes spike trains.

Each train draws from its own Philox substream spawned from the sample seed,
so train ``i`` of a sample is the same regardless of how many trains are
generated or in which order.
"""
from __future__ import annotations

from typing import List, Optional, Union

import numpy as np

from .core import SpikeTrain, TimeDomain, TrainSample, UNIT
from .intensity import Constant, Curve, Hawkes


def train_streams(seed: int, n: int) -> List[np.random.Generator]:
    """``n`` independent counter-based generators derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _valid(times: np.ndarray, lo: float, hi: float) -> bool:
    if times.size == 0:
        return True
    return times[0] > lo and times[-1] < hi and bool(np.all(np.diff(times) > 0))


def _uniform_times(rng, k, lo, hi):
    while True:
        times = np.sort(rng.uniform(lo, hi, k))
        if _valid(times, lo, hi):
            return times


def sample_hpp(rate: float, domain: TimeDomain = UNIT, n: int = 1, seed: int = 0,
               window: Optional[tuple] = None) -> TrainSample:
    """Homogeneous Poisson trains.

    ``window`` restricts events to a sub-interval ``(a, b)`` of ``domain``
    while the trains still live on the full domain.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    lo, hi = (domain.t_start, domain.t_end) if window is None else window
    if not domain.t_start <= lo < hi <= domain.t_end:
        raise ValueError("window must lie inside the domain")
    trains = []
    for rng in train_streams(seed, n):
        k = rng.poisson(rate * (hi - lo))
        times = _uniform_times(rng, k, lo, hi)
        # an event exactly on the domain edge is impossible for a strict sub-window
        trains.append(SpikeTrain(times, domain))
    return TrainSample(trains)


def sample_ipp(model: Union[Curve, Constant], n: int = 1, seed: int = 0) -> TrainSample:
    """Inhomogeneous Poisson trains by thinning against the maximal grid rate."""
    if isinstance(model, Constant):
        return sample_hpp(model.rate, model.domain, n, seed)
    if n < 1:
        raise ValueError("n must be at least 1")
    d = model.domain
    lam_max = model.max_rate
    trains = []
    for rng in train_streams(seed, n):
        if lam_max <= 0:
            trains.append(SpikeTrain([], d))
            continue
        while True:
            m = rng.poisson(lam_max * d.length)
            cand = np.sort(rng.uniform(d.t_start, d.t_end, m))
            keep = rng.random(m) * lam_max < model.intensity(cand)
            times = cand[keep]
            if _valid(times, d.t_start, d.t_end):
                break
        trains.append(SpikeTrain(times, d))
    return TrainSample(trains)


def _ogata(model: Hawkes, rng: np.random.Generator) -> np.ndarray:
    d = model.domain
    base = model.base
    base_max = base.max_rate
    a, b = model.alpha, model.beta
    t = d.t_start
    excite = 0.0
    events = []
    while True:
        bound = base_max + excite
        if bound <= 0:
            break
        t_new = t + rng.exponential(1.0 / bound)
        if t_new >= d.t_end:
            break
        excite *= np.exp(-b * (t_new - t))
        t = t_new
        lam = float(base.intensity(t)) + excite
        assert lam <= bound * (1 + 1e-12), "thinning bound violated"
        if rng.random() * bound < lam:
            if events and t <= events[-1]:
                continue
            events.append(t)
            excite += a
    return np.asarray(events)


def sample_hawkes(model: Hawkes, n: int = 1, seed: int = 0) -> TrainSample:
    """Exponential Hawkes trains by Ogata's thinning.

    The upper bound ``max(baseline) + current excitation`` is refreshed after
    every candidate; the excitation only decays between events, so the bound
    stays valid until the next accepted event.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d = model.domain
    trains = []
    for rng in train_streams(seed, n):
        trains.append(SpikeTrain(_ogata(model, rng), d))
    return TrainSample(trains)


def sample(model, n: int, seed: int) -> TrainSample:
    """Dispatch to the sampler matching ``model``."""
    if isinstance(model, Hawkes):
        return sample_hawkes(model, n, seed)
    if isinstance(model, (Curve, Constant)):
        return sample_ipp(model, n, seed)
    raise TypeError(f"no sampler for {type(model).__name__}")
