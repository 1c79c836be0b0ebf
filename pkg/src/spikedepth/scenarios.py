"""Intensities and data generators for the simulation studies.

Seeds are derived deterministically from ``(experiment seed, repetition,
role)`` so that every sample in a repetition is reproducible on its own.
"""
from __future__ import annotations

import numpy as np

from .core import SpikeTrain, TrainSample, UNIT
from .intensity import Constant, Curve, Hawkes
from .simulate import sample_hawkes, sample_hpp, sample_ipp

BUMP_HEIGHT = 100.0 / np.sqrt(2.0 * np.pi)
BUMP_SD = 0.05


def _bump(t, centre):
    return BUMP_HEIGHT * np.exp(-(t - centre) ** 2 / (2 * BUMP_SD ** 2))


def sine_rate(t):
    """``10 sin(4 pi (t - 1/8)) + 10``; peaks at 3/16 and 11/16."""
    return 10.0 * np.sin(4.0 * np.pi * (t - 0.125)) + 10.0


def parabola_rate(t):
    """``96 (t - 1/2)^2``; integrates to 8 on [0, 1]."""
    return 96.0 * (t - 0.5) ** 2


def bimodal_rate(t):
    """Gaussian bumps at 0.25 and 0.75, each integrating to 5."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 0.5, _bump(t, 0.25), _bump(t, 0.75))


def trimodal_rate(t):
    """Outlier intensity with bumps at 0, 0.5 and 1."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 0.25, _bump(t, 0.0),
                    np.where(t <= 0.75, _bump(t, 0.5), _bump(t, 1.0)))


def sine_curve() -> Curve:
    return Curve.from_function(sine_rate)


def parabola_curve() -> Curve:
    return Curve.from_function(parabola_rate)


def bimodal_curve() -> Curve:
    return Curve.from_function(bimodal_rate)


def trimodal_curve() -> Curve:
    return Curve.from_function(trimodal_rate)


def hawkes_model(alpha: float = 15.0, beta: float = 30.0) -> Hawkes:
    """Self-exciting process on half the bimodal rate."""
    return Hawkes(bimodal_curve().scaled(0.5), alpha, beta)


def derive_seed(seed: int, *keys: int) -> int:
    """Stable 63-bit seed from an experiment seed and integer keys."""
    state = np.random.SeedSequence([seed, *keys]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def window_outliers(n: int = 10, rate: float = 100.0, seed: int = 0) -> TrainSample:
    """Train ``j`` is homogeneous on ``[j/n, (j+1)/n]`` and empty elsewhere."""
    trains = []
    for j in range(n):
        s = sample_hpp(rate, UNIT, 1, derive_seed(seed, j), window=(j / n, (j + 1) / n))
        trains.append(s.trains[0])
    return TrainSample(trains)


def contaminated(base: TrainSample, outliers: TrainSample):
    """Concatenate base and outliers; returns the sample and the outlier mask."""
    truth = np.r_[np.zeros(len(base), bool), np.ones(len(outliers), bool)]
    return base.concat(outliers), truth


# role keys used in derive_seed
BASE, OUTLIER, TRAIN_F, TRAIN_G, TEST_F, TEST_G, FIT, BOUNDARY = range(8)


def sim1_sample(n: int = 500, seed: int = 0) -> TrainSample:
    return sample_hpp(10.0, UNIT, n, seed)


def sim2_sample(n: int = 500, seed: int = 0) -> TrainSample:
    return sample_ipp(sine_curve(), n, seed)


def early_burst_outliers(n: int = 10, seed: int = 0) -> TrainSample:
    """Homogeneous rate 200 on [0, 0.05]: ten expected events per train."""
    return sample_hpp(200.0, UNIT, n, seed, window=(0.0, 0.05))


def outlier_sample(experiment: str, rep: int, seed: int = 0, n: int = 1000,
                   n_out: int = 10):
    """Contaminated sample and truth mask for simulations 3, 4 and 5."""
    s_base = derive_seed(seed, rep, BASE)
    s_out = derive_seed(seed, rep, OUTLIER)
    if experiment == "sim3":
        base = sample_hpp(10.0, UNIT, n, s_base)
        out = window_outliers(n_out, 100.0, s_out)
    elif experiment == "sim4":
        base = sample_ipp(sine_curve(), n, s_base)
        out = window_outliers(n_out, 100.0, s_out)
    elif experiment == "sim5":
        base = sample_hawkes(hawkes_model(), n, s_base)
        out = sample_ipp(trimodal_curve(), n_out, s_out)
    else:
        raise ValueError(f"no outlier scenario {experiment!r}")
    return contaminated(base, out)
