"""Spike train depth: cardinality weight times a conditional log-ratio depth."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .core import SpikeTrain, TrainSample
from .intensity import IntensityModel, cumulative, rescaled_times

ILR = "ilr"
SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class DepthConfig:
    r: float = 1.0
    variant: str = ILR

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("cardinality exponent r must be positive")
        if self.variant not in (ILR, SIMPLIFIED):
            raise ValueError(f"unknown depth variant {self.variant!r}")


@dataclass(frozen=True)
class DepthScore:
    total: float
    weight: float
    conditional: float
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class CardinalityModel:
    """Probability mass over spike counts ``0..k_max``."""

    pmf: np.ndarray

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
            raise ValueError("pmf must be a non-empty non-negative vector")
        total = pmf.sum()
        if not np.isclose(total, 1.0, atol=1e-9):
            raise ValueError(f"pmf must sum to 1, got {total}")
        pmf = pmf / total
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        cdf = np.cumsum(pmf)
        sf = np.cumsum(pmf[::-1])[::-1]  # P(K >= k)
        object.__setattr__(self, "_d1", np.clip(np.minimum(cdf, sf), 0.0, 1.0))

    @classmethod
    def empirical(cls, counts: Sequence[int]) -> "CardinalityModel":
        counts = np.asarray(counts, dtype=int)
        if counts.size == 0 or np.any(counts < 0):
            raise ValueError("counts must be a non-empty list of non-negative ints")
        return cls(np.bincount(counts) / counts.size)

    @classmethod
    def from_sample(cls, sample: TrainSample) -> "CardinalityModel":
        return cls.empirical(sample.counts)

    @classmethod
    def poisson(cls, mean: float, tail: float = 1e-12) -> "CardinalityModel":
        k_max = int(stats.poisson.isf(tail, mean)) + 1
        pmf = stats.poisson.pmf(np.arange(k_max + 1), mean)
        return cls(pmf / pmf.sum())

    @property
    def k_max(self) -> int:
        return self.pmf.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.pmf.size) @ self.pmf)

    @property
    def d1_table(self) -> np.ndarray:
        return self._d1


def cardinality_depth(k: int, cm: CardinalityModel) -> float:
    """``min(P(K <= k), P(K >= k))``; zero beyond the support."""
    if k < 0:
        raise ValueError("cardinality must be non-negative")
    if k > cm.k_max:
        return 0.0
    return float(cm.d1_table[k])


def cardinality_weight(k: int, cm: CardinalityModel) -> float:
    """Cardinality depth normalised by its maximum over all counts."""
    return cardinality_depth(k, cm) / float(cm.d1_table.max())


def _spacings(rescaled: np.ndarray, total: float) -> np.ndarray:
    return np.diff(np.concatenate(([0.0], rescaled, [total])))


def log_spacing_ratio(spacings: np.ndarray) -> float:
    """``log prod((k+1) v_i / sum(v))``; zero at equal spacings, else negative."""
    k1 = spacings.size
    total = spacings.sum()
    with np.errstate(divide="ignore"):
        val = float(np.sum(np.log(spacings)) + k1 * np.log(k1 / total))
    return min(val, 0.0)


def ilr_depth_from_spacings(spacings: np.ndarray) -> float:
    if np.any(spacings <= 0):
        return 0.0
    return 1.0 / (1.0 - log_spacing_ratio(spacings))


def simplified_depth_from_spacings(spacings: np.ndarray) -> float:
    if np.any(spacings <= 0):
        return 0.0
    logs = np.log(spacings)
    dev = logs - logs.mean()
    return 1.0 / (1.0 + 0.5 * float(dev @ dev))


def _conditional(train: SpikeTrain, ci, fn) -> float:
    v = _spacings(rescaled_times(train, ci), ci.total)
    return fn(v)


def conditional_depth_ilr(train: SpikeTrain, ci) -> float:
    """``1 / (1 - log((k+1)^(k+1) / Lambda(T2)^(k+1) * prod(rescaled spacings)))``."""
    return _conditional(train, ci, ilr_depth_from_spacings)


def conditional_depth_simplified(train: SpikeTrain, ci) -> float:
    """``1 / (1 + sum(log(v_i / g)^2) / 2)`` with ``g`` the geometric mean spacing."""
    return _conditional(train, ci, simplified_depth_from_spacings)


_CONDITIONAL = {ILR: ilr_depth_from_spacings, SIMPLIFIED: simplified_depth_from_spacings}


def depth(train: SpikeTrain, model: IntensityModel, cm: CardinalityModel,
          cfg: DepthConfig = DepthConfig()) -> DepthScore:
    ci = cumulative(model, train if model.history_dependent else None)
    v = _spacings(rescaled_times(train, ci), ci.total)
    degenerate = bool(np.any(v <= 0))
    cond = _CONDITIONAL[cfg.variant](v)
    w = cardinality_weight(train.k, cm)
    return DepthScore(total=w ** cfg.r * cond, weight=w, conditional=cond,
                      degenerate=degenerate)


def sample_depths(sample, model: IntensityModel, cm: CardinalityModel,
                  cfg: DepthConfig = DepthConfig()) -> np.ndarray:
    """Total depth of every train in ``sample`` (any iterable of trains)."""
    return np.array([depth(tr, model, cm, cfg).total for tr in sample])
