"""Depth-based median spike train."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SpikeTrain, TrainSample
from .depth import CardinalityModel, DepthConfig, DepthScore, cardinality_weight, depth
from .intensity import IntensityModel, cumulative, history_free_marginal


@dataclass(frozen=True)
class MedianResult:
    median: SpikeTrain
    cardinality: int
    depth: DepthScore


def modal_cardinality(cm: CardinalityModel, mean_count: Optional[float] = None) -> int:
    """Count with maximal cardinality weight.

    Ties go to the count nearest ``mean_count`` (the model mean by default),
    then to the smaller count.
    """
    weights = np.array([cardinality_weight(k, cm) for k in range(cm.k_max + 1)])
    best = np.flatnonzero(weights >= weights.max() - 1e-12)
    target = cm.mean if mean_count is None else mean_count
    return int(min(best, key=lambda k: (abs(k - target), k)))


def median_train(model: IntensityModel, k: int) -> SpikeTrain:
    """Train with ``k`` events at equal steps of cumulative intensity."""
    ci = cumulative(history_free_marginal(model))
    if k == 0:
        return SpikeTrain([], ci.domain)
    levels = np.arange(1, k + 1) * (ci.total / (k + 1))
    return SpikeTrain(np.atleast_1d(ci.inverse(levels)), ci.domain)


def estimate_median(sample: TrainSample, model: IntensityModel,
                    cm: Optional[CardinalityModel] = None,
                    cfg: DepthConfig = DepthConfig()) -> MedianResult:
    """Deepest spike train over the whole train space.

    The cardinality maximises the weight term; given the count, the
    conditional depth is maximal (exactly 1) when all rescaled gaps are equal,
    so the events are placed at ``Lambda^{-1}(i * Lambda(T2) / (k + 1))``.
    IMI models are reduced to their marginal rate first.
    """
    if cm is None:
        cm = CardinalityModel.from_sample(sample)
    marginal = history_free_marginal(model)
    k_star = modal_cardinality(cm, sample.mean_count)
    med = median_train(marginal, k_star)
    return MedianResult(med, k_star, depth(med, marginal, cm, cfg))
