"""Depth-threshold outlier detection with Monte-Carlo calibrated thresholds.

For a train with ``k`` events the threshold is

    t_k = w(k)^r / (1 - log(C_k * ((k + 1) / Lambda(T2))^(k + 1)))

where ``C_k`` is the ``delta``-quantile of the product of the ``k + 1``
spacings of ``k`` ordered uniforms on ``[0, Lambda(T2)]``. Scaling the
interval by ``L`` multiplies the product by ``L^(k+1)``, so the bracketed
term does not depend on ``Lambda(T2)``; quantiles are therefore simulated
once per ``k`` on the unit interval and shared by every observation,
including history-dependent models where ``Lambda(T2)`` varies per train.
"""
from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .core import TrainSample
from .depth import (ILR, SIMPLIFIED, CardinalityModel, DepthConfig, cardinality_weight,
                    ilr_depth_from_spacings, simplified_depth_from_spacings)
from .intensity import IntensityModel, cumulative, rescaled_times

DEFAULT_NMC = 100_000
_CHUNK = 2_000_000


def _unit_spacing_stat(k: int, n_mc: int, seed: int, variant: str = ILR) -> np.ndarray:
    """Monte-Carlo draws of a spacing statistic for ``k`` ordered uniforms on [0, 1].

    ILR: ``log prod(spacings)``. Simplified: the conditional depth itself.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, k])))
    rows = max(1, _CHUNK // max(k, 1))
    out = np.empty(n_mc)
    for i in range(0, n_mc, rows):
        m = min(rows, n_mc - i)
        u = np.sort(rng.random((m, k)), axis=1)
        sp = np.diff(u, axis=1, prepend=0.0, append=1.0)
        logs = np.log(sp)
        if variant == ILR:
            out[i:i + m] = logs.sum(axis=1)
        else:
            dev = logs - logs.mean(axis=1, keepdims=True)
            out[i:i + m] = 1.0 / (1.0 + 0.5 * np.einsum("ij,ij->i", dev, dev))
    return out


def mc_log_quantile(k: int, delta: float, n_mc: int = DEFAULT_NMC, seed: int = 0) -> float:
    """``log`` of the ``delta``-quantile of the unit-interval spacing product."""
    if k == 0:
        return 0.0
    draws = _unit_spacing_stat(k, n_mc, seed)
    return float(np.quantile(draws, delta, method="inverted_cdf"))


def mc_spacing_product_quantile(k: int, total: float, delta: float,
                                n_mc: int = DEFAULT_NMC, seed: int = 0) -> float:
    """Empirical ``delta``-quantile ``C_k`` of ``prod(U_i - U_{i-1})``.

    ``U`` are ``k`` ordered uniforms on ``[0, total]`` padded with 0 and
    ``total``. For ``k = 0`` the product is the constant ``total``.
    """
    if k < 0 or not 0 < delta < 1 or n_mc < 1 or not total > 0:
        raise ValueError("need k >= 0, 0 < delta < 1, n_mc >= 1 and total > 0")
    if k == 0:
        return float(total)
    return float(np.exp(mc_log_quantile(k, delta, n_mc, seed) + (k + 1) * np.log(total)))


def threshold_tk(k: int, cm: CardinalityModel, cfg: DepthConfig, c_k: float,
                 total: float) -> float:
    """Threshold ``t_k`` from a spacing-product quantile ``c_k``."""
    log_term = np.log(c_k) + (k + 1) * (np.log(k + 1) - np.log(total))
    return cardinality_weight(k, cm) ** cfg.r / (1.0 - min(float(log_term), 0.0))


class ThresholdCache:
    """Compute-once cache of scale-free conditional-depth cut-offs per ``k``.

    ``cutoff(k)`` is the conditional depth below which a train with ``k``
    events is flagged; the total-depth threshold is ``w(k)^r * cutoff(k)``.
    """

    def __init__(self, delta: float, n_mc: int = DEFAULT_NMC, seed: int = 0,
                 variant: str = ILR):
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.n_mc = n_mc
        self.seed = seed
        self.variant = variant
        self._cut: Dict[int, float] = {}
        self._lock = threading.Lock()

    def log_quantile(self, k: int) -> float:
        """Log of ``C_k * ((k+1)/Lambda(T2))^(k+1)`` (ILR only)."""
        if k == 0:
            return 0.0
        return mc_log_quantile(k, self.delta, self.n_mc, self.seed) + (k + 1) * np.log(k + 1)

    def cutoff(self, k: int) -> float:
        got = self._cut.get(k)
        if got is not None:
            return got
        with self._lock:
            if k not in self._cut:
                if k == 0:
                    val = 1.0
                elif self.variant == ILR:
                    val = 1.0 / (1.0 - min(self.log_quantile(k), 0.0))
                else:
                    draws = _unit_spacing_stat(k, self.n_mc, self.seed, SIMPLIFIED)
                    val = float(np.quantile(draws, self.delta, method="inverted_cdf"))
                self._cut[k] = val
            return self._cut[k]


def f1_score(precision: float, recall: float) -> float:
    if precision <= 0 or recall <= 0:
        return 0.0
    return 2.0 / (1.0 / precision + 1.0 / recall)


@dataclass
class OutlierReport:
    counts: np.ndarray
    depths: np.ndarray
    thresholds: np.ndarray
    flags: np.ndarray
    totals: np.ndarray
    delta: float
    truth: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_flagged(self) -> int:
        return int(self.flags.sum())

    @property
    def flagged_fraction(self) -> float:
        return self.n_flagged / self.flags.size

    def _tp(self) -> int:
        return int(np.sum(self.flags & self.truth))

    @property
    def precision(self) -> float:
        """Share of flagged trains that are true outliers (0 if none flagged)."""
        if self.truth is None:
            raise ValueError("precision needs ground-truth labels")
        return self._tp() / self.n_flagged if self.n_flagged else 0.0

    @property
    def recall(self) -> float:
        if self.truth is None:
            raise ValueError("recall needs ground-truth labels")
        n_true = int(self.truth.sum())
        return self._tp() / n_true if n_true else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def summary(self) -> dict:
        out = {"delta": self.delta, "n": int(self.flags.size), "n_flagged": self.n_flagged}
        if self.truth is not None:
            out.update(precision=self.precision, recall=self.recall, f1=self.f1,
                       n_true=int(self.truth.sum()))
        out.update(self.meta)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "k", "depth", "threshold", "flag"])
        for i, (k, d, t, f) in enumerate(zip(self.counts, self.depths, self.thresholds,
                                            self.flags)):
            w.writerow([i, int(k), repr(float(d)), repr(float(t)), int(bool(f))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def detect_outliers(sample: TrainSample, model: IntensityModel,
                    cm: Optional[CardinalityModel] = None, cfg: DepthConfig = DepthConfig(),
                    delta: float = 0.01, n_mc: int = DEFAULT_NMC, seed: int = 0,
                    truth: Optional[Sequence[bool]] = None,
                    cache: Optional[ThresholdCache] = None) -> OutlierReport:
    """Flag every train whose depth falls below its cardinality's threshold.

    History-dependent models get a per-train cumulative intensity, so each
    observation is scored against its own ``Lambda(T2)``.
    """
    if cm is None:
        cm = CardinalityModel.from_sample(sample)
    if cache is None:
        cache = ThresholdCache(delta, n_mc, seed, cfg.variant)
    elif cache.delta != delta or cache.variant != cfg.variant:
        raise ValueError("threshold cache was built for a different delta or variant")
    cond_fn = ilr_depth_from_spacings if cfg.variant == ILR else simplified_depth_from_spacings
    shared = None if model.history_dependent else cumulative(model)
    n = len(sample)
    counts = np.empty(n, dtype=int)
    depths = np.empty(n)
    thresholds = np.empty(n)
    totals = np.empty(n)
    for i, tr in enumerate(sample):
        ci = shared if shared is not None else cumulative(model, tr)
        v = np.diff(np.concatenate(([0.0], rescaled_times(tr, ci), [ci.total])))
        wr = cardinality_weight(tr.k, cm) ** cfg.r
        counts[i] = tr.k
        depths[i] = wr * cond_fn(v)
        thresholds[i] = wr * cache.cutoff(tr.k)
        totals[i] = ci.total
    flags = depths < thresholds
    t = None if truth is None else np.asarray(truth, dtype=bool)
    if t is not None and t.size != n:
        raise ValueError("truth labels and sample differ in length")
    return OutlierReport(counts, depths, thresholds, flags, totals, delta, t,
                         meta={"n_mc": n_mc, "seed": seed, "variant": cfg.variant,
                               "r": cfg.r})
