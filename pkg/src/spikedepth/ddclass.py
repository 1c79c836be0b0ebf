"""Depth-depth classification with a monotone boundary, plus baselines.

Labels are ``0`` for group F and ``1`` for group G throughout. A point is
assigned to F when ``f(d_F) > d_G`` and to G when ``f(d_F) < d_G``; exact
ties, and points with zero depth in both groups, fall back to the group whose
mean spike count is nearer the train's count (F if still tied).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from .core import SpikeTrain, TrainSample
from .depth import CardinalityModel, DepthConfig, sample_depths
from .intensity import (IntensityModel, estimate_intensity_imi, estimate_intensity_kernel)
from .median import estimate_median
from .metric import d_mu

log = logging.getLogger(__name__)

F, G = 0, 1
KERNEL, IMI = "kernel", "imi"
BOUNDARY_GRID = 201


# ---------------------------------------------------------------------------
# fitted group models and DD points
# ---------------------------------------------------------------------------


@dataclass
class GroupModel:
    """Intensity and cardinality models fitted to one training group."""

    intensity: IntensityModel
    cardinality: CardinalityModel
    mean_count: float
    kind: str = KERNEL


def fit_group(sample: TrainSample, kind: str = KERNEL, seed: int = 0) -> GroupModel:
    if kind == KERNEL:
        model = estimate_intensity_kernel(sample)
    elif kind == IMI:
        model = estimate_intensity_imi(sample, seed=seed)
    else:
        raise ValueError(f"unknown intensity kind {kind!r}")
    return GroupModel(model, CardinalityModel.from_sample(sample), sample.mean_count, kind)


@dataclass
class DDPoints:
    """Depths of a set of trains with respect to both groups."""

    d_f: np.ndarray
    d_g: np.ndarray
    counts: np.ndarray
    fallback: np.ndarray
    labels: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.d_f.size

    def grid_weights(self, n_grid: int = BOUNDARY_GRID):
        """Cell index and linear weight of each ``d_F`` on the boundary grid."""
        key = ("_gw", n_grid)
        got = self.__dict__.get(key)
        if got is None:
            pos = np.clip(self.d_f, 0.0, 1.0) * (n_grid - 1)
            idx = np.minimum(pos.astype(int), n_grid - 2)
            got = (idx, pos - idx, np.maximum(self.d_f - 1.0, 0.0))
            self.__dict__[key] = got
        return got

    def subset(self, idx) -> "DDPoints":
        lab = None if self.labels is None else self.labels[idx]
        return DDPoints(self.d_f[idx], self.d_g[idx], self.counts[idx],
                        self.fallback[idx], lab)

    def to_csv_rows(self):
        yield ["index", "d_F", "d_G", "k", "label"]
        for i in range(len(self)):
            lab = "" if self.labels is None else int(self.labels[i])
            yield [i, repr(float(self.d_f[i])), repr(float(self.d_g[i])),
                   int(self.counts[i]), lab]


def fallback_labels(counts: np.ndarray, mean_f: float, mean_g: float) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    return np.where(np.abs(counts - mean_g) < np.abs(counts - mean_f), G, F)


def dd_plot(trains: Sequence[SpikeTrain], gf: GroupModel, gg: GroupModel,
            cfg: DepthConfig = DepthConfig(), labels=None) -> DDPoints:
    """Depth of every train with respect to the F and G group models."""
    trains = list(trains)
    if not trains:
        raise ValueError("no trains to place on the DD plot")
    d_f = sample_depths(trains, gf.intensity, gf.cardinality, cfg)
    d_g = sample_depths(trains, gg.intensity, gg.cardinality, cfg)
    counts = np.array([tr.k for tr in trains])
    lab = None if labels is None else np.asarray(labels, dtype=int)
    return DDPoints(d_f, d_g, counts, fallback_labels(counts, gf.mean_count, gg.mean_count), lab)


def dd_plot_groups(f_sample: TrainSample, g_sample: TrainSample, gf: GroupModel,
                   gg: GroupModel, cfg: DepthConfig = DepthConfig()) -> DDPoints:
    trains = list(f_sample) + list(g_sample)
    labels = [F] * len(f_sample) + [G] * len(g_sample)
    return dd_plot(trains, gf, gg, cfg, labels)


# ---------------------------------------------------------------------------
# boundary functions
# ---------------------------------------------------------------------------


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative Simpson integral along the last axis of a uniform grid.

    Each cell integrates the quadratic through its own two nodes and the
    neighbour on the inner side, which is exact for quadratics.
    """
    left = y[..., :-2]
    mid = y[..., 1:-1]
    right = y[..., 2:]
    cells = np.empty(y.shape[:-1] + (y.shape[-1] - 1,))
    cells[..., :-1] = h / 12.0 * (5 * left + 8 * mid - right)
    cells[..., -1] = h / 12.0 * (-left[..., -1] + 8 * mid[..., -1] + 5 * right[..., -1])
    out = np.zeros(y.shape)
    np.cumsum(cells, axis=-1, out=out[..., 1:])
    return out


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """``f(t) = int_0^t exp(h(x)) dx`` with ``h(x) = sum_i a_i x^i``.

    ``coef`` holds ``a_0..a_k0`` in ascending order. ``f`` and its
    coefficient gradient are tabulated on a uniform grid over ``[0, 1]`` by
    cumulative Simpson quadrature and linearly interpolated in between, so
    ``f`` is strictly increasing with ``f(0) = 0``. Beyond 1 the last slope
    is continued.
    """

    coef: np.ndarray
    n_grid: int = BOUNDARY_GRID

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=float).reshape(-1)
        object.__setattr__(self, "coef", coef)
        x = np.linspace(0.0, 1.0, self.n_grid)
        powers = x[None, :] ** np.arange(coef.size)[:, None]
        eh = np.exp(np.clip(coef @ powers, -700, 700))
        parts = powers * eh
        cum = _cumulative_simpson(parts, x[1] - x[0])
        f_tab = cum[0]
        # Simpson's cumulative values are monotone only up to rounding
        if np.any(np.diff(f_tab) <= 0):
            f_tab = np.concatenate(([0.0], integrate.cumulative_trapezoid(eh, x=x)))
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_f", f_tab)
        object.__setattr__(self, "_df", cum)
        object.__setattr__(self, "_end_slope", float(eh[-1]))
        # constant h: f is exactly linear, which keeps diagonal ties exact
        object.__setattr__(self, "_slope", float(eh[0]) if not np.any(coef[1:]) else None)

    @classmethod
    def identity(cls, degree: int = 0) -> "BoundaryFunction":
        return cls(np.zeros(degree + 1))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self._slope is not None:
            return self._slope * np.maximum(t, 0.0)
        inside = np.interp(np.clip(t, 0.0, 1.0), self._x, self._f)
        return np.where(t > 1.0, self._f[-1] + (t - 1.0) * self._end_slope, inside)

    def gradient(self, t) -> np.ndarray:
        """``d f(t) / d a_i`` as an array of shape ``(len(t), k0 + 1)``."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return np.stack([np.interp(t, self._x, row) for row in self._df], axis=1)

    def at_points(self, points: "DDPoints"):
        """``f(d_F)`` and its gradient using the cached grid weights of ``points``."""
        idx, w, over = points.grid_weights(self.n_grid)
        tab = self._df
        grad = (tab[:, idx] * (1 - w) + tab[:, idx + 1] * w).T
        if self._slope is not None:
            fx = self._slope * np.maximum(points.d_f, 0.0)
        else:
            fx = self._f[idx] * (1 - w) + self._f[idx + 1] * w + over * self._end_slope
        return fx, grad

    def samples(self, n: int = 1001):
        x = np.linspace(0.0, 1.0, n)
        return x, self(x)


def classify_points(points: DDPoints, f: BoundaryFunction) -> np.ndarray:
    """Label F iff ``f(d_F) > d_G``; ties and double zeros use the fallback."""
    fx = f.at_points(points)[0]
    out = np.where(fx > points.d_g, F, G)
    tie = (fx == points.d_g) | ((points.d_f == 0) & (points.d_g == 0))
    return np.where(tie, points.fallback, out)


def misclassification_rate(points: DDPoints, f: BoundaryFunction) -> float:
    """Share of labelled points on the wrong side of the boundary (hard indicators)."""
    if points.labels is None:
        raise ValueError("misclassification needs labelled points")
    return float(np.mean(classify_points(points, f) != points.labels))


def smoothed_rate(points: DDPoints, f: BoundaryFunction, tau: float = 100.0,
                  with_grad: bool = False):
    """Logistic surrogate of the misclassification rate and its coefficient gradient."""
    sign = np.where(points.labels == F, 1.0, -1.0)
    fx, dfx = f.at_points(points)
    z = tau * sign * (points.d_g - fx)
    p = special.expit(z)
    val = float(p.mean())
    if not with_grad:
        return val
    dz = -tau * sign[:, None] * dfx
    grad = ((p * (1 - p))[:, None] * dz).mean(axis=0)
    return val, grad


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the annealed perturbed gradient search.

    ``lr`` is the step size, ``anneal`` the temperature decay per iteration,
    ``tol`` the stopping threshold on the coefficient change and ``tau`` the
    logistic steepness.
    """

    degree: int = 5
    lr: float = 0.05
    anneal: float = 0.95
    tol: float = 1e-4
    tau: float = 100.0
    restarts: int = 5
    max_iter: int = 2000
    seed: int = 0
    redraw_noise: bool = True

    def __post_init__(self):
        if self.degree < 0 or self.lr <= 0 or self.tol <= 0 or self.tau <= 0:
            raise ValueError("degree >= 0 and positive lr, tol, tau are required")
        if not 0 < self.anneal < 1:
            raise ValueError("anneal must lie in (0, 1)")
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be at least 1")


@dataclass
class TrainedBoundary:
    boundary: BoundaryFunction
    train_error: float
    converged: bool
    iterations: int
    history: list = field(default_factory=list)


def _anneal_run(points: DDPoints, opt: OptimizerConfig, rng: np.random.Generator):
    a = np.zeros(opt.degree + 1)
    f = BoundaryFunction(a)
    temp = 1.0
    z = rng.standard_normal(a.size)
    best_a, best_err = a.copy(), misclassification_rate(points, f)
    converged = False
    it = 0
    for it in range(1, opt.max_iter + 1):
        _, grad = smoothed_rate(points, f, opt.tau, with_grad=True)
        new = a - opt.lr * grad + np.sqrt(opt.lr * temp) * z
        f = BoundaryFunction(new)
        err = misclassification_rate(points, f)
        if err < best_err:
            best_a, best_err = new.copy(), err
        step = np.linalg.norm(new - a)
        a = new
        if step < opt.tol:
            converged = True
            break
        temp *= opt.anneal
        if opt.redraw_noise:
            z = rng.standard_normal(a.size)
    return best_a, best_err, converged, it


def train_boundary(points: DDPoints, opt: OptimizerConfig = OptimizerConfig()) -> TrainedBoundary:
    """Fit a monotone boundary through the origin to labelled DD points.

    Each restart starts from ``a = 0`` (the diagonal) and follows
    ``a <- a - lr * grad + sqrt(lr * T) * Z`` with ``T <- anneal * T`` until the
    coefficient change falls below ``tol``. The coefficients with the lowest
    hard training error over all iterates, restarts and the diagonal itself
    are returned.
    """
    if points.labels is None or np.unique(points.labels).size < 2:
        raise ValueError("training needs labelled points from both groups")
    streams = np.random.SeedSequence(opt.seed).spawn(opt.restarts)
    best = np.zeros(opt.degree + 1)
    best_err = misclassification_rate(points, BoundaryFunction(best))
    any_converged = False
    total_iter = 0
    history = []
    for ss in streams:
        a, err, conv, it = _anneal_run(points, opt, np.random.Generator(np.random.Philox(ss)))
        history.append((err, conv, it))
        any_converged |= conv
        total_iter += it
        if err < best_err:
            best, best_err = a, err
    if not any_converged:
        log.warning("boundary search hit max_iter=%d without meeting tol=%g",
                    opt.max_iter, opt.tol)
    return TrainedBoundary(BoundaryFunction(best), best_err, any_converged, total_iter, history)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


def classify_md(points: DDPoints) -> np.ndarray:
    """Maximum-depth rule: the diagonal boundary."""
    return classify_points(points, BoundaryFunction.identity())


def bin_counts(trains: Sequence[SpikeTrain], n_bins: int = 10) -> np.ndarray:
    trains = list(trains)
    d = trains[0].domain
    edges = np.linspace(d.t_start, d.t_end, n_bins + 1)
    return np.array([np.histogram(tr.times, edges)[0] for tr in trains], dtype=float)


@dataclass
class BinnedGaussian:
    """Independent Gaussian over per-bin spike counts."""

    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def fit(cls, trains, n_bins: int = 10, var_floor: float = 1e-6) -> "BinnedGaussian":
        x = bin_counts(trains, n_bins)
        return cls(x.mean(axis=0), np.maximum(x.var(axis=0), var_floor))

    def loglik(self, x: np.ndarray) -> np.ndarray:
        return -0.5 * np.sum(np.log(2 * np.pi * self.var) + (x - self.mean) ** 2 / self.var,
                             axis=1)


def classify_lm(trains: Sequence[SpikeTrain], lf: BinnedGaussian, lg: BinnedGaussian,
                fallback: np.ndarray) -> np.ndarray:
    x = bin_counts(trains, lf.mean.size)
    a, b = lf.loglik(x), lg.loglik(x)
    return np.where(a > b, F, np.where(b > a, G, fallback))


def classify_mm2(trains: Sequence[SpikeTrain], med_f: SpikeTrain, med_g: SpikeTrain,
                 mu: float, fallback: np.ndarray) -> np.ndarray:
    """Nearest group median under the elastic distance."""
    df = np.array([d_mu(tr, med_f, mu) for tr in trains])
    dg = np.array([d_mu(tr, med_g, mu) for tr in trains])
    return np.where(df < dg, F, np.where(dg < df, G, fallback))


def group_medians(f_sample: TrainSample, g_sample: TrainSample, gf: GroupModel,
                  gg: GroupModel, cfg: DepthConfig = DepthConfig()):
    mf = estimate_median(f_sample, gf.intensity, gf.cardinality, cfg).median
    mg = estimate_median(g_sample, gg.intensity, gg.cardinality, cfg).median
    return mf, mg


# ---------------------------------------------------------------------------
# multivariate illustration
# ---------------------------------------------------------------------------


@dataclass
class MahalanobisDepth:
    """``1 / (1 + (x - m)' S^{-1} (x - m))`` with sample mean and covariance."""

    mean: np.ndarray
    cov_inv: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "MahalanobisDepth":
        x = np.asarray(x, dtype=float)
        return cls(x.mean(axis=0), np.linalg.inv(np.cov(x, rowvar=False)))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        dev = np.asarray(x, dtype=float) - self.mean
        return 1.0 / (1.0 + np.einsum("ij,jk,ik->i", dev, self.cov_inv, dev))


def mahalanobis_dd(x: np.ndarray, depth_f: MahalanobisDepth, depth_g: MahalanobisDepth,
                   labels=None) -> DDPoints:
    n = len(x)
    lab = None if labels is None else np.asarray(labels, dtype=int)
    return DDPoints(depth_f(x), depth_g(x), np.zeros(n, dtype=int),
                    np.full(n, F, dtype=int), lab)


# ---------------------------------------------------------------------------
# full classifier set
# ---------------------------------------------------------------------------

DD, MD, LM, MM2, IA = "DD", "MD", "LM", "MM2", "IA"
METHODS = (DD, MD, LM, MM2, IA)


def remove_outliers(sample: TrainSample, kind: str = KERNEL, delta: float = 0.01,
                    cfg: DepthConfig = DepthConfig(), n_mc: int = 100_000, seed: int = 0,
                    cache=None):
    """Drop the trains flagged as outliers against a model fitted to ``sample``.

    Returns the cleaned sample and the number of removed trains. The sample
    is returned unchanged if every train would be removed.
    """
    from .outlier import detect_outliers

    g = fit_group(sample, kind, seed)
    rep = detect_outliers(sample, g.intensity, g.cardinality, cfg, delta, n_mc, seed,
                          cache=cache)
    keep = np.flatnonzero(~rep.flags)
    if keep.size == 0:
        return sample, 0
    return sample.subset(keep), int(rep.n_flagged)


@dataclass(frozen=True)
class ClassifierConfig:
    """What to fit: intensity kinds per group, depth/boundary settings and baselines."""

    f_kind: str = KERNEL
    g_kind: str = KERNEL
    depth: DepthConfig = DepthConfig()
    optimizer: OptimizerConfig = OptimizerConfig()
    mu: float = 20.0
    lm_bins: int = 10
    lm_var_floor: float = 1e-6
    methods: tuple = (DD, MD, LM, MM2)
    seed: int = 0

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown classifier(s) {bad}; choose from {list(METHODS)}")
        if self.lm_bins < 1 or self.mu < 0:
            raise ValueError("lm_bins must be >= 1 and mu >= 0")


class ClassifierSet:
    """Every requested classifier trained on one pair of labelled groups."""

    def __init__(self, f_sample: TrainSample, g_sample: TrainSample,
                 cfg: ClassifierConfig = ClassifierConfig()):
        self.cfg = cfg
        self.gf = fit_group(f_sample, cfg.f_kind, cfg.seed)
        self.gg = fit_group(g_sample, cfg.g_kind, cfg.seed)
        self.train_points = dd_plot_groups(f_sample, g_sample, self.gf, self.gg, cfg.depth)
        self.boundary: Optional[TrainedBoundary] = None
        both_kernel = cfg.f_kind == KERNEL and cfg.g_kind == KERNEL
        if DD in cfg.methods or (IA in cfg.methods and both_kernel):
            self.boundary = train_boundary(self.train_points, cfg.optimizer)
        if LM in cfg.methods:
            self.lm = (BinnedGaussian.fit(f_sample, cfg.lm_bins, cfg.lm_var_floor),
                       BinnedGaussian.fit(g_sample, cfg.lm_bins, cfg.lm_var_floor))
        if MM2 in cfg.methods:
            self.medians = group_medians(f_sample, g_sample, self.gf, self.gg, cfg.depth)
        self.ia = None
        if IA in cfg.methods:
            if both_kernel:
                self.ia = self
            else:
                self.ia = ClassifierSet(f_sample, g_sample, ClassifierConfig(
                    KERNEL, KERNEL, cfg.depth, cfg.optimizer, cfg.mu, cfg.lm_bins,
                    cfg.lm_var_floor, (DD,), cfg.seed))

    def points(self, trains: Sequence[SpikeTrain], labels=None) -> DDPoints:
        return dd_plot(trains, self.gf, self.gg, self.cfg.depth, labels)

    def predict(self, trains: Sequence[SpikeTrain], method: str = DD,
                points: Optional[DDPoints] = None) -> np.ndarray:
        if method not in self.cfg.methods:
            raise ValueError(f"classifier {method} was not fitted")
        trains = list(trains)
        if method == IA and self.ia is not self:
            return self.ia.predict(trains, DD)
        if points is None and method in (DD, MD, IA):
            points = self.points(trains)
        fallback = fallback_labels([tr.k for tr in trains], self.gf.mean_count,
                                   self.gg.mean_count)
        if method in (DD, IA):
            return classify_points(points, self.boundary.boundary)
        if method == MD:
            return classify_md(points)
        if method == LM:
            return classify_lm(trains, *self.lm, fallback)
        return classify_mm2(trains, *self.medians, self.cfg.mu, fallback)

    def errors(self, f_test: TrainSample, g_test: TrainSample) -> dict:
        """Test misclassification rate of every fitted classifier."""
        trains = list(f_test) + list(g_test)
        labels = np.r_[np.full(len(f_test), F), np.full(len(g_test), G)]
        pts = self.points(trains, labels)
        out = {}
        for m in self.cfg.methods:
            pred = self.predict(trains, m, pts if m in (DD, MD, IA) else None)
            out[m] = float(np.mean(pred != labels))
        return out
