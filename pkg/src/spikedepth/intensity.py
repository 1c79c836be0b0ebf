"""Intensity models, cumulative intensities and intensity estimation.

Four model families are supported:

* :class:`Constant` -- homogeneous Poisson rate.
* :class:`Curve` -- deterministic rate tabulated on a dense uniform grid.
* :class:`Hawkes` -- exponential-kernel self-exciting process on top of a
  history-free baseline.
* :class:`IMIGrid` -- inhomogeneous Markov interval model
  ``lambda(t | H_t) = lambda_1(t) * g(t - t_last)``.

``cumulative(model, train)`` returns a :class:`CumulativeIntensity` which can be
evaluated, inverted and used for time rescaling. For history-dependent models
the cumulative intensity is specific to one train's own event history.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, linalg, ndimage, optimize

from .core import SpikeTrain, TimeDomain, TrainSample, UNIT, isi_vector

CURVE_POINTS = 10001
RATE_FLOOR_FRACTION = 1e-6
IMI_GRID = 200

# Gauss-Legendre nodes used for segment integrals of IMI models.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    rate: float
    domain: TimeDomain = UNIT

    def __post_init__(self):
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"constant rate must be positive, got {self.rate}")

    history_dependent = False

    def intensity(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.rate)

    def scaled(self, factor: float) -> "Constant":
        return Constant(self.rate * factor, self.domain)

    @property
    def max_rate(self) -> float:
        return self.rate

    @property
    def total(self) -> float:
        return self.rate * self.domain.length


@dataclass(frozen=True, eq=False)
class Curve:
    """Deterministic intensity tabulated on a strictly increasing grid.

    The grid must start at ``domain.t_start`` and end at ``domain.t_end``.
    Between grid points the rate is linearly interpolated. The cumulative
    table uses Simpson's rule and is evaluated between nodes with a
    monotone cubic Hermite interpolant whose node slopes are the rates.
    """

    grid: np.ndarray
    values: np.ndarray
    domain: TimeDomain = UNIT

    history_dependent = False

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 3:
            raise ValueError("curve grid and values must be 1-d of equal length >= 3")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("curve grid must be strictly increasing")
        if not (np.isclose(grid[0], self.domain.t_start, rtol=0, atol=1e-12)
                and np.isclose(grid[-1], self.domain.t_end, rtol=0, atol=1e-12)):
            raise ValueError("curve grid must cover the full time domain")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("curve rates must be finite and non-negative")
        grid = grid.copy()
        grid[0], grid[-1] = self.domain.t_start, self.domain.t_end
        grid.setflags(write=False)
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn: Callable, domain: TimeDomain = UNIT,
                      n: int = CURVE_POINTS) -> "Curve":
        grid = np.linspace(domain.t_start, domain.t_end, n)
        return cls(grid, np.asarray(fn(grid), dtype=float), domain)

    def intensity(self, t):
        return np.interp(t, self.grid, self.values)

    def scaled(self, factor: float) -> "Curve":
        return Curve(self.grid, self.values * factor, self.domain)

    @property
    def max_rate(self) -> float:
        return float(self.values.max())

    @cached_property
    def _table(self) -> "CurveCumulative":
        return CurveCumulative(self)

    @property
    def total(self) -> float:
        return self._table.total


@dataclass(frozen=True)
class Hawkes:
    """``lambda*(t | H_t) = base(t) + sum_{t_i < t} alpha * exp(-beta (t - t_i))``."""

    base: Union[Constant, Curve]
    alpha: float
    beta: float

    history_dependent = True

    def __post_init__(self):
        if not isinstance(self.base, (Constant, Curve)):
            raise TypeError("Hawkes baseline must be a Constant or Curve")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Hawkes alpha and beta must be positive")
        if not self.alpha < self.beta:
            raise ValueError("Hawkes process requires alpha < beta for stationarity")

    @property
    def domain(self) -> TimeDomain:
        return self.base.domain

    def intensity(self, t, history):
        t = np.asarray(t, dtype=float)
        history = np.asarray(history, dtype=float)
        lag = t[..., None] - history
        excite = np.where(lag > 0, self.alpha * np.exp(-self.beta * np.where(lag > 0, lag, 0.0)), 0.0)
        return self.base.intensity(t) + excite.sum(axis=-1)


@dataclass(frozen=True, eq=False)
class IMIGrid:
    """Multiplicative inhomogeneous Markov interval model.

    The conditional rate is ``marginal(t) * lag_factor(t - t_last)``, where
    ``t_last`` is the most recent event before ``t`` (``t_start`` when there is
    none). ``lag_factor`` is tabulated on ``lag_grid`` and already includes the
    global normalisation constant.
    """

    marginal: Curve
    lag_grid: np.ndarray
    lag_factor: np.ndarray

    history_dependent = True

    def __post_init__(self):
        lag_grid = np.asarray(self.lag_grid, dtype=float)
        lag_factor = np.asarray(self.lag_factor, dtype=float)
        if lag_grid.shape != lag_factor.shape or lag_grid.ndim != 1:
            raise ValueError("lag grid and factor must be 1-d of equal length")
        if np.any(np.diff(lag_grid) <= 0) or lag_grid[0] != 0:
            raise ValueError("lag grid must start at 0 and increase strictly")
        if not np.all(np.isfinite(lag_factor)) or np.any(lag_factor <= 0):
            raise ValueError("lag factor must be finite and positive")
        object.__setattr__(self, "lag_grid", lag_grid)
        object.__setattr__(self, "lag_factor", lag_factor)

    @property
    def domain(self) -> TimeDomain:
        return self.marginal.domain

    def lag_rate(self, lag):
        return np.interp(lag, self.lag_grid, self.lag_factor)

    def intensity(self, t, history):
        t = np.asarray(t, dtype=float)
        history = np.asarray(history, dtype=float)
        padded = np.concatenate(([self.domain.t_start], history))
        last = padded[np.searchsorted(history, t, side="left")]
        return self.marginal.intensity(t) * self.lag_rate(t - last)

    def rate_grid(self, n_t: int = IMI_GRID) -> tuple:
        """Tabulate the conditional rate on an ``n_t`` x ``len(lag_grid)`` grid."""
        d = self.domain
        t = np.linspace(d.t_start, d.t_end, n_t)
        return t, self.lag_grid, np.outer(self.marginal.intensity(t), self.lag_factor)


IntensityModel = Union[Constant, Curve, Hawkes, IMIGrid]


# ---------------------------------------------------------------------------
# cumulative intensities
# ---------------------------------------------------------------------------


class CumulativeIntensity:
    """Base class: ``Lambda(t) = int_{T1}^t lambda(u | H_u) du`` on one domain."""

    domain: TimeDomain
    total: float

    def __call__(self, t):
        raise NotImplementedError

    def inverse(self, y):
        raise NotImplementedError

    def _check_range(self, y):
        y = np.asarray(y, dtype=float)
        tol = 1e-12 * max(self.total, 1.0)
        if np.any(y < -tol) or np.any(y > self.total + tol):
            raise ValueError(f"value outside cumulative range [0, {self.total}]")
        return np.clip(y, 0.0, self.total)


class LinearCumulative(CumulativeIntensity):
    def __init__(self, rate: float, domain: TimeDomain):
        self.rate = rate
        self.domain = domain
        self.total = rate * domain.length

    def __call__(self, t):
        return self.rate * (np.asarray(t, dtype=float) - self.domain.t_start)

    def inverse(self, y):
        y = self._check_range(y)
        return np.minimum(self.domain.t_start + y / self.rate, self.domain.t_end)


class CurveCumulative(CumulativeIntensity):
    def __init__(self, curve: Curve):
        x, lam = curve.grid, curve.values
        self.domain = curve.domain
        self._x = x
        table = np.concatenate(([0.0], integrate.cumulative_simpson(lam, x=x)))
        table = np.maximum.accumulate(np.maximum(table, 0.0))
        self._table = table
        self.total = float(table[-1])
        h = np.diff(x)
        secant = np.diff(table) / h
        # Fritsch-Carlson clip keeps the Hermite interpolant monotone.
        d = lam.astype(float).copy()
        left = np.concatenate(([np.inf], secant))
        right = np.concatenate((secant, [np.inf]))
        d = np.minimum(d, 3.0 * np.minimum(left, right))
        self._d = d
        self._h = h

    def _cell(self, t):
        j = np.searchsorted(self._x, t, side="right") - 1
        return np.clip(j, 0, self._x.size - 2)

    def _hermite(self, j, s):
        h = self._h[j]
        y0, y1 = self._table[j], self._table[j + 1]
        d0, d1 = self._d[j] * h, self._d[j + 1] * h
        s2, s3 = s * s, s * s * s
        return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0
                + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1)

    def _hermite_slope(self, j, s):
        h = self._h[j]
        y0, y1 = self._table[j], self._table[j + 1]
        d0, d1 = self._d[j] * h, self._d[j + 1] * h
        s2 = s * s
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * d0
                + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * d1)

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), self.domain.t_start, self.domain.t_end)
        j = self._cell(t)
        s = (t - self._x[j]) / self._h[j]
        return self._hermite(j, s)

    def inverse(self, y):
        y = self._check_range(y)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        j = np.clip(np.searchsorted(self._table, y, side="left") - 1, 0, self._x.size - 2)
        y0, y1 = self._table[j], self._table[j + 1]
        span = y1 - y0
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        s = np.where(span > 0, (y - y0) / np.where(span > 0, span, 1.0), 0.0)
        s = np.clip(s, 0.0, 1.0)
        # safeguarded Newton on the cell's cubic; bracket shrinks every step
        for _ in range(60):
            f = self._hermite(j, s) - y
            lo = np.where(f < 0, s, lo)
            hi = np.where(f >= 0, s, hi)
            df = self._hermite_slope(j, s)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = s - f / df
            bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
            new = np.where(bad, 0.5 * (lo + hi), step)
            if np.all(np.abs(new - s) < 1e-15):
                s = new
                break
            s = new
        t = self._x[j] + s * self._h[j]
        t = np.clip(t, self.domain.t_start, self.domain.t_end)
        return t[0] if scalar else t


class HawkesCumulative(CumulativeIntensity):
    """Exact compensator of an exponential Hawkes process for one history."""

    def __init__(self, model: Hawkes, history: np.ndarray):
        self.model = model
        self.domain = model.domain
        self.history = np.asarray(history, dtype=float)
        self._base = cumulative(model.base)
        self.total = float(self(self.domain.t_end))
        self._at_events = self(self.history) if self.history.size else np.empty(0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.model.alpha, self.model.beta
        lag = t[..., None] - self.history
        pos = lag > 0
        excite = np.where(pos, (a / b) * -np.expm1(-b * np.where(pos, lag, 0.0)), 0.0)
        return self._base(t) + excite.sum(axis=-1)

    def inverse(self, y):
        return _segment_inverse(self, y)


class IMICumulative(CumulativeIntensity):
    """Cumulative intensity of an :class:`IMIGrid` for one history.

    Each inter-event segment ``[a, b]`` contributes
    ``int_a^b marginal(u) * lag_factor(u - a) du``, computed by composite
    8-point Gauss-Legendre quadrature.
    """

    def __init__(self, model: IMIGrid, history: np.ndarray):
        self.model = model
        self.domain = d = model.domain
        self.history = np.asarray(history, dtype=float)
        self._max_width = d.length / IMI_GRID
        starts = np.concatenate(([d.t_start], self.history))
        ends = np.concatenate((self.history, [d.t_end]))
        seg = self._segment_integrals(starts, ends)
        self._starts = starts
        self._at_starts = np.concatenate(([0.0], np.cumsum(seg)[:-1]))
        self.total = float(np.sum(seg))
        self._at_events = self._at_starts[1:]

    def _segment_integrals(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        length = b - a
        n_sub = np.maximum(1, np.ceil(length / self._max_width).astype(int))
        rep = np.repeat(np.arange(a.size), n_sub)
        offsets = np.arange(rep.size) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub)
        w = (length / n_sub)[rep]
        left = a[rep] + offsets * w
        mid = left[:, None] + 0.5 * w[:, None] * (_GL_X + 1.0)
        lag = mid - a[rep][:, None]
        vals = self.model.marginal.intensity(mid) * self.model.lag_rate(lag)
        sub = 0.5 * w * (vals @ _GL_W)
        return np.bincount(rep, weights=sub, minlength=a.size)

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), self.domain.t_start, self.domain.t_end)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = np.searchsorted(self.history, t, side="left")
        a = self._starts[idx]
        out = self._at_starts[idx] + self._segment_integrals(a, t)
        return out[0] if scalar else out

    def inverse(self, y):
        return _segment_inverse(self, y)


def _segment_inverse(ci, y):
    """Invert a history-dependent cumulative by root finding per segment."""
    y = ci._check_range(y)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    d = ci.domain
    knots_t = np.concatenate(([d.t_start], ci.history, [d.t_end]))
    knots_y = np.concatenate(([0.0], ci._at_events, [ci.total]))
    out = np.empty_like(y)
    for n, target in enumerate(y):
        j = int(np.clip(np.searchsorted(knots_y, target, side="left") - 1, 0, knots_t.size - 2))
        lo, hi = knots_t[j], knots_t[j + 1]
        if target <= knots_y[j]:
            out[n] = lo
            continue
        if target >= knots_y[j + 1]:
            out[n] = hi
            continue
        out[n] = optimize.brentq(lambda s: float(ci(s)) - target, lo, hi,
                                 xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return out[0] if scalar else out


def cumulative(model: IntensityModel, train: Optional[SpikeTrain] = None) -> CumulativeIntensity:
    """Build ``Lambda`` for ``model``; history-dependent models need ``train``."""
    if train is not None and train.domain != model.domain:
        raise ValueError("train and model live on different time domains")
    if isinstance(model, Constant):
        return LinearCumulative(model.rate, model.domain)
    if isinstance(model, Curve):
        return model._table
    if train is None:
        raise ValueError(f"{type(model).__name__} cumulative intensity needs a train history")
    if isinstance(model, Hawkes):
        return HawkesCumulative(model, train.times)
    if isinstance(model, IMIGrid):
        return IMICumulative(model, train.times)
    raise TypeError(f"unknown intensity model {type(model).__name__}")


def inverse_cumulative(ci: CumulativeIntensity, y):
    return ci.inverse(y)


def rescaled_times(train: SpikeTrain, ci: CumulativeIntensity) -> np.ndarray:
    """``Lambda(s_i)`` for the events of ``train``."""
    if isinstance(ci, (HawkesCumulative, IMICumulative)):
        if ci.history.size == train.k and np.array_equal(ci.history, train.times):
            return np.asarray(ci._at_events, dtype=float)
    return np.asarray(ci(train.times), dtype=float).reshape(-1)


def time_rescale(train: SpikeTrain, ci: CumulativeIntensity) -> SpikeTrain:
    """Map events through ``Lambda``; the result lives on ``[0, Lambda(T2)]``."""
    return SpikeTrain(rescaled_times(train, ci), TimeDomain(0.0, ci.total))


def ilr_transform(isi) -> np.ndarray:
    """Isometric log-ratio coordinates of a positive composition.

    Uses the normalised Helmert basis, so for two parts ``(a, b)`` the single
    coordinate is ``log(a / b) / sqrt(2)``.
    """
    u = np.asarray(isi, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ValueError("ilr needs a composition with at least two parts")
    if np.any(u <= 0):
        raise ValueError("ilr is undefined for non-positive parts")
    clr = np.log(u) - np.mean(np.log(u))
    return linalg.helmert(u.size) @ clr


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------


def silverman_bandwidth(x: np.ndarray, span: float) -> float:
    """Silverman's rule of thumb; falls back to a uniform spread on ``span``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    spread = 0.0
    if n > 1:
        sd = float(np.std(x, ddof=1))
        q75, q25 = np.percentile(x, [75, 25])
        iqr = (q75 - q25) / 1.34
        spread = min(sd, iqr) if iqr > 0 else sd
    if spread <= 0:
        spread = span / np.sqrt(12.0)
    return 0.9 * spread * max(n, 1) ** -0.2


def _binned_smooth(x: np.ndarray, grid: np.ndarray, bandwidth: float,
                   weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Reflected Gaussian KDE on a uniform grid via linear binning.

    Returns counts per unit length (not normalised to a density).
    """
    n = grid.size
    dx = grid[1] - grid[0]
    pos = (x - grid[0]) / dx
    lo = np.clip(np.floor(pos).astype(int), 0, n - 2)
    frac = np.clip(pos - lo, 0.0, 1.0)
    w = np.ones_like(pos) if weights is None else weights
    binned = (np.bincount(lo, weights=w * (1 - frac), minlength=n)
              + np.bincount(lo + 1, weights=w * frac, minlength=n))
    # end bins only cover half a cell
    binned[0] *= 2.0
    binned[-1] *= 2.0
    sigma = bandwidth / dx
    return ndimage.gaussian_filter1d(binned / dx, sigma, mode="mirror", truncate=5.0)


def estimate_intensity_kernel(sample: TrainSample, bandwidth: Optional[float] = None,
                              n_grid: int = CURVE_POINTS) -> Curve:
    """Kernel estimate of a Poisson intensity from pooled spike times.

    The Gaussian kernel (Silverman bandwidth by default) is reflected at both
    window edges, and the curve is scaled so it integrates to the mean spike
    count of the sample. A floor of ``1e-6 * mean rate`` keeps the cumulative
    intensity strictly increasing.
    """
    d = sample.domain
    grid = np.linspace(d.t_start, d.t_end, n_grid)
    pooled = sample.pooled_times()
    if pooled.size == 0:
        floor = RATE_FLOOR_FRACTION / d.length
        return Curve(grid, np.full(n_grid, floor), d)
    h = silverman_bandwidth(pooled, d.length) if bandwidth is None else float(bandwidth)
    dens = _binned_smooth(pooled, grid, h)
    dens = np.maximum(dens, 0.0)
    mean_count = sample.mean_count
    floor = RATE_FLOOR_FRACTION * mean_count / d.length
    lam = np.maximum(dens * (mean_count / integrate.simpson(dens, x=grid)), floor)
    lam *= mean_count / integrate.simpson(lam, x=grid)
    return Curve(grid, lam, d)


def _intervals(sample: TrainSample):
    """Start, length and event flag of every inter-event interval.

    The first interval of a train starts at ``t_start``; the last one ends at
    ``t_end`` and is censored (no event).
    """
    d = sample.domain
    starts, lengths, events = [], [], []
    for tr in sample:
        st = np.concatenate(([d.t_start], tr.times))
        en = np.concatenate((tr.times, [d.t_end]))
        starts.append(st)
        lengths.append(en - st)
        ev = np.ones(st.size, dtype=bool)
        ev[-1] = False
        events.append(ev)
    return np.concatenate(starts), np.concatenate(lengths), np.concatenate(events)


def simulate_imi_counts(model: IMIGrid, n: int, rng: np.random.Generator,
                        dt: Optional[float] = None) -> np.ndarray:
    """Event counts of ``n`` trains simulated on a fine time grid.

    Sequential Bernoulli discretisation with step ``dt`` (default 1/2000 of the
    window); used for normalising fitted IMI models.
    """
    d = model.domain
    steps = 2000 if dt is None else int(np.ceil(d.length / dt))
    dt = d.length / steps
    t = d.t_start + (np.arange(steps) + 0.5) * dt
    base = model.marginal.intensity(t)
    last = np.full(n, d.t_start)
    counts = np.zeros(n, dtype=int)
    for j in range(steps):
        rate = base[j] * model.lag_rate(t[j] - last)
        fire = rng.random(n) < -np.expm1(-rate * dt)
        counts += fire
        last = np.where(fire, t[j], last)
    return counts


def estimate_intensity_imi(sample: TrainSample, n_lag: int = IMI_GRID,
                           n_sim: int = 4000, seed: int = 0,
                           bandwidth: Optional[float] = None) -> IMIGrid:
    """Fit ``lambda(t | H_t) = c * lambda_1(t) * g(t - t_last)`` to a sample.

    ``lambda_1`` is the kernel intensity of the pooled spikes. ``g`` is a
    smoothed ratio of interval-termination events to ``lambda_1``-weighted
    exposure at each lag, so it is close to 1 for Poisson data. The constant
    ``c`` is tuned until trains simulated from the model have the same mean
    count as the sample (within 1%).
    """
    d = sample.domain
    if sample.mean_count < 1:
        raise ValueError("IMI estimation needs a mean spike count of at least 1")
    marginal = estimate_intensity_kernel(sample)
    starts, lengths, events = _intervals(sample)

    n_fine = 4 * n_lag + 1
    lag_fine = np.linspace(0.0, d.length, n_fine)
    dl = lag_fine[1] - lag_fine[0]
    done = lengths[events]
    h = silverman_bandwidth(done, d.length) if bandwidth is None else float(bandwidth)
    h = max(h, 2 * dl)
    event_rate = _binned_smooth(done, lag_fine, h)

    # lambda_1-weighted exposure at every lag
    exposure = np.zeros(n_fine)
    chunk = 2048
    for i in range(0, starts.size, chunk):
        st = starts[i:i + chunk, None]
        ln = lengths[i:i + chunk, None]
        at = st + lag_fine
        mask = lag_fine <= ln
        exposure += np.where(mask, marginal.intensity(np.minimum(at, d.t_end)), 0.0).sum(axis=0)
    exposure = ndimage.gaussian_filter1d(exposure, h / dl, mode="mirror", truncate=5.0)

    reliable = exposure >= 0.02 * exposure.max()
    last_ok = int(np.nonzero(reliable)[0].max())
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(reliable, event_rate / exposure, np.nan)
    g[last_ok + 1:] = g[last_ok]
    g = np.nan_to_num(g, nan=1.0)
    g = np.maximum(g, RATE_FLOOR_FRACTION)

    lag_grid = np.linspace(0.0, d.length, n_lag)
    g_coarse = np.interp(lag_grid, lag_fine, g)

    target = sample.mean_count
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    scale = 1.0
    for _ in range(8):
        model = IMIGrid(marginal, lag_grid, g_coarse * scale)
        sim_mean = simulate_imi_counts(model, n_sim, rng).mean()
        if abs(sim_mean - target) <= 0.01 * target:
            break
        scale *= target / max(sim_mean, 1e-9)
    return IMIGrid(marginal, lag_grid, g_coarse * scale)


def history_free_marginal(model: IntensityModel) -> Union[Constant, Curve]:
    """History-free rate of a model: itself if Poisson, else the IMI marginal.

    A Hawkes baseline is not the marginal rate of the process, so Hawkes
    models are rejected; fit an IMI model to the data instead.
    """
    if isinstance(model, (Constant, Curve)):
        return model
    if isinstance(model, IMIGrid):
        return model.marginal
    raise ValueError(f"{type(model).__name__} has no history-free marginal; "
                     "estimate an IMI model from the sample")


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def model_to_dict(model: IntensityModel) -> dict:
    dom = [model.domain.t_start, model.domain.t_end]
    if isinstance(model, Constant):
        return {"type": "constant", "domain": dom, "rate": model.rate}
    if isinstance(model, Curve):
        return {"type": "curve", "domain": dom, "grid": model.grid.tolist(),
                "values": model.values.tolist()}
    if isinstance(model, Hawkes):
        return {"type": "hawkes", "domain": dom, "alpha": model.alpha,
                "beta": model.beta, "base": model_to_dict(model.base)}
    if isinstance(model, IMIGrid):
        return {"type": "imi", "domain": dom, "marginal": model_to_dict(model.marginal),
                "lag_grid": model.lag_grid.tolist(),
                "lag_factor": model.lag_factor.tolist()}
    raise TypeError(f"unknown intensity model {type(model).__name__}")


def model_from_dict(doc: dict) -> IntensityModel:
    kind = doc.get("type")
    dom = TimeDomain(*doc["domain"])
    if kind == "constant":
        return Constant(float(doc["rate"]), dom)
    if kind == "curve":
        return Curve(np.array(doc["grid"]), np.array(doc["values"]), dom)
    if kind == "hawkes":
        return Hawkes(model_from_dict(doc["base"]), float(doc["alpha"]), float(doc["beta"]))
    if kind == "imi":
        return IMIGrid(model_from_dict(doc["marginal"]), np.array(doc["lag_grid"]),
                       np.array(doc["lag_factor"]))
    raise ValueError(f"unknown model type {kind!r}")
