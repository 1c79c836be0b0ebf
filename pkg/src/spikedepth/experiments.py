"""Repeated simulation studies with deterministic aggregation.

Every repetition derives its seeds from ``(spec.seed, rep, role)``, so a
repetition's result does not depend on which worker ran it or in which
order. Repetitions can be spread over processes by setting
``SPIKEDEPTH_WORKERS``; results are always reduced in repetition order.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import scenarios as sc
from .core import UNIT
from .ddclass import (DD, IA, IMI, KERNEL, LM, MD, MM2, BoundaryFunction, ClassifierConfig,
                      ClassifierSet, MahalanobisDepth, OptimizerConfig, mahalanobis_dd,
                      misclassification_rate, remove_outliers, train_boundary)
from .depth import DepthConfig
from .intensity import Constant, cumulative, estimate_intensity_imi, estimate_intensity_kernel
from .median import estimate_median
from .outlier import DEFAULT_NMC, ThresholdCache, detect_outliers
from .simulate import sample_hawkes, sample_hpp, sample_ipp
from .trainio import write_csv, write_json

log = logging.getLogger(__name__)

WORKERS_ENV = "SPIKEDEPTH_WORKERS"

MEDIAN_EXPERIMENTS = ("sim1", "sim2")
OUTLIER_EXPERIMENTS = ("sim3", "sim4", "sim5")
CLASS_EXPERIMENTS = ("class-hpp-ipp", "class-ipp-hawkes")
EXPERIMENTS = MEDIAN_EXPERIMENTS + OUTLIER_EXPERIMENTS + CLASS_EXPERIMENTS + ("dd-gauss",)

GAUSS_MEANS = (np.zeros(2), np.ones(2))
GAUSS_COVS = (np.array([[1.0, 1.0], [1.0, 4.0]]), np.array([[0.25, 0.25], [0.25, 1.0]]))


@dataclass(frozen=True)
class ExperimentSpec:
    """One reproducible study.

    ``degree`` is the boundary polynomial degree (5 for spike trains and 2 for
    the Gaussian illustration when left as ``None``). ``remove_outliers``
    adds a second pass of every classifier trained on outlier-cleaned groups.
    """

    experiment: str
    reps: int = 20
    seed: int = 0
    deltas: Tuple[float, ...] = (0.001, 0.005, 0.01)
    r: float = 1.0
    mu: float = 20.0
    degree: Optional[int] = None
    n_mc: int = DEFAULT_NMC
    remove_outliers: Optional[float] = None
    n_train: Optional[int] = None
    n_test: Optional[int] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.deltas or any(not 0 < d < 1 for d in self.deltas):
            raise ValueError("every delta must lie in (0, 1)")
        if self.r <= 0 or self.mu < 0 or self.n_mc < 1:
            raise ValueError("need r > 0, mu >= 0 and n_mc >= 1")
        if self.remove_outliers is not None and not 0 < self.remove_outliers < 1:
            raise ValueError("remove_outliers must lie in (0, 1)")
        if self.degree is not None and self.degree < 0:
            raise ValueError("degree must be non-negative")
        for n in (self.n_train, self.n_test):
            if n is not None and n < 2:
                raise ValueError("sample sizes must be at least 2")

    @property
    def boundary_degree(self) -> int:
        if self.degree is not None:
            return self.degree
        return 2 if self.experiment == "dd-gauss" else 5

    def to_dict(self) -> dict:
        d = asdict(self)
        d["deltas"] = list(self.deltas)
        return d


@dataclass
class RepResult:
    row: Dict[str, float]
    extra: Dict[str, list] = field(default_factory=dict)


@lru_cache(maxsize=None)
def _cache(delta: float, n_mc: int, seed: int) -> ThresholdCache:
    return ThresholdCache(delta, n_mc, seed)


# ---------------------------------------------------------------------------
# single repetitions
# ---------------------------------------------------------------------------


def _median_rep(spec: ExperimentSpec, rep: int) -> RepResult:
    n = spec.n_train or 500
    base_seed = sc.derive_seed(spec.seed, rep, sc.BASE)
    if spec.experiment == "sim1":
        base, truth = sc.sim1_sample(n, base_seed), Constant(10.0)
    else:
        base, truth = sc.sim2_sample(n, base_seed), sc.sine_curve()
    n_out = max(1, int(round(0.02 * n)))
    out = sc.early_burst_outliers(n_out, sc.derive_seed(spec.seed, rep, sc.OUTLIER))
    cont, _ = sc.contaminated(base, out)
    cfg = DepthConfig(r=spec.r)
    clean = estimate_median(base, estimate_intensity_kernel(base), cfg=cfg)
    dirty = estimate_median(cont, estimate_intensity_kernel(cont), cfg=cfg)
    k = clean.cardinality
    true_ci = cumulative(truth)
    ideal = true_ci.inverse(np.arange(1, k + 1) * true_ci.total / (k + 1)) if k else np.empty(0)
    row = {"k_clean": k, "k_contaminated": dirty.cardinality,
           "max_error_vs_truth": float(np.max(np.abs(clean.median.times - ideal)))
           if k else 0.0}
    if dirty.cardinality == k and k:
        row["max_shift"] = float(np.max(np.abs(dirty.median.times - clean.median.times)))
    else:
        row["max_shift"] = float("nan") if k else 0.0
    return RepResult(row, {"clean": clean.median.times.tolist(),
                           "contaminated": dirty.median.times.tolist()})


def _outlier_rep(spec: ExperimentSpec, rep: int) -> RepResult:
    n = spec.n_train or 1000
    sample, truth = sc.outlier_sample(spec.experiment, rep, spec.seed, n=n)
    if spec.experiment == "sim5":
        model = estimate_intensity_imi(sample, seed=sc.derive_seed(spec.seed, rep, sc.FIT))
    else:
        model = estimate_intensity_kernel(sample)
    cfg = DepthConfig(r=spec.r)
    row = {}
    for delta in spec.deltas:
        rep_ = detect_outliers(sample, model, cfg=cfg, delta=delta, n_mc=spec.n_mc,
                               seed=spec.seed, truth=truth,
                               cache=_cache(delta, spec.n_mc, spec.seed))
        tag = f"d{delta:g}"
        row.update({f"precision_{tag}": rep_.precision, f"recall_{tag}": rep_.recall,
                    f"f1_{tag}": rep_.f1, f"flagged_{tag}": rep_.n_flagged})
    return RepResult(row)


def _class_samples(spec: ExperimentSpec, rep: int):
    n_tr = spec.n_train or 500
    n_te = spec.n_test or 1000
    seeds = [sc.derive_seed(spec.seed, rep, role)
             for role in (sc.TRAIN_F, sc.TRAIN_G, sc.TEST_F, sc.TEST_G)]
    if spec.experiment == "class-hpp-ipp":
        par = sc.parabola_curve()
        return (sample_hpp(8.0, UNIT, n_tr, seeds[0]), sample_ipp(par, n_tr, seeds[1]),
                sample_hpp(8.0, UNIT, n_te, seeds[2]), sample_ipp(par, n_te, seeds[3]))
    bim, hk = sc.bimodal_curve(), sc.hawkes_model()
    return (sample_ipp(bim, n_tr, seeds[0]), sample_hawkes(hk, n_tr, seeds[1]),
            sample_ipp(bim, n_te, seeds[2]), sample_hawkes(hk, n_te, seeds[3]))


def _class_rep(spec: ExperimentSpec, rep: int) -> RepResult:
    tr_f, tr_g, te_f, te_g = _class_samples(spec, rep)
    hawkes = spec.experiment == "class-ipp-hawkes"
    methods = (DD, MD, LM, MM2, IA) if hawkes else (DD, MD, LM, MM2)
    cfg = ClassifierConfig(
        f_kind=KERNEL, g_kind=IMI if hawkes else KERNEL, depth=DepthConfig(r=spec.r),
        optimizer=OptimizerConfig(degree=spec.boundary_degree,
                                  seed=sc.derive_seed(spec.seed, rep, sc.BOUNDARY)),
        mu=spec.mu, methods=methods, seed=sc.derive_seed(spec.seed, rep, sc.FIT))
    suite = ClassifierSet(tr_f, tr_g, cfg)
    row = suite.errors(te_f, te_g)
    extra = {}
    if rep == 0:
        extra["train_dd"] = [list(r) for r in suite.train_points.to_csv_rows()][1:]
        extra["boundary"] = np.column_stack(suite.boundary.boundary.samples()).tolist()
    if spec.remove_outliers is not None:
        delta = spec.remove_outliers
        cache = _cache(delta, spec.n_mc, spec.seed)
        clean_f, nf = remove_outliers(tr_f, KERNEL, delta, cfg.depth, spec.n_mc,
                                      cfg.seed, cache)
        clean_g, ng = remove_outliers(tr_g, cfg.g_kind, delta, cfg.depth, spec.n_mc,
                                      cfg.seed, cache)
        cleaned = ClassifierSet(clean_f, clean_g, cfg).errors(te_f, te_g)
        row.update({f"{m}_removed": v for m, v in cleaned.items()})
        row.update(removed_F=nf, removed_G=ng)
    return RepResult(row, extra)


def gauss_samples(rng: np.random.Generator, n: int):
    return tuple(rng.multivariate_normal(m, c, n) for m, c in zip(GAUSS_MEANS, GAUSS_COVS))


def _gauss_rep(spec: ExperimentSpec, rep: int) -> RepResult:
    rng = np.random.Generator(np.random.Philox(sc.derive_seed(spec.seed, rep, sc.BASE)))
    n_tr = spec.n_train or 200
    n_te = spec.n_test or 500
    x_f, x_g = gauss_samples(rng, n_tr)
    y_f, y_g = gauss_samples(rng, n_te)
    dep_f, dep_g = MahalanobisDepth.fit(x_f), MahalanobisDepth.fit(x_g)
    lab_tr = np.r_[np.zeros(n_tr, int), np.ones(n_tr, int)]
    lab_te = np.r_[np.zeros(n_te, int), np.ones(n_te, int)]
    train = mahalanobis_dd(np.r_[x_f, x_g], dep_f, dep_g, lab_tr)
    test = mahalanobis_dd(np.r_[y_f, y_g], dep_f, dep_g, lab_te)
    fit = train_boundary(train, OptimizerConfig(
        degree=spec.boundary_degree, seed=sc.derive_seed(spec.seed, rep, sc.BOUNDARY)))
    row = {DD: misclassification_rate(test, fit.boundary),
           MD: misclassification_rate(test, BoundaryFunction.identity()),
           "DD_train": fit.train_error}
    return RepResult(row)


_RUNNERS = {**{e: _median_rep for e in MEDIAN_EXPERIMENTS},
            **{e: _outlier_rep for e in OUTLIER_EXPERIMENTS},
            **{e: _class_rep for e in CLASS_EXPERIMENTS},
            "dd-gauss": _gauss_rep}


def run_rep(spec: ExperimentSpec, rep: int) -> RepResult:
    return _RUNNERS[spec.experiment](spec, rep)


def _run_rep_packed(args):
    return run_rep(*args)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    reps: List[RepResult]

    @property
    def columns(self) -> List[str]:
        cols: List[str] = []
        for r in self.reps:
            cols += [c for c in r.row if c not in cols]
        return cols

    def column(self, name: str) -> np.ndarray:
        return np.array([r.row.get(name, np.nan) for r in self.reps], dtype=float)

    def summary(self) -> Dict[str, Dict[str, float]]:
        out = {}
        for c in self.columns:
            v = self.column(c)
            v = v[~np.isnan(v)]
            if v.size == 0:
                out[c] = {"mean": float("nan"), "sd": float("nan"), "median": float("nan"),
                          "n": 0}
                continue
            out[c] = {"mean": float(v.mean()),
                      "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                      "median": float(np.median(v)), "n": int(v.size)}
        return out

    def rep_rows(self):
        cols = self.columns
        yield ["rep"] + cols
        for i, r in enumerate(self.reps):
            yield [i] + [_cell(r.row.get(c, float("nan"))) for c in cols]

    def summary_rows(self):
        yield ["metric", "mean", "sd", "median", "n"]
        for c, s in self.summary().items():
            yield [c, _cell(s["mean"]), _cell(s["sd"]), _cell(s["median"]), s["n"]]

    def write(self, out_dir) -> Dict[str, Path]:
        """Write per-repetition and summary tables, plot-ready extras and a JSON sidecar."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = self.spec.experiment
        paths = {"reps": out / f"{name}_reps.csv", "summary": out / f"{name}_summary.csv",
                 "meta": out / f"{name}.json"}
        write_csv(paths["reps"], self.rep_rows())
        write_csv(paths["summary"], self.summary_rows())
        extras = self._extra_tables()
        for key, rows in extras.items():
            paths[key] = out / f"{name}_{key}.csv"
            write_csv(paths[key], rows)
        write_json(paths["meta"], {
            "spec": self.spec.to_dict(),
            "rep_seeds": [sc.derive_seed(self.spec.seed, i) for i in range(self.spec.reps)],
            "summary": self.summary(),
            "files": {k: p.name for k, p in paths.items() if k != "meta"}})
        return paths

    def _extra_tables(self) -> Dict[str, list]:
        tables: Dict[str, list] = {}
        first = self.reps[0].extra
        if "clean" in first:
            rows = [["rep", "sample", "index", "time"]]
            for i, r in enumerate(self.reps):
                for which in ("clean", "contaminated"):
                    rows += [[i, which, j, _cell(t)] for j, t in enumerate(r.extra[which])]
            tables["medians"] = rows
        if "train_dd" in first:
            tables["dd_points"] = [["index", "d_F", "d_G", "k", "label"]] + first["train_dd"]
            tables["boundary"] = [["t", "f"]] + [[_cell(a), _cell(b)]
                                                 for a, b in first["boundary"]]
        return tables


def _cell(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> ExperimentResult:
    workers = worker_count() if workers is None else max(1, workers)
    jobs = [(spec, i) for i in range(spec.reps)]
    if workers == 1 or spec.reps == 1:
        reps = [run_rep(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, spec.reps)) as pool:
            reps = list(pool.map(_run_rep_packed, jobs))
    return ExperimentResult(spec, reps)

