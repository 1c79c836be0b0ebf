"""Command-line entry point: ``spikedepth <command> ...``.

Exit status is 0 on success, 2 for invalid input or arguments and 3 when a
numerical routine fails.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import scenarios as sc
from .core import TimeDomain, TrainSample
from .ddclass import (IMI, KERNEL, METHODS, ClassifierConfig, ClassifierSet, OptimizerConfig,
                      remove_outliers)
from .depth import ILR, SIMPLIFIED, CardinalityModel, DepthConfig, depth
from .experiments import (CLASS_EXPERIMENTS, EXPERIMENTS, OUTLIER_EXPERIMENTS,
                          ExperimentSpec, run_experiment)
from .intensity import (Constant, Curve, Hawkes, estimate_intensity_imi,
                        estimate_intensity_kernel, model_from_dict, model_to_dict)
from .median import estimate_median
from .outlier import DEFAULT_NMC, detect_outliers
from .simulate import sample
from .trainio import read_json, read_trains, split_groups, write_csv, write_json, write_trains

log = logging.getLogger("spikedepth")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

NAMED_RATES = {"sine": sc.sine_rate, "parabola": sc.parabola_rate,
               "bimodal": sc.bimodal_rate, "trimodal": sc.trimodal_rate}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _load(path) -> TrainSample:
    loaded = read_trains(path)
    if loaded.perturbed:
        log.warning("%s: shifted %d tied spike time(s) by 1e-9", path, loaded.perturbed)
    return loaded.sample


def _fit_model(spec: str, fit_sample: TrainSample, seed: int):
    """``kernel``, ``imi`` or a path to a model JSON file."""
    if spec == KERNEL:
        return estimate_intensity_kernel(fit_sample)
    if spec == IMI:
        return estimate_intensity_imi(fit_sample, seed=seed)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--model must be 'kernel', 'imi' or an existing JSON file: {spec}")
    return model_from_dict(read_json(path))


def _depth_cfg(args) -> DepthConfig:
    return DepthConfig(r=args.r, variant=args.variant)


def _add_depth_args(p):
    p.add_argument("--r", type=float, default=1.0, help="exponent of the cardinality weight")
    p.add_argument("--variant", choices=[ILR, SIMPLIFIED], default=ILR)


def _add_model_args(p):
    p.add_argument("--model", default=KERNEL,
                   help="'kernel', 'imi' or a model JSON file (default: kernel)")
    p.add_argument("--reference", type=Path,
                   help="train file used to fit the model and cardinalities "
                        "(default: the input itself)")
    p.add_argument("--save-model", type=Path, help="write the fitted model as JSON")
    p.add_argument("--seed", type=int, default=0)


def _model_and_cm(args, trains: TrainSample):
    ref = _load(args.reference) if args.reference else trains
    model = _fit_model(args.model, ref, args.seed)
    if args.save_model:
        write_json(args.save_model, model_to_dict(model))
    return model, CardinalityModel.from_sample(ref)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    dom = TimeDomain(*args.domain)
    if args.process == "hpp":
        model = Constant(args.rate, dom)
    else:
        if args.model_file:
            base = model_from_dict(read_json(args.model_file))
        elif args.intensity:
            if (dom.t_start, dom.t_end) != (0.0, 1.0):
                raise UsageError("named intensities are defined on the unit domain")
            base = Curve.from_function(NAMED_RATES[args.intensity], dom)
        else:
            raise UsageError(f"{args.process} needs --intensity or --model-file")
        if args.process == "hawkes":
            model = Hawkes(base, args.alpha, args.beta)
        elif isinstance(base, (Constant, Curve)):
            model = base
        else:
            raise UsageError("an ipp needs a constant or curve model")
    out = sample(model, args.n, args.seed)
    if args.label is not None:
        out = out.with_labels(args.label)
    write_trains(args.output, out)
    log.info("wrote %d trains to %s", len(out), args.output)
    return EXIT_OK


def cmd_depth(args) -> int:
    trains = _load(args.trains)
    model, cm = _model_and_cm(args, trains)
    cfg = _depth_cfg(args)
    rows = [["index", "k", "depth", "weight", "conditional", "degenerate"]]
    for i, tr in enumerate(trains):
        s = depth(tr, model, cm, cfg)
        rows.append([i, tr.k, repr(s.total), repr(s.weight), repr(s.conditional),
                     int(s.degenerate)])
    write_csv(args.output, rows)
    return EXIT_OK


def cmd_median(args) -> int:
    trains = _load(args.trains)
    model, cm = _model_and_cm(args, trains)
    res = estimate_median(trains, model, cm, _depth_cfg(args))
    write_trains(args.output, TrainSample([res.median]))
    if args.json:
        write_json(args.json, {"cardinality": res.cardinality,
                               "times": res.median.times.tolist(),
                               "depth": res.depth.total, "weight": res.depth.weight,
                               "conditional": res.depth.conditional,
                               "domain": [trains.domain.t_start, trains.domain.t_end]})
    print(" ".join(repr(float(t)) for t in res.median.times))
    return EXIT_OK


def cmd_detect(args) -> int:
    trains = _load(args.trains)
    model, cm = _model_and_cm(args, trains)
    truth = None
    if args.outlier_label is not None:
        if trains.labels is None:
            raise UsageError("--outlier-label needs a labelled train file")
        truth = [lab == args.outlier_label for lab in trains.labels]
    rep = detect_outliers(trains, model, cm, _depth_cfg(args), args.delta, args.n_mc,
                          args.seed, truth)
    Path(args.csv).write_text(rep.to_csv(), encoding="utf-8")
    if args.json:
        Path(args.json).write_text(rep.to_json() + "\n", encoding="utf-8")
    print(rep.to_json())
    return EXIT_OK


def cmd_classify(args) -> int:
    train = _load(args.train)
    test = _load(args.test)
    f_tr, g_tr, names = split_groups(train, args.group_f, args.group_g)
    methods = tuple(m.strip().upper() for m in args.methods.split(",") if m.strip())
    cfg = ClassifierConfig(
        f_kind=args.f_model, g_kind=args.g_model, depth=_depth_cfg(args),
        optimizer=OptimizerConfig(degree=args.degree, seed=args.seed,
                                  redraw_noise=not args.fixed_noise),
        mu=args.mu, lm_bins=args.lm_bins, methods=methods, seed=args.seed)
    removed = {}
    if args.remove_outliers is not None:
        f_tr, removed[names[0]] = remove_outliers(f_tr, args.f_model, args.remove_outliers,
                                                  cfg.depth, args.n_mc, args.seed)
        g_tr, removed[names[1]] = remove_outliers(g_tr, args.g_model, args.remove_outliers,
                                                  cfg.depth, args.n_mc, args.seed)
    suite = ClassifierSet(f_tr, g_tr, cfg)
    trains = list(test)
    pts = suite.points(trains)
    preds = {m: suite.predict(trains, m, pts) for m in methods}
    rows = [["index", "d_F", "d_G", "true"] + list(methods)]
    for i in range(len(trains)):
        truth = "" if test.labels is None else test.labels[i]
        rows.append([i, repr(float(pts.d_f[i])), repr(float(pts.d_g[i])), truth]
                    + [names[int(preds[m][i])] for m in methods])
    write_csv(args.output, rows)
    summary = {"groups": list(names), "methods": list(methods), "removed": removed,
               "train_error_DD": suite.boundary.train_error if suite.boundary else None,
               "boundary_coef": suite.boundary.boundary.coef.tolist()
               if suite.boundary else None}
    if test.labels is not None:
        summary["test_error"] = {
            m: float(np.mean([names[int(p)] != lab for p, lab in zip(preds[m], test.labels)]))
            for m in methods}
    if args.dd_csv:
        write_csv(args.dd_csv, suite.train_points.to_csv_rows())
    if args.boundary_csv and suite.boundary:
        t, f = suite.boundary.boundary.samples()
        write_csv(args.boundary_csv, [["t", "f"]] + [[repr(float(a)), repr(float(b))] for a, b in zip(t, f)])
    if args.json:
        write_json(args.json, summary)
    print(summary.get("test_error", summary))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    kw = dict(experiment=args.experiment, reps=args.reps, seed=args.seed, r=args.r,
              mu=args.mu, degree=args.degree, n_mc=args.n_mc,
              remove_outliers=args.remove_outliers)
    if args.delta:
        kw["deltas"] = tuple(args.delta)
    spec = ExperimentSpec(**kw)
    result = run_experiment(spec)
    paths = result.write(args.out)
    _print_summary(result)
    log.info("results written to %s", paths["summary"].parent)
    return EXIT_OK


def _print_summary(result) -> None:
    print(f"{result.spec.experiment}: {result.spec.reps} repetition(s)")
    print(f"{'metric':<24}{'mean':>10}{'sd':>10}{'median':>10}")
    for name, s in result.summary().items():
        print(f"{name:<24}{s['mean']:>10.4f}{s['sd']:>10.4f}{s['median']:>10.4f}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spikedepth", description="Depth-based spike train analysis.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="generate spike trains")
    s.add_argument("process", choices=["hpp", "ipp", "hawkes"])
    s.add_argument("-n", type=int, default=100)
    s.add_argument("--rate", type=float, default=10.0, help="hpp rate")
    s.add_argument("--intensity", choices=sorted(NAMED_RATES))
    s.add_argument("--model-file", type=Path, help="constant/curve model JSON")
    s.add_argument("--alpha", type=float, default=15.0)
    s.add_argument("--beta", type=float, default=30.0)
    s.add_argument("--domain", type=float, nargs=2, default=[0.0, 1.0])
    s.add_argument("--label")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", type=Path, required=True)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("depth", help="depth of every train")
    d.add_argument("trains", type=Path)
    _add_model_args(d)
    _add_depth_args(d)
    d.add_argument("-o", "--output", type=Path, required=True)
    d.set_defaults(func=cmd_depth)

    m = sub.add_parser("median", help="median spike train")
    m.add_argument("trains", type=Path)
    _add_model_args(m)
    _add_depth_args(m)
    m.add_argument("-o", "--output", type=Path, required=True, help="train file")
    m.add_argument("--json", type=Path)
    m.set_defaults(func=cmd_median)

    o = sub.add_parser("detect", help="flag outlying trains")
    o.add_argument("trains", type=Path)
    _add_model_args(o)
    _add_depth_args(o)
    o.add_argument("--delta", type=float, default=0.01)
    o.add_argument("--n-mc", type=int, default=DEFAULT_NMC)
    o.add_argument("--outlier-label", help="label marking known outliers, for P/R/F1")
    o.add_argument("--csv", type=Path, required=True)
    o.add_argument("--json", type=Path)
    o.set_defaults(func=cmd_detect)

    c = sub.add_parser("classify", help="train on one grouped file, classify another")
    c.add_argument("train", type=Path)
    c.add_argument("test", type=Path)
    c.add_argument("--methods", default="DD,MD,LM,MM2",
                   help=f"comma-separated subset of {','.join(METHODS)}")
    c.add_argument("--group-f")
    c.add_argument("--group-g")
    c.add_argument("--f-model", choices=[KERNEL, IMI], default=KERNEL)
    c.add_argument("--g-model", choices=[KERNEL, IMI], default=KERNEL)
    c.add_argument("--remove-outliers", type=float, metavar="DELTA")
    c.add_argument("--n-mc", type=int, default=DEFAULT_NMC)
    c.add_argument("--degree", type=int, default=5)
    c.add_argument("--fixed-noise", action="store_true",
                   help="draw the optimizer noise once instead of every iteration")
    c.add_argument("--mu", type=float, default=20.0)
    c.add_argument("--lm-bins", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    _add_depth_args(c)
    c.add_argument("-o", "--output", type=Path, required=True)
    c.add_argument("--json", type=Path)
    c.add_argument("--dd-csv", type=Path)
    c.add_argument("--boundary-csv", type=Path)
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("reproduce", help="run a simulation study")
    r.add_argument("experiment", choices=EXPERIMENTS)
    r.add_argument("--reps", type=int, default=20)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--delta", type=float, action="append",
                   help=f"outlier level(s) for {', '.join(OUTLIER_EXPERIMENTS)}")
    r.add_argument("--remove-outliers", type=float, metavar="DELTA",
                   help=f"also retrain on cleaned groups ({', '.join(CLASS_EXPERIMENTS)})")
    r.add_argument("--n-mc", type=int, default=DEFAULT_NMC)
    r.add_argument("--r", type=float, default=1.0)
    r.add_argument("--mu", type=float, default=20.0)
    r.add_argument("--degree", type=int)
    r.add_argument("--out", type=Path, default=Path("results"))
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        with np.errstate(divide="ignore"):
            return args.func(args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"spikedepth: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"spikedepth: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
