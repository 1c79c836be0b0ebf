"""Run every simulation experiment and write tables to an output directory.

    python3 scripts/run_all.py --out results --reps 20
"""
import argparse
import time

from spikedepth.experiments import EXPERIMENTS, ExperimentSpec, run_experiment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="results")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", nargs="*", choices=EXPERIMENTS)
    args = p.parse_args()
    for name in args.only or EXPERIMENTS:
        extra = {"remove_outliers": 0.01} if name.startswith("class-") else {}
        reps = 100 if name == "dd-gauss" else args.reps
        t0 = time.perf_counter()
        res = run_experiment(ExperimentSpec(name, reps=reps, seed=args.seed, **extra))
        res.write(args.out)
        print(f"{name}: {reps} reps in {time.perf_counter() - t0:.0f}s")
        for key, s in res.summary().items():
            print(f"  {key:24s} mean {s['mean']:.4f}  median {s['median']:.4f}")


if __name__ == "__main__":
    main()
