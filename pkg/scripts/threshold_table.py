"""Print Monte Carlo spacing-product quantiles and depth cutoffs against the k=1 closed form."""
import argparse

from spikedepth.outlier import ThresholdCache, mc_spacing_product_quantile


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n-mc", type=float, default=1e6)
    p.add_argument("--kmax", type=int, default=10)
    args = p.parse_args()
    deltas = (0.001, 0.005, 0.01, 0.05)
    print("delta     C1 (MC)     C1 exact")
    for d in deltas:
        mc = mc_spacing_product_quantile(1, 1.0, d, n_mc=int(args.n_mc), seed=0)
        print(f"{d:<8g}  {mc:.6f}    {(1 - (1 - d) ** 2) / 4:.6f}")
    caches = [ThresholdCache(d, seed=0) for d in deltas]
    print("\n k  " + "  ".join(f"t_k(d={d:g})" for d in deltas))
    for k in range(1, args.kmax + 1):
        print(f"{k:2d}  " + "  ".join(f"{c.cutoff(k):12.6f}" for c in caches))


if __name__ == "__main__":
    main()
