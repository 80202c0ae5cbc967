#!/usr/bin/env python3
"""
Cross-validated depth sweep on noisy friedman1: second-order trees
against CART and extremely randomized trees.

Usage:
    python demos/depth_sweep_regression.py
    python demos/depth_sweep_regression.py --n 800 --seed 3 --folds 10
"""
import argparse

import numpy as np

from gradtree.data import SynthSpec, generate_synthetic
from gradtree.harness import run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=400, help="sample count")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--depths", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    args = parser.parse_args()

    sample = generate_synthetic(
        SynthSpec(kind="friedman1", n_samples=args.n, weibull_k=5.0, rng_seed=args.seed)
    )
    dataset = sample.regression_dataset(observed=True)
    print(f"friedman1, n={args.n}, Weibull-noised targets, {args.folds}-fold CV")

    learners = ["cart", "ert", "gradtree:0.1", "gradtree:0.5", "gradtree:2"]
    rows = run_sweep(dataset, learners, args.depths, n_folds=args.folds, seed=args.seed)

    means = {}
    for name, lam, depth, _, _, value in rows:
        means.setdefault((name, lam, depth), []).append(value)

    header = ["depth", "cart", "ert"] + [f"gt l={l}" for l in (0.1, 0.5, 2.0)]
    print("  ".join(f"{h:>9}" for h in header))
    for depth in args.depths:
        cells = [f"{depth:>9}"]
        for key in [("cart", None), ("ert", None),
                    ("gradtree", 0.1), ("gradtree", 0.5), ("gradtree", 2.0)]:
            r2 = np.mean(means[(key[0], key[1], depth)])
            cells.append(f"{r2:>9.4f}")
        print("  ".join(cells))

    best_grad = max(
        np.mean(v) for k, v in means.items() if k[0] == "gradtree"
    )
    best_base = max(
        np.mean(v) for k, v in means.items() if k[0] in ("cart", "ert")
    )
    print(f"\nbest mean R^2: gradtree {best_grad:.4f} vs baselines {best_base:.4f}")


if __name__ == "__main__":
    main()
