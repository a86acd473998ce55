#!/usr/bin/env python3
"""Sweep n and print how the transform infimum and the chromatic bound move.

Example:
    python3 scripts/infimum_trend.py --k 2 --n-sweep 4,8,16,32,64,128
"""

import argparse
import csv
import sys
import time

from moddist.config import ExperimentConfig
from moddist.generators import weight_function
from moddist.spectral import spectral_certificate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--n-sweep", default="4,8,16,32,64")
    ap.add_argument("--grid", type=int, default=64)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(
        p=args.p, q=args.q, k=args.k,
        n_sweep=[int(x) for x in args.n_sweep.split(",")], grid=args.grid,
    ).validate()
    target = 1 / (cfg.k + 1)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "inf", "ratio", "gap_to_limit", "chi_lower_bound", "seconds"])
    for n in cfg.sweep:
        start = time.perf_counter()
        cert = spectral_certificate(
            weight_function(cfg.params, n), cfg.grid, cfg.refinement(), cfg.margin
        )
        out.writerow([
            n, f"{cert.inf_estimate:.10f}", f"{cert.alpha_ratio_bound:.6f}",
            f"{cert.alpha_ratio_bound - target:+.6f}", cert.chi_lower_bound,
            f"{time.perf_counter() - start:.2f}",
        ])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
