#!/usr/bin/env python3
"""Exact alpha of small quotients against the spectral ratio bound.

Prints one CSV row per non-degenerate (p, q, k, n, m) with at most --cap
vertices, and exits nonzero if any quotient beats its ratio bound.
"""

import argparse
import csv
import math
import sys

from moddist.generators import ModularDistanceParams, weight_function
from moddist.quotient_graphs import DEFAULT_VERTEX_CAP, spectral_dominance_check
from moddist.spectral import DegenerateQuotient, check_quotient


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-q", type=int, default=5)
    ap.add_argument("--max-k", type=int, default=2)
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--cap", type=int, default=DEFAULT_VERTEX_CAP)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["p", "q", "k", "n", "m", "alpha", "density", "ratio", "slack"])
    failures = 0
    for q in range(2, args.max_q + 1):
        for p in (p for p in range(1, q) if math.gcd(p, q) == 1):
            for k in range(1, args.max_k + 1):
                for n in range(1, args.max_n + 1):
                    w = weight_function(ModularDistanceParams(p, q, k), n)
                    for m in range(2, math.isqrt(args.cap) + 1):
                        try:
                            check_quotient(w, m)
                            rep = spectral_dominance_check(w, m, args.cap)
                        except DegenerateQuotient:
                            continue
                        except AssertionError as exc:
                            failures += 1
                            print(f"# {p},{q},{k},{n},{m}: {exc}", file=sys.stderr)
                            continue
                        d = float(rep.density)
                        out.writerow([p, q, k, n, m, rep.alpha, f"{rep.density}",
                                      f"{rep.spectral_ratio:.6f}", f"{rep.spectral_ratio - d:.3e}"])
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
