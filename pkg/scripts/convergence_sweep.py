"""How fast the finite-M per-quantum bound approaches the large-M series.

    python scripts/convergence_sweep.py --chi 0.5,2,8 --max-log2 20
"""

import argparse
import time

from quanta_timing import analytic_bounds as ab


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--chi", default="0.5,2,8")
    ap.add_argument("--max-log2", type=int, default=18)
    args = ap.parse_args()

    for chi in (float(c) for c in args.chi.split(",")):
        limit = ab.cq_series_raw(chi)
        print(f"chi={chi:g}  series limit {limit:.8f}")
        print(f"{'M':>9} {'cq_finite':>12} {'h-free':>12} {'gap':>10} {'gap*M':>10} {'sec':>6}")
        for k in range(args.max_log2 + 1):
            M = 2**k
            t0 = time.perf_counter()
            v = ab.cq_finite(M, chi)
            dt = time.perf_counter() - t0
            gap = limit - v
            print(f"{M:>9} {v:12.8f} {ab.cq_h_free(M, chi):12.6f} {gap:10.2e} {gap * M:10.4f} {dt:6.3f}")
        print()


if __name__ == "__main__":
    main()
