"""Solver wall time against graph size at a fixed 3 groups x 2 terminals.

    python scripts/complexity.py --sizes 1000,2000,4000,8000,16000
"""

import argparse
import math
import sys
import time
from pathlib import Path

from gstned.solver import solve_topk

# the acceptance suite owns the benchmark graph generator
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from test_acceptance import complexity_graph  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,2000,4000,8000")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--k", type=int, default=10)
    args = ap.parse_args()

    base = None
    print("nodes\tseconds\tratio\tn_log_n_ratio\tpops")
    for n in (int(x) for x in args.sizes.split(",")):
        total, pops = 0.0, 0
        for seed in range(1, args.seeds + 1):
            g = complexity_graph(n, seed)
            t = time.perf_counter()
            sol = solve_topk(g, args.k)
            total += time.perf_counter() - t
            pops += sol.stats["pops"]
        if base is None:
            base = (n, total)
        nlogn = (n * math.log(n)) / (base[0] * math.log(base[0]))
        print(f"{n}\t{total:.3f}\t{total / base[1]:.2f}\t{nlogn:.2f}\t{pops}")


if __name__ == "__main__":
    main()
