#!/usr/bin/env python3
"""Timing harness for the solvers on large ensured random instances.

Example:
    python3 scripts/bench_envelope.py --n 300 --arcs 3000 --k 2 3 --seed 88
"""

import argparse
import time

from rootedpack.instancegen import random_instance
from rootedpack.solver_arb import solve_arb
from rootedpack.solver_tree import solve_tree


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=300)
    parser.add_argument("--arcs", type=int, default=3000)
    parser.add_argument("--k", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--seed", type=int, default=88)
    args = parser.parse_args()

    d = random_instance("arb", args.n, args.arcs, seed=args.seed,
                        ensure="2-root-connected").graph
    g = random_instance("tree", args.n, args.arcs, seed=args.seed + 1,
                        ensure="connected").graph
    print(f"digraph: n={d.n} arcs={d.arc_count}; graph: n={g.n} edges={g.edge_count}")
    for k in args.k:
        t0 = time.perf_counter()
        r = solve_arb(d, k)
        print(f"solve_arb  k={k}: {'YES' if r.decision else 'NO '}"
              f" stage={r.stage:<18} {time.perf_counter() - t0:7.2f}s"
              f" counters={r.counters}")
        t0 = time.perf_counter()
        r = solve_tree(g, k)
        print(f"solve_tree k={k}: {'YES' if r.decision else 'NO '}"
              f" stage={r.stage:<18} {time.perf_counter() - t0:7.2f}s"
              f" counters={r.counters}")


if __name__ == "__main__":
    main()
