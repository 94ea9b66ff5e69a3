"""Closed form vs enumeration timings, written as CSV.

    python scripts/bench_sweep.py > bench.csv
"""

import argparse
import sys

from urnflow.cli import cmd_bench, render_bench
from urnflow.scheme import bundled_scheme


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--single", default="1,10,100,1000,3000,10000",
                        help="k sweep on the two-warehouse scheme")
    parser.add_argument("--chain", default="1,2,3,4,5",
                        help="k sweep on the scaled-down three-colour chain")
    parser.add_argument("--cap", type=int, default=10**6)
    args = parser.parse_args()

    for name, sweep in (("exercise1", args.single), ("exercise3_small", args.chain)):
        ks = [int(x) for x in sweep.split(",")]
        rows = cmd_bench(bundled_scheme(name), ks, cap=args.cap)
        sys.stdout.write(f"# {name}\n")
        sys.stdout.write(render_bench(rows, "csv"))


if __name__ == "__main__":
    main()
