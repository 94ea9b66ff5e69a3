"""Print every worked answer for the bundled schemes, three ways where possible.

    python scripts/reproduce_exercises.py [--trials 200000] [--seed 1]
"""

import argparse

from urnflow.cli import cmd_compute, render_decimal
from urnflow.montecarlo import monte_carlo
from urnflow.oracle import EnumerationCapExceeded, enumerate_process
from urnflow.scheme import bundled_scheme


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--cap", type=int, default=10**6)
    args = parser.parse_args()

    for name in ("exercise1", "exercise2", "exercise3", "exercise3_small"):
        config = bundled_scheme(name)
        print(f"== {name}: {config.description}")
        records = cmd_compute(config)
        try:
            enum = enumerate_process(config.integer_counts(), config.types, config.steps, cap=args.cap)
        except EnumerationCapExceeded as exc:
            enum = None
            print(f"   (enumeration skipped: {exc})")
        sims = monte_carlo(config, args.trials, args.seed)
        for r, sim in zip(records, sims):
            at = config.snapshot_index(r.query)
            check = ""
            if enum is not None:
                check = "exact-match" if enum.probability(at, r.query.urn, r.query.type) == r.exact else "MISMATCH"
            print(f"   {r.query.label():<14} {str(r.exact):>18} ≈ {render_decimal(r.exact):<9} "
                  f"mc={sim.frequency:.5f} (z={sim.z_score(r.exact):+.2f}) {check}")


if __name__ == "__main__":
    main()
