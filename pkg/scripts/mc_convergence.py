"""Monte Carlo error against trial count for one bundled scheme's first query."""

import argparse

from urnflow.cli import cmd_compute
from urnflow.montecarlo import monte_carlo
from urnflow.scheme import bundled_scheme


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("scheme", nargs="?", default="exercise1")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-power", type=int, default=6)
    args = parser.parse_args()

    config = bundled_scheme(args.scheme)
    exact = cmd_compute(config)[0].exact
    print("trials,frequency,abs_error,stderr,z")
    for power in range(2, args.max_power + 1):
        est = monte_carlo(config, 10**power, args.seed)[0]
        err = abs(est.frequency - float(exact))
        print(f"{10**power},{est.frequency:.6f},{err:.2e},{est.stderr:.2e},{est.z_score(exact):+.3f}")


if __name__ == "__main__":
    main()
