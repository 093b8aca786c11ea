#!/usr/bin/env python3
"""Noise robustness protocol at configurable scale.

Perturbs random rank-r instances by white Gaussian noise of relative
magnitude 10^e over a range of exponents and ranks, then measures the
backward error of the recovered decomposition.  Thin wrapper over the
`cpdhnf noise-sweep` subcommand looping over several ranks.
"""

import argparse
import sys

from cpdhnf.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", default="50,10,5")
    parser.add_argument("--ranks", default="5,10,20,30")
    parser.add_argument("--levels", default="-15:-5")
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output-prefix", default="noise")
    args = parser.parse_args()

    code = 0
    for rank in (int(tok) for tok in args.ranks.split(",")):
        out = f"{args.output_prefix}_r{rank}.csv"
        print(f"rank {rank} -> {out}", file=sys.stderr)
        code |= cli_main([
            "noise-sweep", "--dims", args.dims, "--rank", str(rank),
            f"--levels={args.levels}", "--trials", str(args.trials),
            "--seed", str(args.seed), "--output", out,
        ])
    return code


if __name__ == "__main__":
    sys.exit(main())
