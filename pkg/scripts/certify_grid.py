#!/usr/bin/env python3
"""Finite-field regularity certification over a grid of formats.

For each (m+1, n+1) cell and each x-degree d, certifies that random point
configurations over Z_p realize the expected Hilbert value at (d, 1) for
the largest rank the bound allows.  Writes one JSON certificate per line.
"""

import argparse
import sys

from cpdhnf.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-dim", type=int, default=10, help="largest m+1 and n+1")
    parser.add_argument("--degrees", default="2", help="comma list of x-degrees")
    parser.add_argument("--p", type=int, default=8191)
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output-prefix", default="certificates")
    args = parser.parse_args()

    code = 0
    for d in (int(tok) for tok in args.degrees.split(",")):
        out = f"{args.output_prefix}_d{d}.jsonl"
        print(f"degree ({d}, 1) -> {out}", file=sys.stderr)
        code |= cli_main([
            "certify", "--d", str(d), "--r", "auto",
            "--sweep", f"{args.max_dim},{args.max_dim}",
            "--p", str(args.p), "--trials", str(args.trials),
            "--seed", str(args.seed), "--output", out,
        ])
    return code


if __name__ == "__main__":
    sys.exit(main())
