#!/usr/bin/env python3
"""Monte Carlo means vs exact absorption times across operators.

One row per (n, operator): simulated mean with standard error, the exact
chain value under plateau-uniform start, and the z-score. Every |z| should
stay within ~3 across the sweep.
"""

import argparse
from pathlib import Path

from plateau_ea.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results", type=Path)
    ap.add_argument("--n", default="30,50,80")
    ap.add_argument("--k", default="2")
    ap.add_argument("--trials", default="10000")
    ap.add_argument("--seed", default="60451")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    out = args.outdir / "mc_vs_exact.csv"
    code = cli_main(
        [
            "simulate",
            "--n", args.n,
            "--k", args.k,
            "--op", "rls",
            "--op", "stdbit:1",
            "--op", "fastga:1.5",
            "--op", "hh:simple-random",
            "--op", "hh:random-gradient",
            "--trials", args.trials,
            "--seed", args.seed,
            "--start", "plateau",
            "--out", str(out),
        ]
    )
    assert code == 0
    print(f"wrote {out}")
    print(out.read_text())


if __name__ == "__main__":
    main()
