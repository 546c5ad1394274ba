#!/usr/bin/env python3
"""Finite-n convergence toward the asymptotic predictions.

Two sweeps over an n-grid: the exact expected runtime against
n^k/(k! Pr[1<=alpha<=k]) (ratio should fall toward 1), and the conditional
stationary distribution against the uniform-on-plateau image (max relative
deviation should fall toward 0).
"""

import argparse
import csv
from pathlib import Path

from plateau_ea import levelchain as lc
from plateau_ea.cli import main as cli_main, parse_operator
from plateau_ea.mutation import pmf_of


def stationary_sweep(ns, ks, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "max_rel_dev_pi_star_vs_uniform"])
        for k in ks:
            for n in ns:
                dist = pmf_of(parse_operator("rls"), n, exact=True)
                stat = lc.conditional_stationary(lc.build(n, k, dist))
                u = lc.uniform_level_vector(n, k, exact=False)
                dev = max(abs(p / q - 1) for p, q in zip(stat.pi_star, u))
                w.writerow([n, k, repr(dev)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results", type=Path)
    ap.add_argument("--n", default="25,50,100,200,400")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    ratio_out = args.outdir / "asymptotic_ratio.csv"
    code = cli_main(
        ["compare", "--n", args.n, "--k", "2", "--op", "rls", "--op", "stdbit:1",
         "--out", str(ratio_out)]
    )
    assert code == 0
    print(f"wrote {ratio_out}")

    stat_out = args.outdir / "stationary_convergence.csv"
    ns = [int(x) for x in args.n.split(",")]
    stationary_sweep(ns, (2, 3), stat_out)
    print(f"wrote {stat_out}")


if __name__ == "__main__":
    main()
