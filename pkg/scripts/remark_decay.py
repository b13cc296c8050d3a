#!/usr/bin/env python3
"""Factorized-profile bound against the Stein total along n = 10, 100, ...

The factorized bound is looser (about -log(1 - 1/n) plus the boundary term)
but needs only sup |C'/C|. Prints a CSV to stdout.
"""
import argparse
import csv
import sys

from freeevt import profile_decomposition_bound, worked_family
from freeevt.metrics import format_number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gamma", type=float, nargs="+", default=[0.0, 1.0, -1.0, 2.0, -2.0])
    p.add_argument("--max-exp", type=int, default=4)
    args = p.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["gamma", "n", "remark_bound", "stein_total", "ratio"])
    for g in args.gamma:
        for k in range(1, args.max_exp + 1):
            n = 10 ** k
            fam = worked_family(g, n)
            remark = profile_decomposition_bound(g, fam.factor, fam.profile)
            total = fam.bound().total
            w.writerow([format_number(g), n, format_number(remark), format_number(total),
                        format_number(remark / total)])


if __name__ == "__main__":
    main()
