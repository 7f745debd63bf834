#!/usr/bin/env python3
"""Worst positivity margins against the tuple separation floor.

Shows why the default floor is 0.2 rad: with tiny floors, clustered samples
drive the margins of an accurate curve far below any fixed tolerance.
"""

import argparse

from hitchin_lab.limit_curve import POSITIVITY_CHECKS, check_positivity, sample_curve
from hitchin_lab.representations import bend, compose_irreducible, fuchsian_genus2


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    p.add_argument("--bend", type=float, default=0.1)
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--floors", type=float, nargs="+", default=[1e-6, 0.05, 0.1, 0.2])
    p.add_argument("--tuples", type=int, default=200)
    args = p.parse_args()

    base = fuchsian_genus2()
    print(f"{'n':>2} {'rep':<9} {'check':<14}" + "".join(f"{f:>11.0e}" for f in args.floors))
    for n in args.n:
        fuchsian = compose_irreducible(n, base)
        for label, rep in (("fuchsian", fuchsian), (f"bent{args.bend:g}", bend(fuchsian, [args.bend] * (n - 1)))):
            samples = sample_curve(rep, base, args.radius)
            for which in POSITIVITY_CHECKS:
                cells = [check_positivity(samples, which, args.tuples, min_separation=f).worst_margin
                         for f in args.floors]
                print(f"{n:>2} {label:<9} {which:<14}" + "".join(f"{c:>11.2e}" for c in cells))


if __name__ == "__main__":
    main()
