#!/usr/bin/env python3
"""Integrate every Hill preset and report drift, hyperconvexity margin and
the Frenet distances at the finest radius."""

import argparse

from hitchin_lab.hill import PRESETS, hill_curve_check, preset


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--tuples", type=int, default=200)
    args = p.parse_args()
    print(f"{'preset':<10} {'drift':>9} {'margin':>9} {'frenet':>9} verdict")
    for name in sorted(PRESETS):
        system = preset(name, step=args.step)
        report = hill_curve_check(system, args.tuples)
        frenet = max((v["distances"][-1] for v in report.details["frenet"].values()), default=0.0)
        print(f"{name:<10} {system.wronskian_drift:9.1e} {report.worst_margin:9.2e} {frenet:9.1e}"
              f" {'PASS' if report.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
