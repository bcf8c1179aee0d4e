"""Optimal coupling and efficiency against packet velocity, with the linear fit
over the fast half of the grid."""

import argparse

from eeqt_arrival.io import write_table
from eeqt_arrival.sweep import DEFAULT_VELOCITIES, top_half_trend, velocity_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--velocities", type=float, nargs="+", default=list(DEFAULT_VELOCITIES))
    ap.add_argument("--x0", type=float, default=-8.0)
    ap.add_argument("-o", "--output", default="results/velocity_sweep.csv")
    args = ap.parse_args()

    rows = velocity_sweep(args.velocities, x0=args.x0)
    for r in rows:
        print(f"v={r.v:5.2f}  alpha*={r.alpha_star:8.4f}  P*={r.p_star:.5f}")
    slope, intercept, r2 = top_half_trend(rows)
    print(f"top half: alpha* = {slope:.4f} v + {intercept:.4f}  (R^2 = {r2:.6f})")
    write_table(args.output, ["v", "alpha_star", "p_star"],
                [[r.v for r in rows], [r.alpha_star for r in rows], [r.p_star for r in rows]],
                {"x0": args.x0, "slope": slope, "intercept": intercept, "r2": r2})


if __name__ == "__main__":
    main()
