"""Arrival densities p(t) for the moving packet at several couplings, next to
the Wigner baseline |psi0(a, t)|^2."""

import argparse

import numpy as np

from eeqt_arrival.analytic import DetectorSpec, GaussianPacket, arrival_curve, wigner_density
from eeqt_arrival.io import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--x0", type=float, default=-8.0)
    ap.add_argument("--v", type=float, default=2.0)
    ap.add_argument("--t-max", type=float, default=20.0)
    ap.add_argument("-o", "--output", default="results/arrival_densities.csv")
    args = ap.parse_args()

    packet = GaussianPacket(args.x0, args.v)
    columns, names = [], []
    for alpha in args.alphas:
        t, phi = arrival_curve(packet, DetectorSpec(0.0, alpha), args.t_max, h=0.005)
        columns.append(np.abs(phi) ** 2)
        names.append(f"p[alpha={alpha:g}]")
        print(f"alpha={alpha:g}: peak p={columns[-1].max():.4f} at t={t[np.argmax(columns[-1])]:.3f}")
    write_table(args.output, ["t", *names, "wigner"], [t, *columns, wigner_density(packet, 0.0, t)],
                {"x0": args.x0, "v": args.v})


if __name__ == "__main__":
    main()
