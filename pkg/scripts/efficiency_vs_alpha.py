"""Detector efficiency P(inf) against coupling for a packet at rest on the detector
and for the moving packet."""

import argparse

import numpy as np

from eeqt_arrival.analytic import GaussianPacket
from eeqt_arrival.io import write_table
from eeqt_arrival.sweep import efficiency_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=80)
    ap.add_argument("--alpha-max", type=float, default=10.0)
    ap.add_argument("-o", "--output", default="results/efficiency_vs_alpha.csv")
    args = ap.parse_args()

    alphas = np.geomspace(0.02, args.alpha_max, args.n)
    rest = efficiency_curve(GaussianPacket(0.0, 0.0), alphas)
    moving = efficiency_curve(GaussianPacket(-8.0, 2.0), alphas, tol=1e-5)
    for name, scan in (("at rest", rest), ("x0=-8, v=2", moving)):
        print(f"{name}: max P={scan.argmax[1]:.5f} near alpha={scan.argmax[0]:.4g}, "
              f"unimodal={scan.unimodal}")
    write_table(args.output, ["alpha", "P_rest", "P_moving"], [alphas, rest.efficiencies, moving.efficiencies])


if __name__ == "__main__":
    main()
