"""Golden-section optimum of the efficiency for a packet at rest on the detector."""

import argparse

from eeqt_arrival.analytic import GaussianPacket
from eeqt_arrival.sweep import optimize_alpha


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--width", type=float, default=1.0)
    args = ap.parse_args()
    alpha, p = optimize_alpha(GaussianPacket(0.0, 0.0, args.width), (0.5 / args.width, 3.0 / args.width), args.tol)
    print(f"alpha* = {alpha:.6f}  P(inf) = {p:.6f}")


if __name__ == "__main__":
    main()
