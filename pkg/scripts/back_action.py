"""Disturbance of the undetected state: 1 - |<free|undetected>|^2 against coupling
and time for a packet at rest on the detector."""

import argparse

import numpy as np

from eeqt_arrival.analytic import DetectorSpec, GaussianPacket
from eeqt_arrival.gridsim import Grid, back_action_probe
from eeqt_arrival.io import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappas", type=float, nargs="+", default=[0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--times", type=float, nargs="+", default=[0.25, 0.5, 1.0])
    ap.add_argument("--dx", type=float, default=0.05)
    ap.add_argument("-o", "--output", default="results/back_action.csv")
    args = ap.parse_args()

    packet = GaussianPacket(0.0, 0.0)
    table = np.empty((len(args.kappas), len(args.times)))
    for i, kappa in enumerate(args.kappas):
        det = DetectorSpec(0.0, kappa)
        for j, t in enumerate(args.times):
            table[i, j] = back_action_probe(Grid.around(packet, det, t, args.dx), packet, det, t)[1]
        print(f"kappa={kappa:g}: " + "  ".join(f"t={t:g}: {d:.3e}" for t, d in zip(args.times, table[i])))
    write_table(args.output, ["kappa", *(f"deficit[t={t:g}]" for t in args.times)],
                [args.kappas, *table.T], {"dx": args.dx})


if __name__ == "__main__":
    main()
