"""Three-way comparison of the arrival density: closed form, split-step grid,
finite-difference line model."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import engine, gridsim
from .analytic import DetectorSpec, GaussianPacket, arrival_curve

REFERENCE_PACKET = GaussianPacket(x0=-8.0, v=2.0)
DEFAULT_DXS = (0.1, 0.05, 0.025)
L1_TOLERANCE = 1e-2


def line_box(packet: GaussianPacket, det: DetectorSpec, t_end: float, dx: float, margin: float = 6.0):
    """Hard-wall interval around the detector wide enough that wall reflections
    of the fast momentum tail cannot return to the detector before ``t_end``.
    The detector sits on a node."""
    k_fast = abs(packet.v) + margin / (2 * packet.width)
    half = max(abs(packet.x0 - det.a) + margin * packet.width, 0.5 * k_fast * t_end)
    half = math.ceil(half / dx) * dx
    return det.a - half, det.a + half


def l1(times, p, q) -> float:
    return float(trapezoid(np.abs(np.asarray(p) - np.asarray(q)), times))


@dataclass
class TriangleResult:
    alpha: float
    times: np.ndarray
    analytic: np.ndarray
    grid: dict[float, np.ndarray]
    line: dict[float, np.ndarray]
    grid_valid: dict[float, bool]
    meta: dict = field(default_factory=dict)

    @property
    def finest(self) -> float:
        return min(self.grid)

    def refinement(self, which: str) -> list[tuple[float, float]]:
        curves = self.grid if which == "grid" else self.line
        return [(dx, l1(self.times, curves[dx], self.analytic)) for dx in sorted(curves, reverse=True)]

    def monotone(self, which: str) -> bool:
        errs = [e for _, e in self.refinement(which)]
        return all(b < a for a, b in zip(errs, errs[1:]))

    def pairwise(self) -> dict[str, float]:
        dx = self.finest
        curves = {"analytic": self.analytic, "gridsim": self.grid[dx], "line": self.line[dx]}
        return {f"{a}~{b}": l1(self.times, curves[a], curves[b]) for a, b in itertools.combinations(curves, 2)}

    def passed(self, tol: float = L1_TOLERANCE) -> bool:
        return (all(v <= tol for v in self.pairwise().values())
                and self.monotone("grid") and self.monotone("line") and all(self.grid_valid.values()))


def triangle(alpha: float, packet: GaussianPacket = REFERENCE_PACKET, a: float = 0.0, t_end: float = 20.0,
             dxs=DEFAULT_DXS, sample_dt: float = 0.01, h: float = 0.0025) -> TriangleResult:
    det = DetectorSpec(a, alpha)
    times = np.linspace(0.0, t_end, int(round(t_end / sample_dt)) + 1)
    t_an, phi = arrival_curve(packet, det, t_end, h)
    analytic = np.interp(times, t_an, np.abs(phi) ** 2)
    grid_curves, line_curves, valid = {}, {}, {}
    for dx in dxs:
        lo, hi = line_box(packet, det, t_end, dx)
        run = gridsim.evolve_with_sink(gridsim.Grid.around(packet, det, t_end, dx), packet, det, t_end)
        grid_curves[dx] = np.interp(times, run.times, run.density)
        valid[dx] = run.valid
        model = engine.discretized_line_model(engine.line_grid(lo, hi, dx), packet, det)
        line_curves[dx] = engine.detection_density(model, times)
    return TriangleResult(alpha, times, analytic, grid_curves, line_curves, valid,
                          meta={"x0": packet.x0, "v": packet.v, "a": a, "t_end": t_end, "dxs": list(dxs)})
