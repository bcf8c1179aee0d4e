"""Efficiency versus coupling, and the optimal coupling versus packet velocity."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import DetectorSpec, GaussianPacket, efficiency
from .errors import BracketError
from .montecarlo import max_workers

INVPHI = (math.sqrt(5) - 1) / 2
DEFAULT_VELOCITIES = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass
class ScanResult:
    alphas: np.ndarray
    efficiencies: np.ndarray
    low_confidence: np.ndarray
    argmax: tuple[float, float]
    boundary: bool
    slope_sign_changes: int
    meta: dict = field(default_factory=dict)

    @property
    def unimodal(self) -> bool:
        return self.slope_sign_changes <= 1


def _evaluate(packet, a, alphas, t_max, tol, workers):
    def one(alpha):
        return efficiency(packet, DetectorSpec(a, float(alpha)), t_max=t_max, tol=tol)

    workers = workers or max_workers()
    if workers == 1:
        results = [one(x) for x in alphas]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, alphas))
    values = np.array([r[0] for r in results])
    flags = np.array([r[1] for r in results], dtype=bool)
    return values, flags


def slope_sign_changes(values) -> int:
    d = np.sign(np.diff(values))
    d = d[d != 0]
    return int(np.count_nonzero(d[1:] != d[:-1]))


def efficiency_curve(packet: GaussianPacket, alphas, a: float = 0.0, t_max: float = 200.0,
                     tol: float = 1e-6, workers: int | None = None) -> ScanResult:
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas < 0) or np.any(np.diff(alphas) <= 0):
        raise ValueError("alphas must be non-negative and strictly ascending")
    values, flags = _evaluate(packet, a, alphas, t_max, tol, workers)
    i = int(np.argmax(values))
    return ScanResult(
        alphas=alphas,
        efficiencies=values,
        low_confidence=flags,
        argmax=(float(alphas[i]), float(values[i])),
        boundary=i in (0, len(alphas) - 1),
        slope_sign_changes=slope_sign_changes(values),
        meta={"x0": packet.x0, "v": packet.v, "a": a, "t_max": t_max, "tol": tol},
    )


def golden_section_max(fn, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Maximise a unimodal ``fn`` on [lo, hi] until the bracket is narrower than ``tol``."""
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = fn(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def optimize_alpha(packet: GaussianPacket, bracket=(0.5, 3.0), tol: float = 1e-3, a: float = 0.0,
                   t_max: float = 200.0, eff_tol: float = 1e-6):
    """(alpha*, P*) maximising the detector efficiency inside ``bracket``.

    The bracket is accepted only if its interior golden point beats both ends.
    """
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise BracketError(f"bracket invalid: {bracket!r}")

    def fn(alpha):
        return efficiency(packet, DetectorSpec(a, alpha), t_max=t_max, tol=eff_tol)[0]

    mid = hi - INVPHI * (hi - lo)
    f_lo, f_mid, f_hi = fn(lo), fn(mid), fn(hi)
    if not (f_mid > f_lo and f_mid > f_hi):
        raise BracketError(
            f"bracket invalid: no interior maximum in ({lo}, {hi}) "
            f"(P={f_lo:.6g}, {f_mid:.6g}, {f_hi:.6g})"
        )
    return golden_section_max(fn, lo, hi, tol)


def find_bracket(packet: GaussianPacket, a: float = 0.0, lo: float = 0.05, hi: float | None = None,
                 points: int = 16, t_max: float = 200.0):
    """Coarse geometric scan returning the neighbours of the best coupling."""
    if hi is None:
        hi = 8.0 * max(1.0, abs(packet.v))
    grid = np.geomspace(lo, hi, points)
    values, _ = _evaluate(packet, a, grid, t_max, 1e-5, None)
    i = int(np.argmax(values))
    if i in (0, points - 1):
        raise BracketError(f"efficiency maximum at the scan edge alpha={grid[i]:.4g}")
    return float(grid[i - 1]), float(grid[i + 1])


@dataclass
class VelocityRow:
    v: float
    alpha_star: float
    p_star: float
    bracket: tuple[float, float]


def velocity_sweep(velocities=DEFAULT_VELOCITIES, bracket=None, tol: float = 1e-3, x0: float = -8.0,
                   a: float = 0.0, t_max: float = 200.0) -> list[VelocityRow]:
    """Optimal coupling per velocity.  Without an explicit ``bracket`` each row
    locates its own from a coarse scan, since alpha* grows with v."""
    velocities = np.asarray(velocities, dtype=float)
    if np.any(velocities < 0) or np.any(np.diff(velocities) <= 0):
        raise ValueError("velocities must be non-negative and ascending")
    rows = []
    for v in velocities:
        packet = GaussianPacket(x0, float(v))
        br = tuple(bracket) if bracket is not None else find_bracket(packet, a, t_max=t_max)
        alpha_star, p_star = optimize_alpha(packet, br, tol, a=a, t_max=t_max)
        rows.append(VelocityRow(float(v), float(alpha_star), float(p_star), br))
    return rows


def linear_trend(x, y):
    """Least-squares line through (x, y): (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def top_half_trend(rows: list[VelocityRow]):
    top = rows[len(rows) // 2 :]
    return linear_trend([r.v for r in top], [r.alpha_star for r in top])
