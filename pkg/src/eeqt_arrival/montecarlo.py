"""Sampling individual detection events.

Two routes to the same first-jump distribution:

* inverse CDF on a tabulated :class:`ArrivalDistribution`;
* thinning of the inhomogeneous Poisson process with hazard lambda(t) of a
  finite-dimensional :class:`QuantumModel`.

Records are generated in fixed-size blocks, each with its own substream
``SeedSequence(seed, spawn_key=(block,))``, so the result does not depend on
how blocks are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.interpolate import PchipInterpolator

from .analytic import ArrivalDistribution
from .engine import QuantumModel, SpectralRate, rate_function
from .errors import ExpmError, MajorantError

BLOCK = 4096
BISECTION_TOL = 1e-9
WORKERS_ENV = "EEQT_ARRIVAL_WORKERS"


def max_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_blocks(fn, n: int, seed: int, workers: int | None):
    """fn(rng, count) -> times for each block, concatenated in block order."""
    counts = [min(BLOCK, n - start) for start in range(0, n, BLOCK)]
    jobs = [(b, c) for b, c in enumerate(counts)]
    workers = workers or max_workers()
    if workers == 1 or len(jobs) == 1:
        parts = [fn(_block_rng(seed, b), c) for b, c in jobs]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: fn(_block_rng(seed, job[0]), job[1]), jobs))
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass(frozen=True)
class EventRecord:
    outcome: str  # "detected" or "escaped"
    time: float | None
    seed: int

    def __post_init__(self):
        if self.outcome not in ("detected", "escaped"):
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.outcome == "detected" and not (self.time is not None and self.time >= 0):
            raise ValueError("detected events need a time >= 0")


@dataclass
class EventEnsemble:
    """Detection times, NaN where the particle escaped."""

    times: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def detected(self) -> np.ndarray:
        return self.times[~np.isnan(self.times)]

    @property
    def detected_fraction(self) -> float:
        return float(np.count_nonzero(~np.isnan(self.times)) / self.n) if self.n else 0.0

    @property
    def records(self) -> list[EventRecord]:
        return [
            EventRecord("escaped", None, self.seed) if math.isnan(t) else EventRecord("detected", float(t), self.seed)
            for t in self.times
        ]

    def write_csv(self, path, header: dict | None = None):
        from .io import write_table

        outcome = np.where(np.isnan(self.times), "escaped", "detected")
        time = np.array(["" if math.isnan(t) else "%.12g" % t for t in self.times])
        write_table(path, ["seed", "outcome", "time"], [np.full(self.n, str(self.seed)), outcome, time], header)


class TabulatedCDF:
    """P(t) through monotone cubic interpolation, continued past the grid by the
    t^-3 decay of p that also underlies the tail estimate."""

    def __init__(self, dist: ArrivalDistribution):
        P = np.asarray(dist.cumulative, dtype=float)
        if np.any(np.diff(P) < -1e-14):
            raise ValueError("arrival distribution is not monotone")
        if dist.efficiency > 1 + max(dist.tail_error, 1e-9):
            raise ValueError(f"efficiency {dist.efficiency} exceeds 1")
        self.times = np.asarray(dist.times, dtype=float)
        self.P = np.maximum.accumulate(P)
        self.total = min(float(dist.efficiency), 1.0)
        self.tail = max(self.total - self.P[-1], 0.0)
        self.T = float(self.times[-1])
        self._interp = PchipInterpolator(self.times, self.P, extrapolate=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.clip(t, 0, self.T)
        out = self._interp(inside)
        beyond = t > self.T
        if np.any(beyond):
            out = np.where(beyond, self.P[-1] + self.tail * (1 - (self.T / np.maximum(t, self.T)) ** 2), out)
        return out

    def invert(self, u):
        """t with P(t) = u, for 0 <= u < total."""
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        inside = u <= self.P[-1]
        if np.any(~inside):
            x = np.clip((u[~inside] - self.P[-1]) / self.tail, 0, 1 - 1e-16) if self.tail > 0 else 0.0
            out[~inside] = self.T / np.sqrt(1 - x)
        ui = u[inside]
        if ui.size:
            j = np.clip(np.searchsorted(self.P, ui, side="left"), 1, len(self.P) - 1)
            lo = self.times[j - 1].copy()
            hi = self.times[j].copy()
            while np.max(hi - lo, initial=0.0) > BISECTION_TOL:
                mid = 0.5 * (lo + hi)
                below = self._interp(mid) < ui
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            out[inside] = 0.5 * (lo + hi)
        return out

    def normalized(self, t):
        return self(t) / self.total


def sample_events(dist: ArrivalDistribution, n: int, seed: int, workers: int | None = None) -> EventEnsemble:
    """Draw u ~ U(0,1); escaped if u >= P(inf), otherwise the t solving P(t) = u."""
    cdf = TabulatedCDF(dist)

    def block(rng, count):
        u = rng.random(count)
        t = np.full(count, np.nan)
        hit = u < cdf.total
        if hit.any():
            t[hit] = cdf.invert(u[hit])
        return t

    return EventEnsemble(_run_blocks(block, n, seed, workers), seed)


def _rate_evaluator(model: QuantumModel):
    try:
        return SpectralRate(model).rate
    except ExpmError:
        return lambda t: rate_function(model, t)


def rate_majorant(model: QuantumModel, t_max: float, points: int = 2001, safety: float = 1.5,
                  rate=None) -> float:
    rate = rate or _rate_evaluator(model)
    return safety * float(np.max(rate(np.linspace(0, t_max, points))))


def sample_events_thinning(model: QuantumModel, n: int, seed: int, t_max: float,
                           workers: int | None = None, majorant: float | None = None) -> EventEnsemble:
    """Ogata thinning of the detection process on [0, t_max].

    Candidates come from a homogeneous process with rate lambda_max and are
    accepted with probability lambda(t) / lambda_max; the first acceptance is
    the detection.  No acceptance before ``t_max`` is recorded as escaped.
    """
    rate = _rate_evaluator(model)
    lam_max = majorant if majorant is not None else rate_majorant(model, t_max, rate=rate)

    def block(rng, count):
        out = np.full(count, np.nan)
        if lam_max <= 0:
            return out
        t = np.zeros(count)
        active = np.arange(count)
        while active.size:
            t[active] += rng.exponential(1 / lam_max, active.size)
            u = rng.random(active.size)
            alive = t[active] <= t_max
            active, u = active[alive], u[alive]
            if not active.size:
                break
            lam = rate(t[active])
            if np.any(lam > lam_max):
                worst = t[active][np.argmax(lam)]
                raise MajorantError(f"majorant {lam_max:.6g} too small: lambda({worst:.6g}) = {lam.max():.6g}")
            accept = u * lam_max <= lam
            out[active[accept]] = t[active[accept]]
            active = active[~accept]
        return out

    return EventEnsemble(_run_blocks(block, n, seed, workers), seed)


def ks_test(ensemble: EventEnsemble, cdf) -> stats._stats_py.KstestResult:
    """One-sample KS test of the detected times against a normalised CDF callable."""
    return stats.kstest(ensemble.detected, cdf)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
