"""Finite-dimensional detector model: damped propagator, master equation, hazard rate.

A quantum system with Hamiltonian H is watched by a yes/no detector through
F = sqrt(kappa) |u><u|.  While the detector has not fired the state evolves
with K(t) = exp(-i H t - F^2 t / 2); its squared norm S(t) is the survival
probability and

    p(t) = kappa |<u|K(t)|psi>|^2,    lambda(t) = p(t) / S(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import DOP853
from scipy.sparse.linalg import expm_multiply

from .analytic import DetectorSpec, GaussianPacket, free_packet_amplitude
from .errors import ExpmError, StateExhaustedError, StepSizeError

SURVIVAL_FLOOR = 1e-12
_DENSE_LIMIT = 512


@dataclass(frozen=True)
class QuantumModel:
    hamiltonian: np.ndarray | sp.spmatrix
    u: np.ndarray
    kappa: float
    psi0: np.ndarray

    def __post_init__(self):
        H = self.hamiltonian
        n = H.shape[0]
        if H.shape != (n, n):
            raise ValueError("hamiltonian must be square")
        asym = H - H.conj().T
        defect = abs(asym).max() if sp.issparse(asym) else np.max(np.abs(asym), initial=0.0)
        if defect > 1e-10:
            raise ValueError(f"hamiltonian is not Hermitian (max |H - H^dag| = {defect:.3e})")
        for name in ("u", "psi0"):
            vec = getattr(self, name)
            if vec.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
            if abs(np.linalg.norm(vec) - 1) > 1e-10:
                raise ValueError(f"{name} must be a unit vector")
        if not self.kappa >= 0:
            raise ValueError("kappa must be >= 0")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.hamiltonian)

    def generator(self):
        """-i H - (kappa / 2) |u><u|."""
        u = self.u
        if self.is_sparse:
            nz = np.flatnonzero(u)
            block = np.outer(u[nz], u[nz].conj()).ravel()
            proj = sp.coo_matrix((block, (np.repeat(nz, len(nz)), np.tile(nz, len(nz)))),
                                 shape=(self.dim, self.dim))
            return (-1j * self.hamiltonian - 0.5 * self.kappa * proj).tocsr()
        return -1j * np.asarray(self.hamiltonian) - 0.5 * self.kappa * np.outer(u, u.conj())


def random_model(dim: int, rng: np.random.Generator, kappa: float = 1.0) -> QuantumModel:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = (a + a.conj().T) / 2
    u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumModel(H, u / np.linalg.norm(u), kappa, psi / np.linalg.norm(psi))


def damped_propagator(model: QuantumModel, t: float, check: bool | None = None) -> np.ndarray:
    """K(t) = exp(t * generator) by scaling and squaring with a Pade approximant."""
    if t < 0:
        raise ValueError("K(t) is only defined for t >= 0")
    G = model.generator()
    G = G.toarray() if sp.issparse(G) else G
    K = scipy.linalg.expm(G * t)
    if not np.all(np.isfinite(K)):
        norm1 = np.linalg.norm(G * t, 1)
        raise ExpmError(f"expm produced non-finite entries (||G t||_1 = {norm1:.3e}, "
                        f"squarings needed ~ {max(0, math.ceil(math.log2(max(norm1, 1e-300))))})")
    if check is None:
        check = model.dim <= 256
    if check:
        opnorm = np.linalg.norm(K, 2)
        if opnorm > 1 + 1e-10:
            raise ExpmError(f"||K(t)|| = {opnorm!r} exceeds 1: the generator is not dissipative")
    return K


def evolve_states(model: QuantumModel, times) -> np.ndarray:
    """Rows K(t_j) psi0 for ascending ``times``.

    Dense models step with one cached exponential per distinct time increment;
    sparse (line) models use the action of the exponential on the vector.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("times must be ascending and non-negative")
    G = model.generator()
    if model.is_sparse or model.dim > _DENSE_LIMIT:
        G = sp.csr_matrix(G)
        out = np.empty((len(times), model.dim), dtype=complex)
        steps = np.diff(times)
        if len(times) > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0):
            out[:] = expm_multiply(G, model.psi0.astype(complex), start=times[0], stop=times[-1],
                                   num=len(times), endpoint=True)
            return out
        state = expm_multiply(G * times[0], model.psi0.astype(complex)) if times[0] > 0 else model.psi0.astype(complex)
        for j, dt in enumerate(np.concatenate([[0.0], steps])):
            if dt > 0:
                state = expm_multiply(G * dt, state)
            out[j] = state
        return out
    G = np.asarray(G)
    cache: dict[float, np.ndarray] = {}
    state = model.psi0.astype(complex)
    out = np.empty((len(times), model.dim), dtype=complex)
    prev = 0.0
    for j, t in enumerate(times):
        dt = t - prev
        if dt > 0:
            key = round(dt, 14)
            if key not in cache:
                cache[key] = scipy.linalg.expm(G * dt)
            state = cache[key] @ state
        out[j] = state
        prev = t
    return out


def survival(model: QuantumModel, t) -> np.ndarray:
    """S(t) = <psi|K(t)^dag K(t)|psi>."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t_arr)
    states = evolve_states(model, t_arr[order])
    out = np.empty(len(t_arr))
    out[order] = np.sum(np.abs(states) ** 2, axis=1)
    return out if np.ndim(t) else out[0]


def detection_probability(model: QuantumModel, t):
    """P(t) = 1 - S(t)."""
    return 1.0 - survival(model, t)


def detection_density(model: QuantumModel, t):
    """p(t) = kappa |<u|K(t)|psi>|^2."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t_arr)
    states = evolve_states(model, t_arr[order])
    out = np.empty(len(t_arr))
    out[order] = model.kappa * np.abs(states @ model.u.conj()) ** 2
    return out if np.ndim(t) else out[0]


def rate_function(model: QuantumModel, t, floor: float = SURVIVAL_FLOOR):
    """Detection hazard lambda(t) = kappa |<u|K psi>|^2 / <psi|K^dag K|psi>."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t_arr)
    states = evolve_states(model, t_arr[order])
    S = np.sum(np.abs(states) ** 2, axis=1)
    if np.any(S < floor):
        bad = t_arr[order][np.argmax(S < floor)]
        raise StateExhaustedError(f"state exhausted: survival below {floor:g} at t={bad!r}")
    out = np.empty(len(t_arr))
    out[order] = model.kappa * np.abs(states @ model.u.conj()) ** 2 / S
    return out if np.ndim(t) else out[0]


class SpectralRate:
    """Vectorised lambda(t), p(t), S(t) through an eigendecomposition of the generator.

    Only valid when the eigenvector matrix is well conditioned; the
    constructor checks this and refuses otherwise.
    """

    def __init__(self, model: QuantumModel, max_condition: float = 1e8):
        G = model.generator()
        G = G.toarray() if sp.issparse(G) else np.asarray(G)
        lam, V = np.linalg.eig(G)
        cond = np.linalg.cond(V)
        if not cond < max_condition:
            raise ExpmError(f"generator eigenvectors are ill-conditioned (cond = {cond:.3e})")
        self.model = model
        self.lam = lam
        self.coef = np.linalg.solve(V, model.psi0.astype(complex))
        self.u_row = model.u.conj() @ V
        self.gram = V.conj().T @ V

    def amplitudes(self, t):
        return np.exp(np.outer(np.atleast_1d(t), self.lam)) * self.coef

    def survival(self, t):
        c = self.amplitudes(t)
        return np.real(np.sum((c.conj() @ self.gram) * c, axis=1))

    def density(self, t):
        return self.model.kappa * np.abs(self.amplitudes(t) @ self.u_row) ** 2

    def rate(self, t, floor: float = SURVIVAL_FLOOR):
        S = self.survival(t)
        if np.any(S < floor):
            raise StateExhaustedError(f"state exhausted: survival below {floor:g}")
        return self.density(t) / S


@dataclass
class CoupledState:
    """rho0: detector has fired; rho1: detector still silent."""

    rho0: np.ndarray
    rho1: np.ndarray

    @classmethod
    def initial(cls, model: QuantumModel) -> "CoupledState":
        psi = model.psi0.astype(complex)
        return cls(np.zeros((model.dim, model.dim), dtype=complex), np.outer(psi, psi.conj()))

    @property
    def total_trace(self) -> float:
        return float(np.real(np.trace(self.rho0) + np.trace(self.rho1)))


def master_evolve(model: QuantumModel, state: CoupledState, t: float, tol: float = 1e-10,
                  max_steps: int = 1_000_000) -> CoupledState:
    """Integrate the coupled pair

        d rho1/dt = -i[H, rho1] - (1/2){F^2, rho1}
        d rho0/dt = -i[H, rho0] + F rho1 F

    with an embedded Dormand-Prince 8(5,3) pair.  The total trace is checked
    after every accepted step.
    """
    if t < 0:
        raise ValueError("master_evolve integrates forward in time only")
    if model.is_sparse:
        raise ValueError("master_evolve works on dense models; use evolve_states for line models")
    n = model.dim
    H = np.asarray(model.hamiltonian, dtype=complex)
    u = model.u.astype(complex)
    P = np.outer(u, u.conj())
    kappa = model.kappa
    trace0 = state.total_trace

    def rhs(_, y):
        r0 = y[: n * n].reshape(n, n)
        r1 = y[n * n :].reshape(n, n)
        d1 = -1j * (H @ r1 - r1 @ H) - 0.5 * kappa * (P @ r1 + r1 @ P)
        d0 = -1j * (H @ r0 - r0 @ H) + kappa * (u.conj() @ r1 @ u) * P
        return np.concatenate([d0.ravel(), d1.ravel()])

    y0 = np.concatenate([state.rho0.ravel(), state.rho1.ravel()]).astype(complex)
    if t == 0:
        return CoupledState(state.rho0.copy(), state.rho1.copy())
    solver = DOP853(rhs, 0.0, y0, t, rtol=tol, atol=tol * 1e-2)
    steps = 0
    while solver.status == "running":
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepSizeError(f"master equation integration failed at t={solver.t!r}: {msg}")
        y = solver.y
        defect = abs(np.real(np.trace(y[: n * n].reshape(n, n)) + np.trace(y[n * n :].reshape(n, n))) - trace0)
        if defect > max(tol, 1e-12) * 10:
            raise StepSizeError(f"trace defect {defect:.3e} at t={solver.t!r} exceeds tolerance")
        if steps > max_steps:
            raise StepSizeError(f"more than {max_steps} steps needed to reach t={t}")
    y = solver.y
    return CoupledState(y[: n * n].reshape(n, n).copy(), y[n * n :].reshape(n, n).copy())


# -- line discretisation ---------------------------------------------------

def line_grid(x_min: float, x_max: float, dx: float) -> np.ndarray:
    n = int(round((x_max - x_min) / dx)) + 1
    return x_min + dx * np.arange(n)


def discretized_line_model(grid: np.ndarray, packet: GaussianPacket, det: DetectorSpec) -> QuantumModel:
    """Three-point finite-difference particle on a line with hard walls.

    The delta-normalised sensitive state |u> becomes the unit vector at the
    detector node; the delta's 1/dx is absorbed into kappa_eff = kappa / dx.
    """
    x = np.asarray(grid, dtype=float)
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise ValueError("line grid must be uniform")
    idx = int(round((det.a - x[0]) / dx))
    if not (0 <= idx < len(x)) or abs(x[idx] - det.a) > 1e-9 * max(1.0, abs(dx)):
        raise ValueError(f"detector position {det.a} is not a grid node")
    n = len(x)
    main = np.full(n, 1.0 / dx**2)
    off = np.full(n - 1, -0.5 / dx**2)
    H = sp.diags([off, main, off], [-1, 0, 1], format="csr", dtype=complex)
    u = np.zeros(n)
    u[idx] = 1.0
    psi = free_packet_amplitude(packet, x, 0.0)
    psi = psi / np.linalg.norm(psi)
    return QuantumModel(H, u, det.kappa / dx, psi)
