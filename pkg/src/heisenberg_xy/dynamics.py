"""Time integration of the master equation and steady-state solvers."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np

from . import qmath
from .entanglement import concurrence
from .errors import MultiplicityError, NumericError, SingularMatrixError, UsageError
from .model import (
    ModelParams,
    eigenbasis,
    liouvillian_superoperator,
    master_rhs,
    unvec,
    validate_density_matrix,
    vec,
)

log = logging.getLogger(__name__)

STEP_FRACTION = 0.05
# Default step as a fraction of the bound; at the full bound RK4 truncation
# pushes the smallest eigenvalue of near-pure states just below -1e-8.
DEFAULT_DT_FRACTION = 0.5
RATE_FLOOR = 1e-12
CORRECTION_LIMIT = 1e-9
POSITIVITY_FAIL = 1e-6
STEADY_RESIDUAL_LIMIT = 1e-8


def max_stable_dt(p: ModelParams) -> float:
    """Largest step allowed for ``p``: 5% of the fastest time scale."""
    big = math.hypot(p.omega, p.delta)
    return STEP_FRACTION * min(1.0 / p.gamma, 1.0 / max(big, RATE_FLOOR), 1.0 / max(abs(p.j), RATE_FLOOR))


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_max: float
    record_stride: int = 1
    convergence_tol: float = 1e-9
    convergence_window: Optional[float] = None  # None -> 5 / gamma

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise UsageError(f"dt and t_max must be positive (dt={self.dt}, t_max={self.t_max})")
        if self.record_stride < 1:
            raise UsageError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.convergence_tol <= 0:
            raise UsageError("convergence_tol must be positive")
        if self.convergence_window is not None and self.convergence_window <= 0:
            raise UsageError("convergence_window must be positive")

    @classmethod
    def for_params(
        cls,
        p: ModelParams,
        dt: Optional[float] = None,
        t_max: Optional[float] = None,
        **kwargs,
    ) -> "IntegratorConfig":
        """Config with defaults derived from ``p``; the step bound is checked here."""
        cfg = cls(
            dt=DEFAULT_DT_FRACTION * max_stable_dt(p) if dt is None else dt,
            t_max=30.0 / p.gamma if t_max is None else t_max,
            **kwargs,
        )
        return cfg.resolved(p)

    def resolved(self, p: ModelParams) -> "IntegratorConfig":
        bound = max_stable_dt(p)
        if self.dt > bound * (1.0 + 1e-12):
            raise UsageError(f"dt={self.dt:.6g} exceeds the stability bound {bound:.6g} for these parameters")
        if self.convergence_window is None:
            return replace(self, convergence_window=5.0 / p.gamma)
        return self


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 4, 4)
    concurrences: np.ndarray
    converged_at: Optional[float] = None
    max_trace_correction: float = 0.0
    max_hermiticity_correction: float = 0.0
    min_eigenvalue: float = 0.0

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    method: str  # "nullspace", "longtime" or "analytic"
    residual: float


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step for ``y' = f(y)``."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(generator: np.ndarray, h: float) -> np.ndarray:
    """Matrix applied by one RK4 step of the linear system ``y' = G y``.

    For a constant linear generator the four stages collapse to the
    degree-four Taylor polynomial of ``h G``.
    """
    hg = h * np.asarray(generator, dtype=complex)
    out = np.eye(hg.shape[0], dtype=complex)
    term = out
    for k in range(1, 5):
        term = term @ hg / k
        out = out + term
    return out


def integrate(
    p: ModelParams,
    rho0,
    cfg: IntegratorConfig,
    dissipation: bool = True,
    stop_on_convergence: bool = False,
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation from ``rho0``.

    After every step the state is symmetrized and renormalized to unit
    trace; a correction larger than ``CORRECTION_LIMIT`` aborts the run.
    The effective step is ``t_max / ceil(t_max / dt)`` so the final time is
    hit exactly.  ``converged_at`` is the first recorded time at which the
    max-entry change over ``cfg.convergence_window`` falls below
    ``cfg.convergence_tol``.
    """
    cfg = cfg.resolved(p)
    rho = validate_density_matrix(rho0).copy()
    n_steps = max(1, math.ceil(cfg.t_max / cfg.dt - 1e-9))
    h = cfg.t_max / n_steps
    prop = rk4_propagator(liouvillian_superoperator(p, dissipation=dissipation), h)

    record_dt = h * cfg.record_stride
    lag = max(1, math.ceil(cfg.convergence_window / record_dt - 1e-9))

    times, states, concs = [], [], []
    converged_at = None
    worst_trace = worst_herm = 0.0
    min_eig = math.inf

    def record(step: int, state: np.ndarray) -> None:
        nonlocal converged_at, min_eig
        lowest = float(np.linalg.eigvalsh(state)[0])
        min_eig = min(min_eig, lowest)
        if lowest < -POSITIVITY_FAIL:
            raise NumericError(
                f"positivity lost at t={step * h:.6g} (min eigenvalue {lowest:.3e}); reduce dt"
            )
        times.append(step * h)
        states.append(state.copy())
        concs.append(concurrence(state))
        if converged_at is None and len(states) > lag:
            drift = qmath.max_abs(states[-1] - states[-1 - lag])
            if drift < cfg.convergence_tol:
                converged_at = times[-1]

    record(0, rho)
    v = vec(rho)
    for step in range(1, n_steps + 1):
        raw = unvec(prop @ v)
        sym = 0.5 * (raw + raw.conj().T)
        herm_corr = qmath.max_abs(raw - sym)
        tr = np.trace(sym).real
        trace_corr = abs(tr - 1.0)
        worst_herm = max(worst_herm, herm_corr)
        worst_trace = max(worst_trace, trace_corr)
        if herm_corr > CORRECTION_LIMIT or trace_corr > CORRECTION_LIMIT:
            raise NumericError(
                f"step {step}: correction too large (hermiticity {herm_corr:.3e}, trace {trace_corr:.3e}); reduce dt"
            )
        rho = sym / tr
        v = vec(rho)
        if step % cfg.record_stride == 0 or step == n_steps:
            record(step, rho)
            if stop_on_convergence and converged_at is not None:
                break

    log.debug(
        "integrated %d steps of %.3g: max trace correction %.2e, max hermiticity correction %.2e",
        step, h, worst_trace, worst_herm,
    )
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        concurrences=np.array(concs),
        converged_at=converged_at,
        max_trace_correction=worst_trace,
        max_hermiticity_correction=worst_herm,
        min_eigenvalue=min_eig,
    )


def _finish_steady(p: ModelParams, rho: np.ndarray, method: str) -> SteadyStateResult:
    rho = qmath.symmetrize(rho)
    rho = rho / np.trace(rho).real
    residual = qmath.max_abs(master_rhs(p, rho))
    if residual >= STEADY_RESIDUAL_LIMIT:
        raise NumericError(f"{method} steady state residual {residual:.3e} exceeds {STEADY_RESIDUAL_LIMIT}")
    return SteadyStateResult(rho=validate_density_matrix(rho), method=method, residual=residual)


def steady_state_nullspace(p: ModelParams) -> SteadyStateResult:
    """Steady state from ``L vec(rho) = 0`` with one row swapped for ``tr(rho) = 1``."""
    lv = liouvillian_superoperator(p).copy()
    trace_row = vec(np.eye(4)).real
    lv[0, :] = trace_row
    rhs = np.zeros(16, dtype=complex)
    rhs[0] = 1.0
    try:
        sol = qmath.solve_linear(lv, rhs)
    except SingularMatrixError as exc:
        raise MultiplicityError(f"steady state is not unique: {exc}") from exc
    return _finish_steady(p, unvec(sol.x), "nullspace")


def steady_state_longtime(p: ModelParams, rho0, cfg: IntegratorConfig) -> SteadyStateResult:
    if cfg.t_max < 20.0 / p.gamma * (1.0 - 1e-12):
        raise UsageError(f"t_max must be at least 20/gamma = {20.0 / p.gamma:.6g}")
    traj = integrate(p, rho0, cfg, stop_on_convergence=True)
    if traj.converged_at is None:
        cfg = cfg.resolved(p)
        n_lag = max(1, int(np.searchsorted(traj.times, traj.times[-1] - cfg.convergence_window)))
        drift = qmath.max_abs(traj.states[-1] - traj.states[min(n_lag, len(traj) - 1)])
        raise NumericError(
            f"no convergence by t={traj.times[-1]:.6g} (drift over window {drift:.3e} "
            f">= tol {cfg.convergence_tol:.1e})"
        )
    return _finish_steady(p, traj.states[-1], "longtime")


def transform_to_eigenbasis(p: ModelParams, rho) -> np.ndarray:
    u = eigenbasis(p).states
    return u.conj().T @ np.asarray(rho, dtype=complex) @ u


def transform_from_eigenbasis(p: ModelParams, rho_bar) -> np.ndarray:
    u = eigenbasis(p).states
    return u @ np.asarray(rho_bar, dtype=complex) @ u.conj().T


def map_ordered(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Apply ``fn`` to independent items; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
