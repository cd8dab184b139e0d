"""Closed-form results for the damped XY pair.

Covers the zero-temperature trajectory from ``|gg>`` (in the Hamiltonian
eigenbasis), the zero- and finite-temperature steady states, their
concurrences, the anisotropy that maximizes the steady concurrence, and the
bath occupation at which thermal steady-state entanglement disappears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotFoundError, UnsupportedRegimeError
from .model import ModelParams, eigenbasis, master_rhs
from .qmath import max_abs

GOLDEN_MAX_CONCURRENCE = 1.0 / (1.0 + math.sqrt(5.0))

NSTAR_TOL = 1e-10
NSTAR_SEARCH_LIMIT = 1e3


@dataclass(frozen=True)
class AnalyticSteadyState:
    rho: np.ndarray
    regime: str  # "zero_temperature" or "finite_temperature"
    residual: float  # max |master_rhs(rho)|


@dataclass(frozen=True)
class OptimumReport:
    delta_max: float
    c_at_optimum: float
    positivity_bound_ok: bool  # 4 omega^2 + gamma^2 >= delta_max^2


def _steady(p: ModelParams, rho: np.ndarray, regime: str) -> AnalyticSteadyState:
    return AnalyticSteadyState(rho=rho, regime=regime, residual=max_abs(master_rhs(p, rho)))


# --------------------------------------------------------------------------
# zero temperature


def analytic_trajectory_gg(p: ModelParams, t: float) -> np.ndarray:
    """Eigenbasis density matrix at time ``t`` for the initial state ``|gg>``."""
    if p.nbar != 0:
        raise UnsupportedRegimeError("the analytic trajectory is only known at zero temperature")
    if p.delta == 0:
        raise DomainError("the analytic trajectory degenerates at delta == 0; integrate instead")
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    w, d, g = p.omega, p.delta, p.gamma
    big = math.hypot(w, d)
    alpha = 4.0 * big**2 + g**2
    e1 = math.exp(-g * t)
    e2 = math.exp(-2.0 * g * t)
    sin2 = math.sin(2.0 * big * t)
    cos2 = math.cos(2.0 * big * t)

    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = (
        -w * alpha + 2.0 * big * d**2 * e2 + big * (alpha - 2.0 * d**2) + 2.0 * e1 * d**2 * g * sin2
    ) / (2.0 * big * alpha)
    out[1, 1] = d**2 / (big * alpha) * (big - big * e2 - e1 * g * sin2)
    out[2, 2] = out[1, 1]
    out[3, 3] = 1.0 - out[0, 0] - out[1, 1] - out[2, 2]
    # The eigenbasis matrix is even in delta (delta -> -delta is a collective
    # z rotation); with positive normalizers the coherence carries |delta|.
    out[0, 3] = abs(d) / (4j * big**2 + 2.0 * big * g) * (2j * big * e1 * cos2 + 2.0 * big * e1 * sin2 + g)
    out[3, 0] = np.conj(out[0, 3])
    return out


def analytic_trajectory_gg_product(p: ModelParams, t: float) -> np.ndarray:
    """Same trajectory expressed in the product basis."""
    u = eigenbasis(p).states
    return u @ analytic_trajectory_gg(p, t) @ u.conj().T


def steady_state_t0(p: ModelParams) -> AnalyticSteadyState:
    if p.nbar != 0:
        raise UnsupportedRegimeError("steady_state_t0 requires nbar == 0")
    w, d, g = p.omega, p.delta, p.gamma
    alpha = 4.0 * (w**2 + d**2) + g**2
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[1, 1] = rho[2, 2] = d**2 / alpha
    rho[3, 3] = 1.0 - 3.0 * d**2 / alpha
    rho[0, 3] = (-2.0 * w * d - 1j * d * g) / alpha
    rho[3, 0] = np.conj(rho[0, 3])
    return _steady(p, rho, "zero_temperature")


def steady_concurrence_t0(p: ModelParams, clamp: bool = True) -> float:
    w, d, g = p.omega, p.delta, p.gamma
    alpha = 4.0 * (w**2 + d**2) + g**2
    c = (2.0 * math.sqrt(d**2 * (4.0 * w**2 + g**2)) - 2.0 * d**2) / alpha
    return max(c, 0.0) if clamp else c


def steady_concurrence_t0_grid(omega_bar, delta_bar, clamp: bool = True) -> np.ndarray:
    """Vectorized zero-temperature steady concurrence in scaled units (gamma = 1)."""
    w = np.asarray(omega_bar, dtype=float)
    d = np.asarray(delta_bar, dtype=float)
    c = (2.0 * np.sqrt(d**2 * (4.0 * w**2 + 1.0)) - 2.0 * d**2) / (4.0 * (w**2 + d**2) + 1.0)
    return np.maximum(c, 0.0) if clamp else c


def delta_max(omega: float, gamma: float) -> float:
    """Anisotropy maximizing the zero-temperature steady concurrence at fixed omega."""
    return math.sqrt(4.0 * omega**2 + gamma**2) / (1.0 + math.sqrt(5.0))


def global_max_concurrence() -> float:
    return 1.0 / (1.0 + math.sqrt(5.0))


def optimum_report(omega: float, gamma: float) -> OptimumReport:
    dm = delta_max(omega, gamma)
    c = steady_concurrence_t0(ModelParams(omega=omega, j=0.0, delta=dm, gamma=gamma))
    return OptimumReport(
        delta_max=dm, c_at_optimum=c, positivity_bound_ok=4.0 * omega**2 + gamma**2 >= dm**2
    )


# --------------------------------------------------------------------------
# finite temperature


def _finite_t_pieces(omega_bar: float, delta_bar: float, nbar: float):
    s = 1.0 + 2.0 * nbar
    big4 = 4.0 * omega_bar**2 + s**2  # 4 w^2 + (1+2n)^2
    den = big4 + 4.0 * delta_bar**2  # 4 Omega^2 + (1+2n)^2
    return s, big4, den


def steady_state_finite_t(p: ModelParams) -> AnalyticSteadyState:
    d = p.derived
    wb, db, n = d.omega_bar, d.delta_bar, p.nbar
    s, big4, den = _finite_t_pieces(wb, db, n)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (n**2 * big4 + db**2 * s**2) / (s**2 * den)
    rho[1, 1] = rho[2, 2] = 0.25 * (1.0 - big4 / (s**2 * den))
    rho[3, 3] = (4.0 * wb**2 * (1.0 + n) ** 2 + s**2 * ((1.0 + n) ** 2 + db**2)) / (s**2 * den)
    rho[0, 3] = -db * (2.0 * wb + 1j * s) / (s * den)
    rho[3, 0] = np.conj(rho[0, 3])
    return _steady(p, rho, "finite_temperature")


def steady_concurrence_finite_t_scaled(omega_bar, delta_bar, nbar, clamp: bool = True):
    """Thermal steady-state concurrence in scaled units; vectorizes over inputs."""
    wb = np.asarray(omega_bar, dtype=float)
    db = np.asarray(delta_bar, dtype=float)
    n = np.asarray(nbar, dtype=float)
    s = 1.0 + 2.0 * n
    big4 = 4.0 * wb**2 + s**2
    den = 4.0 * (wb**2 + db**2) + s**2
    c = 2.0 * np.sqrt(db**2 * big4) / (s * den) - 0.5 + big4 / (2.0 * s**2 * den)
    if clamp:
        c = np.maximum(c, 0.0)
    return float(c) if c.ndim == 0 else c


def steady_concurrence_finite_t(p: ModelParams, clamp: bool = True) -> float:
    d = p.derived
    return steady_concurrence_finite_t_scaled(d.omega_bar, d.delta_bar, p.nbar, clamp=clamp)


def vanishing_temperature(p: ModelParams) -> float:
    """Smallest ``nbar`` at which the thermal steady concurrence reaches zero.

    The crossing is bracketed by doubling from ``nbar = 0`` and refined by
    bisection of the unclamped closed form to ``NSTAR_TOL``.
    """
    d = p.derived

    def f(n: float) -> float:
        return steady_concurrence_finite_t_scaled(d.omega_bar, d.delta_bar, n, clamp=False)

    if f(0.0) <= 0.0:
        raise DomainError("steady concurrence is already zero at nbar = 0")
    lo, hi = 0.0, 1.0 / 64.0
    while f(hi) > 0.0:
        lo = hi
        hi *= 2.0
        if hi > NSTAR_SEARCH_LIMIT:
            raise NotFoundError(f"no sign change of the concurrence up to nbar = {NSTAR_SEARCH_LIMIT:g}")
    while hi - lo > NSTAR_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
