"""Two-qubit anisotropic XY model: parameters, operators and generators.

Basis convention used everywhere in the package (index 0..3)::

    0 -> |ee>,  1 -> |eg>,  2 -> |ge>,  3 -> |gg>

where the first label is qubit 1.  ``|e>`` is the upper level with
``S_z = +1/2`` so that ``S^-|e> = |g>``.

Superoperators act on column-stacked density matrices, i.e.
``vec(rho)[i + 4*j] == rho[i, j]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import qmath
from .errors import DomainError, UsageError

EE, EG, GE, GG = range(4)

DM_HERMITIAN_TOL = 1e-10
DM_TRACE_TOL = 1e-10
DM_POSITIVITY_TOL = 1e-8

RESTRICTION_LIMIT = 0.1

_SINGLE = {
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "z": np.array([[0.5, 0], [0, -0.5]], dtype=complex),
}


class RestrictionWarning(UserWarning):
    """Parameters fall outside the single-decay-rate validity window."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the driven, damped XY pair.

    ``omega``, ``j`` and ``delta`` are energies (hbar = 1), ``gamma`` is the
    relaxation rate and ``nbar`` the mean thermal occupation of the bath.
    """

    omega: float
    j: float
    delta: float
    gamma: float
    nbar: float = 0.0

    def __post_init__(self):
        for name in ("omega", "j", "delta", "gamma", "nbar"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.nbar < 0:
            raise DomainError(f"nbar must be non-negative, got {self.nbar}")

    @classmethod
    def scaled(cls, omega_bar: float, delta_bar: float, nbar: float = 0.0, j_bar: float = 0.0):
        """Parameters in units of the relaxation rate (gamma = 1)."""
        return cls(omega=omega_bar, j=j_bar, delta=delta_bar, gamma=1.0, nbar=nbar)

    def rescaled(self, k: float) -> "ModelParams":
        """Multiply every rate and energy by ``k`` (``nbar`` is dimensionless)."""
        return ModelParams(self.omega * k, self.j * k, self.delta * k, self.gamma * k, self.nbar)

    def with_(self, **changes) -> "ModelParams":
        fields = dict(omega=self.omega, j=self.j, delta=self.delta, gamma=self.gamma, nbar=self.nbar)
        fields.update(changes)
        return ModelParams(**fields)

    @property
    def derived(self) -> "DerivedParams":
        return DerivedParams.from_params(self)


@dataclass(frozen=True)
class DerivedParams:
    omega_big: float
    alpha: float
    n_plus: float
    n_minus: float
    omega_bar: float
    delta_bar: float
    omega_big_bar: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "DerivedParams":
        omega_big = math.hypot(p.omega, p.delta)
        alpha = 4.0 * omega_big**2 + p.gamma**2
        return cls(
            omega_big=omega_big,
            alpha=alpha,
            n_plus=_normalizer(p.delta, omega_big - p.omega),
            n_minus=_normalizer(p.delta, omega_big + p.omega),
            omega_bar=p.omega / p.gamma,
            delta_bar=p.delta / p.gamma,
            omega_big_bar=omega_big / p.gamma,
        )


def _normalizer(delta: float, gap: float) -> float:
    # (Omega -+ omega) / sqrt(Delta^2 + (Omega -+ omega)^2); nan when both vanish
    denom = math.hypot(delta, gap)
    return gap / denom if denom > 0 else math.nan


class RestrictionReport(NamedTuple):
    j_ratio: float
    anisotropy_ratio: float
    passed: bool


class Eigenbasis(NamedTuple):
    states: np.ndarray  # (4, 4); column k is Phi_{k+1} in the product basis
    energies: np.ndarray  # (4,)
    limit_case: bool  # True when Delta == 0 and the limiting states are returned


# --------------------------------------------------------------------------
# operators


def spin_operator(qubit: int, kind: str) -> np.ndarray:
    """Single-qubit ``S^+``, ``S^-`` or ``S^z`` embedded in the two-qubit space."""
    if kind not in _SINGLE:
        raise UsageError(f"unknown spin operator kind {kind!r}; expected plus, minus or z")
    if qubit == 1:
        return qmath.kron(_SINGLE[kind], qmath.IDENTITY_2)
    if qubit == 2:
        return qmath.kron(qmath.IDENTITY_2, _SINGLE[kind])
    raise UsageError(f"qubit must be 1 or 2, got {qubit!r}")


def build_hamiltonian(p: ModelParams) -> np.ndarray:
    s1p, s1m, s1z = (spin_operator(1, k) for k in ("plus", "minus", "z"))
    s2p, s2m, s2z = (spin_operator(2, k) for k in ("plus", "minus", "z"))
    return (
        p.omega * (s1z + s2z)
        + p.j * (s1p @ s2m + s1m @ s2p)
        + p.delta * (s1p @ s2p + s1m @ s2m)
    )


def eigenbasis(p: ModelParams) -> Eigenbasis:
    """Closed-form eigenstates of the Hamiltonian, ordered (+Omega, +J, -J, -Omega).

    For ``delta == 0`` the anisotropic pair degenerates to the bare product
    states, returned as the limit case.
    """
    omega_big = math.hypot(p.omega, p.delta)
    ee, eg, ge, gg = np.eye(4, dtype=complex)
    phi2 = (eg + ge) / math.sqrt(2)
    phi3 = (ge - eg) / math.sqrt(2)
    if p.delta == 0:
        upper, lower = (ee, gg) if p.omega >= 0 else (gg, ee)
        phi1, phi4 = upper, lower
        limit = True
    else:
        d = p.derived
        phi1 = d.n_plus * (gg + p.delta / (omega_big - p.omega) * ee)
        phi4 = d.n_minus * (gg - p.delta / (omega_big + p.omega) * ee)
        limit = False
    states = np.column_stack([phi1, phi2, phi3, phi4])
    energies = np.array([omega_big, p.j, -p.j, -omega_big])
    return Eigenbasis(states, energies, limit)


def dissipator_apply(a, rho) -> np.ndarray:
    """Lindblad dissipator ``A rho A^H - {A^H A, rho} / 2``."""
    a = np.asarray(a, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    ad = a.conj().T
    ada = ad @ a
    return a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


def _jump_operators(p: ModelParams):
    down = p.gamma * (p.nbar + 1.0)
    up = p.gamma * p.nbar
    ops = [(down, spin_operator(1, "minus")), (down, spin_operator(2, "minus"))]
    if up > 0:
        ops += [(up, spin_operator(1, "plus")), (up, spin_operator(2, "plus"))]
    return ops


def master_rhs(p: ModelParams, rho, dissipation: bool = True) -> np.ndarray:
    """Time derivative of ``rho`` under the (thermal) master equation.

    ``dissipation=False`` drops every jump term and leaves the unitary part.
    """
    rho = np.asarray(rho, dtype=complex)
    h = build_hamiltonian(p)
    out = -1j * (h @ rho - rho @ h)
    if dissipation:
        for rate, op in _jump_operators(p):
            out += rate * dissipator_apply(op, rho)
    return out


def vec(rho) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(4, 4, order="F")


def _left_right(left, right) -> np.ndarray:
    # vec(L X R) = (R^T kron L) vec(X)
    return np.kron(np.asarray(right).T, np.asarray(left))


def liouvillian_superoperator(p: ModelParams, dissipation: bool = True) -> np.ndarray:
    """16x16 generator ``L`` with ``vec(master_rhs(p, rho)) == L @ vec(rho)``."""
    eye = np.eye(4, dtype=complex)
    h = build_hamiltonian(p)
    lv = -1j * (_left_right(h, eye) - _left_right(eye, h))
    if dissipation:
        for rate, op in _jump_operators(p):
            ada = op.conj().T @ op
            lv += rate * (
                _left_right(op, op.conj().T) - 0.5 * _left_right(ada, eye) - 0.5 * _left_right(eye, ada)
            )
    return qmath.as_matrix(lv)


def check_restrictions(p: ModelParams, warn: bool = True) -> RestrictionReport:
    """Validity window of the single-decay-rate model.

    Both ``|J|/omega`` and ``(Omega - omega)/omega`` must stay at or below
    0.1.  A failing report triggers a :class:`RestrictionWarning` unless
    ``warn`` is false; callers decide whether to refuse.
    """
    if p.omega <= 0:
        raise DomainError(f"restrictions are defined for omega > 0, got {p.omega}")
    j_ratio = abs(p.j) / p.omega
    anisotropy_ratio = (math.hypot(p.omega, p.delta) - p.omega) / p.omega
    passed = j_ratio <= RESTRICTION_LIMIT and anisotropy_ratio <= RESTRICTION_LIMIT
    report = RestrictionReport(j_ratio, anisotropy_ratio, passed)
    if warn and not passed:
        warnings.warn(
            f"parameters outside validity window: |J|/omega={j_ratio:.4g}, "
            f"(Omega-omega)/omega={anisotropy_ratio:.4g} (limit {RESTRICTION_LIMIT})",
            RestrictionWarning,
            stacklevel=2,
        )
    return report


# --------------------------------------------------------------------------
# states


def pure_state(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex).reshape(4)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"state vector norm is {norm:.15g}, expected 1")
    return np.outer(v, v.conj())


INITIAL_STATE_NAMES = ("gg", "bell_gg_ee", "mixed_fig1")


def named_initial_state(name: str) -> np.ndarray:
    ee, eg, ge, gg = np.eye(4, dtype=complex)
    if name == "gg":
        return pure_state(gg)
    if name == "bell_gg_ee":
        return pure_state((gg - ee) / math.sqrt(2))
    if name == "mixed_fig1":
        return 0.5 * pure_state(gg) + 0.5 * pure_state((eg + ge) / math.sqrt(2))
    raise UsageError(f"unknown initial state {name!r}; expected one of {INITIAL_STATE_NAMES}")


def validate_density_matrix(rho) -> np.ndarray:
    """Return ``rho`` as a 4x4 complex array after checking it is a state.

    Raises :class:`DomainError` naming the first violated invariant
    (``hermiticity``, ``trace`` or ``positivity``).
    """
    m = np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise DomainError(f"density matrix must be 4x4, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("density matrix has non-finite entries")
    defect = qmath.hermiticity_defect(m)
    if defect > DM_HERMITIAN_TOL:
        raise DomainError(f"hermiticity violated: max |rho - rho^H| = {defect:.3e}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > DM_TRACE_TOL:
        raise DomainError(f"trace violated: tr(rho) = {tr:.12g}")
    lowest = qmath.eigvalsh(m)[0]
    if lowest < -DM_POSITIVITY_TOL:
        raise DomainError(f"positivity violated: smallest eigenvalue {lowest:.3e}")
    return m


# Entries of the second block (coupling odd and even excitation number).
SECOND_BLOCK = ((0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2))


def second_block_magnitude(rho) -> float:
    rho = np.asarray(rho)
    return max(abs(rho[i, k]) for i, k in SECOND_BLOCK)
