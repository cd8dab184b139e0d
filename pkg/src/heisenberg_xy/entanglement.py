"""Concurrence and coherence diagnostics for two-qubit density matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import qmath
from .errors import DomainError, NumericError, UsageError
from .model import DM_POSITIVITY_TOL, SECOND_BLOCK, validate_density_matrix

X_PATTERN_TOL = 1e-10
LAMBDA_NEG_TOL = 1e-10

SIGMA_YY = qmath.kron(qmath.PAULI_Y, qmath.PAULI_Y)

_ENTRY_NAMES = {(i, k): f"rho{i + 1}{k + 1}" for i in range(4) for k in range(4)}


@dataclass(frozen=True)
class ConcurrenceResult:
    lambdas: np.ndarray  # eigenvalues of the spin-flip product, descending
    c: float
    c1: Optional[float] = None
    c2: Optional[float] = None


@dataclass(frozen=True)
class CoherenceReport:
    reduced_a: np.ndarray
    reduced_b: np.ndarray
    local_coherence_a: float
    local_coherence_b: float
    global_14: complex
    global_23: complex


def _wootters_value(lambdas: np.ndarray) -> float:
    roots = np.sqrt(lambdas)
    return float(min(max(roots[0] - roots[1] - roots[2] - roots[3], 0.0), 1.0))


def spin_flip(rho) -> np.ndarray:
    """``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`` in the product basis."""
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY


def concurrence_general(rho) -> ConcurrenceResult:
    """Wootters concurrence of an arbitrary two-qubit state.

    The eigenvalues of ``R = rho rho~`` are taken from the Hermitian,
    positive semidefinite product ``sqrt(rho) rho~ sqrt(rho)``, which has
    the same spectrum.  Near rank-deficient states the square roots of
    round-off sized eigenvalues limit the accuracy to roughly ``1e-8``.
    """
    rho = validate_density_matrix(rho)
    root = qmath.psd_sqrt(rho, tol=DM_POSITIVITY_TOL)
    product = qmath.symmetrize(root @ spin_flip(rho) @ root)
    vals = qmath.eigvalsh(product)
    if vals[0] < -LAMBDA_NEG_TOL:
        raise NumericError(f"spin-flip spectrum has negative eigenvalue {vals[0]:.3e}")
    lambdas = np.clip(vals, 0.0, None)[::-1].copy()
    return ConcurrenceResult(lambdas=lambdas, c=_wootters_value(lambdas))


def x_form_defect(rho) -> tuple[float, tuple[int, int]]:
    """Largest entry outside the X pattern and its position."""
    rho = np.asarray(rho)
    pos = max(SECOND_BLOCK, key=lambda ik: abs(rho[ik]))
    return float(abs(rho[pos])), pos


def is_x_form(rho, tol: float = X_PATTERN_TOL) -> bool:
    return x_form_defect(rho)[0] <= tol


def concurrence_x_form(rho) -> ConcurrenceResult:
    """Closed-form concurrence of an X-shaped state.

    Raises :class:`DomainError` naming the offending entry when ``rho`` has
    weight outside the diagonal and anti-diagonal.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"density matrix must be 4x4, got shape {rho.shape}")
    defect, pos = x_form_defect(rho)
    if defect > X_PATTERN_TOL:
        raise DomainError(f"not an X-form state: |{_ENTRY_NAMES[pos]}| = {defect:.3e}")
    p11, p22, p33, p44 = (max(rho[k, k].real, 0.0) for k in range(4))
    outer = math.sqrt(p11 * p44)
    inner = math.sqrt(p22 * p33)
    g14 = abs(rho[3, 0])
    g23 = abs(rho[2, 1])
    c1 = 2.0 * (g14 - inner)
    c2 = 2.0 * (g23 - outer)
    roots = np.array([outer + g14, abs(outer - g14), inner + g23, abs(inner - g23)])
    lambdas = np.sort(roots**2)[::-1]
    c = min(max(0.0, c1, c2), 1.0)
    return ConcurrenceResult(lambdas=lambdas, c=c, c1=c1, c2=c2)


def concurrence(rho) -> float:
    """Concurrence via the closed form when ``rho`` is X-shaped, else Wootters."""
    if is_x_form(rho):
        return concurrence_x_form(rho).c
    return concurrence_general(rho).c


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduced 2x2 state of qubit ``A`` (first) or ``B`` (second)."""
    t = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("jijk->ik", t)
    raise UsageError(f"keep must be 'A' or 'B', got {keep!r}")


def coherence_report(rho) -> CoherenceReport:
    rho = np.asarray(rho, dtype=complex)
    ra = partial_trace(rho, "A")
    rb = partial_trace(rho, "B")
    return CoherenceReport(
        reduced_a=ra,
        reduced_b=rb,
        local_coherence_a=float(abs(ra[0, 1])),
        local_coherence_b=float(abs(rb[0, 1])),
        global_14=complex(rho[0, 3]),
        global_23=complex(rho[1, 2]),
    )


def project_to_density_matrix(m) -> np.ndarray:
    """Nearest-state repair: symmetrize, clamp negative eigenvalues, renormalize."""
    vals, vecs = qmath.hermitian_eigen(qmath.symmetrize(m))
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        raise DomainError("cannot project a negative semidefinite matrix to a state")
    out = (vecs * vals) @ vecs.conj().T
    return qmath.symmetrize(out / np.trace(out).real)


def random_x_state(rng: np.random.Generator) -> np.ndarray:
    """Random X-shaped density matrix (diagonal plus anti-diagonal).

    Populations are Dirichlet distributed and each coherence is a uniform
    fraction of its positivity limit ``sqrt(rho_ii rho_kk)``, so the final
    projection is a guard rather than a clamp and the result is full rank.
    """
    m = np.zeros((4, 4), dtype=complex)
    pops = rng.dirichlet(np.ones(4))
    m[np.diag_indices(4)] = pops
    for i, k in ((0, 3), (1, 2)):
        mag = rng.uniform(0.0, 1.0) * math.sqrt(pops[i] * pops[k])
        m[i, k] = mag * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        m[k, i] = np.conj(m[i, k])
    out = project_to_density_matrix(m)
    # The eigenvectors of an X matrix live in the two blocks; scrub roundoff.
    for i, k in SECOND_BLOCK:
        out[i, k] = 0.0
    return out


def random_density_matrix(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return qmath.symmetrize(rho / np.trace(rho).real)


def random_single_qubit_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
