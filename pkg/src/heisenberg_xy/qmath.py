"""Small dense complex linear algebra for two-qubit state and superoperator work.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` with shape
``(d, d)`` where ``d`` is 2, 4 or 16.  The eigensolver is a cyclic Jacobi
method for Hermitian input and the linear solver is Gaussian elimination with
partial pivoting; both are written out here so that their tolerances and
failure modes are under our control.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericError, SingularMatrixError, UsageError

SUPPORTED_DIMS = (2, 4, 16)

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
JACOBI_REL_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
PIVOT_REL_TOL = 1e-13

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class HermitianEigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # orthonormal columns


class LinearSolution(NamedTuple):
    x: np.ndarray
    residual: float  # max |a x - rhs|


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a square complex matrix of a supported dimension."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] not in SUPPORTED_DIMS:
        raise UsageError(f"unsupported dimension {m.shape[0]}; expected one of {SUPPORTED_DIMS}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` acting on the first (leftmost) factor."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim not in (4, 16):
        raise UsageError(f"unsupported Kronecker output dimension {out_dim}")
    return as_matrix(np.kron(a, b))


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return max_abs(a - a.conj().T)


def symmetrize(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def hermitian_eigen(a) -> HermitianEigenDecomposition:
    """Eigen-decompose a Hermitian matrix by cyclic Jacobi rotations.

    The input is symmetrized as ``(a + a^H) / 2`` first; inputs whose
    Hermiticity defect exceeds ``HERMITIAN_TOL`` are rejected.  Sweeps run
    until the off-diagonal Frobenius norm drops below
    ``JACOBI_REL_TOL * ||a||_F``.

    Returns
    -------
    HermitianEigenDecomposition
        Eigenvalues ascending, eigenvectors as orthonormal columns.
    """
    a = as_matrix(a)
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_TOL:
        raise DomainError(f"matrix is not Hermitian (max |a - a^H| = {defect:.3e})")
    sym = symmetrize(a)
    n = sym.shape[0]
    target = JACOBI_REL_TOL * float(np.linalg.norm(sym))
    # Plain Python complex arithmetic: at n <= 16 the per-call overhead of
    # numpy slicing dominates the rotation cost.
    work = sym.tolist()
    vecs = np.eye(n, dtype=complex).tolist()

    def off_norm() -> float:
        return sum(abs(work[i][j]) ** 2 for i in range(n) for j in range(n) if i != j) ** 0.5

    converged = False
    for _ in range(JACOBI_MAX_SWEEPS):
        if off_norm() <= target:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p][q]
                r = abs(apq)
                if r == 0.0:
                    continue
                # Phase-rotate the pair so the coupling is real, then apply a
                # real symmetric Jacobi rotation.
                phase = apq / r
                cph = phase.conjugate()
                theta = (work[q][q].real - work[p][p].real) / (2.0 * r)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # work <- G^H work G and vecs <- vecs G with
                # G = [[c, s], [-s * cph, c * cph]] on the (p, q) plane.
                for row in work:
                    xp, xq = row[p], row[q]
                    row[p] = c * xp - s * cph * xq
                    row[q] = s * xp + c * cph * xq
                row_p, row_q = work[p], work[q]
                for k in range(n):
                    xp, xq = row_p[k], row_q[k]
                    row_p[k] = c * xp - s * phase * xq
                    row_q[k] = s * xp + c * phase * xq
                for row in vecs:
                    xp, xq = row[p], row[q]
                    row[p] = c * xp - s * cph * xq
                    row[q] = s * xp + c * cph * xq
                row_p[q] = 0.0
                row_q[p] = 0.0
                row_p[p] = complex(row_p[p].real)
                row_q[q] = complex(row_q[q].real)
    else:
        converged = off_norm() <= target

    if not converged:
        raise NumericError(
            f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps "
            f"(off-diagonal residual {off_norm():.3e}, target {target:.3e})"
        )

    vals = np.array([work[i][i].real for i in range(n)])
    vecs = np.array(vecs, dtype=complex)
    order = np.argsort(vals, kind="stable")
    return HermitianEigenDecomposition(vals[order], vecs[:, order])


def eigvalsh(a) -> np.ndarray:
    return hermitian_eigen(a).eigenvalues


def psd_sqrt(a, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as zero.
    """
    vals, vecs = hermitian_eigen(a)
    if vals[0] < -tol:
        raise DomainError(f"matrix is not positive semidefinite (min eigenvalue {vals[0]:.3e})")
    roots = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * roots) @ vecs.conj().T


def solve_linear(a, rhs) -> LinearSolution:
    """Solve ``a x = rhs`` by Gaussian elimination with partial pivoting."""
    a = as_matrix(a)
    b = np.asarray(rhs, dtype=complex).reshape(-1)
    n = a.shape[0]
    if b.shape[0] != n:
        raise UsageError(f"rhs length {b.shape[0]} does not match matrix dimension {n}")
    scale = max_abs(a)
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    threshold = PIVOT_REL_TOL * scale

    m = a.copy()
    x = b.copy()
    for k in range(n):
        piv = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[piv, k]) < threshold:
            raise SingularMatrixError(
                f"pivot {abs(m[piv, k]):.3e} at column {k} below threshold {threshold:.3e}"
            )
        if piv != k:
            m[[k, piv]] = m[[piv, k]]
            x[[k, piv]] = x[[piv, k]]
        factors = m[k + 1 :, k] / m[k, k]
        m[k + 1 :, k:] -= np.outer(factors, m[k, k:])
        x[k + 1 :] -= factors * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - m[k, k + 1 :] @ x[k + 1 :]) / m[k, k]

    residual = max_abs(a @ x - b)
    return LinearSolution(x, residual)
