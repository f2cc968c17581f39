"""
Dense complex matrix utilities.

Every routine takes and returns plain ``numpy.ndarray`` objects of dtype
``complex128``; the functions are pure and safe to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg as sla

from .errors import ContractViolation, InvalidInputError, RankDeficiencyError

UNITARY_IN_TOL = 1e-8
UNITARY_OUT_TOL = 1e-10
HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9
BRANCH_CUT_TOL = 1e-9


def as_matrix(M) -> np.ndarray:
    """Validate a square, finite matrix and return it as complex128."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def unitarity_defect(U: np.ndarray) -> float:
    """Frobenius norm of U^dagger U - I."""
    U = np.asarray(U)
    return float(np.linalg.norm(dagger(U) @ U - np.eye(U.shape[0])))


def hermiticity_defect(H: np.ndarray) -> float:
    H = np.asarray(H)
    return float(np.linalg.norm(H - dagger(H)))


def is_unitary(U, tol: float = UNITARY_OUT_TOL) -> bool:
    return unitarity_defect(U) <= tol


def is_hermitian(H, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(H) <= tol


def require_unitary(U, tol: float = UNITARY_IN_TOL, what: str = "matrix") -> np.ndarray:
    U = as_matrix(U)
    defect = unitarity_defect(U)
    if defect > tol:
        raise ContractViolation(f"{what} is not unitary: ||U^dag U - I||_F = {defect:.3e} > {tol:g}")
    return U


def require_hermitian(H, tol: float = 1e-10, what: str = "matrix") -> np.ndarray:
    H = as_matrix(H)
    defect = hermiticity_defect(H)
    if defect > tol:
        raise ContractViolation(f"{what} is not Hermitian: ||H - H^dag||_F = {defect:.3e} > {tol:g}")
    return H


def matrix_norms(M) -> tuple[float, float]:
    """
    Frobenius and spectral norm of a square matrix.

    Returns
    -------
    (frobenius, spectral) : tuple of float
        ``spectral`` is the largest singular value, so it never exceeds
        ``frobenius``.
    """
    A = as_matrix(M)
    frob = float(np.sqrt(np.sum(np.abs(A) ** 2)))
    spec = float(np.linalg.svd(A, compute_uv=False)[0])
    return frob, spec


def nearest_unitary(M, tol: float = 1e-12) -> np.ndarray:
    """
    Unitary polar factor of ``M``, i.e. the Frobenius-nearest unitary matrix.

    Computed from the SVD ``M = W S V^dagger`` as ``W V^dagger``, which equals
    ``M (M^dagger M)^{-1/2}`` without forming the inverse square root.
    """
    A = as_matrix(M)
    W, s, Vh = np.linalg.svd(A)
    if s[-1] <= tol:
        raise RankDeficiencyError(
            f"matrix is numerically singular: smallest singular value {s[-1]:.3e}", float(s[-1])
        )
    return W @ Vh


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with orthogonal projectors; degenerate eigenvalues share one projector."""

    eigenvalues: np.ndarray
    projectors: tuple

    def reconstruct(self) -> np.ndarray:
        return sum(lam * P for lam, P in zip(self.eigenvalues, self.projectors))

    def apply(self, f) -> np.ndarray:
        """Evaluate ``sum_a f(lambda_a) P_a``."""
        return sum(f(lam) * P for lam, P in zip(self.eigenvalues, self.projectors))


def spectral_decomposition(M, tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """
    Spectral resolution of a normal matrix.

    The complex Schur form of a normal matrix is diagonal with a unitary
    basis, so eigenvectors come out orthonormal even inside degenerate
    eigenspaces. Eigenvalues closer than ``tol`` are grouped.
    """
    A = as_matrix(M)
    T, Z = sla.schur(A, output="complex")
    offdiag = np.linalg.norm(T - np.diag(np.diag(T)))
    if offdiag > 1e-8 * max(1.0, np.linalg.norm(A)):
        raise ContractViolation(f"matrix is not normal (Schur off-diagonal norm {offdiag:.3e})")
    vals = np.diag(T)
    groups: list[list[int]] = []
    for i, v in enumerate(vals):
        for g in groups:
            if abs(vals[g[0]] - v) < tol:
                g.append(i)
                break
        else:
            groups.append([i])
    eigenvalues = np.array([vals[g].mean() for g in groups])
    projectors = tuple(Z[:, g] @ dagger(Z[:, g]) for g in groups)
    return SpectralDecomposition(eigenvalues, projectors)


def _principal_phase(z: complex) -> float:
    # -1 sits on the branch cut; pin it to +pi so results are reproducible
    if abs(z + 1.0) < BRANCH_CUT_TOL:
        return float(np.pi)
    return float(np.angle(z))


def hermitian_generator(U) -> np.ndarray:
    """
    Hermitian ``H`` with ``exp(-i H) = U`` (``H = i log U``, principal branch).

    Phases are taken in (-pi, pi]; an eigenvalue of exactly -1 maps to +pi,
    giving the generator eigenvalue -pi.
    """
    U = require_unitary(U, what="gate")
    sd = spectral_decomposition(U)
    H = sd.apply(lambda z: -_principal_phase(z))
    return 0.5 * (H + dagger(H))


def fractional_power(U, k: int) -> np.ndarray:
    """Principal ``k``-th root of a unitary: ``exp(i theta / k)`` on each eigenspace."""
    if int(k) != k or k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k!r}")
    U = require_unitary(U, what="gate")
    if k == 1:
        return U.copy()
    sd = spectral_decomposition(U)
    return sd.apply(lambda z: np.exp(1j * _principal_phase(z) / k))


def expm_hermitian(H, t: float = 1.0) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via ``eigh``."""
    H = np.asarray(H, dtype=complex)
    w, V = np.linalg.eigh(0.5 * (H + dagger(H)))
    return (V * np.exp(-1j * t * w)) @ dagger(V)


def kron(*mats) -> np.ndarray:
    """
    Kronecker product in lexicographic order.

    Entry ``(N2*n1 + n2, N2*m1 + m2)`` of ``kron(A, B)`` is ``A[n1, m1] * B[n2, m2]``.
    """
    if not mats:
        raise InvalidInputError("kron needs at least one matrix")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def realignment_residual(M, dims: tuple[int, int]) -> float:
    """
    Distance of ``M`` from the nearest Kronecker product ``A (x) B``.

    Rearranges ``M`` so that Kronecker products become rank-one matrices
    and returns the Frobenius norm of everything past the leading singular value.
    """
    d1, d2 = dims
    M = np.asarray(M, dtype=complex)
    R = M.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    s = np.linalg.svd(R, compute_uv=False)
    return float(np.sqrt(np.sum(s[1:] ** 2)))
