"""
Single trapped ion: spin-1/2 coupled to one motional mode.

``H0 = (omega0/2) sigma_z + omega0p a^dag a`` with a transverse drive
``H_I(t) = (Omega(t)/2) sigma_x (I + a + a^dag)``. States are ordered
``(+1/2, n)`` for ``n = 0..N-1`` followed by ``(-1/2, n)``. Because
``sigma_x`` flips the spin, the interaction has only off-diagonal blocks;
the block entries carry the Bohr frequencies ``+-omega0 + omega0p (n - m)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidInputError, ShapeError
from .matrixcore import require_hermitian


@dataclass(frozen=True)
class IonTrapBasis:
    n_fock: int
    omega0: float = 1.0
    omega0p: float = 0.1

    def __post_init__(self):
        if int(self.n_fock) != self.n_fock or self.n_fock < 2:
            raise InvalidInputError(f"n_fock must be an integer >= 2, got {self.n_fock!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n_fock

    def energies(self) -> np.ndarray:
        n = np.arange(self.n_fock)
        return np.concatenate([0.5 * self.omega0 + self.omega0p * n, -0.5 * self.omega0 + self.omega0p * n])

    def flip_frequency(self, k: int, sign: int = 1) -> float:
        """Bohr frequency ``sign * omega0 + omega0p k`` of a spin flip changing ``n`` by ``k``."""
        return sign * self.omega0 + self.omega0p * k


@dataclass(frozen=True)
class CouplingMatrix:
    a_block: np.ndarray = field(repr=False)
    full: np.ndarray = field(repr=False)  # [[0, A], [A, 0]] / 2, per unit drive


def coupling_block(n_fock: int) -> np.ndarray:
    """``a[n, m] = delta[n-m] + sqrt(m) delta[n-m+1] + sqrt(m+1) delta[n-m-1]``, i.e. ``I + a + a^dag``."""
    s = np.sqrt(np.arange(1, n_fock))
    return np.eye(n_fock) + np.diag(s, 1) + np.diag(s, -1)


def iontrap_coupling(basis: IonTrapBasis) -> CouplingMatrix:
    A = coupling_block(basis.n_fock)
    Z = np.zeros_like(A)
    return CouplingMatrix(a_block=A, full=0.5 * np.block([[Z, A], [A, Z]]).astype(complex))


def _diag_range(N: int):
    return range(-(N - 1), N)


def iontrap_design(C, basis: IonTrapBasis) -> dict[int, complex]:
    """
    Per-diagonal least-squares drive samples.

    For each ``k`` minimises ``sum_m |C[m+k, m] - a[m+k, m] Omega_k / 2|^2``,
    giving ``Omega_k = 2 sum C conj(a) / sum |a|^2`` (0 where ``a`` vanishes
    on the whole diagonal). ``Omega_k`` is the drive spectrum at
    ``omega0 + omega0p k``.
    """
    C = require_hermitian(C, tol=1e-10, what="target block")
    N = basis.n_fock
    if C.shape != (N, N):
        raise ShapeError(f"target block must be {(N, N)}, got {C.shape}")
    a = coupling_block(N)
    out = {}
    for k in _diag_range(N):
        c = np.diagonal(C, -k)
        ak = np.diagonal(a, -k)
        den = np.sum(np.abs(ak) ** 2)
        out[k] = complex(2.0 * np.sum(c * np.conj(ak)) / den) if den > 0 else 0j
    return out


def design_residual_projections(C, design: dict[int, complex], basis: IonTrapBasis) -> dict[int, float]:
    """``|sum_m (C - a Omega_k / 2) conj(a)|`` per diagonal; zero at the optimum."""
    C = np.asarray(C, dtype=complex)
    a = coupling_block(basis.n_fock)
    out = {}
    for k in _diag_range(basis.n_fock):
        c = np.diagonal(C, -k)
        ak = np.diagonal(a, -k)
        out[k] = float(abs(np.sum((c - 0.5 * ak * design.get(k, 0j)) * np.conj(ak))))
    return out


def iontrap_generator(design: dict[int, complex], basis: IonTrapBasis, T: float = 1.0,
                      negative: dict[int, complex] | None = None) -> np.ndarray:
    """
    Interaction-picture generator ``int e^{itH0} H_I(t) e^{-itH0} dt`` from drive samples.

    The upper-right block entry ``(+1/2, n; -1/2, m)`` evolves at
    ``omega0 + omega0p (n - m)`` and takes ``a[n, m] Omega_{n-m} / 2``. The
    lower-left block evolves at ``-omega0 - omega0p (n - m)``; for a real
    drive its sample is ``conj(Omega_{n-m})``. An explicit ``negative``
    map (keyed like ``design``) is accepted but must satisfy that symmetry.

    ``design`` holds samples of the drive spectrum, which already include
    the time integral; ``T`` is kept for reporting and must be positive.
    """
    if not T > 0:
        raise InvalidInputError(f"T must be positive, got {T!r}")
    N = basis.n_fock
    a = coupling_block(N)
    n, m = np.indices((N, N))
    k = n - m
    pos = np.vectorize(lambda kk: design.get(int(kk), 0j), otypes=[complex])(k)
    if negative is not None:
        neg = np.vectorize(lambda kk: negative.get(int(kk), 0j), otypes=[complex])(k)
        if np.max(np.abs(neg - np.conj(pos)), initial=0.0) > 1e-12:
            raise ContractViolation("negative-frequency samples are not conjugates of the positive ones")
    upper = 0.5 * a * pos
    G = np.zeros((2 * N, 2 * N), dtype=complex)
    G[:N, N:] = upper
    G[N:, :N] = upper.conj().T
    return G
