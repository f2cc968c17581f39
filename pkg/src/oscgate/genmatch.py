"""
Generator matching in the Fourier domain.

For the harmonic oscillator every Bohr gap is an integer multiple of
``omega0``, so ``int phi(t) V~(t) dt`` has entries ``phihat[m - n] V[m, n]``
where ``phihat[k]`` samples the Fourier transform of the modulation at
``k omega0``. Matching a target generator ``H_g`` then separates into one
scalar least-squares problem per diagonal ``k``, coupled only through the
energy constraint ``|phihat[0]|^2 + 2 sum_{k>=1} |phihat[k]|^2 <= budget``.

With ``A[k] = sum_n H_g[n+k, n] conj(V[n+k, n])`` and
``B[k] = sum_n |V[n+k, n]|^2`` the closed forms are

    phihat[0] = A[0] / (B[0] - lam),    phihat[k] = A[k] / (B[k] - 2 lam),

The factor 2 on the non-zero harmonics comes from the energy weight, which
counts ``k`` and ``-k`` together.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConstraintInfeasibleError,
    CoverageError,
    DegenerateTargetError,
    InvalidInputError,
    ShapeError,
)
from .matrixcore import kron, require_hermitian
from .oscillator import TruncationSpec, energy_spectrum, q_power_matrix


@dataclass(frozen=True)
class GeneratorPair:
    H_g: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    omega0: float = 1.0

    def __post_init__(self):
        H = require_hermitian(self.H_g, tol=1e-12, what="H_g")
        V = require_hermitian(self.V, tol=1e-12, what="V")
        if H.shape != V.shape:
            raise ShapeError(f"H_g {H.shape} and V {V.shape} differ in shape")
        object.__setattr__(self, "H_g", H)
        object.__setattr__(self, "V", V)

    @property
    def dim(self) -> int:
        return self.H_g.shape[0]


@dataclass(frozen=True)
class FourierDesign:
    """
    Non-negative harmonics ``phihat[0..K]``; negative ones follow from
    ``phihat[-k] = conj(phihat[k])`` since the modulation is real.
    """

    phi_hat: np.ndarray = field(repr=False)
    lam: float
    energy: float
    active: bool = True
    A: np.ndarray | None = field(default=None, repr=False)
    B: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.phi_hat, dtype=complex).copy()
        if p.ndim != 1 or p.size < 1:
            raise InvalidInputError("phi_hat must be a non-empty vector")
        if abs(p[0].imag) > 1e-12 * max(1.0, abs(p[0])):
            raise InvalidInputError("phi_hat[0] must be real")
        p[0] = p[0].real
        object.__setattr__(self, "phi_hat", p)

    @property
    def K(self) -> int:
        return self.phi_hat.size - 1

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0j
        return self.phi_hat[k] if k >= 0 else np.conj(self.phi_hat[-k])

    def harmonics(self) -> dict[int, complex]:
        return {k: self[k] for k in range(-self.K, self.K + 1)}


def design_energy(phi_hat) -> float:
    p = np.asarray(phi_hat)
    return float(abs(p[0]) ** 2 + 2.0 * np.sum(np.abs(p[1:]) ** 2))


def anharmonic_generator(spec: TruncationSpec, mu: float, T: float) -> np.ndarray:
    """``T (H0 + mu q^3)``, the generator of ``exp(-i T (H0 + mu q^3))``."""
    if spec.axes != 1:
        raise InvalidInputError("anharmonic target needs a 1-axis truncation")
    H0 = np.diag(energy_spectrum(spec).energies).astype(complex)
    H = T * (H0 + mu * q_power_matrix(spec, 3))
    return 0.5 * (H + H.conj().T)


def diagonal_sums(pair: GeneratorPair, K: int) -> tuple[np.ndarray, np.ndarray]:
    """``A[k]`` and ``B[k]`` for ``0 <= k <= K``."""
    A = np.array([np.sum(np.diagonal(pair.H_g, -k) * np.conj(np.diagonal(pair.V, -k))) for k in range(K + 1)])
    B = np.array([np.sum(np.abs(np.diagonal(pair.V, -k)) ** 2) for k in range(K + 1)])
    return A, B


def _phi(A, B, lam, live):
    den = B - 2.0 * lam
    den[0] = B[0] - lam
    out = np.zeros_like(A)
    out[live] = A[live] / den[live]
    return out


def fourier_design(pair: GeneratorPair, energy: float, K: int | None = None, mode: str = "budget") -> FourierDesign:
    """
    Optimal Fourier samples of the modulation.

    Parameters
    ----------
    energy : float
        Signal energy ``|phihat[0]|^2 + 2 sum |phihat[k]|^2``.
    K : int, optional
        Highest harmonic, at most ``N - 1``; defaults to ``N - 1``.
    mode : {"budget", "equality"}
        ``"budget"`` treats ``energy`` as an upper bound: if the
        unconstrained least-squares design fits, it is returned with
        ``lam = 0``. ``"equality"`` always spends exactly ``energy``.

    Notes
    -----
    The multiplier is searched on ``lam < min(B[0], B[k]/2)`` over coupled
    harmonics, where every denominator is positive and the design energy
    grows monotonically with ``lam``. Harmonics with ``B[k] = 0`` have no
    coupling at that gap and are fixed to zero.
    """
    N = pair.dim
    K = N - 1 if K is None else int(K)
    if not 0 <= K <= N - 1:
        raise InvalidInputError(f"K must lie in 0..{N - 1}, got {K}")
    if not energy > 0:
        raise InvalidInputError(f"energy must be positive, got {energy!r}")
    if mode not in ("budget", "equality"):
        raise InvalidInputError(f"mode must be 'budget' or 'equality', got {mode!r}")
    A, B = diagonal_sums(pair, K)
    live = B > 0
    if not np.any(np.abs(A[live]) > 0):
        raise DegenerateTargetError("every A[k] vanishes; the target has no component along the coupling")

    def f(lam):
        return design_energy(_phi(A, B, lam, live)) - energy

    if mode == "budget" and f(0.0) <= 0:
        phi = _phi(A, B, 0.0, live)
        return FourierDesign(phi, 0.0, design_energy(phi), active=False, A=A, B=B)
    caps = B.copy() / 2.0
    caps[0] = B[0]
    pole = float(np.min(caps[live]))
    lo = min(0.0, pole) - 1.0
    while f(lo) > 0:
        lo = pole - 2.0 * (pole - lo)
    if mode == "budget":
        hi = 0.0
    else:
        gap = max(1.0, abs(pole))
        while f(pole - gap) < 0 and gap > 1e-14 * max(1.0, abs(pole)):
            gap /= 4.0
        hi = pole - gap
        if f(hi) < 0:
            raise ConstraintInfeasibleError(
                f"energy {energy:.6g} unreachable on the minimising branch (max {f(hi) + energy:.6g})"
            )
    lam = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    phi = _phi(A, B, lam, live)
    return FourierDesign(phi, float(lam), design_energy(phi), active=True, A=A, B=B)


def stationarity_residuals(pair: GeneratorPair, design: FourierDesign) -> np.ndarray:
    """
    Plug-in residuals of the optimality conditions, one per harmonic.

    ``k >= 1``: ``-sum_n (H_g - phihat[k] V) conj(V) - 2 lam phihat[k]``;
    ``k = 0``: ``-sum_n (H_g - phihat[0] V) V - lam phihat[0]``.
    """
    out = np.empty(design.K + 1)
    for k in range(design.K + 1):
        h = np.diagonal(pair.H_g, -k)
        v = np.diagonal(pair.V, -k)
        mult = design.lam if k == 0 else 2.0 * design.lam
        r = -np.sum((h - design.phi_hat[k] * v) * np.conj(v)) - mult * design.phi_hat[k]
        out[k] = abs(r)
    return out


def realized_generator(design: FourierDesign, pair: GeneratorPair) -> np.ndarray:
    """``H_phi[m, n] = phihat[m - n] V[m, n]``."""
    N = pair.dim
    m, n = np.indices((N, N))
    gap = m - n
    uncovered = (np.abs(gap) > design.K) & (pair.V != 0)
    if np.any(uncovered):
        missing = [tuple(int(x) for x in ix) for ix in zip(*np.nonzero(uncovered))]
        raise CoverageError(f"{len(missing)} coupled entries lie beyond harmonic {design.K}", missing)
    p = np.concatenate([np.conj(design.phi_hat[:0:-1]), design.phi_hat])  # index k + K
    kk = np.clip(gap, -design.K, design.K) + design.K
    return p[kk] * pair.V


def nser(pair: GeneratorPair, design: FourierDesign) -> float:
    """
    Noise-to-signal energy ratio: error energy of the design over the energy of ``H_g``.

    Off-diagonal (``k >= 1``) terms count twice, once for each triangle.
    """
    N = pair.dim
    num = den = 0.0
    for k in range(N):
        h = np.diagonal(pair.H_g, -k)
        v = np.diagonal(pair.V, -k)
        w = 1.0 if k == 0 else 2.0
        num += w * np.sum(np.abs(h - design[k] * v) ** 2)
        den += w * np.sum(np.abs(h) ** 2)
    if den == 0:
        raise ZeroDivisionError("H_g has zero norm")
    return float(num / den)


def two_oscillator_interaction(spec1: TruncationSpec, spec2: TruncationSpec) -> np.ndarray:
    """``(q1 - q2)^3`` on the lexicographic product basis."""
    for s in (spec1, spec2):
        if s.axes != 1 or s.n_per_axis < 2:
            raise InvalidInputError("each oscillator needs a 1-axis truncation with at least 2 levels")
    p1 = [np.eye(spec1.n_per_axis)] + [q_power_matrix(spec1, k) for k in (1, 2, 3)]
    p2 = [np.eye(spec2.n_per_axis)] + [q_power_matrix(spec2, k) for k in (1, 2, 3)]
    V = kron(p1[3], p2[0]) - kron(p1[0], p2[3]) - 3 * kron(p1[2], p2[1]) + 3 * kron(p1[1], p2[2])
    return 0.5 * (V + V.conj().T)


def controllability_rank(H0, V, psi0, tol: float = 1e-10) -> tuple[int, bool]:
    """
    Numerical rank of ``{H0^r V H0^s psi0 : 0 <= r, s <= N}`` with ``d = N + 1``.

    Columns are normalised before the SVD so that high powers of ``H0`` do
    not swamp the rest; singular values below ``tol * s_max`` are dropped.
    """
    H0 = np.asarray(H0, dtype=complex)
    V = np.asarray(V, dtype=complex)
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    d = psi.size
    if H0.shape != (d, d) or V.shape != (d, d):
        raise ShapeError("H0, V and psi0 dimensions disagree")
    if not np.any(psi != 0):
        raise InvalidInputError("psi0 must be nonzero")
    right = [psi]
    for _ in range(d - 1):
        right.append(H0 @ right[-1])
    cols = []
    for v in right:
        x = V @ v
        for _ in range(d):
            cols.append(x)
            x = H0 @ x
    C = np.stack(cols, axis=1)
    norms = np.linalg.norm(C, axis=0)
    scale = max(1.0, float(norms.max()))
    keep = norms > 1e-13 * scale
    if not np.any(keep):
        return 0, False
    C = C[:, keep] / norms[keep]
    s = np.linalg.svd(C, compute_uv=False)
    rank = int(np.sum(s > tol * s[0]))
    return rank, rank == d
