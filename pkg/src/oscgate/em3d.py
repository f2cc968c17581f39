"""
Isotropic 3-D oscillator in a spatially uniform, time-dependent
electromagnetic field.

With vector potential ``A = (B x q)/2`` the Hamiltonian is

    H = H0 + e * xi(t) . G + (e^2/8) * sum_ab B_a B_b (delta_ab q.q - q_a q_b),

where ``xi = (B1, E1, B2, E2, B3, E3)`` and ``G = (L1/2, q1, L2/2, q2, L3/2, q3)``.
The overall sign of the linear term is a charge convention and is absorbed
into ``e``. The interaction-picture expansion ``W = I + e W1 + e^2 W2`` uses
the creation kernels ``h_a(t) = -i G~_a(t)``:

    W1 = int h(t) . xi(t) dt,
    W2 = -(i/8) int sum_ab B_a B_b D~_ab(t) dt
         + iint_{t2 < t1} (h(t1) . xi(t1)) (h(t2) . xi(t2)).

The ordered double integral uses the same grid weights as ``dyson1d`` (1 for
``j > k``, 1/2 on the diagonal), and the equal-time diamagnetic term is a
diagonal weight ``1/dt`` in the double-sum form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._secular import solve_secular
from .dyson1d import DysonGate
from .errors import ContractViolation, InvalidInputError, ShapeError
from .gatelib import GateTarget
from .matrixcore import hermiticity_defect
from .oracle import PropagationResult, midpoints, propagate_samples
from .oscillator import (
    TruncationSpec,
    angular_momentum_matrices,
    dressed_samples,
    energy_spectrum,
    position_matrices,
    position_products,
)

B_SLOTS = (0, 2, 4)
E_SLOTS = (1, 3, 5)


@dataclass(frozen=True)
class EMField:
    """Six-component samples ``xi(t_j)`` at midpoints, columns ``(B1, E1, B2, E2, B3, E3)``."""

    t_end: float
    xi: np.ndarray = field(repr=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim != 2 or xi.shape[1] != 6 or xi.shape[0] < 2:
            raise InvalidInputError(f"xi must have shape (M>=2, 6), got {xi.shape}")
        if not np.all(np.isfinite(xi)):
            raise InvalidInputError("field samples must be finite")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise InvalidInputError(f"t_end must be positive, got {self.t_end!r}")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def zeros(cls, T: float, M: int) -> "EMField":
        return cls(T, np.zeros((M, 6)))

    @property
    def M(self) -> int:
        return self.xi.shape[0]

    @property
    def dt(self) -> float:
        return self.t_end / self.M

    @property
    def times(self) -> np.ndarray:
        return midpoints(self.t_end, self.M)

    @property
    def B(self) -> np.ndarray:
        return self.xi[:, B_SLOTS]

    @property
    def E(self) -> np.ndarray:
        return self.xi[:, E_SLOTS]

    def flat(self) -> np.ndarray:
        return self.xi.reshape(-1)


@dataclass(frozen=True)
class EMOperators:
    G: np.ndarray = field(repr=False)  # (6, d, d)
    D: np.ndarray = field(repr=False)  # (3, 3, d, d)


@dataclass(frozen=True)
class EMKernels:
    """
    Creation kernels on a midpoint grid.

    ``h[j, a]`` is ``h_a(t_j)``. The pair kernel ``g`` is never stored as a
    dense ``(M, M, 6, 6, d, d)`` array; ``contract_g`` evaluates its trace
    against a fixed matrix directly.
    """

    t_end: float
    h: np.ndarray = field(repr=False)   # (M, 6, d, d)
    Dt: np.ndarray = field(repr=False)  # (M, 3, 3, d, d), dressed diamagnetic tensor

    @property
    def M(self) -> int:
        return self.h.shape[0]

    @property
    def dt(self) -> float:
        return self.t_end / self.M

    def gram(self) -> np.ndarray:
        """``Re tr(h_ja^dag h_kb)`` as a ``(6M, 6M)`` matrix."""
        flat = self.h.reshape(6 * self.M, -1)
        return (flat.conj() @ flat.T).real

    def contract_g(self, Wd: np.ndarray) -> np.ndarray:
        """
        ``Re tr(Wd^dag g_{ja,kb})`` as a ``(6M, 6M)`` matrix, where

            g_{ja,kb} = w_jk h_ja h_kb - i delta_jk/(8 dt) D~_ab(t_j)   (a, b magnetic).
        """
        M, d = self.M, self.h.shape[-1]
        n = 6 * M
        hs = self.h.reshape(n, d, d)
        Y = np.einsum("ba,nbc->nac", Wd.conj(), hs).reshape(n, d * d)
        hT = np.swapaxes(hs, 1, 2).reshape(n, d * d)
        pair = (Y @ hT.T).real.reshape(M, 6, M, 6)
        w = np.tril(np.ones((M, M)), -1) + 0.5 * np.eye(M)
        out = pair * w[:, None, :, None]
        dia = np.einsum("ba,jxyba->jxy", Wd.conj(), self.Dt)  # tr(Wd^dag D~_xy)
        dia = (-1j * dia / (8.0 * self.dt)).real
        for x, a in enumerate(B_SLOTS):
            for y, b in enumerate(B_SLOTS):
                out[np.arange(M), a, np.arange(M), b] += dia[:, x, y]
        return out.reshape(n, n)


@dataclass(frozen=True)
class EMDesign:
    alpha_vec: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    lam: float
    xi_opt: EMField
    residual: float
    constraint_value: float
    hard_case: bool = False


def _require_3d(spec: TruncationSpec):
    if spec.axes != 3:
        raise InvalidInputError("em3d needs a 3-axis truncation")


def em_operators(spec: TruncationSpec) -> EMOperators:
    """Coupling operators in ``xi`` order and the diamagnetic tensor ``delta_ab q.q - q_a q_b``."""
    _require_3d(spec)
    L = angular_momentum_matrices(spec)
    q = position_matrices(spec)
    G = np.stack([0.5 * L[0], q[0], 0.5 * L[1], q[1], 0.5 * L[2], q[2]])
    QQ = position_products(spec)
    qsq = QQ[0, 0] + QQ[1, 1] + QQ[2, 2]
    D = -QQ.copy()
    for a in range(3):
        D[a, a] += qsq
    return EMOperators(G=G, D=D)


def em_kernels(spec: TruncationSpec, grid: tuple[float, int]) -> EMKernels:
    T, M = grid
    if M < 2:
        raise InvalidInputError("need at least 2 grid samples")
    ops = em_operators(spec)
    spectrum = energy_spectrum(spec)
    t = midpoints(T, M)
    d = spec.dim
    h = np.empty((M, 6, d, d), dtype=complex)
    for a in range(6):
        h[:, a] = -1j * dressed_samples(ops.G[a], spectrum, t)
    Dt = np.empty((M, 3, 3, d, d), dtype=complex)
    for a in range(3):
        for b in range(3):
            Dt[:, a, b] = dressed_samples(ops.D[a, b], spectrum, t)
    return EMKernels(t_end=float(T), h=h, Dt=Dt)


def em_dyson_terms(field: EMField, spec: TruncationSpec, kernels: EMKernels | None = None):
    """``(W1, W2)`` for a unit charge."""
    _require_3d(spec)
    if kernels is None:
        kernels = em_kernels(spec, (field.t_end, field.M))
    if kernels.M != field.M:
        raise ShapeError("kernel grid does not match the field grid")
    dt = field.dt
    A = dt * np.einsum("ja,jabc->jbc", field.xi, kernels.h)  # dt * h(t_j).xi(t_j)
    W1 = A.sum(axis=0)
    S = np.cumsum(A, axis=0) - A
    W2 = np.einsum("jab,jbc->ac", A, S + 0.5 * A)
    B = field.B
    W2 = W2 - (1j / 8.0) * dt * np.einsum("ja,jb,jabcd->cd", B, B, kernels.Dt)
    return W1, W2


def em_dyson_gate(field: EMField, spec: TruncationSpec, charge: float = 0.1,
                  kernels: EMKernels | None = None) -> DysonGate:
    """Second-order gate ``U = e^{-i H0 T} (I + e W1 + e^2 W2)``."""
    W1, W2 = em_dyson_terms(field, spec, kernels)
    W = np.eye(spec.dim, dtype=complex) + charge * W1 + charge ** 2 * W2
    E = energy_spectrum(spec).energies
    return DysonGate(order=2, W=W, U=np.exp(-1j * E * field.t_end)[:, None] * W, eps=charge)


def em_oracle_gate(field: EMField, spec: TruncationSpec, charge: float = 0.1, steps: int | None = None,
                   frame: str = "interaction", backend: str | None = None) -> PropagationResult:
    """
    Cayley propagation with the field held constant on each control cell.

    ``frame="interaction"`` approximates ``W``, ``"lab"`` approximates ``U(T)``.
    """
    _require_3d(spec)
    ops = em_operators(spec)
    steps = field.M if steps is None else int(steps)
    T = field.t_end
    t = midpoints(T, steps)
    cell = np.minimum((t / field.dt).astype(int), field.M - 1)
    xi = field.xi[cell]
    B = xi[:, B_SLOTS]
    V = charge * np.einsum("ja,abc->jbc", xi, ops.G) + (charge ** 2 / 8.0) * np.einsum(
        "ja,jb,abcd->jcd", B, B, ops.D
    )
    spectrum = energy_spectrum(spec)
    if frame == "interaction":
        ph = np.exp(1j * np.outer(t, spectrum.energies))
        H = ph[:, :, None] * V * ph.conj()[:, None, :]
    elif frame == "lab":
        H = np.diag(spectrum.energies).astype(complex)[None] + V
    else:
        raise InvalidInputError(f"frame must be 'interaction' or 'lab', got {frame!r}")
    return propagate_samples(H, T / steps, backend=backend, check_hermitian=False)


def target_residual(target: GateTarget, spec: TruncationSpec, T: float) -> np.ndarray:
    """``W_d = e^{i H0 T} U_d - I``."""
    if target.dim != spec.dim:
        raise ShapeError(f"target dimension {target.dim} does not match flat truncation {spec.dim}")
    E = energy_spectrum(spec).energies
    return np.exp(1j * E * T)[:, None] * target.matrix - np.eye(spec.dim)


def em_error_terms(target: GateTarget, spec: TruncationSpec, grid: tuple[float, int], charge: float = 0.1,
                   kernels: EMKernels | None = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Linear and quadratic coefficients of the error energy.

    Returns ``alpha_vec`` of shape ``(M, 6)`` and a symmetric ``beta`` of
    shape ``(6M, 6M)`` such that

        ||U_d - U(T)||^2 - ||W_d||^2 = dt * alpha . xi + dt^2 * xi . beta . xi + O(e^3).
    """
    _require_3d(spec)
    if kernels is None:
        kernels = em_kernels(spec, grid)
    Wd = target_residual(target, spec, grid[0])
    M = kernels.M
    alpha_vec = -2.0 * charge * np.einsum("ab,jkab->jk", Wd.conj(), kernels.h).real
    beta = charge ** 2 * (kernels.gram() - 2.0 * kernels.contract_g(Wd))
    beta = 0.5 * (beta + beta.T)
    assert alpha_vec.shape == (M, 6)
    return alpha_vec, beta


def default_constraint(M: int, dt: float) -> np.ndarray:
    """
    Field-energy weight ``Q`` with ``dt^2 xi.Q.xi = int (|E|^2 + |B|^2)/2 dt``.

    Normalised constants are used for both slot types.
    """
    return np.eye(6 * M) * (0.5 / dt)


def em_optimal_field(alpha_vec, beta, dt: float, eps0: float, Q=None, t_end: float | None = None) -> EMDesign:
    """
    Minimise ``dt alpha.xi + dt^2 xi.beta.xi`` subject to ``dt^2 xi.Q.xi = eps0``.

    With ``P = dt (beta + beta^T)`` and ``S = dt (Q + Q^T)`` stationarity is
    ``(P - lam S) xi = -alpha``. The pair ``(P, S)`` is diagonalised once
    as a generalised symmetric eigenproblem and the multiplier is taken on
    the branch ``P - lam S >= 0``.
    """
    import scipy.linalg as sla

    alpha_vec = np.asarray(alpha_vec, dtype=float)
    M = alpha_vec.shape[0]
    n = 6 * M
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (n, n):
        raise ShapeError(f"beta must be {(n, n)}, got {beta.shape}")
    Q = default_constraint(M, dt) if Q is None else np.asarray(Q, dtype=float)
    if Q.shape != (n, n) or hermiticity_defect(Q) > 1e-12 * max(1.0, np.abs(Q).max()):
        raise ContractViolation("Q must be a symmetric (6M, 6M) matrix")
    if eps0 < 0:
        raise InvalidInputError(f"eps0 must be non-negative, got {eps0!r}")
    P = dt * (beta + beta.T)
    S = dt * (Q + Q.T)
    T = dt * M if t_end is None else t_end
    a = alpha_vec.reshape(-1)
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ContractViolation("Q must be positive definite") from None
    if eps0 == 0:
        xi = np.zeros(n)
        return EMDesign(alpha_vec, beta, P, S, 0.0, EMField(T, xi.reshape(M, 6)),
                        float(np.max(np.abs(P @ xi + a))), 0.0)
    mu, Vec = sla.eigh(P, S)  # Vec^T S Vec = I
    c = Vec.T @ a
    # dt^2 xi.Q.xi = (dt/2) xi.S.xi = (dt/2) sum y_i^2
    root = solve_secular(mu, c, scale=0.5 * dt, target=eps0, slope=1.0, span=10.0 * np.abs(mu).max())
    xi = Vec @ root.coeffs
    residual = float(np.max(np.abs((P - root.lam * S) @ xi + a)))
    value = float(dt * dt * xi @ Q @ xi)
    return EMDesign(alpha_vec, beta, P, S, root.lam, EMField(T, xi.reshape(M, 6)), residual, value,
                    root.hard_case)


def observable_average(X, state_index: int, field: EMField, spec: TruncationSpec, charge: float = 0.1,
                       kernels: EMKernels | None = None) -> float:
    """
    ``<n| W X W^dag |n>`` expanded to second order in the charge.

    For a zero field this is ``<n|X|n>``; with ``X = I`` it reduces to 1 at
    every order kept.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape != (spec.dim, spec.dim):
        raise ShapeError(f"observable has shape {X.shape}, expected {(spec.dim, spec.dim)}")
    if hermiticity_defect(X) > 1e-10:
        raise ContractViolation("observable must be Hermitian")
    if not 0 <= state_index < spec.dim:
        raise InvalidInputError(f"state index {state_index} outside 0..{spec.dim - 1}")
    W1, W2 = em_dyson_terms(field, spec, kernels)
    e = charge
    n = state_index
    first = W1 @ X + X @ W1.conj().T
    second = W2 @ X + X @ W2.conj().T + W1 @ X @ W1.conj().T
    val = X[n, n] + e * first[n, n] + e * e * second[n, n]
    if abs(val.imag) > 1e-10:
        raise ContractViolation(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)
