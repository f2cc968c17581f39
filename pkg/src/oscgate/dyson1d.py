"""
Charged 1-D oscillator driven by a scalar electric field.

The perturbation is ``eps * V(t) = -eps * q * E(t) * X`` with ``X`` the
position operator (any Hermitian coupling may be substituted). In the
interaction picture ``X~(t) = e^{i H0 t} X e^{-i H0 t}`` and

    W = I + eps * W1 + eps**2 * W2 + O(eps**3),
    W1 = i q  int E(t) X~(t) dt,
    W2 = -q^2 iint_{t2 < t1} E(t1) E(t2) X~(t1) X~(t2),

with ``U(T) = e^{-i H0 T} W``. Time integrals use midpoint samples. The
ordered double integral weights grid pairs ``j > k`` by 1 and the diagonal by
1/2, which is exactly the second-order term of the Cayley product on the same
grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from ._secular import solve_secular
from .errors import ConstraintInfeasibleError, InvalidInputError, ShapeError
from .gatelib import GateTarget
from .matrixcore import require_hermitian
from .oracle import PropagationResult, midpoints, propagate_samples
from .oscillator import TruncationSpec, canonical_matrices, dressed_samples, energy_spectrum


@dataclass(frozen=True)
class ControlSignal:
    """Real samples ``E(t_j)`` at ``t_j = (j + 1/2) T / M``."""

    t_end: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise InvalidInputError(f"need at least 2 samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("control samples must be finite")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise InvalidInputError(f"t_end must be positive, got {self.t_end!r}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, f: Callable, T: float, M: int) -> "ControlSignal":
        return cls(T, np.asarray(f(midpoints(T, M)), dtype=float))

    @classmethod
    def zeros(cls, T: float, M: int) -> "ControlSignal":
        return cls(T, np.zeros(M))

    @property
    def M(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return self.t_end / self.M

    @property
    def times(self) -> np.ndarray:
        return midpoints(self.t_end, self.M)

    def energy(self, alpha_diss: float) -> float:
        """Dissipated energy ``alpha * int E^2 dt``."""
        return float(alpha_diss * self.dt * np.sum(self.samples ** 2))

    def padded(self, t_end: float) -> "ControlSignal":
        """Append zeros up to ``t_end`` on the same grid step."""
        extra = (t_end - self.t_end) / self.dt
        n = int(round(extra))
        if n < 0 or abs(extra - n) > 1e-9 * max(1.0, extra):
            raise InvalidInputError(f"t_end {t_end} is not a whole number of steps past {self.t_end}")
        return ControlSignal(self.t_end + n * self.dt, np.concatenate([self.samples, np.zeros(n)]))


@dataclass(frozen=True)
class DysonGate:
    order: int
    W: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    eps: float


@dataclass(frozen=True)
class KernelPair:
    """
    Samples of the error-energy kernels on the control grid.

    With ``D = e^{i H0 T} U_d - I`` the error energy of a field ``E`` is

        ||U_d - U(T)||^2 = ||D||^2 + eps * dt * k1 . E
                           + eps^2 * dt^2 * E . k2_sym . E + O(eps^3).
    """

    k1: np.ndarray = field(repr=False)
    k2_sym: np.ndarray = field(repr=False)
    eps: float
    t_end: float
    residual_norm2: float = 0.0

    @property
    def M(self) -> int:
        return self.k1.size

    @property
    def dt(self) -> float:
        return self.t_end / self.M

    def predicted_error(self, field: ControlSignal) -> float:
        E = field.samples
        return float(self.residual_norm2 + self.eps * self.dt * self.k1 @ E
                     + (self.eps * self.dt) ** 2 * E @ self.k2_sym @ E)


class OptimalField(NamedTuple):
    field: ControlSignal
    lam: float
    residual: float


def _coupling(spec: TruncationSpec, V) -> np.ndarray:
    if V is None:
        q, _ = canonical_matrices(spec)
        return q
    V = require_hermitian(V, what="coupling operator")
    if V.shape != (spec.dim, spec.dim):
        raise ShapeError(f"coupling has shape {V.shape}, expected {(spec.dim, spec.dim)}")
    return V


def _require_1d(spec: TruncationSpec):
    if spec.axes != 1:
        raise InvalidInputError("dyson1d needs a 1-axis truncation")


def dyson_terms(field: ControlSignal, spec: TruncationSpec, charge: float = 1.0, V=None):
    """
    First- and second-order interaction-picture terms ``(W1, W2)``.

    They are independent of ``eps``; the gate is ``I + eps W1 + eps^2 W2``.
    """
    _require_1d(spec)
    X = _coupling(spec, V)
    Xt = dressed_samples(X, energy_spectrum(spec), field.times)
    c = charge * field.samples * field.dt
    A = c[:, None, None] * Xt
    W1 = 1j * A.sum(axis=0)
    # prefix sums give the strictly earlier part of the ordered integral
    S = np.cumsum(A, axis=0) - A
    W2 = -np.einsum("jab,jbc->ac", A, S + 0.5 * A)
    return W1, W2


def dyson_gate(field: ControlSignal, spec: TruncationSpec, charge: float = 1.0,
               eps: float = 0.1, order: int = 2, V=None) -> DysonGate:
    """Dyson-series gate of the given order (1 or 2)."""
    if order not in (1, 2):
        raise InvalidInputError(f"order must be 1 or 2, got {order!r}")
    W1, W2 = dyson_terms(field, spec, charge, V)
    W = np.eye(spec.dim, dtype=complex) + eps * W1
    if order == 2:
        W = W + eps ** 2 * W2
    E = energy_spectrum(spec).energies
    U = np.exp(-1j * E * field.t_end)[:, None] * W
    return DysonGate(order=order, W=W, U=U, eps=eps)


def oracle_gate(field: ControlSignal, spec: TruncationSpec, charge: float = 1.0, eps: float = 0.1,
                steps: int | None = None, frame: str = "interaction", V=None,
                backend: str | None = None) -> PropagationResult:
    """
    Cayley propagation of the same dynamics.

    The field is held constant on each control cell. With
    ``frame="interaction"`` the result approximates ``W``; with ``"lab"`` it
    approximates ``U(T)``. The default step count is ``64 M``.
    """
    _require_1d(spec)
    X = _coupling(spec, V)
    steps = 64 * field.M if steps is None else int(steps)
    T = field.t_end
    t = midpoints(T, steps)
    cell = np.minimum((t / field.dt).astype(int), field.M - 1)
    e = -eps * charge * field.samples[cell]
    spectrum = energy_spectrum(spec)
    if frame == "interaction":
        H = e[:, None, None] * dressed_samples(X, spectrum, t)
    elif frame == "lab":
        H = np.diag(spectrum.energies).astype(complex)[None] + e[:, None, None] * X[None]
    else:
        raise InvalidInputError(f"frame must be 'interaction' or 'lab', got {frame!r}")
    return propagate_samples(H, T / steps, backend=backend, check_hermitian=False)


def target_residual(target: GateTarget, spec: TruncationSpec, T: float) -> np.ndarray:
    """``D = e^{i H0 T} U_d - I``, the part of the target the field must supply."""
    if target.dim != spec.dim:
        raise ShapeError(f"target dimension {target.dim} does not match truncation {spec.dim}")
    E = energy_spectrum(spec).energies
    return np.exp(1j * E * T)[:, None] * target.matrix - np.eye(spec.dim)


def dressed_lab_target(G, spec: TruncationSpec, T: float) -> np.ndarray:
    """Lab-frame target ``e^{-i H0 T} G`` whose interaction-picture residual is ``G - I``."""
    E = energy_spectrum(spec).energies
    return np.exp(-1j * E * T)[:, None] * np.asarray(G, dtype=complex)


def error_kernels(target: GateTarget, spec: TruncationSpec, field_grid: tuple[float, int],
                  charge: float = 1.0, eps: float = 0.1, V=None) -> KernelPair:
    """
    Kernels of the error energy ``||U_d - U(T)||^2`` as a functional of ``E``.

    Parameters
    ----------
    target : GateTarget
        Lab-frame target ``U_d``.
    field_grid : (T, M)
        Horizon and number of midpoint samples.
    """
    _require_1d(spec)
    T, M = field_grid
    if M < 2:
        raise InvalidInputError("need at least 2 grid samples")
    D = target_residual(target, spec, T)
    X = _coupling(spec, V)
    Xt = dressed_samples(X, energy_spectrum(spec), midpoints(T, M))
    d = spec.dim
    # tr(D^dag i X_j)
    lin = np.einsum("ab,jab->j", D.conj(), 1j * Xt)
    k1 = -2.0 * charge * lin.real
    flat = Xt.reshape(M, d * d)
    gram = (flat.conj() @ flat.T).real  # Re tr(X_j^dag X_k)
    Y = np.einsum("ba,jbc->jac", D.conj(), Xt).reshape(M, d * d)  # D^dag X_j
    XtT = np.swapaxes(Xt, 1, 2).reshape(M, d * d)
    cross = (Y @ XtT.T).real  # Re tr(D^dag X_j X_k)
    w = np.tril(np.ones((M, M)), -1) + 0.5 * np.eye(M)
    K = charge ** 2 * (gram + 2.0 * w * cross)
    k2 = 0.5 * (K + K.T)
    return KernelPair(k1=k1, k2_sym=k2, eps=float(eps), t_end=float(T),
                      residual_norm2=float(np.sum(np.abs(D) ** 2)))


def stationarity_residual(kernels: KernelPair, E, lam: float, alpha_diss: float) -> float:
    """Max-norm of ``eps k1 + 2 eps^2 dt k2 E - 2 lam alpha E``."""
    E = np.asarray(E, dtype=float)
    e = kernels.eps
    r = e * kernels.k1 + 2.0 * e * e * kernels.dt * (kernels.k2_sym @ E) - 2.0 * lam * alpha_diss * E
    return float(np.max(np.abs(r)))


def optimal_field(kernels: KernelPair, alpha_diss: float, e_diss: float) -> OptimalField:
    """
    Minimise the second-order error energy subject to ``alpha int E^2 = e_diss``.

    Stationarity of the Lagrangian gives the discretised integral equation

        (2 eps^2 dt K2 - 2 lam alpha I) E = -eps k1,

    whose matrix is diagonalised once. The multiplier is the root on the
    branch where the Lagrangian Hessian is positive semidefinite, so the
    result is the constrained global minimum of the quadratic model.

    Raises
    ------
    ConstraintInfeasibleError
        No multiplier meets the constraint.
    IllConditionedError
        The shifted system at the root has condition number above 1e12.
    """
    if not alpha_diss > 0:
        raise InvalidInputError(f"alpha_diss must be positive, got {alpha_diss!r}")
    if e_diss < 0:
        raise InvalidInputError(f"e_diss must be non-negative, got {e_diss!r}")
    M, dt, e = kernels.M, kernels.dt, kernels.eps
    if e_diss == 0:
        return OptimalField(ControlSignal.zeros(kernels.t_end, M), 0.0, 0.0)
    A = 2.0 * e * e * dt * kernels.k2_sym
    mu, Vec = np.linalg.eigh(A)
    c = Vec.T @ (e * kernels.k1)
    span = 10.0 * np.linalg.norm(A, 2) / (2.0 * alpha_diss)
    root = solve_secular(mu, c, scale=alpha_diss * dt, target=e_diss, slope=2.0 * alpha_diss, span=span)
    E = Vec @ root.coeffs
    field = ControlSignal(kernels.t_end, E)
    return OptimalField(field, root.lam, stationarity_residual(kernels, E, root.lam, alpha_diss))


def nsr(target: GateTarget | np.ndarray, achieved) -> float:
    """Noise-to-signal ratio ``||U_d - U||_F^2 / ||U_d||_F^2``."""
    Ud = target.matrix if isinstance(target, GateTarget) else np.asarray(target, dtype=complex)
    A = np.asarray(achieved, dtype=complex)
    if A.shape != Ud.shape:
        raise ShapeError(f"achieved shape {A.shape} does not match target {Ud.shape}")
    return float(np.sum(np.abs(Ud - A) ** 2) / np.sum(np.abs(Ud) ** 2))


@dataclass(frozen=True)
class SweepPoint:
    T: float
    M: int
    nsr: float
    nsr_opt: float
    lam: float
    residual: float
    energy: float
    source_T: float
    field: ControlSignal = field(repr=False)


def nsr_sweep(G, spec: TruncationSpec, T_values, M0: int, alpha_diss: float, e_diss: float,
              charge: float = 1.0, eps: float = 0.1, V=None) -> list[SweepPoint]:
    """
    Optimal NSR over increasing horizons for the dressed target ``G``.

    The lab target at horizon ``T`` is ``e^{-i H0 T} G``. The grid step is
    fixed by the first horizon (``T_values[0] / M0``) so that shorter designs
    can be zero-padded onto longer horizons. Each point reports the optimum at
    that horizon (``nsr_opt``) and the best NSR among it and every earlier
    design padded to the current horizon (``nsr``); a padded field meets the
    same dissipation budget, so the best feasible NSR cannot increase.
    """
    T_values = [float(t) for t in T_values]
    if any(b <= a for a, b in zip(T_values, T_values[1:])):
        raise InvalidInputError("sweep horizons must be strictly increasing")
    G = np.asarray(getattr(G, "matrix", G), dtype=complex)
    dt = T_values[0] / M0
    designs: list[tuple[float, ControlSignal]] = []
    out = []
    for T in T_values:
        M = int(round(T / dt))
        if abs(M * dt - T) > 1e-9 * T:
            raise InvalidInputError(f"horizon {T} is not a multiple of the grid step {dt}")
        target = GateTarget(dressed_lab_target(G, spec, T), f"G@T={T:g}")
        kern = error_kernels(target, spec, (T, M), charge, eps, V)
        opt = optimal_field(kern, alpha_diss, e_diss)
        val = nsr(target, dyson_gate(opt.field, spec, charge, eps, 2, V).U)
        best, best_T, best_field = val, T, opt.field
        for T_prev, f_prev in designs:
            padded = f_prev.padded(T)
            v = nsr(target, dyson_gate(padded, spec, charge, eps, 2, V).U)
            if v < best:
                best, best_T, best_field = v, T_prev, padded
        designs.append((T, opt.field))
        out.append(SweepPoint(T=T, M=M, nsr=best, nsr_opt=val, lam=opt.lam, residual=opt.residual,
                              energy=opt.field.energy(alpha_diss), source_T=best_T, field=best_field))
    return out


__all__ = [
    "ControlSignal", "DysonGate", "KernelPair", "OptimalField", "SweepPoint", "ConstraintInfeasibleError",
    "dyson_terms", "dyson_gate", "oracle_gate", "error_kernels", "optimal_field", "stationarity_residual",
    "nsr", "nsr_sweep", "target_residual", "dressed_lab_target",
]
