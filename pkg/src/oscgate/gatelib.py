"""
Target gates.

Qubit registers are ordered so that ``|x1 x2 x3>`` is basis index
``4*x1 + 2*x2 + x3``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractViolation, InvalidInputError, ParameterizationError
from .matrixcore import (
    UNITARY_OUT_TOL,
    expm_hermitian,
    fractional_power,
    hermitian_generator,
    kron,
    nearest_unitary,
    require_hermitian,
    unitarity_defect,
)


@dataclass(frozen=True)
class GateTarget:
    matrix: np.ndarray = field(repr=False)
    label: str
    generator: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        defect = unitarity_defect(self.matrix)
        if defect > UNITARY_OUT_TOL:
            raise ContractViolation(f"gate {self.label!r} is not unitary (defect {defect:.3e})")
        if self.generator is not None:
            err = np.linalg.norm(expm_hermitian(self.generator) - self.matrix)
            if err > 1e-8:
                raise ContractViolation(f"generator of {self.label!r} does not reproduce the gate ({err:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def with_generator(self) -> "GateTarget":
        if self.generator is not None:
            return self
        return replace(self, generator=hermitian_generator(self.matrix))


_SQ2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "S": np.diag([1, 1j]),
    # pi/8 in the exponent rather than the more common pi/4
    "T": np.diag([1, np.exp(1j * np.pi / 8)]),
    "H": _SQ2 * np.array([[1, 1], [1, -1]]),
}


def standard_gate(name: str, theta: float | None = None) -> GateTarget:
    """Single-qubit gate by name; ``"R"`` is the phase shift ``diag(1, e^{i theta})``."""
    if name == "R":
        if theta is None or not np.isfinite(theta):
            raise InvalidInputError("phase shift R needs a finite real theta")
        return GateTarget(np.diag([1, np.exp(1j * theta)]).astype(complex), f"R({theta:g})")
    try:
        M = _FIXED[name]
    except KeyError:
        raise InvalidInputError(f"unknown gate {name!r}; expected one of {sorted(_FIXED) + ['R']}") from None
    return GateTarget(np.asarray(M, dtype=complex), name)


def hadamard_tensor(r: int) -> GateTarget:
    """``H^{(x) r}``: entry ``(x, y)`` is ``(-1)^{popcount(x & y)} / 2^{r/2}``."""
    if int(r) != r or not 1 <= r <= 10:
        raise InvalidInputError(f"r must be an integer in 1..10, got {r!r}")
    idx = np.arange(2 ** r)
    parity = np.vectorize(lambda v: bin(v).count("1") & 1)(idx[:, None] & idx[None, :])
    M = np.where(parity == 0, 1.0, -1.0) / 2 ** (r / 2)
    return GateTarget(M.astype(complex), f"H^{r}")


def _alpha_beta(U, which: str) -> tuple[complex, complex]:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ParameterizationError(f"{which} must be 2x2, got {U.shape}")
    if unitarity_defect(U) > UNITARY_OUT_TOL:
        raise ContractViolation(f"{which} is not unitary")
    alpha, beta = U[0, 0], U[0, 1]
    if abs(U[1, 0] + np.conj(beta)) > 1e-8 or abs(U[1, 1] - np.conj(alpha)) > 1e-8:
        raise ParameterizationError(f"{which} is not of the form [[a, b], [-conj(b), conj(a)]]")
    return alpha, beta


def controlled_u3(U1, U2) -> GateTarget:
    """
    Three-qubit controlled gate: ``U1`` acts on qubit 2 when qubit 1 is set,
    ``U2`` on qubit 3 when qubits 1 and 2 are set.

    The lower-right block is written entry by entry in the
    ``alpha``/``beta`` parameterisation of the two SU(2) factors.
    """
    a1, b1 = _alpha_beta(U1, "U1")
    a2, b2 = _alpha_beta(U2, "U2")
    c = np.conj
    block = np.array(
        [
            [c(a1), 0, -c(b1) * c(a2), c(b1) * c(b2)],
            [0, c(a1), -c(b1) * b2, -c(b1) * a2],
            [b1, 0, a1 * c(a2), -a1 * c(b2)],
            [0, b1, a1 * b2, a1 * a2],
        ],
        dtype=complex,
    )
    M = np.eye(8, dtype=complex)
    M[4:, 4:] = block
    return GateTarget(M, "CU3")


def qft_gate(N: int) -> GateTarget:
    if int(N) != N or N < 2:
        raise InvalidInputError(f"QFT size must be an integer >= 2, got {N!r}")
    k = np.arange(N)
    return GateTarget(np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N), f"QFT{N}")


def fractional_gate(base: GateTarget, k: int) -> GateTarget:
    """Principal ``k``-th root of ``base``."""
    return GateTarget(fractional_power(base.matrix, k), f"{base.label}^(1/{k})")


def weakly_nonseparable_target(U1: GateTarget, U2: GateTarget, X, eps: float) -> GateTarget:
    """Nearest unitary to ``(U1 (x) U2)(I + i eps X)`` for Hermitian ``X``."""
    if abs(eps) > 0.2:
        raise InvalidInputError(f"|eps| must be <= 0.2, got {eps}")
    base = kron(U1.matrix, U2.matrix)
    X = require_hermitian(X, what="X")
    if X.shape != base.shape:
        raise InvalidInputError(f"X has shape {X.shape}, expected {base.shape}")
    M = base @ (np.eye(base.shape[0]) + 1j * eps * X)
    return GateTarget(nearest_unitary(M), f"({U1.label}x{U2.label})(I+i{eps:g}X)")


def embed_gate(target: GateTarget, dim: int) -> GateTarget:
    """Direct sum of ``target`` with the identity on the remaining ``dim - d`` levels."""
    d = target.dim
    if dim < d:
        raise InvalidInputError(f"cannot embed a {d}-level gate into {dim} levels")
    if dim == d:
        return target
    M = np.eye(dim, dtype=complex)
    M[:d, :d] = target.matrix
    return GateTarget(M, f"{target.label}+I{dim - d}")


GATE_NAMES = ("I", "X", "Y", "Z", "S", "T", "R", "H", "Hr", "CU3", "QFT", "frac")


def _su2(theta: float, phi: float = 0.0, chi: float = 0.0) -> np.ndarray:
    a = np.cos(theta) * np.exp(1j * phi)
    b = np.sin(theta) * np.exp(1j * chi)
    return np.array([[a, b], [-np.conj(b), np.conj(a)]])


def gate_from_params(name: str, params: dict) -> GateTarget:
    """
    Build a gate from a CLI-style name and parameter dictionary.

    ``frac`` takes ``base`` (another gate name) plus ``k``; its remaining
    parameters are forwarded to the base gate.
    """
    p = dict(params)
    if name in ("I", "X", "Y", "Z", "S", "T", "H"):
        return standard_gate(name)
    if name == "R":
        return standard_gate("R", float(p.get("theta", 0.0)))
    if name == "Hr":
        return hadamard_tensor(int(p.get("r", 1)))
    if name == "QFT":
        return qft_gate(int(p.get("n", 2)))
    if name == "CU3":
        U1 = _su2(float(p.get("theta1", 0.3)), float(p.get("phi1", 0.0)), float(p.get("chi1", 0.0)))
        U2 = _su2(float(p.get("theta2", 0.7)), float(p.get("phi2", 0.0)), float(p.get("chi2", np.pi / 2)))
        return controlled_u3(U1, U2)
    if name == "frac":
        base_name = p.pop("base", "Hr")
        k = int(p.pop("k", 1))
        if base_name == "frac":
            raise InvalidInputError("frac cannot wrap another frac")
        return fractional_gate(gate_from_params(base_name, p), k)
    raise InvalidInputError(f"unknown gate {name!r}; expected one of {GATE_NAMES}")
