"""
Brute-force unitary propagation with the Cayley transform.

Each step applies ``(I + i dt/2 H(t_j))^{-1} (I - i dt/2 H(t_j))`` with
``t_j = (j + 1/2) dt``. The factor is exactly unitary for Hermitian ``H``, so
the product drifts from unitarity only through rounding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._backend import get_kernels
from .errors import ContractViolation, InvalidInputError
from .matrixcore import hermiticity_defect


@dataclass(frozen=True)
class PropagationResult:
    U: np.ndarray = field(repr=False)
    steps: int
    max_unitarity_defect: float


def midpoints(T: float, steps: int) -> np.ndarray:
    dt = T / steps
    return (np.arange(steps) + 0.5) * dt


def propagate_samples(H, dt: float, *, backend: str | None = None,
                      check_hermitian: bool = True, times=None) -> PropagationResult:
    """
    Cayley product over a stack of Hamiltonian samples.

    Parameters
    ----------
    H : array_like, shape (steps, d, d)
        Samples in time order.
    dt : float
        Step size.
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to the active backend.
    """
    H = np.ascontiguousarray(H, dtype=complex)
    if H.ndim != 3 or H.shape[1] != H.shape[2] or H.shape[0] < 1:
        raise InvalidInputError(f"expected a (steps, d, d) stack, got shape {H.shape}")
    if check_hermitian:
        bad = np.linalg.norm(H - np.conj(np.swapaxes(H, 1, 2)), axis=(1, 2))
        j = int(np.argmax(bad))
        if bad[j] > 1e-10:
            t = times[j] if times is not None else (j + 0.5) * dt
            raise ContractViolation(f"Hamiltonian sample at t = {t:.6g} is not Hermitian (defect {bad[j]:.3e})")
    kern = get_kernels(backend)
    try:
        U, worst = kern.cayley_product(H, float(dt), True)
    except ArithmeticError as exc:  # cannot happen for Hermitian input
        raise ContractViolation(str(exc)) from exc
    return PropagationResult(U=np.asarray(U), steps=H.shape[0], max_unitarity_defect=float(worst))


def propagate(H_sampler: Callable[[float], np.ndarray], T: float, steps: int, *,
              backend: str | None = None) -> PropagationResult:
    """
    Propagator of ``i dU/dt = H(t) U`` over ``[0, T]``.

    ``H_sampler`` is called once per step at the step midpoint.
    """
    if int(steps) != steps or steps < 1:
        raise InvalidInputError(f"steps must be a positive integer, got {steps!r}")
    if not np.isfinite(T) or T < 0:
        raise InvalidInputError(f"T must be finite and non-negative, got {T!r}")
    times = midpoints(T, steps)
    H = np.stack([np.asarray(H_sampler(float(t)), dtype=complex) for t in times])
    for j, Hj in enumerate(H):
        if hermiticity_defect(Hj) > 1e-10:
            raise ContractViolation(f"Hamiltonian sample at t = {times[j]:.6g} is not Hermitian")
    return propagate_samples(H, T / steps, backend=backend, check_hermitian=False, times=times)


def convergence_order(eps, errors) -> float:
    """
    Least-squares slope of ``log(error)`` against ``log(eps)``.

    A zero error means exact agreement at that point; a warning is issued
    and ``nan`` is returned since no order can be read off.
    """
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.shape != errors.shape or eps.size < 3:
        raise InvalidInputError("need at least three (eps, error) pairs of equal length")
    if np.any(eps <= 0) or np.any(errors < 0):
        raise InvalidInputError("eps must be positive and errors non-negative")
    if np.any(errors == 0):
        warnings.warn("exact agreement at some ladder point; order is undefined", RuntimeWarning, stacklevel=2)
        return float("nan")
    slope, _ = np.polyfit(np.log(eps), np.log(errors), 1)
    return float(slope)
