"""
Lagrange-multiplier root finding shared by the field optimisers.

Both optimisers reduce to the same scalar problem. After diagonalising the
Hessian, ``x(lam) = -sum_i c_i v_i / (mu_i - s*lam)`` and the constraint reads

    scale * sum_i c_i**2 / (mu_i - s*lam)**2 = target.

On the branch ``s*lam < min(mu)`` the Lagrangian Hessian is positive
semidefinite, so a root there is the constrained global minimum, and the
left-hand side increases monotonically in ``lam``. The search is carried out
in ``log(gap)`` with ``gap = min(mu) - s*lam`` so that roots close to the
pole keep full relative precision.

If ``c`` vanishes on the lowest eigenspace and the constraint cannot be
reached before the pole (the "hard case" of trust-region problems), the
multiplier sits at the pole and the missing constraint value is supplied by
a component along the lowest eigenvector, which leaves stationarity intact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConstraintInfeasibleError, IllConditionedError

COND_LIMIT = 1e12


@dataclass(frozen=True)
class SecularRoot:
    lam: float
    gap: float
    condition: float
    coeffs: np.ndarray
    hard_case: bool = False


def solve_secular(mu, c, *, scale: float, target: float, slope: float = 1.0,
                  span: float | None = None) -> SecularRoot:
    """
    Root of the constraint on the minimising branch.

    Parameters
    ----------
    mu, c : ndarray
        Hessian eigenvalues (ascending) and the linear term in the eigenbasis.
    scale, target : float
        Constraint ``scale * sum c^2/(mu - slope*lam)^2 = target``.
    slope : float
        Multiplier of ``lam`` in the shifted system.
    span : float, optional
        Initial bracket half-width in ``lam``; grows until a sign change
        appears.
    """
    mu = np.asarray(mu, dtype=float)
    c2 = np.asarray(c, dtype=float) ** 2
    rel = mu - mu[0]
    if not np.any(c2 > 0):
        raise ConstraintInfeasibleError(
            f"linear term vanishes, the constraint value is 0 for every multiplier (target {target:.6g})"
        )

    tiny = 1e-10 * max(1.0, abs(mu[-1]), abs(mu[0]))
    cluster = rel <= tiny
    if np.all(c2[cluster] <= 1e-24 * c2.sum()):
        rest = ~cluster
        f_lim = scale * float(np.sum(c2[rest] / rel[rest] ** 2))
        if f_lim <= target:
            y = np.zeros_like(mu)
            y[rest] = -np.asarray(c, dtype=float)[rest] / rel[rest]
            y[np.argmax(cluster)] = np.sqrt((target - f_lim) / scale)
            cond = float("inf")
            return SecularRoot(lam=float(mu[0] / slope), gap=0.0, condition=cond, coeffs=y, hard_case=True)

    def g(log_gap):
        gap = np.exp(log_gap)
        return scale * float(np.sum(c2 / (rel + gap) ** 2)) - target

    if span is None or not np.isfinite(span) or span <= 0:
        span = max(1.0, abs(mu[-1]) + abs(mu[0])) * 10.0
    width = span * slope
    hi_gap = max(width, 1e-300)
    for _ in range(200):
        if g(np.log(hi_gap)) < 0:
            break
        hi_gap *= 4.0
    else:
        raise ConstraintInfeasibleError("constraint value does not fall below the target on the minimising branch")
    lo_gap = hi_gap
    floor = 1e-15 * max(1.0, abs(mu[-1] - mu[0]), abs(mu[0]))
    while lo_gap > floor and g(np.log(lo_gap)) <= 0:
        lo_gap /= 8.0
    g_lo = g(np.log(max(lo_gap, floor)))
    if g_lo <= 0:
        raise ConstraintInfeasibleError(
            "no sign change of the constraint residual on the minimising branch: "
            f"g(pole side) = {g_lo:.6g}, g(far side) = {g(np.log(hi_gap)):.6g}"
        )
    lg = brentq(g, np.log(max(lo_gap, floor)), np.log(hi_gap), xtol=1e-15, rtol=1e-15, maxiter=500)
    gap = float(np.exp(lg))
    cond = (rel[-1] + gap) / gap
    if cond > COND_LIMIT:
        raise IllConditionedError(f"shifted system has condition number {cond:.3e}")
    lam = (mu[0] - gap) / slope
    y = -np.asarray(c, dtype=float) / (rel + gap)
    return SecularRoot(lam=float(lam), gap=gap, condition=float(cond), coeffs=y)
