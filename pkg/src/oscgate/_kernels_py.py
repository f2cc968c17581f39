"""NumPy implementation of the sequential Cayley product (fallback backend)."""
from __future__ import annotations

import numpy as np


def cayley_product(H, dt: float, track_defect: bool = True):
    """
    Ordered product of Cayley factors ``(I + i dt/2 H_j)^{-1} (I - i dt/2 H_j)``.

    Parameters
    ----------
    H : ndarray, shape (M, d, d)
        Hamiltonian samples in time order.
    dt : float
        Step size.
    track_defect : bool
        If true, the running maximum of ``||U^dag U - I||_F`` is returned.

    Returns
    -------
    U : ndarray, shape (d, d)
        Product with the earliest factor rightmost.
    max_defect : float
    """
    H = np.ascontiguousarray(H, dtype=complex)
    M, d, _ = H.shape
    eye = np.eye(d, dtype=complex)
    half = 0.5j * dt * H
    # factors are independent, so the solves are batched
    F = np.linalg.solve(eye + half, eye - half)
    U = eye.copy()
    worst = 0.0
    for j in range(M):
        U = F[j] @ U
        if track_defect:
            G = U.conj().T @ U
            G[np.diag_indices(d)] -= 1.0
            worst = max(worst, float(np.sqrt(np.sum(G.real ** 2 + G.imag ** 2))))
    return U, worst
