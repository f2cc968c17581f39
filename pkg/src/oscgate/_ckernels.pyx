# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""
Compiled sequential Cayley product.

Each step forms ``I +- i dt/2 H_j`` in column-major workspaces and calls
LAPACK ``zgesv`` and BLAS ``zgemm`` through SciPy's Cython bindings, so the
whole loop runs without the GIL or any Python-level allocation.
"""
import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zgesv


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


def cayley_product(H, double dt, bint track_defect=True):
    """Same contract as the NumPy fallback; see ``_kernels_py.cayley_product``."""
    Harr = np.ascontiguousarray(H, dtype=np.complex128)
    cdef double complex[:, :, ::1] Hv = Harr
    cdef int M = <int>Hv.shape[0]
    cdef int d = <int>Hv.shape[1]
    # Fortran-ordered workspaces; X[c, r] in memory is element (r, c)
    A_arr = np.zeros((d, d), dtype=np.complex128)
    F_arr = np.zeros((d, d), dtype=np.complex128)
    U_arr = np.eye(d, dtype=np.complex128)
    T_arr = np.zeros((d, d), dtype=np.complex128)
    G_arr = np.zeros((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] A = A_arr
    cdef double complex[:, ::1] F = F_arr
    cdef double complex[:, ::1] Uv = U_arr
    cdef double complex[:, ::1] Tv = T_arr
    cdef double complex* U = &Uv[0, 0]
    cdef double complex* T = &Tv[0, 0]
    cdef double complex* tmp
    cdef double complex[:, ::1] G = G_arr
    cdef int[::1] piv = np.zeros(d, dtype=np.intc)
    cdef double complex half = 0.5j * dt
    cdef double complex h, one = 1.0, zero = 0.0
    cdef double worst = 0.0, acc
    cdef int j, r, c, info = 0, bad = -1
    cdef char tn = b'N'
    cdef char tc = b'C'
    with nogil:
        for j in range(M):
            for r in range(d):
                for c in range(d):
                    h = half * Hv[j, r, c]
                    A[c, r] = h
                    F[c, r] = -h
                A[r, r] = A[r, r] + 1.0
                F[r, r] = F[r, r] + 1.0
            zgesv(&d, &d, &A[0, 0], &d, &piv[0], &F[0, 0], &d, &info)
            if info != 0:
                bad = j
                break
            zgemm(&tn, &tn, &d, &d, &d, &one, &F[0, 0], &d, U, &d, &zero, T, &d)
            tmp = U
            U = T
            T = tmp
            if track_defect:
                zgemm(&tc, &tn, &d, &d, &d, &one, U, &d, U, &d, &zero, &G[0, 0], &d)
                acc = 0.0
                for r in range(d):
                    G[r, r] = G[r, r] - 1.0
                    for c in range(d):
                        acc = acc + _abs2(G[c, r])
                acc = sqrt(acc)
                if acc > worst:
                    worst = acc
    if bad >= 0:
        raise ArithmeticError(f"Cayley factor {bad} is singular")
    final = U_arr if U == &Uv[0, 0] else T_arr
    out = final.T.copy()
    return out, worst
