# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mobility-matrix kernel.

Same contract as ``rotom._kernels_py.mobility`` / ``mobility_batch`` but the
whole pipeline (forward kinematics, CoM Jacobians, mass matrix, Cholesky,
condition number, ``T``) runs in C without the GIL.
"""
import numpy as np

from libc.math cimport sin, cos, sqrt, fabs, INFINITY, NAN
from libc.stdlib cimport malloc, free


cdef inline void _axis_angle(const double* k, double a, double* R) noexcept nogil:
    cdef double c = cos(a), s = sin(a), v = 1.0 - c
    cdef double x = k[0], y = k[1], z = k[2]
    R[0] = c + x * x * v
    R[1] = x * y * v - z * s
    R[2] = x * z * v + y * s
    R[3] = y * x * v + z * s
    R[4] = c + y * y * v
    R[5] = y * z * v - x * s
    R[6] = z * x * v - y * s
    R[7] = z * y * v + x * s
    R[8] = c + z * z * v


cdef inline void _matmul3(const double* A, const double* B, double* C) noexcept nogil:
    cdef int r, c
    for r in range(3):
        for c in range(3):
            C[3 * r + c] = A[3 * r] * B[c] + A[3 * r + 1] * B[3 + c] + A[3 * r + 2] * B[6 + c]


cdef inline void _matvec3(const double* A, const double* x, double* y) noexcept nogil:
    y[0] = A[0] * x[0] + A[1] * x[1] + A[2] * x[2]
    y[1] = A[3] * x[0] + A[4] * x[1] + A[5] * x[2]
    y[2] = A[6] * x[0] + A[7] * x[1] + A[8] * x[2]


cdef struct Work:
    double* rot      # n * 9, link rotations
    double* pos      # n * 3, joint origins
    double* zax      # n * 3, world joint axes
    double* lcom     # n * 3, link CoM positions
    double* col      # n * 3, scratch Jacobian columns of one link
    double* L        # n * n
    double* Minv     # n * n
    double* X        # n * 3


cdef int _alloc(Work* w, int n) noexcept nogil:
    w.rot = <double*> malloc(sizeof(double) * (9 * n + 12 * n + 2 * n * n + 3 * n))
    if w.rot == NULL:
        return -1
    w.pos = w.rot + 9 * n
    w.zax = w.pos + 3 * n
    w.lcom = w.zax + 3 * n
    w.col = w.lcom + 3 * n
    w.L = w.col + 3 * n
    w.Minv = w.L + n * n
    w.X = w.Minv + n * n
    return 0


cdef int _mobility(
    int n, int d,
    const double* axes, const double* origins, const double* coms,
    const double* masses, const double* inertias, const double* base,
    const double* q, Work* w,
    double* T, double* com, double* Jc, double* M, double* cond,
) noexcept nogil:
    cdef int i, j, a, b, r, k
    cdef double R[9]
    cdef double Rj[9]
    cdef double tmp[9]
    cdef double Iw[9]
    cdef double p[3]
    cdef double v[3]
    cdef double Iz[3]
    cdef double mtot = 0.0, mi, s, piv, norm_m, norm_inv, acc
    cdef bint has_inertia

    for r in range(3):
        for j in range(3):
            R[3 * r + j] = base[4 * r + j]
        p[r] = base[4 * r + 3]

    for i in range(n):
        _matvec3(R, origins + 3 * i, v)
        for r in range(3):
            p[r] = p[r] + v[r]
            w.pos[3 * i + r] = p[r]
        _matvec3(R, axes + 3 * i, w.zax + 3 * i)
        _axis_angle(axes + 3 * i, q[i], Rj)
        _matmul3(R, Rj, tmp)
        for r in range(9):
            R[r] = tmp[r]
            w.rot[9 * i + r] = tmp[r]
        _matvec3(R, coms + 3 * i, v)
        for r in range(3):
            w.lcom[3 * i + r] = p[r] + v[r]
        mtot += masses[i]

    for a in range(n * n):
        M[a] = 0.0
    for a in range(d * n):
        Jc[a] = 0.0
    for r in range(d):
        com[r] = 0.0

    for i in range(n):
        mi = masses[i]
        for r in range(d):
            com[r] += mi * w.lcom[3 * i + r] / mtot
        # linear Jacobian columns of link i
        for j in range(i + 1):
            for r in range(3):
                v[r] = w.lcom[3 * i + r] - w.pos[3 * j + r]
            w.col[3 * j + 0] = w.zax[3 * j + 1] * v[2] - w.zax[3 * j + 2] * v[1]
            w.col[3 * j + 1] = w.zax[3 * j + 2] * v[0] - w.zax[3 * j + 0] * v[2]
            w.col[3 * j + 2] = w.zax[3 * j + 0] * v[1] - w.zax[3 * j + 1] * v[0]
            for r in range(d):
                Jc[r * n + j] += mi * w.col[3 * j + r] / mtot
        if mi != 0.0:
            for a in range(i + 1):
                for b in range(i + 1):
                    M[a * n + b] += mi * (
                        w.col[3 * a] * w.col[3 * b]
                        + w.col[3 * a + 1] * w.col[3 * b + 1]
                        + w.col[3 * a + 2] * w.col[3 * b + 2]
                    )
        has_inertia = False
        for r in range(9):
            if inertias[9 * i + r] != 0.0:
                has_inertia = True
        if has_inertia:
            # Iw = R I R^T
            _matmul3(w.rot + 9 * i, inertias + 9 * i, tmp)
            for r in range(3):
                for k in range(3):
                    Iw[3 * r + k] = (
                        tmp[3 * r] * w.rot[9 * i + 3 * k]
                        + tmp[3 * r + 1] * w.rot[9 * i + 3 * k + 1]
                        + tmp[3 * r + 2] * w.rot[9 * i + 3 * k + 2]
                    )
            for b in range(i + 1):
                _matvec3(Iw, w.zax + 3 * b, Iz)
                for a in range(i + 1):
                    M[a * n + b] += (
                        w.zax[3 * a] * Iz[0] + w.zax[3 * a + 1] * Iz[1] + w.zax[3 * a + 2] * Iz[2]
                    )

    for a in range(n):
        for b in range(a):
            s = 0.5 * (M[a * n + b] + M[b * n + a])
            M[a * n + b] = s
            M[b * n + a] = s

    # Cholesky M = L L^T (lower, row-major)
    for a in range(n * n):
        w.L[a] = 0.0
    for j in range(n):
        s = M[j * n + j]
        for k in range(j):
            s -= w.L[j * n + k] * w.L[j * n + k]
        if not (s > 0.0):
            cond[0] = INFINITY
            for a in range(d * d):
                T[a] = NAN
            return 1
        piv = sqrt(s)
        w.L[j * n + j] = piv
        for i in range(j + 1, n):
            s = M[i * n + j]
            for k in range(j):
                s -= w.L[i * n + k] * w.L[j * n + k]
            w.L[i * n + j] = s / piv

    # M^-1 column by column, for the 1-norm condition number
    for b in range(n):
        for i in range(n):
            s = 1.0 if i == b else 0.0
            for k in range(i):
                s -= w.L[i * n + k] * w.Minv[k * n + b]
            w.Minv[i * n + b] = s / w.L[i * n + i]
        for i in range(n - 1, -1, -1):
            s = w.Minv[i * n + b]
            for k in range(i + 1, n):
                s -= w.L[k * n + i] * w.Minv[k * n + b]
            w.Minv[i * n + b] = s / w.L[i * n + i]
    norm_m = 0.0
    norm_inv = 0.0
    for b in range(n):
        s = 0.0
        acc = 0.0
        for i in range(n):
            s += fabs(M[i * n + b])
            acc += fabs(w.Minv[i * n + b])
        if s > norm_m:
            norm_m = s
        if acc > norm_inv:
            norm_inv = acc
    cond[0] = norm_m * norm_inv

    # X = L^-1 Jc^T  (n x d)
    for r in range(d):
        for i in range(n):
            s = Jc[r * n + i]
            for k in range(i):
                s -= w.L[i * n + k] * w.X[k * 3 + r]
            w.X[i * 3 + r] = s / w.L[i * n + i]
    for a in range(d):
        for b in range(a, d):
            s = 0.0
            for k in range(n):
                s += w.X[k * 3 + a] * w.X[k * 3 + b]
            T[a * d + b] = mtot * s
            T[b * d + a] = mtot * s
    return 0


def _arrays(chain):
    return (
        np.ascontiguousarray(chain.axes, dtype=np.float64),
        np.ascontiguousarray(chain.origins, dtype=np.float64),
        np.ascontiguousarray(chain.coms, dtype=np.float64),
        np.ascontiguousarray(chain.masses, dtype=np.float64),
        np.ascontiguousarray(chain.inertias, dtype=np.float64),
        np.ascontiguousarray(chain.base, dtype=np.float64),
    )


def mobility(chain, q):
    """Return ``(T, com, Jc, M, cond)`` at configuration ``q``."""
    cdef const double[:, ::1] axes, origins, coms
    cdef const double[::1] masses
    cdef const double[:, :, ::1] inertias
    cdef const double[:, ::1] base
    axes, origins, coms, masses, inertias, base = _arrays(chain)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef int n = masses.shape[0]
    cdef int d = chain.task_dim
    if qv.shape[0] != n:
        raise ValueError(f"expected {n} joint values, got {qv.shape[0]}")
    T_arr = np.empty((d, d))
    com_arr = np.empty(d)
    Jc_arr = np.empty((d, n))
    M_arr = np.empty((n, n))
    cdef double[:, ::1] Tv = T_arr, Jv = Jc_arr, Mv = M_arr
    cdef double[::1] cv = com_arr
    cdef double cond = 0.0
    cdef Work w
    if _alloc(&w, n) != 0:
        raise MemoryError()
    with nogil:
        _mobility(n, d, &axes[0, 0], &origins[0, 0], &coms[0, 0], &masses[0],
                  &inertias[0, 0, 0], &base[0, 0], &qv[0], &w,
                  &Tv[0, 0], &cv[0], &Jv[0, 0], &Mv[0, 0], &cond)
        free(w.rot)
    return T_arr, com_arr, Jc_arr, M_arr, cond


def mobility_batch(chain, Q):
    """Mobility matrices ``(k, d, d)`` and condition numbers ``(k,)`` for rows of Q."""
    cdef const double[:, ::1] axes, origins, coms
    cdef const double[::1] masses
    cdef const double[:, :, ::1] inertias
    cdef const double[:, ::1] base
    axes, origins, coms, masses, inertias, base = _arrays(chain)
    cdef const double[:, ::1] Qv = np.ascontiguousarray(np.atleast_2d(Q), dtype=np.float64)
    cdef int n = masses.shape[0]
    cdef int d = chain.task_dim
    cdef Py_ssize_t kk, count = Qv.shape[0]
    if Qv.shape[1] != n:
        raise ValueError(f"expected {n} joint values per row, got {Qv.shape[1]}")
    Ts = np.empty((count, d, d))
    conds = np.empty(count)
    cdef double[:, :, ::1] Tv = Ts
    cdef double[::1] cv = conds
    cdef double* com = <double*> malloc(sizeof(double) * (3 + 3 * n + n * n))
    if com == NULL:
        raise MemoryError()
    cdef double* Jc = com + 3
    cdef double* M = Jc + 3 * n
    cdef Work w
    if _alloc(&w, n) != 0:
        free(com)
        raise MemoryError()
    with nogil:
        for kk in range(count):
            _mobility(n, d, &axes[0, 0], &origins[0, 0], &coms[0, 0], &masses[0],
                      &inertias[0, 0, 0], &base[0, 0], &Qv[kk, 0], &w,
                      &Tv[kk, 0, 0], com, Jc, M, &cv[kk])
        free(w.rot)
        free(com)
    return Ts, conds
