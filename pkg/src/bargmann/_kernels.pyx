# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Ryser permanents and Fock transition amplitudes.

Same contracts as ``bargmann._pykernels``.
"""
import numpy as np

from libc.math cimport exp, lgamma
from libc.stdlib cimport free, malloc

from bargmann.errors import CapacityError

BACKEND = "cython"
MAX_PERMANENT_SIZE = 40

ctypedef double complex cplx


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef cplx _ryser(const cplx[:, ::1] a, Py_ssize_t n, cplx* rowsum) noexcept nogil:
    # Gray-code Ryser: one column enters or leaves the subset per step.
    cdef unsigned long long k, gray = 0, bit, last = (<unsigned long long>1) << n
    cdef Py_ssize_t i, j
    cdef int size = 0
    cdef cplx total = 0, prod
    for i in range(n):
        rowsum[i] = 0
    k = 1
    while k < last:
        j = __builtin_ctzll(k)
        bit = (<unsigned long long>1) << j
        gray ^= bit
        if gray & bit:
            size += 1
            for i in range(n):
                rowsum[i] = rowsum[i] + a[i, j]
        else:
            size -= 1
            for i in range(n):
                rowsum[i] = rowsum[i] - a[i, j]
        prod = 1
        for i in range(n):
            prod = prod * rowsum[i]
        if size & 1:
            total = total - prod
        else:
            total = total + prod
        k += 1
    if n & 1:
        return -total
    return total


def permanent(a):
    """Permanent of a square complex matrix by Ryser's formula (Gray-code order)."""
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {arr.shape}")
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n > MAX_PERMANENT_SIZE:
        raise CapacityError(f"{n}x{n} permanent is beyond the supported size")
    cdef const cplx[:, ::1] view = arr
    cdef cplx* rowsum = <cplx*>malloc(n * sizeof(cplx))
    cdef cplx res
    try:
        with nogil:
            res = _ryser(view, n, rowsum)
    finally:
        free(rowsum)
    return complex(res)


cdef cplx _repeated_permanent(const cplx[:, ::1] mat,
                              Py_ssize_t* rows, long long* rmult, Py_ssize_t nr,
                              Py_ssize_t* cols, long long* cmult, Py_ssize_t nc,
                              long long n, cplx* rowsum, long long* x) noexcept nogil:
    # Ryser over column multiplicities: sum_x (-1)^(n-|x|) prod_j C(c_j, x_j)
    # prod_i (sum_j x_j mat[row_i, col_j])^(r_i).
    cdef Py_ssize_t i, j, jj
    cdef long long s = 0, r
    cdef double coef = 1.0
    cdef cplx total = 0, prod, p
    cdef bint carried
    for i in range(nr):
        rowsum[i] = 0
    for j in range(nc):
        x[j] = 0
    while True:
        j = 0
        carried = False
        while j < nc and x[j] == cmult[j]:
            s -= x[j]
            x[j] = 0
            j += 1
            carried = True
        if j == nc:
            break
        coef = coef * (cmult[j] - x[j]) / (x[j] + 1)
        x[j] += 1
        s += 1
        if carried:
            for i in range(nr):
                p = 0
                for jj in range(nc):
                    if x[jj]:
                        p = p + x[jj] * mat[rows[i], cols[jj]]
                rowsum[i] = p
        else:
            for i in range(nr):
                rowsum[i] = rowsum[i] + mat[rows[i], cols[j]]
        prod = 1
        for i in range(nr):
            p = rowsum[i]
            for r in range(rmult[i]):
                prod = prod * p
        if (n - s) & 1:
            total = total - coef * prod
        else:
            total = total + coef * prod
    return total


cdef cplx _amplitude(const cplx[:, ::1] u, const cplx[:, ::1] ut,
                     const long long* s, const long long* t, Py_ssize_t m,
                     Py_ssize_t* ia, long long* ma, Py_ssize_t* ib, long long* mb,
                     cplx* rowsum, long long* x) noexcept nogil:
    cdef Py_ssize_t k, ns = 0, nt = 0
    cdef double cost_s = 1.0, cost_t = 1.0, lognorm = 0.0
    cdef long long n = 0
    cdef cplx per
    for k in range(m):
        if s[k]:
            cost_s *= s[k] + 1
            lognorm += lgamma(s[k] + 1.0)
        if t[k]:
            cost_t *= t[k] + 1
            lognorm += lgamma(t[k] + 1.0)
            n += t[k]
    if n == 0:
        return 1
    if cost_t <= cost_s:
        # rows = output modes, columns = input modes (iterate over T multiplicities)
        for k in range(m):
            if s[k]:
                ia[ns] = k
                ma[ns] = s[k]
                ns += 1
            if t[k]:
                ib[nt] = k
                mb[nt] = t[k]
                nt += 1
        per = _repeated_permanent(u, ia, ma, ns, ib, mb, nt, n, rowsum, x)
    else:
        for k in range(m):
            if t[k]:
                ia[nt] = k
                ma[nt] = t[k]
                nt += 1
            if s[k]:
                ib[ns] = k
                mb[ns] = s[k]
                ns += 1
        per = _repeated_permanent(ut, ia, ma, nt, ib, mb, ns, n, rowsum, x)
    return per * exp(-0.5 * lognorm)


def fock_amplitudes(u, t, outputs):
    """Transition amplitudes ``<S|phi(U)|T>`` for every row ``S`` of ``outputs``."""
    uarr = np.ascontiguousarray(u, dtype=np.complex128)
    utarr = np.ascontiguousarray(uarr.T)
    tarr = np.ascontiguousarray(t, dtype=np.int64)
    oarr = np.ascontiguousarray(np.atleast_2d(outputs), dtype=np.int64)
    cdef Py_ssize_t m = uarr.shape[0]
    cdef Py_ssize_t L = oarr.shape[0]
    out = np.zeros(L, dtype=np.complex128)
    if oarr.size == 0:
        return out
    if oarr.shape[1] != m or tarr.shape[0] != m or uarr.shape[1] != m:
        raise ValueError("shape mismatch between unitary, input and outputs")
    if np.any(oarr.sum(axis=1) != tarr.sum()):
        raise ValueError("outputs must carry the same photon number as the input")
    cdef const cplx[:, ::1] uv = uarr
    cdef const cplx[:, ::1] utv = utarr
    cdef const long long[::1] tv = tarr
    cdef const long long[:, ::1] ov = oarr
    cdef cplx[::1] res = out
    cdef Py_ssize_t l
    cdef Py_ssize_t* ia = <Py_ssize_t*>malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t* ib = <Py_ssize_t*>malloc(m * sizeof(Py_ssize_t))
    cdef long long* ma = <long long*>malloc(m * sizeof(long long))
    cdef long long* mb = <long long*>malloc(m * sizeof(long long))
    cdef long long* x = <long long*>malloc(m * sizeof(long long))
    cdef cplx* rowsum = <cplx*>malloc(m * sizeof(cplx))
    try:
        with nogil:
            for l in range(L):
                res[l] = _amplitude(uv, utv, &ov[l, 0], &tv[0], m,
                                    ia, ma, ib, mb, rowsum, x)
    finally:
        free(ia)
        free(ib)
        free(ma)
        free(mb)
        free(x)
        free(rowsum)
    return out
