# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the dense Pauli kernels (see ``_pykernels``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline double _sign(u64 j, u64 z) nogil:
    return 1.0 - 2.0 * (__builtin_popcountll(j & z) & 1)


def pauli_dense(xmasks, zmasks, coeffs, int n):
    cdef Py_ssize_t dim = 1 << n
    out = np.zeros((dim, dim), dtype=np.complex128)
    cdef cnp.uint64_t[::1] xs = np.ascontiguousarray(xmasks, dtype=np.uint64)
    cdef cnp.uint64_t[::1] zs = np.ascontiguousarray(zmasks, dtype=np.uint64)
    cdef double[:, ::1] cs = np.ascontiguousarray(coeffs, dtype=np.complex128).view(np.float64).reshape(-1, 2)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef Py_ssize_t k, r, col, nt = xs.shape[0]
    cdef u64 j
    cdef double sg
    # row-major sweep: entry (j ^ x, j) of each term, visited row by row
    with nogil:
        for r in range(dim):
            for k in range(nt):
                j = <u64>r ^ xs[k]
                sg = _sign(j, zs[k])
                col = 2 * <Py_ssize_t>j
                o[r, col] += sg * cs[k, 0]
                o[r, col + 1] += sg * cs[k, 1]
    return out


def apply_pauli(x, z, coeff, states):
    cdef double[:, ::1] s = np.ascontiguousarray(states, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t dim = s.shape[0], m2 = s.shape[1]
    out = np.empty((dim, m2 // 2), dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef u64 xm = <u64>x, zm = <u64>z
    cdef double cr = coeff.real, ci = coeff.imag, fr, fi, ar, ai, sg
    cdef Py_ssize_t j, r, col
    with nogil:
        for j in range(dim):
            sg = _sign(<u64>j, zm)
            fr = cr * sg
            fi = ci * sg
            r = <Py_ssize_t>(<u64>j ^ xm)
            for col in range(0, m2, 2):
                ar = s[j, col]
                ai = s[j, col + 1]
                o[r, col] = fr * ar - fi * ai
                o[r, col + 1] = fr * ai + fi * ar
    return out


def apply_1q(u, int bit, states):
    cdef double[:, ::1] s = np.ascontiguousarray(states, dtype=np.complex128).view(np.float64)
    g = np.ascontiguousarray(u, dtype=np.complex128)
    cdef double g00r = g[0, 0].real, g00i = g[0, 0].imag, g01r = g[0, 1].real, g01i = g[0, 1].imag
    cdef double g10r = g[1, 0].real, g10i = g[1, 0].imag, g11r = g[1, 1].real, g11i = g[1, 1].imag
    cdef Py_ssize_t dim = s.shape[0], m2 = s.shape[1]
    out = np.empty((dim, m2 // 2), dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef Py_ssize_t step = 1 << bit, j, j1, col
    cdef double ar, ai, br, bi
    with nogil:
        for j in range(dim):
            if j & step:
                continue
            j1 = j | step
            for col in range(0, m2, 2):
                ar = s[j, col]
                ai = s[j, col + 1]
                br = s[j1, col]
                bi = s[j1, col + 1]
                o[j, col] = g00r * ar - g00i * ai + g01r * br - g01i * bi
                o[j, col + 1] = g00r * ai + g00i * ar + g01r * bi + g01i * br
                o[j1, col] = g10r * ar - g10i * ai + g11r * br - g11i * bi
                o[j1, col + 1] = g10r * ai + g10i * ar + g11r * bi + g11i * br
    return out
