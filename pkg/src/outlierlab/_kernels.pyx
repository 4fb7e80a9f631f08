# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: CSR matvec, row norms, closed-walk enumeration.

Every routine accumulates in a fixed order so results are bit-identical to
the pure-Python fallback in ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def csr_matvec(const long long[::1] indptr, const int[::1] indices,
               const double[::1] data, const double[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    cdef long long k
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc = acc + data[k] * x[indices[k]]
            y[i] = acc
    return out


def csr_row_norms_sq(const long long[::1] indptr, const double[::1] data):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    cdef long long k
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc = acc + data[k] * data[k]
            y[i] = acc
    return out


cdef long long _walks(const long long[::1] indptr, const int[::1] indices,
                      const int[:, ::1] dist, int start, int length,
                      int[::1] stack, long long[::1] cursor,
                      int[:, ::1] out, long long row0, bint fill) nogil:
    cdef int depth = 0
    cdef long long count = 0
    cdef int v, w
    cdef long long k
    stack[0] = start
    cursor[0] = indptr[start]
    while depth >= 0:
        v = stack[depth]
        if depth == length:
            if v == start:
                if fill:
                    for k in range(length + 1):
                        out[row0 + count, k] = stack[k]
                count += 1
            depth -= 1
            continue
        k = cursor[depth]
        if k >= indptr[v + 1]:
            depth -= 1
            continue
        cursor[depth] = k + 1
        w = indices[k]
        if dist[start, w] <= length - depth - 1:
            depth += 1
            stack[depth] = w
            cursor[depth] = indptr[w]
    return count


def closed_walks(const long long[::1] indptr, const int[::1] indices,
                 const int[:, ::1] dist, int length):
    """All closed walks of ``length`` steps, one row per walk, sorted by start."""
    cdef int n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stack_arr = np.zeros(length + 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cur_arr = np.zeros(length + 1, dtype=np.int64)
    cdef int[::1] stack = stack_arr
    cdef long long[::1] cursor = cur_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=2] dummy = np.zeros((1, length + 1), dtype=np.int32)
    cdef int[:, ::1] dv = dummy
    cdef long long total = 0
    cdef int s
    with nogil:
        for s in range(n):
            total += _walks(indptr, indices, dist, s, length, stack, cursor, dv, 0, False)
    out_arr = np.zeros((total, length + 1), dtype=np.int32)
    cdef int[:, ::1] ov = out_arr
    cdef long long row = 0
    with nogil:
        for s in range(n):
            row += _walks(indptr, indices, dist, s, length, stack, cursor, ov, row, True)
    return out_arr
