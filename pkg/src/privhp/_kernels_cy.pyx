# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled streaming hot loops; mirrors privhp._kernels_py bit for bit."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline uint64_t _mix(uint64_t x) nogil:
    cdef uint64_t z = x + <uint64_t>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


def splitmix64(x):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] arr = np.ascontiguousarray(x, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty_like(arr)
    cdef Py_ssize_t i, n = arr.shape[0]
    cdef uint64_t[::1] a = arr
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _mix(a[i])
    return out


def locate_codes(points, int level):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef int d = pts.shape[1]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.zeros(n, dtype=np.uint64)
    cdef double[:, ::1] p = pts
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    cdef int t, axis, m
    cdef int64_t cell, maxc
    cdef double scale
    cdef uint64_t code
    with nogil:
        for i in range(n):
            code = 0
            for t in range(level):
                axis = t % d
                m = t // d + 1
                scale = <double>(<uint64_t>1 << m)
                maxc = (<int64_t>1 << m) - 1
                cell = <int64_t>(p[i, axis] * scale)
                if cell > maxc:
                    cell = maxc
                code = (code << 1) | (<uint64_t>cell & 1)
            o[i] = code
    return out


def tree_path_add(tree, codes, int L_star):
    cdef double[::1] t = tree
    cdef uint64_t[::1] c = np.ascontiguousarray(codes, dtype=np.uint64)
    cdef Py_ssize_t i, n = c.shape[0]
    cdef int l
    cdef uint64_t theta
    with nogil:
        for i in range(n):
            for l in range(L_star + 1):
                theta = c[i] >> (L_star - l)
                t[((<Py_ssize_t>1 << l) - 1) + <Py_ssize_t>theta] += 1.0


def sketch_add(cells, row_seeds, codes, delta=1.0):
    cdef double[:, ::1] cl = cells
    cdef uint64_t[::1] seeds = np.ascontiguousarray(row_seeds, dtype=np.uint64)
    cdef uint64_t[::1] c = np.ascontiguousarray(codes, dtype=np.uint64)
    cdef Py_ssize_t r, i, n = c.shape[0]
    cdef Py_ssize_t depth = cl.shape[0]
    cdef uint64_t width = <uint64_t>cl.shape[1]
    cdef double dv
    cdef double[::1] dvec
    if np.ndim(delta) == 0:
        dv = <double>delta
        with nogil:
            for r in range(depth):
                for i in range(n):
                    cl[r, _mix(c[i] ^ seeds[r]) % width] += dv
    else:
        dvec = np.ascontiguousarray(delta, dtype=np.float64)
        with nogil:
            for r in range(depth):
                for i in range(n):
                    cl[r, _mix(c[i] ^ seeds[r]) % width] += dvec[i]


def sketch_query(cells, row_seeds, codes):
    cdef double[:, ::1] cl = cells
    cdef uint64_t[::1] seeds = np.ascontiguousarray(row_seeds, dtype=np.uint64)
    cdef uint64_t[::1] c = np.ascontiguousarray(codes, dtype=np.uint64)
    cdef Py_ssize_t r, i, n = c.shape[0]
    cdef Py_ssize_t depth = cl.shape[0]
    cdef uint64_t width = <uint64_t>cl.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double v
    with nogil:
        for i in range(n):
            o[i] = cl[0, _mix(c[i] ^ seeds[0]) % width]
            for r in range(1, depth):
                v = cl[r, _mix(c[i] ^ seeds[r]) % width]
                if v < o[i]:
                    o[i] = v
    return out
