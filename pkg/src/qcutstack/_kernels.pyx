# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops (same contracts as _kernels_py)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, floor, fmod

cnp.import_array()


def cycle_decompose(perm):
    cdef const cnp.int64_t[::1] p = np.ascontiguousarray(perm, dtype=np.int64)
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.uint8_t[::1] seen = np.zeros(n, dtype=np.uint8)
    order_arr = np.empty(n, dtype=np.int64)
    starts_arr = np.empty(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] order = order_arr
    cdef cnp.int64_t[::1] starts = starts_arr
    cdef Py_ssize_t pos = 0, ncyc = 0, q0
    cdef cnp.int64_t q
    starts[0] = 0
    for q0 in range(n):
        if seen[q0]:
            continue
        q = q0
        while True:
            if q < 0 or q >= n or seen[q]:
                raise ValueError("map is not a bijection of Z_N")
            seen[q] = 1
            order[pos] = q
            pos += 1
            q = p[q]
            if q == q0:
                break
        ncyc += 1
        starts[ncyc] = pos
    return order_arr, starts_arr[:ncyc + 1].copy()


def orbit_gauge(orbit, n):
    cdef const cnp.int64_t[::1] o = np.ascontiguousarray(orbit, dtype=np.int64)
    cdef Py_ssize_t k = o.shape[0], j
    cdef cnp.int64_t nn = n
    cdef cnp.int64_t mod = nn * k
    cdef cnp.int64_t s = 0, partial = 0, q, v
    for j in range(k):
        q = o[j] % mod
        s = (s + (q * q) % mod) % mod
    out_arr = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    for j in range(k):
        v = ((j % mod) * s) % mod - (k * partial) % mod
        if v < 0:
            v += mod
        out[j] = v
        q = o[j] % nn
        partial = (partial + (q * q) % nn) % nn
    return out_arr


cdef inline Py_ssize_t _find(Py_ssize_t[::1] par, Py_ssize_t i) nogil:
    cdef Py_ssize_t root = i, nxt
    while par[root] != root:
        root = par[root]
    while par[i] != root:
        nxt = par[i]
        par[i] = root
        i = nxt
    return root


def greedy_nearest(sources, targets, free):
    cdef const cnp.uint8_t[::1] fr = np.ascontiguousarray(free, dtype=np.uint8)
    cdef const double[::1] tg = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t n = fr.shape[0]
    cdef Py_ssize_t m = len(sources)
    right_arr = np.arange(n, dtype=np.intp)
    left_arr = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] right = right_arr
    cdef Py_ssize_t[::1] left = left_arr
    out_arr = np.full(m, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, idx, c, fl, r, l, j
    cdef Py_ssize_t remaining = 0
    cdef double t, dr, dl, dn = <double>n
    for i in range(n):
        if fr[i]:
            remaining += 1
        else:
            right[i] = (i + 1) % n
            left[i] = (i - 1 + n) % n
    with nogil:
        for idx in range(m):
            if remaining == 0:
                break
            t = fmod(tg[idx], dn)
            if t < 0:
                t += dn
            c = (<Py_ssize_t>ceil(t)) % n
            fl = (<Py_ssize_t>floor(t)) % n
            r = _find(right, c)
            l = _find(left, fl)
            dr = fmod(r - t, dn)
            if dr < 0:
                dr += dn
            dl = fmod(t - l, dn)
            if dl < 0:
                dl += dn
            if dr < dl:
                j = r
            elif dl < dr:
                j = l
            else:
                j = r if r < l else l
            out[idx] = j
            right[j] = (j + 1) % n
            left[j] = (j - 1 + n) % n
            remaining -= 1
    return out_arr
