# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled agglomeration kernels.

Same contracts and tie-breaking as ``_kernels_py``; works in place on a
copy of the condensed dissimilarity vector.
"""
import numpy as np

from libc.math cimport INFINITY

cdef enum:
    SINGLE = 0
    COMPLETE = 1
    AVERAGE = 2
    WARD = 3
    MEDIAN = 4


cdef inline Py_ssize_t cidx(Py_ssize_t n, Py_ssize_t i, Py_ssize_t j) nogil:
    cdef Py_ssize_t t
    if i > j:
        t = i
        i = j
        j = t
    return n * i - (i * (i + 1)) // 2 + j - i - 1


cdef inline double lance_williams(double dka, double dkb, double dab,
                                  double na, double nb, double nk, int method) nogil:
    if method == SINGLE:
        return dka if dka < dkb else dkb
    elif method == COMPLETE:
        return dka if dka > dkb else dkb
    elif method == AVERAGE:
        return (na * dka + nb * dkb) / (na + nb)
    elif method == WARD:
        return ((na + nk) * dka + (nb + nk) * dkb - nk * dab) / (na + nb + nk)
    else:
        return 0.5 * dka + 0.5 * dkb - 0.25 * dab


cdef void merge_slots(double[::1] d, double[::1] size, char[::1] active,
                      Py_ssize_t n, Py_ssize_t a, Py_ssize_t b, int method) nogil:
    cdef Py_ssize_t k
    cdef double dab = d[cidx(n, a, b)]
    for k in range(n):
        if active[k] and k != a and k != b:
            d[cidx(n, a, k)] = lance_williams(d[cidx(n, a, k)], d[cidx(n, b, k)], dab,
                                              size[a], size[b], size[k], method)
    active[b] = 0
    size[a] += size[b]


def nn_chain(dist, Py_ssize_t n, int method):
    cdef double[::1] d = np.array(dist, dtype=np.float64, copy=True)
    cdef double[::1] size = np.ones(n)
    cdef char[::1] active = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t[::1] chain = np.empty(n, dtype=np.intp)
    pairs_arr = np.empty((n - 1, 2), dtype=np.int64)
    heights_arr = np.empty(n - 1)
    cdef long long[:, ::1] pairs = pairs_arr
    cdef double[::1] heights = heights_arr
    cdef Py_ssize_t top = 0, step, x, y, prev, k, a, b, first = 0
    cdef double best, v
    with nogil:
        for step in range(n - 1):
            if top == 0:
                while not active[first]:
                    first += 1
                chain[0] = first
                top = 1
            while True:
                x = chain[top - 1]
                if top > 1:
                    prev = chain[top - 2]
                    y = prev
                    best = d[cidx(n, x, prev)]
                else:
                    prev = -1
                    y = -1
                    best = INFINITY
                for k in range(n):
                    if active[k] and k != x:
                        v = d[cidx(n, x, k)]
                        if v < best or y == -1:
                            best = v
                            y = k
                if y == prev:
                    break
                chain[top] = y
                top += 1
            top -= 2
            a = x if x < y else y
            b = y if x < y else x
            pairs[step, 0] = a
            pairs[step, 1] = b
            heights[step] = d[cidx(n, a, b)]
            merge_slots(d, size, active, n, a, b, method)
    return pairs_arr, heights_arr


cdef void row_nearest(double[::1] d, char[::1] active, Py_ssize_t n, Py_ssize_t i,
                      Py_ssize_t[::1] nn, double[::1] nnd) nogil:
    cdef Py_ssize_t j, y = -1
    cdef double v, best = INFINITY
    for j in range(i + 1, n):
        if active[j]:
            v = d[cidx(n, i, j)]
            if v < best or y == -1:
                best = v
                y = j
    nn[i] = y
    nnd[i] = best


def stepwise(dist, Py_ssize_t n, int method):
    # nn[i] caches the first closest active j > i, so the global minimum
    # is still the lexicographically first minimal pair
    cdef double[::1] d = np.array(dist, dtype=np.float64, copy=True)
    cdef double[::1] size = np.ones(n)
    cdef char[::1] active = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t[::1] nn = np.empty(n, dtype=np.intp)
    cdef double[::1] nnd = np.empty(n)
    pairs_arr = np.empty((n - 1, 2), dtype=np.int64)
    heights_arr = np.empty(n - 1)
    cdef long long[:, ::1] pairs = pairs_arr
    cdef double[::1] heights = heights_arr
    cdef Py_ssize_t step, i, a, b
    cdef double best, v
    with nogil:
        for i in range(n):
            row_nearest(d, active, n, i, nn, nnd)
        for step in range(n - 1):
            best = INFINITY
            a = -1
            for i in range(n):
                if active[i] and nn[i] != -1 and (nnd[i] < best or a == -1):
                    best = nnd[i]
                    a = i
            b = nn[a]
            pairs[step, 0] = a
            pairs[step, 1] = b
            heights[step] = best
            merge_slots(d, size, active, n, a, b, method)
            row_nearest(d, active, n, a, nn, nnd)
            for i in range(a):
                if not active[i]:
                    continue
                if nn[i] == a or nn[i] == b:
                    row_nearest(d, active, n, i, nn, nnd)
                else:
                    v = d[cidx(n, i, a)]
                    if v < nnd[i] or (v == nnd[i] and a < nn[i]):
                        nn[i] = a
                        nnd[i] = v
            for i in range(a + 1, b):
                if active[i] and nn[i] == b:
                    row_nearest(d, active, n, i, nn, nnd)
    return pairs_arr, heights_arr


def constrained_complete(dist, Py_ssize_t n):
    cdef double[::1] d = np.array(dist, dtype=np.float64, copy=True)
    cdef char[::1] active = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t[::1] nxt = np.empty(n, dtype=np.intp)
    pairs_arr = np.empty((n - 1, 2), dtype=np.int64)
    heights_arr = np.empty(n - 1)
    cdef long long[:, ::1] pairs = pairs_arr
    cdef double[::1] heights = heights_arr
    cdef Py_ssize_t step, s, t, a, b, k
    cdef double best, v
    for s in range(n):
        nxt[s] = s + 1
    nxt[n - 1] = -1
    with nogil:
        for step in range(n - 1):
            best = INFINITY
            a = -1
            s = 0
            while s != -1:
                t = nxt[s]
                if t != -1:
                    v = d[cidx(n, s, t)]
                    if v < best or a == -1:
                        best = v
                        a = s
                s = t
            b = nxt[a]
            pairs[step, 0] = a
            pairs[step, 1] = b
            heights[step] = best
            for k in range(n):
                if active[k] and k != a and k != b:
                    v = d[cidx(n, b, k)]
                    if v > d[cidx(n, a, k)]:
                        d[cidx(n, a, k)] = v
            active[b] = 0
            nxt[a] = nxt[b]
    return pairs_arr, heights_arr
