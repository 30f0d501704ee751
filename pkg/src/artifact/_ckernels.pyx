# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled window-counting core.

Windows are bucketed by a 64-bit polynomial hash and every bucket is then
resolved letter by letter, so the returned counts are exact.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef uint64_t _BASE = 0x9E3779B97F4A7C15ULL


cdef inline bint _same(const int32_t[::1] seq, int64_t a, int64_t b, int n) nogil:
    cdef int j
    for j in range(n):
        if seq[a + j] != seq[b + j]:
            return False
    return True


def count_windows(const int32_t[::1] seq, const int64_t[::1] bounds, int n,
                  weights=None, long long budget=-1):
    """Return (distinct, certified) for length-n windows inside each segment.

    bounds holds segment offsets (len = segments + 1).  With weights, only
    windows whose weight sum is at most budget are counted.  A class is
    certified if it occurs twice or at relative position <= seglen - 2n.
    """
    cdef Py_ssize_t nseg = bounds.shape[0] - 1
    cdef Py_ssize_t s, total = 0, m = 0
    cdef int64_t lo, hi, i, seglen
    cdef int j
    for s in range(nseg):
        seglen = bounds[s + 1] - bounds[s]
        if seglen >= n:
            total += seglen - n + 1
    pos_arr = np.empty(total, dtype=np.int64)
    hash_arr = np.empty(total, dtype=np.uint64)
    ok_arr = np.empty(total, dtype=np.uint8)
    cdef int64_t[::1] pos = pos_arr
    cdef uint64_t[::1] hsh = hash_arr
    cdef cnp.uint8_t[::1] okp = ok_arr
    cdef bint use_w = weights is not None
    cdef const int32_t[::1] w
    if use_w:
        w = weights
    cdef uint64_t h, pw
    cdef long long ws
    pw = 1
    for j in range(n - 1):
        pw *= _BASE
    for s in range(nseg):
        lo = bounds[s]
        hi = bounds[s + 1]
        seglen = hi - lo
        if seglen < n:
            continue
        h = 0
        ws = 0
        for j in range(n):
            h = h * _BASE + <uint64_t>(seq[lo + j] + 1)
            if use_w:
                ws += w[lo + j]
        i = lo
        while True:
            if (not use_w) or ws <= budget:
                pos[m] = i
                hsh[m] = h
                okp[m] = 1 if (i - lo) <= seglen - 2 * n else 0
                m += 1
            if i + n >= hi:
                break
            h = (h - <uint64_t>(seq[i] + 1) * pw) * _BASE + <uint64_t>(seq[i + n] + 1)
            if use_w:
                ws += w[i + n] - w[i]
            i += 1
    if m == 0:
        return 0, True
    order_arr = np.argsort(hash_arr[:m], kind="stable").astype(np.int64)
    cdef int64_t[::1] order = order_arr
    cdef int64_t *reps = <int64_t *> malloc(m * sizeof(int64_t))
    cdef int64_t *occ = <int64_t *> malloc(m * sizeof(int64_t))
    cdef cnp.uint8_t *rok = <cnp.uint8_t *> malloc(m * sizeof(cnp.uint8_t))
    cdef Py_ssize_t a = 0, b, k, r, nrep
    cdef long long distinct = 0
    cdef bint certified = True, found
    cdef int64_t p
    try:
        while a < m:
            b = a + 1
            while b < m and hsh[order[b]] == hsh[order[a]]:
                b += 1
            if b == a + 1:
                distinct += 1
                if not okp[order[a]]:
                    certified = False
            else:
                nrep = 0
                for k in range(a, b):
                    p = pos[order[k]]
                    found = False
                    for r in range(nrep):
                        if _same(seq, reps[r], p, n):
                            occ[r] += 1
                            if okp[order[k]]:
                                rok[r] = 1
                            found = True
                            break
                    if not found:
                        reps[nrep] = p
                        occ[nrep] = 1
                        rok[nrep] = okp[order[k]]
                        nrep += 1
                distinct += nrep
                for r in range(nrep):
                    if occ[r] < 2 and not rok[r]:
                        certified = False
            a = b
    finally:
        free(reps)
        free(occ)
        free(rok)
    return int(distinct), bool(certified)
