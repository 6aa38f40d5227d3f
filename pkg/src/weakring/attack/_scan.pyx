# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled guess loop.  Mirrors weakring.attack._scan_py.scan_chunk exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t wk_mulmod(uint64_t a, uint64_t b, uint64_t m) {
        return (uint64_t)(((unsigned __int128)a * b) % m);
    }
    """
    uint64_t wk_mulmod(uint64_t a, uint64_t b, uint64_t m) nogil


cdef inline bint _in_set(const uint64_t* s, Py_ssize_t ns, uint64_t r) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = ns, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if s[mid] < r:
            lo = mid + 1
        else:
            hi = mid
    return lo < ns and s[lo] == r


def scan_chunk(const uint64_t[::1] a, const uint64_t[::1] b, uint64_t q, uint64_t lo,
               uint64_t hi, int mode, const uint64_t[::1] S, uint64_t low_ok,
               uint64_t high_ok, int max_ties=16):
    """Test guesses g in [lo, hi) against every sample, stopping at the first failure.

    mode 0 accepts r <= low_ok or r >= high_ok, mode 1 accepts r in sorted S,
    where r = b_j - g a_j mod q.  Returns (survivors, longest chain, tied guesses).
    """
    cdef Py_ssize_t ell = a.shape[0]
    cdef Py_ssize_t ns = S.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] surv_arr = np.empty(max(hi - lo, 1), dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] ties_arr = np.empty(max(max_ties, 1), dtype=np.uint64)
    cdef uint64_t* surv = <uint64_t*> surv_arr.data
    cdef uint64_t* ties = <uint64_t*> ties_arr.data
    cdef const uint64_t* sp = &S[0] if ns > 0 else NULL
    cdef const uint64_t* ap = &a[0] if ell > 0 else NULL
    cdef const uint64_t* bp = &b[0] if ell > 0 else NULL
    cdef Py_ssize_t nsurv = 0, nties = 0, j
    cdef int64_t best = -1
    cdef uint64_t g, t, r
    cdef bint ok
    with nogil:
        g = lo
        while g < hi:
            j = 0
            while j < ell:
                t = wk_mulmod(g, ap[j], q)
                r = bp[j] - t if bp[j] >= t else bp[j] + (q - t)
                if mode == 0:
                    ok = r <= low_ok or r >= high_ok
                else:
                    ok = _in_set(sp, ns, r)
                if not ok:
                    break
                j += 1
            if j == ell:
                surv[nsurv] = g
                nsurv += 1
            else:
                if j > best:
                    best = j
                    nties = 0
                if j == best and nties < max_ties:
                    ties[nties] = g
                    nties += 1
            g += 1
    return ([int(x) for x in surv_arr[:nsurv]], int(best), [int(x) for x in ties_arr[:nties]])
