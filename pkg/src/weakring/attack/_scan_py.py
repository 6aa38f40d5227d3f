"""numpy version of the guess loop, used when the compiled kernel is missing."""

import numpy as np


def scan_guesses(a, b, q, guesses, mode, S, low_ok, high_ok, max_ties=16):
    """Same contract as scan_chunk but over an explicit sequence of guesses."""
    q = int(q)
    ell = len(a)
    big = q >= 1 << 31
    dtype = object if big else np.int64
    g = np.asarray([int(x) for x in guesses], dtype=dtype)
    S = np.asarray(S, dtype=np.int64)
    fail_at = np.full(len(g), ell, dtype=np.int64)
    alive = np.arange(len(g))
    for j in range(ell):
        if not len(alive):
            break
        aj, bj = int(a[j]), int(b[j])
        if big:
            r = np.array([(bj - int(x) * aj) % q for x in g[alive]], dtype=np.int64)
        else:
            r = (bj - g[alive] * aj) % q
        if mode == 0:
            ok = (r <= low_ok) | (r >= high_ok)
        elif len(S):
            idx = np.searchsorted(S, r).clip(max=len(S) - 1)
            ok = S[idx] == r
        else:
            ok = np.zeros(len(r), dtype=bool)
        fail_at[alive[~ok]] = j
        alive = alive[ok]
    survivors = [int(x) for x in g[fail_at == ell]]
    elim = fail_at < ell
    if not elim.any():
        return survivors, -1, []
    best = int(fail_at[elim].max())
    ties = [int(x) for x in g[elim & (fail_at == best)][:max_ties]]
    return survivors, best, ties


def scan_chunk(a, b, q, lo, hi, mode, S, low_ok, high_ok, max_ties=16):
    return scan_guesses(a, b, q, range(int(lo), int(hi)), mode, S, low_ok, high_ok, max_ties)
