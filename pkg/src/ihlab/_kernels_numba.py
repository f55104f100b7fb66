"""Numba-jitted mod-p kernels (same contracts as _kernels_numpy).

The elementwise helper `mulmod` is shared with the numpy backend: it is
memory bound and gains nothing from jitting.  The dense kernels below are
the compute-bound ones.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

from ._kernels_numpy import mulmod  # noqa: F401  (re-exported)

SPLIT = 21
MASK = (1 << SPLIT) - 1


@njit(cache=True, inline="always")
def _mulmod_s(a, b, p):
    bh = b >> SPLIT
    bl = b & MASK
    return (((a * bh % p) << SPLIT) + a * bl) % p


@njit(cache=True)
def _powmod_s(x, e, p):
    r = np.int64(1)
    b = x % p
    while e > 0:
        if e & 1:
            r = _mulmod_s(r, b, p)
        b = _mulmod_s(b, b, p)
        e >>= 1
    return r


@njit(cache=True, parallel=True)
def _matmul_mod_jit(a, bt, p):
    m, k = a.shape
    n = bt.shape[0]
    out = np.empty((m, n), dtype=np.int64)
    for i in prange(m):
        for j in range(n):
            acc = np.int64(0)
            for l in range(k):
                acc += _mulmod_s(a[i, l], bt[j, l], p)
            out[i, j] = acc % p
    return out


def matmul_mod(a, b, p):
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if k == 0 or m == 0 or n == 0:
        return np.zeros((m, n), dtype=np.int64)
    # k * (p-1) must stay under 2**63 for the accumulator
    if k >= (1 << 22):
        raise ValueError("inner dimension too large for the jitted kernel")
    bt = np.ascontiguousarray(b.T)
    return _matmul_mod_jit(a, bt, np.int64(p))


@njit(cache=True)
def _rref_mod_jit(a, p):
    nrows, ncols = a.shape
    piv = np.empty(min(nrows, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        sel = -1
        for i in range(r, nrows):
            if a[i, c] != 0:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(ncols):
                t = a[r, j]
                a[r, j] = a[sel, j]
                a[sel, j] = t
        inv = _powmod_s(a[r, c], p - 2, p)
        for j in range(ncols):
            a[r, j] = _mulmod_s(a[r, j], inv, p)
        for i in range(nrows):
            if i == r or a[i, c] == 0:
                continue
            f = a[i, c]
            for j in range(ncols):
                a[i, j] = (a[i, j] - _mulmod_s(f, a[r, j], p)) % p
        piv[r] = c
        r += 1
    return a, piv, r


def rref_mod(m, p):
    a = np.ascontiguousarray(m, dtype=np.int64) % p
    a, piv, r = _rref_mod_jit(a, np.int64(p))
    return a[:r].copy(), [int(c) for c in piv[:r]]
