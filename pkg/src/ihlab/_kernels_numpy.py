"""Pure-numpy mod-p kernels.

Matrices are int64 arrays of residues in [0, p).  With p < 2**41 every
intermediate below stays under 2**63, so all arithmetic is exact:

* elementwise products split one factor into 21-bit halves;
* matrix products split both factors and run four float64 GEMMs whose
  accumulations are exact as long as the inner dimension per chunk is at
  most 2048 (2048 * (2**21 - 1)**2 < 2**53).
"""
from __future__ import annotations

import numpy as np

SPLIT = 21
MASK = (1 << SPLIT) - 1
CHUNK = 2048


def mulmod(a, b, p):
    """Elementwise a*b mod p (broadcasting allowed)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    bh = b >> SPLIT
    bl = b & MASK
    return (((a * bh % p) << SPLIT) + a * bl) % p


def matmul_mod(a, b, p):
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = np.zeros((m, n), dtype=np.int64)
    if k == 0 or m == 0 or n == 0:
        return out
    shift_hi = np.int64((1 << (2 * SPLIT)) % p)
    shift_lo = np.int64((1 << SPLIT) % p)
    for lo in range(0, k, CHUNK):
        hi = min(lo + CHUNK, k)
        ac = a[:, lo:hi]
        bc = b[lo:hi]
        ah = (ac >> SPLIT).astype(np.float64)
        al = (ac & MASK).astype(np.float64)
        bh = (bc >> SPLIT).astype(np.float64)
        bl = (bc & MASK).astype(np.float64)
        chh = (ah @ bh).astype(np.int64) % p
        cmid = ((ah @ bl).astype(np.int64) % p + (al @ bh).astype(np.int64) % p) % p
        cll = (al @ bl).astype(np.int64) % p
        part = (mulmod(chh, shift_hi, p) + mulmod(cmid, shift_lo, p) + cll) % p
        out += part
        out %= p
    return out


def rref_mod(m, p):
    """Reduced row-echelon form over F_p.

    Returns (rows, pivots): the nonzero RREF rows (pivot entries 1, pivot
    columns cleared everywhere else) and the sorted pivot column indices.
    """
    a = np.ascontiguousarray(m, dtype=np.int64) % p
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = np.int64(pow(int(a[r, c]), p - 2, p))
        a[r] = mulmod(a[r], inv, p)
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            a[others] = (a[others] - mulmod(a[others, c : c + 1], a[r][None, :], p)) % p
        pivots.append(c)
        r += 1
    return a[:r].copy(), pivots
