"""Scalar domains and subspace algebra.

Two scalar domains back every computation: exact arbitrary-precision
rationals (``Fraction`` entries in object arrays) and a prime field F_p
with p a ~41-bit prime (int64 arrays, kernels in :mod:`ihlab.backend`).
A single domain is used throughout one computation.

Subspaces are stored as reduced row-echelon bases with pivot-sorted rows,
so equality of subspaces is equality of basis matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backend
from .errors import InputError
from .primes import PRIME_HIGH, PRIME_LOW

_ZERO = Fraction(0)
_ONE = Fraction(1)


def fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"cannot interpret {x!r} as an exact rational")


def fr_matrix(rows) -> np.ndarray:
    """A 2-d object array of Fractions from nested sequences (or an array)."""
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        data = [[fr(v) for v in row] for row in rows.tolist()]
    else:
        data = [[fr(v) for v in row] for row in rows]
    ncols = len(data[0]) if data else 0
    for row in data:
        if len(row) != ncols:
            raise InputError("ragged matrix input")
    out = np.empty((len(data), ncols), dtype=object)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            out[i, j] = v
    return out


def fr_vector(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = fr(v)
    return out


def fr_zeros(m: int, n: int) -> np.ndarray:
    out = np.empty((m, n), dtype=object)
    out[:] = _ZERO
    return out


def fr_eye(n: int) -> np.ndarray:
    out = fr_zeros(n, n)
    for i in range(n):
        out[i, i] = _ONE
    return out


def _rref_exact(m: np.ndarray):
    a = m.copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        sel = None
        for i in range(r, nrows):
            if a[i, c] != 0:
                sel = i
                break
        if sel is None:
            continue
        if sel != r:
            a[[r, sel]] = a[[sel, r]]
        a[r] = a[r] / a[r, c]
        for i in range(nrows):
            if i != r and a[i, c] != 0:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
    return a[:r].copy(), pivots


class ScalarDomain:
    """Exact-rational or prime-field arithmetic with a uniform matrix API."""

    __slots__ = ("mode", "p")

    def __init__(self, mode: str, p: int | None = None):
        if mode not in ("exact", "modp"):
            raise InputError(f"unknown scalar mode {mode!r}")
        if mode == "modp":
            if p is None or not (PRIME_LOW < p < PRIME_HIGH):
                raise InputError(
                    f"prime-field mode needs a prime in ({PRIME_LOW}, {PRIME_HIGH})"
                )
        self.mode = mode
        self.p = p if mode == "modp" else None

    @classmethod
    def exact(cls) -> "ScalarDomain":
        return cls("exact")

    @classmethod
    def modp(cls, p: int) -> "ScalarDomain":
        return cls("modp", p)

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def __repr__(self):
        return "ScalarDomain(exact)" if self.is_exact else f"ScalarDomain(modp {self.p})"

    def __eq__(self, other):
        return (
            isinstance(other, ScalarDomain)
            and self.mode == other.mode
            and self.p == other.p
        )

    def __hash__(self):
        return hash((self.mode, self.p))

    # -- construction / conversion ------------------------------------

    def reduce_fraction(self, x: Fraction) -> int:
        p = self.p
        den = x.denominator % p
        if den == 0:
            raise InputError(f"denominator of {x} vanishes mod {p}; pick another prime")
        return x.numerator % p * pow(den, p - 2, p) % p

    def from_exact(self, m: np.ndarray) -> np.ndarray:
        """Map an object-Fraction matrix/vector into this domain."""
        if self.is_exact:
            return m
        flat = [self.reduce_fraction(v) for v in m.reshape(-1)]
        return np.array(flat, dtype=np.int64).reshape(m.shape)

    def matrix(self, rows) -> np.ndarray:
        return self.from_exact(fr_matrix(rows))

    def vector(self, values) -> np.ndarray:
        return self.from_exact(fr_vector(values))

    def zeros(self, m: int, n: int) -> np.ndarray:
        if self.is_exact:
            return fr_zeros(m, n)
        return np.zeros((m, n), dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        if self.is_exact:
            return fr_eye(n)
        return np.eye(n, dtype=np.int64)

    # -- arithmetic -----------------------------------------------------

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise InputError(f"shape mismatch {a.shape} @ {b.shape}")
        if self.is_exact:
            if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
                return fr_zeros(a.shape[0], b.shape[1])
            return a @ b
        return backend.matmul_mod(a, b, self.p)

    def add(self, a, b):
        if self.is_exact:
            return a + b
        return (a + b) % self.p

    def sub(self, a, b):
        if self.is_exact:
            return a - b
        return (a - b) % self.p

    def smul(self, c, a):
        if self.is_exact:
            return a * c
        return backend.mulmod(a, np.int64(int(c) % self.p), self.p)

    def neg(self, a):
        if self.is_exact:
            return -a
        return (-a) % self.p

    def is_zero(self, a) -> bool:
        if self.is_exact:
            return all(v == 0 for v in np.asarray(a).reshape(-1))
        return not np.any(a)

    def equal(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    # -- elimination ----------------------------------------------------

    def rref(self, m: np.ndarray):
        """(canonical nonzero RREF rows, pivot columns)."""
        if self.is_exact:
            return _rref_exact(m)
        return backend.rref_mod(m, self.p)

    def rank(self, m: np.ndarray) -> int:
        return self.rref(m)[0].shape[0]

    def inv(self, m: np.ndarray) -> np.ndarray:
        n = m.shape[0]
        if m.shape[1] != n:
            raise InputError("inverse of a non-square matrix")
        aug = np.concatenate([m, self.eye(n)], axis=1)
        r, piv = self.rref(aug)
        if len(piv) < n or piv[:n] != list(range(n)):
            raise InputError("matrix is singular")
        out = r[:, n:]
        return out.copy() if self.is_exact else np.ascontiguousarray(out)


@dataclass(frozen=True)
class Subspace:
    """A subspace of a coordinate row-vector space, in canonical RREF form."""

    domain: ScalarDomain
    ambient_dim: int
    basis: np.ndarray  # (dim x ambient_dim), canonical RREF rows

    @classmethod
    def from_rows(cls, domain: ScalarDomain, rows: np.ndarray, ambient: int | None = None):
        rows = np.asarray(rows)
        if rows.ndim != 2:
            raise InputError("subspace rows must form a matrix")
        amb = rows.shape[1] if ambient is None else ambient
        if rows.shape[1] != amb:
            raise InputError("row length does not match ambient dimension")
        r, _ = domain.rref(rows)
        return cls(domain, amb, r)

    @classmethod
    def zero(cls, domain: ScalarDomain, ambient: int):
        return cls(domain, ambient, domain.zeros(0, ambient))

    @classmethod
    def full(cls, domain: ScalarDomain, ambient: int):
        return cls(domain, ambient, domain.eye(ambient))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.ambient_dim == other.ambient_dim
            and self.basis.shape == other.basis.shape
            and self.domain.equal(self.basis, other.basis)
        )

    def contains_vector(self, v: np.ndarray) -> bool:
        if v.shape[0] != self.ambient_dim:
            raise InputError("vector length does not match ambient dimension")
        stacked = np.concatenate([self.basis, v[None, :]], axis=0)
        return self.domain.rank(stacked) == self.dim

    def contains(self, other: "Subspace") -> bool:
        _check_compatible(self, other)
        if other.dim == 0:
            return True
        stacked = np.concatenate([self.basis, other.basis], axis=0)
        return self.domain.rank(stacked) == self.dim


def _check_compatible(a: Subspace, b: Subspace) -> None:
    if a.domain != b.domain:
        raise InputError("subspaces live over different scalar domains")
    if a.ambient_dim != b.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}"
        )


def _left_nullspace_rows(m: np.ndarray, domain: ScalarDomain) -> np.ndarray:
    """Rows spanning {v : v @ m = 0}; m has shape (k, n), ambient is k."""
    k = m.shape[0]
    r, piv = domain.rref(m.T if domain.is_exact else np.ascontiguousarray(m.T))
    pivset = set(piv)
    free = [c for c in range(k) if c not in pivset]
    out = domain.zeros(len(free), k)
    one = _ONE if domain.is_exact else 1
    for row_idx, c in enumerate(free):
        out[row_idx, c] = one
        for j, pc in enumerate(piv):
            out[row_idx, pc] = domain.neg(r[j, c])
    return out


def subspace_kernel(m: np.ndarray, domain: ScalarDomain) -> Subspace:
    """{v : v @ m = 0} in canonical form; ambient = row count of m."""
    if m.ndim != 2:
        raise InputError("kernel expects a matrix")
    return Subspace.from_rows(domain, _left_nullspace_rows(m, domain), ambient=m.shape[0])


def subspace_image(m: np.ndarray, domain: ScalarDomain) -> Subspace:
    """Row space of m in canonical form; ambient = column count of m."""
    if m.ndim != 2:
        raise InputError("image expects a matrix")
    return Subspace.from_rows(domain, m)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_compatible(a, b)
    return Subspace.from_rows(
        a.domain, np.concatenate([a.basis, b.basis], axis=0), ambient=a.ambient_dim
    )


def subspace_intersect(a: Subspace, b: Subspace) -> Subspace:
    _check_compatible(a, b)
    if a.is_zero or b.is_zero:
        return Subspace.zero(a.domain, a.ambient_dim)
    if a.is_full:
        return b
    if b.is_full:
        return a
    domain = a.domain
    stacked = np.concatenate([a.basis, domain.neg(b.basis)], axis=0)
    ker = subspace_kernel(stacked, domain)  # pairs (u, w) with u@A = w@B
    if ker.is_zero:
        return Subspace.zero(domain, a.ambient_dim)
    coeffs = ker.basis[:, : a.dim]
    rows = domain.matmul(coeffs, a.basis)
    return Subspace.from_rows(domain, rows, ambient=a.ambient_dim)
