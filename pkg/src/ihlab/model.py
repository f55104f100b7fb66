"""Graded Frobenius algebra models.

A model packages the even-degree pieces of a finite-dimensional graded
commutative algebra with one-dimensional bottom and top, the cup-product
action of its degree-2 piece, the quadratic form on that piece, and the
integration functional on the top piece.  All stored data is exact
(Fraction entries); prime-field reductions are cached per modulus.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError, PreconditionError, StructuralError
from .linalg import (
    ScalarDomain,
    Subspace,
    fr,
    fr_matrix,
    fr_vector,
    fr_zeros,
    subspace_kernel,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class QuadraticLattice:
    """A nondegenerate symmetric bilinear form on the degree-2 piece,
    optionally annotated with a hyperbolic pair of basis indices."""

    def __init__(self, gram, hyperbolic_pair=None, name: str = ""):
        self.gram = fr_matrix(gram)
        self.name = name
        if self.gram.shape[0] != self.gram.shape[1]:
            raise InputError("Gram matrix must be square")
        self.b2 = self.gram.shape[0]
        for i in range(self.b2):
            for j in range(i):
                if self.gram[i, j] != self.gram[j, i]:
                    raise InputError(f"Gram matrix not symmetric at ({i}, {j})")
        if _rank_exact(self.gram) != self.b2:
            raise InputError("Gram matrix is degenerate")
        self.hyperbolic_pair = None
        if hyperbolic_pair is not None:
            e, f = int(hyperbolic_pair[0]), int(hyperbolic_pair[1])
            if not (0 <= e < self.b2 and 0 <= f < self.b2 and e != f):
                raise InputError("hyperbolic pair indices out of range")
            if self.gram[e, e] != 0 or self.gram[f, f] != 0 or self.gram[e, f] != 1:
                raise InputError(
                    "annotated pair is not hyperbolic: need q(e)=q(f)=0, (e,f)=1"
                )
            self.hyperbolic_pair = (e, f)

    def pair(self, u, v) -> Fraction:
        u = _as_fr_vec(u, self.b2)
        v = _as_fr_vec(v, self.b2)
        total = _ZERO
        for i in range(self.b2):
            if u[i] == 0:
                continue
            row = self.gram[i]
            for j in range(self.b2):
                if v[j] != 0:
                    total += u[i] * row[j] * v[j]
        return total

    def q(self, v) -> Fraction:
        return self.pair(v, v)

    def signature(self) -> tuple[int, int]:
        """(positive, negative) inertia, computed exactly by symmetric
        congruence reduction (Sylvester's law)."""
        a = self.gram.copy()
        n = self.b2
        pos = neg = 0
        active = list(range(n))
        while active:
            # prefer a nonzero diagonal entry
            k = next((i for i in active if a[i, i] != 0), None)
            if k is None:
                i = active[0]
                j = next(jj for jj in active[1:] if a[i, jj] != 0)
                a[i] = a[i] + a[j]
                a[:, i] = a[:, i] + a[:, j]
                k = i
            d = a[k, k]
            if d > 0:
                pos += 1
            else:
                neg += 1
            active.remove(k)
            for i in active:
                c = a[i, k] / d
                if c != 0:
                    a[i] = a[i] - c * a[k]
                    a[:, i] = a[:, i] - c * a[:, k]
        return pos, neg

    def has_even_diagonal(self) -> bool:
        return all(
            self.gram[i, i].denominator == 1 and self.gram[i, i].numerator % 2 == 0
            for i in range(self.b2)
        )


def _rank_exact(m: np.ndarray) -> int:
    from .linalg import _rref_exact

    return _rref_exact(m)[0].shape[0]


def _as_fr_vec(v, length: int) -> np.ndarray:
    if isinstance(v, np.ndarray) and v.dtype == object and v.shape == (length,):
        return v
    vec = fr_vector(list(v))
    if vec.shape[0] != length:
        raise InputError(f"expected a vector of length {length}")
    return vec


class GradedOperator:
    """A linear operator on the total space, stored as per-degree blocks
    grouped by even shift: component of shift s maps degree d to d+s.

    Row convention throughout: vectors are rows, blocks act on the right.
    """

    def __init__(self, dims, domain: ScalarDomain, blocks: dict[int, list] | None = None):
        self.dims = tuple(dims)
        self.domain = domain
        self.blocks = {}
        if blocks:
            for s, blist in blocks.items():
                self.blocks[int(s)] = list(blist)

    @property
    def ndeg(self) -> int:
        return len(self.dims)

    @property
    def shifts(self) -> list[int]:
        return sorted(self.blocks)

    def block(self, shift: int, t: int):
        """Block mapping degree index t to t + shift//2, or None."""
        blist = self.blocks.get(shift)
        if blist is None:
            return None
        return blist[t]

    def _iter_blocks(self, shift: int):
        blist = self.blocks.get(shift)
        if blist is None:
            return
        for t, b in enumerate(blist):
            if b is not None:
                yield t, b

    @classmethod
    def zero(cls, dims, domain):
        return cls(dims, domain)

    @classmethod
    def single_shift(cls, dims, domain, shift: int, block_list):
        return cls(dims, domain, {shift: block_list})

    def copy(self):
        return GradedOperator(
            self.dims,
            self.domain,
            {s: [None if b is None else b.copy() for b in bl] for s, bl in self.blocks.items()},
        )

    def _ensure_shift(self, shift: int):
        if shift not in self.blocks:
            self.blocks[shift] = [None] * self.ndeg
        return self.blocks[shift]

    def add_block(self, shift: int, t: int, mat) -> None:
        blist = self._ensure_shift(shift)
        if blist[t] is None:
            blist[t] = mat
        else:
            blist[t] = self.domain.add(blist[t], mat)

    def __add__(self, other):
        out = self.copy()
        for s, blist in other.blocks.items():
            for t, b in enumerate(blist):
                if b is not None:
                    out.add_block(s, t, b)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        cc = fr(c) if self.domain.is_exact else int(c) % self.domain.p
        out = GradedOperator(self.dims, self.domain)
        for s, blist in self.blocks.items():
            for t, b in enumerate(blist):
                if b is not None:
                    out.add_block(s, t, self.domain.smul(cc, b))
        return out

    def then(self, other: "GradedOperator") -> "GradedOperator":
        """Composite x -> other(self(x))."""
        out = GradedOperator(self.dims, self.domain)
        ndeg = self.ndeg
        for s1, bl1 in self.blocks.items():
            for s2, bl2 in other.blocks.items():
                for t, b1 in enumerate(bl1):
                    if b1 is None:
                        continue
                    mid = t + s1 // 2
                    if not (0 <= mid < ndeg):
                        continue
                    b2 = bl2[mid]
                    if b2 is None:
                        continue
                    if t + (s1 + s2) // 2 >= ndeg or t + (s1 + s2) // 2 < 0:
                        continue
                    out.add_block(s1 + s2, t, self.domain.matmul(b1, b2))
        return out

    def apply(self, vec: np.ndarray, t: int) -> dict[int, np.ndarray]:
        """Image of a degree-index-t row vector, keyed by target index."""
        out: dict[int, np.ndarray] = {}
        for s, blist in self.blocks.items():
            b = blist[t]
            if b is None:
                continue
            tt = t + s // 2
            if not (0 <= tt < self.ndeg):
                continue
            img = self.domain.matmul(vec[None, :], b)[0]
            if tt in out:
                out[tt] = self.domain.add(out[tt], img)
            else:
                out[tt] = img
        return out

    def is_zero(self) -> bool:
        return all(
            b is None or self.domain.is_zero(b)
            for bl in self.blocks.values()
            for b in bl
        )

    def equal(self, other: "GradedOperator") -> bool:
        return (self - other).is_zero()

    def power(self, k: int) -> "GradedOperator":
        if k == 0:
            raise InputError("identity power not represented; handle k=0 upstream")
        out = self
        for _ in range(k - 1):
            out = out.then(self)
        return out


def degree_index(model: "GradedAlgebraModel", degree: int) -> int:
    if degree % 2 != 0 or not (0 <= degree <= 4 * model.n):
        raise InputError(f"degree {degree} outside the model range")
    return degree // 2


@dataclass
class GradedAlgebraModel:
    """See module docstring.  ``h2_action[i][t]`` is the block of cup
    product with the i-th degree-2 basis vector from degree index t to
    t+1 (an object-Fraction matrix of shape dims[t] x dims[t+1])."""

    n: int
    dims: tuple[int, ...]
    h2_action: list[list[np.ndarray | None]]
    lattice: QuadraticLattice
    integral: np.ndarray
    name: str = ""
    _modp_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 2 * self.n + 1:
            raise InputError("dims must list the pieces of degrees 0, 2, ..., 4n")
        if self.dims[0] != 1 or self.dims[-1] != 1:
            raise InputError("degree-0 and top pieces must be one-dimensional")
        if self.dims[1] != self.lattice.b2:
            raise InputError("degree-2 dimension must equal the lattice rank")
        if len(self.h2_action) != self.lattice.b2:
            raise InputError("need one action block list per degree-2 basis vector")
        if self.integral.shape != (self.dims[-1],):
            raise InputError("integral functional must live on the top piece")

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def degrees(self) -> list[int]:
        return [2 * t for t in range(len(self.dims))]

    def action_blocks(self, domain: ScalarDomain):
        """Per-generator block lists in the given domain (cached mod p)."""
        if domain.is_exact:
            return self.h2_action
        key = domain.p
        cached = self._modp_cache.get(key)
        if cached is None:
            cached = [
                [None if b is None else domain.from_exact(b) for b in blist]
                for blist in self.h2_action
            ]
            self._modp_cache[key] = cached
        return cached

    def integral_vector(self, domain: ScalarDomain) -> np.ndarray:
        return domain.from_exact(self.integral)

    def integrate_top(self, vec: np.ndarray, domain: ScalarDomain):
        iv = self.integral_vector(domain)
        if domain.is_exact:
            return sum(vec[i] * iv[i] for i in range(len(iv)))
        return int(np.sum([int(vec[i]) * int(iv[i]) % domain.p for i in range(len(iv))]) % domain.p)

    def unit_vector(self, domain: ScalarDomain) -> np.ndarray:
        return domain.vector([1])


@dataclass
class HodgeMarking:
    """Two isotropic degree-2 classes with nonzero pairing; they induce a
    bigrading with the remaining orthogonal complement in middle type."""

    sigma: np.ndarray
    sigmabar: np.ndarray

    @classmethod
    def from_vectors(cls, sigma, sigmabar):
        return cls(fr_vector(list(sigma)), fr_vector(list(sigmabar)))

    def validate(self, lattice: QuadraticLattice) -> None:
        if self.sigma.shape != (lattice.b2,) or self.sigmabar.shape != (lattice.b2,):
            raise InputError("marking vectors must have b2 entries")
        if lattice.q(self.sigma) != 0:
            raise PreconditionError("sigma must be isotropic")
        if lattice.q(self.sigmabar) != 0:
            raise PreconditionError("sigmabar must be isotropic")
        if lattice.pair(self.sigma, self.sigmabar) == 0:
            raise PreconditionError("sigma and sigmabar must pair nontrivially")


def default_marking(lattice: QuadraticLattice) -> HodgeMarking | None:
    """The marking induced by the hyperbolic-pair annotation, if any."""
    if lattice.hyperbolic_pair is None:
        return None
    e, f = lattice.hyperbolic_pair
    sigma = fr_zeros(1, lattice.b2)[0]
    sigmabar = fr_zeros(1, lattice.b2)[0]
    sigma[e] = _ONE
    sigmabar[f] = _ONE
    return HodgeMarking(sigma, sigmabar)


# ---------------------------------------------------------------------------
# operators


def cup_operator(model: GradedAlgebraModel, v, domain: ScalarDomain | None = None) -> GradedOperator:
    """Cup product with the degree-2 class of coefficient vector v: the
    shift +2 operator sum_i v_i L_i.  Nilpotent of order <= 2n+1."""
    domain = domain or ScalarDomain.exact()
    vec = _as_fr_vec(v, model.lattice.b2)
    coeffs = domain.from_exact(vec)
    blocks_by_gen = model.action_blocks(domain)
    ndeg = len(model.dims)
    blist: list = [None] * ndeg
    for t in range(ndeg - 1):
        acc = domain.zeros(model.dims[t], model.dims[t + 1])
        for i in range(model.lattice.b2):
            c = coeffs[i]
            if (c == 0) if domain.is_exact else (int(c) == 0):
                continue
            acc = domain.add(acc, domain.smul(c, blocks_by_gen[i][t]))
        blist[t] = acc
    return GradedOperator.single_shift(model.dims, domain, 2, blist)


def grading_operator(model: GradedAlgebraModel, domain: ScalarDomain | None = None) -> GradedOperator:
    """The shift-0 operator acting as (d - 2n) * id on the degree-d piece."""
    domain = domain or ScalarDomain.exact()
    blist = []
    for t, dim in enumerate(model.dims):
        c = 2 * t - 2 * model.n
        blist.append(domain.smul(c, domain.eye(dim)))
    return GradedOperator.single_shift(model.dims, domain, 0, blist)


def apply_power_to_unit(model: GradedAlgebraModel, op: GradedOperator, k: int) -> np.ndarray:
    """(unit) cupped k times; returns the resulting degree-2k row vector."""
    domain = op.domain
    vec = model.unit_vector(domain)
    t = 0
    for _ in range(k):
        images = op.apply(vec, t)
        if not images:
            return domain.zeros(1, 1)[0]
        (t, vec), = images.items()
    return vec


# ---------------------------------------------------------------------------
# Fujiki constant


@dataclass
class FujikiReport:
    constant: Fraction | None
    verified: bool
    samples: int
    witness: str | None
    sigma_pairing_power: Fraction | None  # integral((sigma.sigmabar)^n) if marking given
    sigma_normalized_constant: Fraction | None

    @property
    def passed(self) -> bool:
        return self.verified


def _integral_of_top_power(model: GradedAlgebraModel, alpha: np.ndarray) -> Fraction:
    domain = ScalarDomain.exact()
    op = cup_operator(model, alpha, domain)
    top = apply_power_to_unit(model, op, 2 * model.n)
    return model.integrate_top(top, domain)


def fujiki_check(
    model: GradedAlgebraModel,
    seed: int = 42,
    samples: int = 20,
    marking: HodgeMarking | None = None,
) -> FujikiReport:
    """Determine c with integral(a^{2n}) = c * q(a)^n from one anisotropic
    class, then verify the identity exactly on `samples` random classes."""
    lat = model.lattice
    rng = random.Random(("fujiki", seed).__repr__())
    c = None
    base = None
    for _ in range(200):
        cand = fr_vector([rng.randint(-3, 3) for _ in range(lat.b2)])
        if lat.q(cand) != 0:
            base = cand
            break
    if base is None:
        return FujikiReport(None, False, 0, "no anisotropic rational class found", None, None)
    c = _integral_of_top_power(model, base) / lat.q(base) ** model.n

    checked = 0
    witness = None
    while checked < samples:
        cand = fr_vector([rng.randint(-4, 4) for _ in range(lat.b2)])
        qv = lat.q(cand)
        if qv == 0 and all(x == 0 for x in cand):
            continue
        lhs = _integral_of_top_power(model, cand)
        rhs = c * qv ** model.n
        if lhs != rhs:
            witness = f"alpha={[str(x) for x in cand]}: integral={lhs} != c*q^n={rhs}"
            return FujikiReport(c, False, checked, witness, None, None)
        checked += 1

    spow = None
    c_sigma = None
    if marking is not None:
        domain = ScalarDomain.exact()
        op_s = cup_operator(model, marking.sigma, domain)
        op_sb = cup_operator(model, marking.sigmabar, domain)
        vec = model.unit_vector(domain)
        t = 0
        for _ in range(model.n):
            (t, vec), = op_s.apply(vec, t).items()
        for _ in range(model.n):
            (t, vec), = op_sb.apply(vec, t).items()
        spow = model.integrate_top(vec, domain)
        if spow != 0:
            c_sigma = c / spow
    return FujikiReport(c, True, checked, None, spow, c_sigma)


# ---------------------------------------------------------------------------
# Hodge bigrading


def _adapted_basis(model: GradedAlgebraModel, marking: HodgeMarking) -> list[tuple[np.ndarray, int]]:
    """Degree-2 basis adapted to the marking, as (vector, weight) pairs
    with weight 2 for sigma, -2 for sigmabar, 0 on the orthocomplement."""
    marking.validate(model.lattice)
    lat = model.lattice
    exact = ScalarDomain.exact()
    pair_mat = np.concatenate(
        [
            exact.matmul(lat.gram, marking.sigma[:, None]),
            exact.matmul(lat.gram, marking.sigmabar[:, None]),
        ],
        axis=1,
    )
    comp = subspace_kernel(pair_mat, exact)
    if comp.dim != lat.b2 - 2:
        raise StructuralError("marking does not split the degree-2 piece")
    out = [(marking.sigma, 2), (marking.sigmabar, -2)]
    for i in range(comp.dim):
        out.append((comp.basis[i], 0))
    return out


def hodge_components(
    model: GradedAlgebraModel,
    marking: HodgeMarking,
    domain: ScalarDomain | None = None,
) -> dict[tuple[int, int], Subspace]:
    """Subspaces of the (p, q) bigraded pieces, indexed per degree d=p+q.

    Components are spans of products of adapted degree-2 classes; the
    bigrading is well-defined exactly when the per-degree spans are
    independent, which is checked and reported per degree on failure.
    """
    domain = domain or ScalarDomain.exact()
    adapted = _adapted_basis(model, marking)
    ops = [cup_operator(model, vec, domain) for vec, _ in adapted]
    weights = [w for _, w in adapted]
    b2 = model.lattice.b2
    ndeg = len(model.dims)

    out: dict[tuple[int, int], Subspace] = {(0, 0): Subspace.full(domain, 1)}
    # products of adapted classes indexed by sorted index tuples (monomials)
    prev: dict[tuple[int, ...], np.ndarray] = {(): model.unit_vector(domain)}
    for t in range(1, ndeg):
        cur: dict[tuple[int, ...], np.ndarray] = {}
        for mono, vec in prev.items():
            start = mono[-1] if mono else 0
            for i in range(start, b2):
                block = ops[i].block(2, t - 1)
                cur[mono + (i,)] = domain.matmul(vec[None, :], block)[0]
        d = 2 * t
        buckets: dict[int, list[np.ndarray]] = {}
        for mono, vec in cur.items():
            w = sum(weights[i] for i in mono)
            buckets.setdefault(w, []).append(vec)
        total = 0
        stacked_all = []
        for w in sorted(buckets):
            span = Subspace.from_rows(domain, np.stack(buckets[w]), ambient=model.dims[t])
            if span.dim:
                out[((d + w) // 2, (d - w) // 2)] = span
                total += span.dim
                stacked_all.append(span.basis)
        joint = Subspace.from_rows(
            domain, np.concatenate(stacked_all, axis=0), ambient=model.dims[t]
        )
        if total != model.dims[t] or joint.dim != model.dims[t]:
            raise StructuralError(
                f"bigrading ill-defined in degree {d}: weight spans give "
                f"{total} summed / {joint.dim} joint dimensions, expected {model.dims[t]}"
            )
        prev = cur
    return out


def hodge_numbers(
    model: GradedAlgebraModel,
    marking: HodgeMarking,
    domain: ScalarDomain | None = None,
) -> np.ndarray:
    """The (2n+1)x(2n+1) table of bigraded dimensions Ih^{p,q}."""
    comps = hodge_components(model, marking, domain)
    size = 2 * model.n + 1
    table = np.zeros((size, size), dtype=np.int64)
    for (p, q), span in comps.items():
        if p >= size or q >= size:
            raise StructuralError(f"bigraded component ({p},{q}) outside the table")
        table[p, q] = span.dim
    return table


# ---------------------------------------------------------------------------
# validation


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: str | None = None
    warning: bool = False

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        return "warn" if self.warning else "fail"


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed or c.warning for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.warning]


def _monomials(b2: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(b2), k))


def validate_model(model: GradedAlgebraModel, domain: ScalarDomain | None = None) -> ValidationReport:
    """Run every structural invariant; failures carry witnesses."""
    domain = domain or ScalarDomain.exact()
    checks: list[CheckResult] = []
    dims = model.dims
    ndeg = len(dims)
    n = model.n

    checks.append(
        CheckResult(
            "ends-one-dimensional",
            dims[0] == 1 and dims[-1] == 1,
            None if dims[0] == 1 and dims[-1] == 1 else f"dims={dims}",
        )
    )
    pal = all(dims[t] == dims[ndeg - 1 - t] for t in range(ndeg))
    checks.append(CheckResult("palindromic-dims", pal, None if pal else f"dims={dims}"))

    blocks = model.action_blocks(domain)
    shape_ok = True
    shape_witness = None
    for i, blist in enumerate(blocks):
        for t in range(ndeg - 1):
            b = blist[t]
            if b is None or b.shape != (dims[t], dims[t + 1]):
                shape_ok = False
                shape_witness = f"generator {i}, degree {2*t}"
                break
        if not shape_ok:
            break
    checks.append(CheckResult("action-block-shapes", shape_ok, shape_witness))
    if not shape_ok:
        return ValidationReport(checks)

    comm_witness = None
    b2 = model.lattice.b2
    for i in range(b2):
        if comm_witness:
            break
        for j in range(i + 1, b2):
            if comm_witness:
                break
            for t in range(ndeg - 2):
                lhs = domain.matmul(blocks[i][t], blocks[j][t + 1])
                rhs = domain.matmul(blocks[j][t], blocks[i][t + 1])
                if not domain.equal(lhs, rhs):
                    comm_witness = f"generators ({i}, {j}) in degree {2*t}"
                    break
    checks.append(CheckResult("commutativity", comm_witness is None, comm_witness))

    pairing_witness = None
    for t in range(ndeg):
        comp_k = ndeg - 1 - t
        # pair degree 2t against all complementary degree-2-monomial products
        mats = {(): domain.eye(dims[t])}
        for step in range(comp_k):
            new = {}
            for mono, mat in mats.items():
                start = mono[-1] if mono else 0
                for i in range(start, b2):
                    new[mono + (i,)] = domain.matmul(mat, blocks[i][t + step])
            mats = new
        iv = model.integral_vector(domain)[:, None]
        cols = [domain.matmul(mat, iv) for _, mat in sorted(mats.items())]
        gram = np.concatenate(cols, axis=1)
        if domain.rank(gram) != dims[t]:
            pairing_witness = f"degree {2*t}: pairing rank {domain.rank(gram)} < {dims[t]}"
            break
    checks.append(CheckResult("poincare-pairing-nondegenerate", pairing_witness is None, pairing_witness))

    # top-degree annihilation and nilpotency are structural for the block
    # layout; assert them on a generic combination anyway
    rng_vec = fr_vector([1 + (i % 3) for i in range(b2)])
    op = cup_operator(model, rng_vec, domain)
    nil = op.power(2 * n + 1) if n >= 1 else op
    checks.append(
        CheckResult(
            "cup-nilpotency",
            nil.is_zero(),
            None if nil.is_zero() else "power 2n+1 of a degree-2 class is nonzero",
        )
    )
    return ValidationReport(checks)
