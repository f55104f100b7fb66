"""Builder for the subalgebra generated by the degree-2 piece.

The model realizes Sym(H^2) modulo the ideal generated by (n+1)-st powers
of isotropic classes.  The top integration functional on Sym^{2n} is the
full polarization of the quadratic form's n-th power (a perfect-matching
sum over the Gram form, normalized so that (e.f)^n integrates to 1 when a
hyperbolic pair is annotated).  A pigeonhole argument shows this
functional kills products containing an (n+1)-st isotropic power, so
degrees above n can be presented by their pairing coordinates against the
complementary symmetric power; the quotient so obtained is certified
against the sampled isotropic-power span (rank saturation mod p).
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArithmeticObstruction, ConstructionError, InputError
from .linalg import ScalarDomain, fr_vector, fr_zeros
from .model import GradedAlgebraModel, QuadraticLattice, cup_operator, apply_power_to_unit
from .primes import resolve_prime

_ZERO = Fraction(0)
_ONE = Fraction(1)


def monomials(b2: int, k: int) -> list[tuple[int, ...]]:
    """Sorted index tuples for the monomial basis of Sym^k."""
    return list(itertools.combinations_with_replacement(range(b2), k))


class WickIntegral:
    """The polarized top form on Sym^{2n}: a monomial integrates to the
    normalized sum over perfect matchings of products of Gram entries."""

    def __init__(self, lattice: QuadraticLattice, n: int):
        self.lattice = lattice
        self.n = n
        self._memo: dict[tuple[int, ...], Fraction] = {(): _ONE}
        self.normalizer = self._pick_normalizer()

    def _raw(self, idx: tuple[int, ...]) -> Fraction:
        memo = self._memo
        cached = memo.get(idx)
        if cached is not None:
            return cached
        gram = self.lattice.gram
        first = idx[0]
        rest = idx[1:]
        total = _ZERO
        pos = 0
        while pos < len(rest):
            val = rest[pos]
            cnt = 1
            while pos + cnt < len(rest) and rest[pos + cnt] == val:
                cnt += 1
            g = gram[first, val]
            if g != 0:
                sub = rest[:pos] + rest[pos + 1 :]
                total += cnt * g * self._raw(sub)
            pos += cnt
        memo[idx] = total
        return total

    def _pick_normalizer(self) -> Fraction:
        if self.lattice.hyperbolic_pair is not None:
            e, f = self.lattice.hyperbolic_pair
            mono = tuple(sorted((e, f) * self.n))
            value = self._raw(mono)
            if value != 0:
                return value
        for mono in monomials(self.lattice.b2, 2 * self.n):
            value = self._raw(mono)
            if value != 0:
                return value
        raise ConstructionError("top integration form vanishes identically")

    def value(self, idx) -> Fraction:
        """Normalized integral of the monomial with the given indices."""
        return self._raw(tuple(sorted(idx))) / self.normalizer


@dataclass
class ShConstruction:
    """The assembled model plus the symmetric-power bookkeeping: for
    degree index t <= n the basis is monomial; above the middle the
    coordinates pair against the monomials of Sym^{2n-t}."""

    lattice: QuadraticLattice
    n: int
    basis_monomials: list[list[tuple[int, ...]]]
    wick: WickIntegral
    model: GradedAlgebraModel

    def projection(self, k: int) -> np.ndarray:
        """Matrix of Sym^k -> degree-2k piece in the stored bases."""
        if not 0 <= k <= 2 * self.n:
            raise InputError(f"symmetric power {k} outside range")
        src = monomials(self.lattice.b2, k)
        if k <= self.n:
            out = fr_zeros(len(src), len(src))
            for i in range(len(src)):
                out[i, i] = _ONE
            return out
        dst = self.basis_monomials[k]
        out = fr_zeros(len(src), len(dst))
        for i, m in enumerate(src):
            for j, y in enumerate(dst):
                out[i, j] = self.wick.value(m + y)
        return out


def _mult_matrix(b2: int, k: int, gen: int) -> np.ndarray:
    """Multiplication by a generator: Sym^k -> Sym^{k+1}, 0/1 entries."""
    src = monomials(b2, k)
    dst = monomials(b2, k + 1)
    index = {m: j for j, m in enumerate(dst)}
    out = fr_zeros(len(src), len(dst))
    for i, m in enumerate(src):
        out[i, index[tuple(sorted(m + (gen,)))]] = _ONE
    return out


def build_sh_construction(
    lattice: QuadraticLattice,
    n: int,
    *,
    name: str = "",
    seed: int = 42,
    certify_ideal: bool = True,
    prime: int | None = None,
) -> ShConstruction:
    if n < 1:
        raise InputError("n must be a positive integer")
    b2 = lattice.b2
    wick = WickIntegral(lattice, n)
    ndeg = 2 * n + 1
    basis_monos = [monomials(b2, t if t <= n else 2 * n - t) for t in range(ndeg)]
    dims = [len(ms) for ms in basis_monos]

    h2_action: list[list[np.ndarray | None]] = []
    for gen in range(b2):
        blist: list[np.ndarray | None] = [None] * ndeg
        for t in range(ndeg - 1):
            if t + 1 <= n:
                blist[t] = _mult_matrix(b2, t, gen)
            elif t == n:
                src = basis_monos[n]
                dst = basis_monos[n + 1]  # monomials of Sym^{n-1}
                block = fr_zeros(len(src), len(dst))
                for i, m in enumerate(src):
                    base = m + (gen,)
                    for j, y in enumerate(dst):
                        block[i, j] = wick.value(base + y)
                blist[t] = block
            else:
                # dual coordinates: pull back multiplication on the
                # complementary symmetric power
                blist[t] = _mult_matrix(b2, 2 * n - t - 1, gen).T.copy()
        h2_action.append(blist)

    integral = fr_vector([1])
    model = GradedAlgebraModel(
        n=n,
        dims=tuple(dims),
        h2_action=h2_action,
        lattice=lattice,
        integral=integral,
        name=name or f"sh_b{b2}_n{n}",
    )
    construction = ShConstruction(lattice, n, basis_monos, wick, model)

    _certify_isotropic_powers(construction, seed=seed)
    if certify_ideal:
        report = certify_power_span(lattice, n, seed=seed, prime=prime)
        if not report.reached_target:
            raise ConstructionError(
                "isotropic-power span did not saturate: "
                f"rank {report.rank} of target {report.target} after "
                f"{report.samples} samples"
            )
    return construction


def build_sh(lattice: QuadraticLattice, n: int, **kwargs) -> GradedAlgebraModel:
    """The degree-2-generated model on the given lattice; see
    :func:`build_sh_construction` for keyword options."""
    return build_sh_construction(lattice, n, **kwargs).model


def _certify_isotropic_powers(construction: ShConstruction, seed: int) -> None:
    """In-model check: isotropic (n+1)-st powers vanish, anisotropic ones
    do not."""
    model = construction.model
    lattice = construction.lattice
    n = construction.n
    for gamma in sample_isotropic(lattice, seed=seed, count=3):
        op = cup_operator(model, gamma)
        if not op.power(n + 1).is_zero():
            raise ConstructionError(
                f"isotropic class {[str(x) for x in gamma]} has nonzero power n+1"
            )
    rng = random.Random(("sh-aniso", seed).__repr__())
    found = 0
    while found < 3:
        alpha = fr_vector([rng.randint(-3, 3) for _ in range(lattice.b2)])
        if lattice.q(alpha) == 0:
            continue
        vec = apply_power_to_unit(model, cup_operator(model, alpha), n + 1)
        if all(x == 0 for x in vec):
            raise ConstructionError(
                f"anisotropic class {[str(x) for x in alpha]} has vanishing power n+1"
            )
        found += 1


# ---------------------------------------------------------------------------
# isotropic sampling


def _orthocomplement_basis(lattice: QuadraticLattice) -> np.ndarray:
    from .linalg import subspace_kernel

    e, f = lattice.hyperbolic_pair
    exact = ScalarDomain.exact()
    cols = np.concatenate(
        [lattice.gram[:, [e]], lattice.gram[:, [f]]], axis=1
    )
    return subspace_kernel(cols, exact).basis


def _is_square(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    num = math.isqrt(x.numerator)
    den = math.isqrt(x.denominator)
    if num * num == x.numerator and den * den == x.denominator:
        return Fraction(num, den)
    return None


def _normalize_line(v: np.ndarray) -> tuple:
    for x in v:
        if x != 0:
            return tuple(y / x for y in v)
    raise ValueError("zero vector has no line representative")


def sample_isotropic(lattice: QuadraticLattice, seed: int, count: int) -> list[np.ndarray]:
    """`count` pairwise non-proportional nonzero rational classes with
    q = 0, deterministic in the seed.

    Random pencils q(v + t*w) = 0 are solved for rational t (accepting
    square discriminants); when the lattice carries a hyperbolic pair the
    sampler falls back to the parametrization x -> x + e - (q(x)/2) f over
    the orthocomplement.
    """
    if count < 1:
        raise InputError("count must be positive")
    rng = random.Random(("isotropic", seed).__repr__())
    b2 = lattice.b2
    found: list[np.ndarray] = []
    seen: set[tuple] = set()
    comp = _orthocomplement_basis(lattice) if lattice.hyperbolic_pair else None

    def consider(vec: np.ndarray) -> None:
        if all(x == 0 for x in vec):
            return
        key = _normalize_line(vec)
        if key in seen:
            return
        assert lattice.q(vec) == 0
        seen.add(key)
        found.append(fr_vector(key))

    general_tries = min(40 * count, 400)
    for attempt in range(general_tries + 4000 * count):
        if len(found) >= count:
            break
        use_param = comp is not None and attempt >= general_tries
        if use_param:
            x = fr_vector([rng.randint(-3, 3) for _ in range(comp.shape[0])])
            vec = fr_vector([0] * b2)
            for i in range(comp.shape[0]):
                if x[i] != 0:
                    vec = vec + x[i] * comp[i]
            e, f = lattice.hyperbolic_pair
            qx = lattice.q(vec)
            vec[e] += 1
            vec[f] -= qx / 2
            consider(vec)
            continue
        v = fr_vector([rng.randint(-3, 3) for _ in range(b2)])
        w = fr_vector([rng.randint(-3, 3) for _ in range(b2)])
        qv = lattice.q(v)
        if qv == 0:
            consider(v)
            continue
        qw = lattice.q(w)
        pvw = lattice.pair(v, w)
        if qw == 0:
            if pvw != 0:
                consider(v - qv / (2 * pvw) * w)
            continue
        s = _is_square(pvw * pvw - qv * qw)
        if s is None:
            continue
        t = (-pvw + s) / qw
        consider(v + t * w)
    if len(found) < count:
        raise ArithmeticObstruction(
            f"found only {len(found)} of {count} rational isotropic classes; "
            "annotate a hyperbolic pair to enable direct parametrization"
        )
    return found


# ---------------------------------------------------------------------------
# ideal saturation certificate


@dataclass
class SaturationReport:
    target: int
    rank: int
    samples: int
    stable_run: int
    prime: int

    @property
    def reached_target(self) -> bool:
        return self.rank == self.target and self.stable_run >= 10


def _power_vector(gamma: np.ndarray, k: int, index: dict, b2: int) -> np.ndarray:
    """Coefficients of gamma^k in the monomial basis of Sym^k."""
    out = np.empty(len(index), dtype=object)
    out[:] = _ZERO
    support = [i for i in range(b2) if gamma[i] != 0]
    for combo in itertools.combinations_with_replacement(support, k):
        mult = math.factorial(k)
        coeff = _ONE
        run = 0
        prev = None
        for val in combo:
            coeff *= gamma[val]
            run = run + 1 if val == prev else 1
            mult //= run
            prev = val
        out[index[combo]] = mult * coeff
    return out


def certify_power_span(
    lattice: QuadraticLattice,
    n: int,
    *,
    seed: int = 42,
    prime: int | None = None,
    batch: int = 128,
) -> SaturationReport:
    """Sample isotropic classes and track the rank of the span of their
    (n+1)-st powers inside Sym^{n+1} (mod p) until it is stable for at
    least 10 consecutive samples and hits the palindromic target."""
    p = prime if prime is not None else resolve_prime(seed)
    domain = ScalarDomain.modp(p)
    b2 = lattice.b2
    k = n + 1
    monos = monomials(b2, k)
    index = {m: i for i, m in enumerate(monos)}
    target = len(monos) - len(monomials(b2, max(n - 1, 0)))

    echelon = np.zeros((0, len(monos)), dtype=np.int64)
    pivots: list[int] = []
    rank = 0
    stable = 0
    samples = 0
    budget = target + 200 + 20 * batch
    stream_seed = 0
    while samples < budget:
        need = min(batch, budget - samples)
        gammas = sample_isotropic(lattice, seed=seed + 7919 * stream_seed, count=need)
        stream_seed += 1
        rows = np.stack(
            [domain.from_exact(_power_vector(g, k, index, b2)) for g in gammas]
        )
        samples += len(gammas)
        if rank:
            rows = (rows - domain.matmul(rows[:, pivots], echelon)) % p
        new_rows, new_pivs = domain.rref(rows)
        if new_rows.shape[0] == 0:
            stable += len(gammas)
        else:
            stable = 0
            if rank:
                echelon = (
                    echelon - domain.matmul(echelon[:, new_pivs], new_rows)
                ) % p
            echelon = np.concatenate([echelon, new_rows], axis=0)
            pivots = pivots + new_pivs
            order = np.argsort(pivots)
            pivots = [pivots[i] for i in order]
            echelon = np.ascontiguousarray(echelon[order])
            rank += new_rows.shape[0]
        if rank == target and stable >= 10:
            break
        if rank > target:
            raise ConstructionError(
                f"isotropic-power span exceeded the palindromic target "
                f"({rank} > {target}); the quadratic form is inconsistent"
            )
    return SaturationReport(target=target, rank=rank, samples=samples, stable_run=stable, prime=p)
