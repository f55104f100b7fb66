"""Prime generation and validation for the prime-field scalar mode.

The modulus must satisfy 2**40 < p < 2**41: the lower bound makes random
rank collisions negligible, the upper bound lets every kernel keep exact
int64 intermediates via 21-bit splitting.
"""
from __future__ import annotations

import os
import random

from .errors import InputError

PRIME_LOW = 1 << 40
PRIME_HIGH = 1 << 41

# Deterministic Miller-Rabin witnesses, valid for all n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

PRIME_ENV_VAR = "IHLAB_PRIME"


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(seed: int) -> int:
    """A prime in (2**40, 2**41), deterministic for a given seed."""
    rng = random.Random(("ihlab-prime", seed).__repr__())
    while True:
        n = rng.randrange(PRIME_LOW + 1, PRIME_HIGH) | 1
        if is_probable_prime(n):
            return n


def validate_prime(p: int) -> int:
    if not (PRIME_LOW < p < PRIME_HIGH):
        raise InputError(
            f"modulus {p} outside the supported window ({PRIME_LOW}, {PRIME_HIGH})"
        )
    if not is_probable_prime(p):
        raise InputError(f"modulus {p} is not prime")
    return p


def resolve_prime(seed: int = 42, override: int | None = None) -> int:
    """Pick the run modulus: explicit override, else IHLAB_PRIME, else a
    seed-derived random prime (so identical configs reuse the same prime)."""
    if override is not None:
        return validate_prime(int(override))
    env = os.environ.get(PRIME_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise InputError(f"{PRIME_ENV_VAR} is not an integer: {env!r}") from exc
        return validate_prime(value)
    return random_prime(seed)
