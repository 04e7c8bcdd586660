"""Small shared helpers: hashing, arithmetic, deterministic ordering."""

from __future__ import annotations

import hashlib


def short_hash(data: bytes) -> str:
    """16-hex-digit blake2b digest, the canonical key scheme for this package."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def p_part(n: int, p: int) -> int:
    """Largest power of p dividing n."""
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class CapExceeded(RuntimeError):
    """A configured enumeration cap would be violated."""


class IntegrityError(RuntimeError):
    """A mathematical invariant that should hold was found violated."""
