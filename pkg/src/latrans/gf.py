"""Small finite fields GF(p^m) backed by lookup tables.

Elements are encoded as integers 0..q-1 whose base-p digits are the
polynomial coefficients (lowest degree first).
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


def prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, m) with q = p**m, or None if q is not a prime power."""
    if q < 2:
        return None
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return q, 1
    m = 0
    while q % p == 0:
        q //= p
        m += 1
    return (p, m) if q == 1 else None


def _polymulmod(a, b, modpoly, p):
    # a, b: coefficient lists of length m; modpoly: monic, length m+1
    m = len(modpoly) - 1
    prod = [0] * (2 * m - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for deg in range(len(prod) - 1, m - 1, -1):
        c = prod[deg]
        if c:
            for t in range(m + 1):
                prod[deg - m + t] = (prod[deg - m + t] - c * modpoly[t]) % p
    return prod[:m]


def _is_irreducible(poly, p):
    # brute force: no monic divisor of degree 1..m//2
    m = len(poly) - 1
    for deg in range(1, m // 2 + 1):
        for low in product(range(p), repeat=deg):
            div = list(low) + [1]
            rem = list(poly)
            for shift in range(m - deg, -1, -1):
                c = rem[shift + deg]
                if c:
                    for t in range(deg + 1):
                        rem[shift + t] = (rem[shift + t] - c * div[t]) % p
            if not any(rem[:deg]):
                return False
    return True


class GF:
    """The field with q = p**m elements; `add`/`mul` are q x q tables."""

    def __init__(self, q: int):
        pm = prime_power(q)
        if pm is None:
            raise ValueError(f"{q} is not a prime power")
        self.q = q
        self.p, self.m = pm
        p, m = pm
        if m == 1:
            idx = np.arange(q)
            self.add = (idx[:, None] + idx[None, :]) % q
            self.mul = (idx[:, None] * idx[None, :]) % q
        else:
            modpoly = next(
                list(low) + [1]
                for low in product(range(p), repeat=m)
                if low[0] != 0 and _is_irreducible(list(low) + [1], p)
            )
            digits = [[(x // p**t) % p for t in range(m)] for x in range(q)]
            weights = [p**t for t in range(m)]
            self.add = np.array(
                [[sum(((a + b) % p) * w for a, b, w in zip(da, db, weights)) for db in digits]
                 for da in digits]
            )
            self.mul = np.array(
                [[sum(c * w for c, w in zip(_polymulmod(da, db, modpoly, p), weights))
                  for db in digits] for da in digits]
            )
        self.add.setflags(write=False)
        self.mul.setflags(write=False)
        self.generator = self._find_generator()

    def _find_generator(self) -> int:
        if self.q == 2:
            return 1
        for g in range(2, self.q):
            x, seen = 1, 0
            while True:
                x = int(self.mul[x, g])
                seen += 1
                if x == 1:
                    break
            if seen == self.q - 1:
                return g
        raise AssertionError("multiplicative group is cyclic")  # pragma: no cover


@lru_cache(maxsize=None)
def field(q: int) -> GF:
    return GF(q)
