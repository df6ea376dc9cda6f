"""Latin squares: the type, validation, generators and transversal decompositions."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    ConstructionFailed,
    InvalidOrder,
    InvalidSquare,
    NotAPermutation,
    NotOrthogonal,
    UnsupportedOrder,
)
from .gf import field as gf_field, prime_power


@dataclass(frozen=True, eq=False)
class LatinSquare:
    """An order-n square over the symbols alphabet_offset .. alphabet_offset+n-1.

    The cell array is stored read-only. Construction only checks the shape;
    use `validate_latin` for the Latin property.
    """

    cells: np.ndarray
    alphabet_offset: int = 0

    def __post_init__(self):
        arr = np.array(self.cells, dtype=np.int64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvalidOrder(f"cells must be a non-empty square matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)
        object.__setattr__(self, "alphabet_offset", int(self.alphabet_offset))

    @property
    def order(self) -> int:
        return self.cells.shape[0]

    def __getitem__(self, rc):
        return int(self.cells[rc])

    def __eq__(self, other):
        if not isinstance(other, LatinSquare):
            return NotImplemented
        return self.alphabet_offset == other.alphabet_offset and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.alphabet_offset, self.cells.tobytes()))

    def __repr__(self):
        return f"LatinSquare(order={self.order}, offset={self.alphabet_offset}, cells={self.cells.tolist()})"

    def normalized(self) -> np.ndarray:
        """Cells shifted to the 0-based alphabet."""
        return self.cells - self.alphabet_offset

    def shifted(self, offset: int) -> "LatinSquare":
        return LatinSquare(self.normalized() + offset, offset)

    def with_cell(self, r: int, c: int, symbol: int) -> "LatinSquare":
        arr = self.cells.copy()
        arr[r, c] = symbol
        return LatinSquare(arr, self.alphabet_offset)


@dataclass(frozen=True)
class Transversal:
    positions: tuple[tuple[int, int], ...]
    symbols: tuple[int, ...]

    @classmethod
    def from_columns(cls, square: LatinSquare, cols: Sequence[int]) -> "Transversal":
        positions = tuple((r, int(c)) for r, c in enumerate(cols))
        return cls.from_positions(square, positions)

    @classmethod
    def from_positions(cls, square: LatinSquare, positions: Iterable[tuple[int, int]]) -> "Transversal":
        positions = tuple(sorted((int(r), int(c)) for r, c in positions))
        return cls(positions, tuple(square[r, c] for r, c in positions))

    @property
    def columns(self) -> tuple[int, ...]:
        """Column sequence indexed by row (positions are kept row-sorted)."""
        return tuple(c for _, c in self.positions)

    def is_valid_for(self, square: LatinSquare) -> bool:
        n = square.order
        if len(self.positions) != n:
            return False
        rows = sorted(r for r, _ in self.positions)
        cols = sorted(c for _, c in self.positions)
        if rows != list(range(n)) or cols != list(range(n)):
            return False
        syms = [square[r, c] for r, c in self.positions]
        if tuple(syms) != self.symbols:
            return False
        off = square.alphabet_offset
        return sorted(syms) == list(range(off, off + n))


@dataclass(frozen=True)
class Violation:
    kind: str  # "row-dup" | "col-dup" | "range"
    row: int
    column: int
    symbol: int


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def _quick_latin(cells: np.ndarray, n: int, off: int) -> bool:
    if n == 0:
        return True
    if cells.min() < off or cells.max() >= off + n:
        return False
    expect = np.arange(off, off + n)
    return bool(
        (np.sort(cells, axis=1) == expect).all()
        and (np.sort(cells, axis=0) == expect[:, None]).all()
    )


def validate_latin(square: LatinSquare) -> ValidationReport:
    """Report every range error and every repeated symbol in a row or column.

    A duplicate is reported at each occurrence after the first.
    """
    n, off = square.order, square.alphabet_offset
    cells = square.cells
    if _quick_latin(cells, n, off):
        return ValidationReport(())
    out = []
    for r in range(n):
        for c in range(n):
            s = int(cells[r, c])
            if not off <= s < off + n:
                out.append(Violation("range", r, c, s))
    for r in range(n):
        seen = set()
        for c in range(n):
            s = int(cells[r, c])
            if s in seen:
                out.append(Violation("row-dup", r, c, s))
            seen.add(s)
    for c in range(n):
        seen = set()
        for r in range(n):
            s = int(cells[r, c])
            if s in seen:
                out.append(Violation("col-dup", r, c, s))
            seen.add(s)
    return ValidationReport(tuple(out))


def require_valid(square: LatinSquare) -> None:
    rep = validate_latin(square)
    if not rep.valid:
        v = rep.violations[0]
        raise InvalidSquare(
            f"not a Latin square: {v.kind} at ({v.row}, {v.column}) symbol {v.symbol}"
            f" ({len(rep.violations)} violations)"
        )


def cyclic_square(n: int) -> LatinSquare:
    """Addition table of Z_n."""
    if n < 1:
        raise InvalidOrder(f"order must be >= 1, got {n}")
    idx = np.arange(n)
    return LatinSquare((idx[:, None] + idx[None, :]) % n)


def is_orthogonal(a: LatinSquare, b: LatinSquare) -> bool:
    if a.order != b.order:
        return False
    n = a.order
    pairs = a.normalized() * n + b.normalized()
    return len(np.unique(pairs)) == n * n


def _field_pair(q: int) -> tuple[LatinSquare, LatinSquare]:
    F = gf_field(q)
    # L_a(i, j) = a*i + j over GF(q)
    g = F.generator
    first = F.add[F.mul[1][:, None], np.arange(q)[None, :]]
    second = F.add[F.mul[g][:, None], np.arange(q)[None, :]]
    return LatinSquare(first), LatinSquare(second)


def _linear_pair(n: int) -> tuple[LatinSquare, LatinSquare]:
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return LatinSquare((i + j) % n), LatinSquare((2 * i + j) % n)


def direct_product(a: LatinSquare, b: LatinSquare) -> LatinSquare:
    """Kronecker-style product; orthogonality is preserved factorwise."""
    na, nb = a.order, b.order
    A, B = a.normalized(), b.normalized()
    cells = (A[:, None, :, None] * nb + B[None, :, None, :]).reshape(na * nb, na * nb)
    return LatinSquare(cells)


def _prime_power_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            out.append(q)
        p += 1
    if n > 1:
        out.append(n)
    return out


def mols_pair(n: int, *, seed: int = 0, timeout: float = 60.0) -> tuple[LatinSquare, LatinSquare]:
    """A pair of orthogonal Latin squares of order n.

    Prime powers use the field construction, other odd orders the linear
    pair (i+j, 2i+j), orders divisible by 4 the direct product of
    prime-power pairs. Orders 2 mod 4 (from 10 up) fall back to a
    randomized search that gives up after `timeout` seconds.
    """
    if n < 1:
        raise InvalidOrder(f"order must be >= 1, got {n}")
    if n in (2, 6):
        raise UnsupportedOrder(f"no pair of orthogonal Latin squares of order {n} exists")
    if n == 1:
        return LatinSquare([[0]]), LatinSquare([[0]])
    if prime_power(n) is not None:
        return _field_pair(n)
    if n % 2 == 1:
        return _linear_pair(n)
    if n % 4 == 0:
        pairs = [mols_pair(q) for q in _prime_power_factors(n)]
        a, b = pairs[0]
        for c, d in pairs[1:]:
            a, b = direct_product(a, c), direct_product(b, d)
        return a, b
    return _search_pair(n, seed, timeout)


_MATE_SEARCH_CAP = 50_000


def _search_pair(n: int, seed: int, timeout: float) -> tuple[LatinSquare, LatinSquare]:
    # Random square + exact cover of its cells by enumerated transversals.
    from .counting import iter_transversals

    deadline = time.monotonic() + timeout
    attempt = 0
    while time.monotonic() < deadline:
        square = uniform_random_square(n, _mix(seed, attempt))
        attempt += 1
        transversals = []
        for t in iter_transversals(square, max_order=n):
            transversals.append(t)
            if len(transversals) >= _MATE_SEARCH_CAP or time.monotonic() > deadline:
                break
        if len(transversals) < n:
            continue
        chosen = _exact_cover(n, transversals, deadline)
        if chosen is None:
            continue
        mate = np.empty((n, n), dtype=np.int64)
        for k, t in enumerate(chosen):
            for r, c in t.positions:
                mate[r, c] = k
        return square, LatinSquare(mate)
    raise ConstructionFailed(f"no orthogonal pair of order {n} found within {timeout}s")


def _exact_cover(n, transversals, deadline):
    # Algorithm X on dict-of-sets: columns are cells, rows are transversals.
    X: dict[tuple[int, int], set[int]] = {(r, c): set() for r in range(n) for c in range(n)}
    Y = {k: t.positions for k, t in enumerate(transversals)}
    for k, cells in Y.items():
        for cell in cells:
            X[cell].add(k)

    def select(k):
        cols = []
        for j in Y[k]:
            for i in X[j]:
                for jj in Y[i]:
                    if jj != j:
                        X[jj].remove(i)
            cols.append(X.pop(j))
        return cols

    def deselect(k, cols):
        for j in reversed(Y[k]):
            X[j] = cols.pop()
            for i in X[j]:
                for jj in Y[i]:
                    if jj != j:
                        X[jj].add(i)

    solution: list[int] = []

    def solve():
        if not X:
            return True
        if time.monotonic() > deadline:
            return False
        cell = min(X, key=lambda j: len(X[j]))
        for k in list(X[cell]):
            solution.append(k)
            cols = select(k)
            if solve():
                return True
            deselect(k, cols)
            solution.pop()
        return False

    if solve():
        return [transversals[k] for k in solution]
    return None


def transversal_decomposition(square: LatinSquare, mate: LatinSquare) -> list[Transversal]:
    """Split `square` into n disjoint transversals, one per symbol of `mate`."""
    if square.order != mate.order or not is_orthogonal(square, mate):
        raise NotOrthogonal("squares are not orthogonal")
    n = square.order
    M = mate.normalized()
    out = []
    for s in range(n):
        rows, cols = np.nonzero(M == s)
        out.append(Transversal.from_positions(square, zip(rows.tolist(), cols.tolist())))
    return out


def _mix(seed: int, *keys: int) -> int:
    """Derive an independent 32-bit seed from a master seed and integer keys."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint32)[0])


def default_chain_length(n: int) -> int:
    return 10 * n**3


def uniform_random_square(n: int, seed: int, moves: int | None = None) -> LatinSquare:
    """Near-uniform order-n square from the Jacobson-Matthews chain.

    The chain starts at the cyclic square and runs `moves` steps (default
    10*n**3), continuing past that until it sits on a proper square.
    """
    if n < 1:
        raise InvalidOrder(f"order must be >= 1, got {n}")
    if n == 1:
        return LatinSquare([[0]])
    if moves is None:
        moves = default_chain_length(n)
    start = np.ascontiguousarray(cyclic_square(n).cells)
    return LatinSquare(_kernels.jm_chain(start, int(moves), _mix(seed)))


def _check_perm(p, n, name):
    p = np.asarray(p, dtype=np.int64)
    if p.shape != (n,) or sorted(p.tolist()) != list(range(n)):
        raise NotAPermutation(f"{name} is not a permutation of 0..{n - 1}")
    return p


def relabel(square: LatinSquare, row_perm, col_perm, sym_perm) -> LatinSquare:
    """Isotope of `square`: new[row_perm[r], col_perm[c]] = sym_perm[old[r, c]]."""
    n = square.order
    rp = _check_perm(row_perm, n, "row_perm")
    cp = _check_perm(col_perm, n, "col_perm")
    sp = _check_perm(sym_perm, n, "sym_perm")
    out = np.empty((n, n), dtype=np.int64)
    out[np.ix_(rp, cp)] = sp[square.normalized()]
    return LatinSquare(out + square.alphabet_offset, square.alphabet_offset)


def random_isotope(square: LatinSquare, seed: int) -> LatinSquare:
    rng = np.random.default_rng(_mix(seed))
    n = square.order
    return relabel(square, rng.permutation(n), rng.permutation(n), rng.permutation(n))


__all__ = [
    "LatinSquare",
    "Transversal",
    "Violation",
    "ValidationReport",
    "validate_latin",
    "require_valid",
    "cyclic_square",
    "is_orthogonal",
    "mols_pair",
    "direct_product",
    "transversal_decomposition",
    "uniform_random_square",
    "default_chain_length",
    "relabel",
    "random_isotope",
]
