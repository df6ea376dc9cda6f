"""Block construction of a Latin square with many transversals, and its padding.

An order-n structure square S with l disjoint transversals decides the block
layout of an order N = n*n*k square L: every S-position becomes an order-nk
subsquare over the alphabet picked by the symbol of S there. Blocks on the l
fixed transversals of S ("special" blocks) use designated squares with a
known transversal decomposition; every other block is an independent random
Latin square. L is then padded to any order N' in N+3 .. N+l*n*k by
recycling special transversals.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .counting import has_transversal, sample_transversal
from .errors import (
    EllTooSmall,
    KTooSmall,
    LStarConstructionFailed,
    STooLarge,
    STooSmall,
    TooSmallTarget,
    UnsupportedSubsquareOrder,
)
from .latin import (
    LatinSquare,
    Transversal,
    _mix,
    cyclic_square,
    mols_pair,
    random_isotope,
    relabel,
    transversal_decomposition,
    uniform_random_square,
)

MIN_FULL_B = 7


@dataclass(frozen=True)
class ConstructionParams:
    b: int
    k: int
    n: int
    ell: int
    N: int
    relaxed: bool

    @property
    def sub_order(self) -> int:
        return self.n * self.k

    @property
    def max_padding(self) -> int:
        return self.ell * self.n * self.k


def _make_params(b: int, k: int, relaxed: bool) -> ConstructionParams:
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")
    if k < 1:
        raise KTooSmall(f"k = {k} < 1 for b = {b}")
    n = b * b
    ell = n - b * k
    if ell < 3:
        raise EllTooSmall(f"ell = n - b*k = {ell} < 3; padding needs at least 3 special transversals")
    if n * k in (2, 6):
        raise UnsupportedSubsquareOrder(f"no orthogonal pair of order n*k = {n * k}")
    return ConstructionParams(b, k, n, ell, n * n * k, relaxed)


def full_k(b: int) -> int:
    return math.floor(b - b**0.9)


def derive_params(b: int) -> ConstructionParams:
    """Parameters with k = floor(b - b^(9/10)); the smallest admissible b is 7."""
    return _make_params(b, full_k(b), relaxed=False)


def relaxed_params(b: int, k: int) -> ConstructionParams:
    """Desk-scale parameters with a hand-picked k."""
    return _make_params(b, k, relaxed=True)


def choose_b(Nprime: int) -> int:
    """Largest b whose order N = b^4 k still leaves N <= Nprime - 3."""
    smallest = derive_params(MIN_FULL_B).N + 3
    if Nprime < smallest:
        raise TooSmallTarget(f"target order must be >= {smallest}")
    b = MIN_FULL_B
    while derive_params(b + 1).N <= Nprime - 3:
        b += 1
    return b


def build_structure(params: ConstructionParams, seed: int | None = None):
    """The structure square S and its first ell disjoint transversals.

    S is the first square of an orthogonal pair of order n; with a seed, the
    pair is replaced by a random isotope (same row/column/symbol relabeling
    on S, rows and columns only on the mate).
    """
    S, mate = mols_pair(params.n)
    if seed is not None:
        rng = np.random.default_rng(_mix(seed, 0xA11CE))
        n = params.n
        rp, cp, sp = rng.permutation(n), rng.permutation(n), rng.permutation(n)
        S = relabel(S, rp, cp, sp)
        mate = relabel(mate, rp, cp, np.arange(n))
    return S, transversal_decomposition(S, mate)[: params.ell]


class TransversalArray(Sequence):
    """A read-only sequence of transversals of one square, stored as column arrays.

    Row r of transversal t sits in column `columns[t, r]`.
    """

    def __init__(self, square: LatinSquare, columns: np.ndarray):
        self.square = square
        self.columns = np.asarray(columns)
        self.columns.setflags(write=False)

    def __len__(self):
        return self.columns.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return TransversalArray(self.square, self.columns[i])
        return Transversal.from_columns(self.square, self.columns[i].tolist())

    def pairwise_disjoint(self) -> bool:
        # disjoint iff within every row the chosen columns differ
        cols = np.sort(self.columns, axis=0)
        return bool(np.all(cols[1:] != cols[:-1]))


@dataclass(frozen=True, eq=False)
class BlockStructure:
    params: ConstructionParams
    S: LatinSquare
    special_positions: tuple[Transversal, ...]  # transversals of S
    subsquares: tuple[tuple[LatinSquare, ...], ...]
    L: LatinSquare
    special_cell_mask: np.ndarray  # N x N, True on special cells of L
    designated: tuple[LatinSquare, ...]  # S_1..S_n, alphabet-shifted
    designated_columns: np.ndarray  # nk x nk: transversal t of the base square, column per row
    seed: int

    def is_special(self, r: int, c: int) -> bool:
        return bool(self.special_cell_mask[r, c])

    @property
    def alphabets(self) -> list[range]:
        m = self.params.sub_order
        return [range(i * m, (i + 1) * m) for i in range(self.params.n)]


def _designated_base(m: int):
    base, mate = mols_pair(m)
    decomp = transversal_decomposition(base, mate)
    cols = np.array([t.columns for t in decomp], dtype=np.int64)
    return base, cols


def build_L(params: ConstructionParams, seed: int, *, workers: int = 1,
            moves: int | None = None) -> BlockStructure:
    """Assemble the order-N block square.

    Non-special blocks are independent Jacobson-Matthews samples seeded from
    (seed, block row, block column), so `workers` never changes the output.
    """
    n, m = params.n, params.sub_order
    S, specials = build_structure(params)
    special_blocks = np.zeros((n, n), dtype=bool)
    for t in specials:
        for r, c in t.positions:
            special_blocks[r, c] = True

    base, base_cols = _designated_base(m)
    designated = tuple(base.shifted(i * m) for i in range(n))

    randoms = [(i, j) for i in range(n) for j in range(n) if not special_blocks[i, j]]

    def draw(ij):
        i, j = ij
        return uniform_random_square(m, _mix(seed, i, j), moves)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            drawn = dict(zip(randoms, ex.map(draw, randoms)))
    else:
        drawn = {ij: draw(ij) for ij in randoms}

    Scells = S.normalized()
    blocks = []
    big = np.empty((params.N, params.N), dtype=np.int64)
    for i in range(n):
        row = []
        for j in range(n):
            s = int(Scells[i, j])
            sq = designated[s] if special_blocks[i, j] else drawn[(i, j)].shifted(s * m)
            row.append(sq)
            big[i * m:(i + 1) * m, j * m:(j + 1) * m] = sq.cells
        blocks.append(tuple(row))
    mask = np.kron(special_blocks, np.ones((m, m), dtype=bool))
    mask.setflags(write=False)
    base_cols.setflags(write=False)
    return BlockStructure(
        params, S, tuple(specials), tuple(blocks), LatinSquare(big), mask,
        designated, base_cols, int(seed),
    )


def special_transversals(bs: BlockStructure) -> TransversalArray:
    """The ell*n*k disjoint transversals of L that use special cells only.

    For each special transversal of S and each t < nk, the t-th transversal
    of every designated block along it is stitched into one transversal of L.
    Order: by S-transversal, then by t.
    """
    m = bs.params.sub_order
    N = bs.params.N
    out = np.empty((len(bs.special_positions) * m, N), dtype=np.int64)
    k = 0
    for tau in bs.special_positions:
        for t in range(m):
            for I, J in tau.positions:
                out[k, I * m:(I + 1) * m] = J * m + bs.designated_columns[t]
            k += 1
    return TransversalArray(bs.L, out)


@dataclass(frozen=True, eq=False)
class PaddedSquare:
    Lprime: LatinSquare
    s: int
    consumed_specials: TransversalArray
    lstar: LatinSquare
    lstar_transversal: Transversal
    N: int

    @property
    def order(self) -> int:
        return self.Lprime.order

    def extend(self, t: Transversal) -> Transversal:
        """Lift a transversal of L that avoids consumed cells to one of L'."""
        consumed = self.consumed_specials.columns
        for r, c in t.positions:
            if np.any(consumed[:, r] == c):
                raise ValueError(f"cell ({r}, {c}) was overwritten by the padding")
        N = self.N
        pos = list(t.positions) + [(N + r, N + c) for r, c in self.lstar_transversal.positions]
        return Transversal.from_positions(self.Lprime, pos)


def build_lstar(s: int, seed: int, attempts: int = 200) -> tuple[LatinSquare, Transversal]:
    """An order-s square together with one of its transversals."""
    if s < 3:
        raise STooSmall(f"s = {s} < 3")
    if s % 2 == 1:
        sq = cyclic_square(s)
        return sq, Transversal.from_columns(sq, list(range(s)))
    if s % 4 == 0:
        a, b = mols_pair(s)
        return a, transversal_decomposition(a, b)[0]
    for attempt in range(attempts):
        sq = uniform_random_square(s, _mix(seed, 0x5EED, attempt))
        if s <= 14 and not has_transversal(sq):
            continue
        t = sample_transversal(sq, _mix(seed, 0x7EA, attempt), max_walks=100_000)
        if t is not None:
            return sq, t
    raise LStarConstructionFailed(f"no order-{s} square with a transversal found in {attempts} attempts")


def pad_to(bs: BlockStructure, Nprime: int, seed: int = 0) -> PaddedSquare:
    """Grow L to order N' by turning s = N' - N special transversals into new symbols.

    The t-th consumed transversal gets symbol N+t; each displaced symbol
    L[x, y] moves to (x, N+t) and (N+t, y). The bottom-right corner holds
    an order-s square over the new symbols.
    """
    N = bs.params.N
    s = Nprime - N
    if s < 3:
        raise STooSmall(f"s = N' - N = {s} < 3")
    if s > bs.params.max_padding:
        raise STooLarge(f"s = {s} exceeds the {bs.params.max_padding} special transversals")
    consumed = special_transversals(bs)[:s]
    lstar, lstar_t = build_lstar(s, seed)

    Lc = bs.L.cells
    out = np.empty((Nprime, Nprime), dtype=np.int64)
    out[:N, :N] = Lc
    rows = np.arange(N)
    for t in range(s):
        cols = consumed.columns[t]
        displaced = Lc[rows, cols]
        out[rows, cols] = N + t
        out[rows, N + t] = displaced
        out[N + t, cols] = displaced
    out[N:, N:] = lstar.normalized() + N
    return PaddedSquare(LatinSquare(out), s, consumed, lstar, lstar_t, N)


__all__ = [
    "ConstructionParams",
    "BlockStructure",
    "PaddedSquare",
    "TransversalArray",
    "derive_params",
    "relaxed_params",
    "choose_b",
    "build_structure",
    "build_L",
    "special_transversals",
    "build_lstar",
    "pad_to",
    "full_k",
]
