"""Latin hypercubes in 0-1 form, stored as the set of their 1-elements."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Iterator

from .errors import InvalidSquare, NotATransversal, TooLarge
from .latin import LatinSquare, ValidationReport, validate_latin

Element = tuple[int, ...]


@dataclass(frozen=True)
class LatinHypercube01:
    """Order-n, dimension-d Latin hypercube as an [n]^(d+1) 0-1 array.

    Only the 1-elements are kept; a valid array has n**d of them.
    """

    order: int
    dim: int
    ones: frozenset[Element]

    def hyperplane(self, i: int, axis: int = 0) -> list[Element]:
        return sorted(e for e in self.ones if e[axis] == i)

    def without(self, element: Element) -> "LatinHypercube01":
        return LatinHypercube01(self.order, self.dim, self.ones - {element})


@dataclass(frozen=True)
class LineViolation:
    kind: str  # "line-count" | "range" | "total"
    axis: int
    line: tuple  # fixed indices, None at the free axis
    count: int


@dataclass(frozen=True)
class HypercubeTransversal:
    elements: tuple[Element, ...]

    @classmethod
    def of(cls, elements) -> "HypercubeTransversal":
        return cls(tuple(sorted(tuple(e) for e in elements)))

    def element_in(self, i: int) -> Element:
        """The element chosen from hyperplane i (first axis)."""
        for e in self.elements:
            if e[0] == i:
                return e
        raise KeyError(i)

    def is_valid_for(self, h: LatinHypercube01) -> bool:
        n = h.order
        if len(self.elements) != n or any(e not in h.ones for e in self.elements):
            return False
        return all(
            sorted(e[m] for e in self.elements) == list(range(n)) for m in range(h.dim + 1)
        )


def from_square(square: LatinSquare) -> LatinHypercube01:
    """The 0-1 form of a Latin square: triples (row, column, symbol)."""
    if not validate_latin(square).valid:
        raise InvalidSquare("from_square needs a valid Latin square")
    cells = square.normalized()
    n = square.order
    return LatinHypercube01(
        n, 2, frozenset((i, j, int(cells[i, j])) for i in range(n) for j in range(n))
    )


def group_hypercube(n: int, d: int, group: str = "cyclic") -> LatinHypercube01:
    """Hypercube from the iterated group operation: last index = i_1 * ... * i_d.

    `group` is "cyclic" (Z_n) or "xor" (elementary abelian 2-group, n a power of 2).
    """
    if group == "cyclic":
        op = lambda a, b: (a + b) % n  # noqa: E731
    elif group == "xor":
        if n & (n - 1):
            raise ValueError("xor group needs n a power of two")
        op = lambda a, b: a ^ b  # noqa: E731
    else:
        raise ValueError(f"unknown group {group!r}")
    ones = frozenset(idx + (reduce(op, idx),) for idx in product(range(n), repeat=d))
    return LatinHypercube01(n, d, ones)


def permutation_hypercube(perm) -> LatinHypercube01:
    """A permutation matrix viewed as a d=1 hypercube."""
    perm = list(perm)
    return LatinHypercube01(len(perm), 1, frozenset((i, int(p)) for i, p in enumerate(perm)))


def validate_hypercube(h: LatinHypercube01) -> ValidationReport:
    n, d = h.order, h.dim
    out = []
    for e in sorted(h.ones):
        if len(e) != d + 1 or any(not 0 <= x < n for x in e):
            out.append(LineViolation("range", -1, e, 1))
    if len(h.ones) != n**d:
        out.append(LineViolation("total", -1, (), len(h.ones)))
    for axis in range(d + 1):
        counts = Counter(e[:axis] + e[axis + 1:] for e in h.ones if len(e) == d + 1)
        for rest in product(range(n), repeat=d):
            c = counts.get(rest, 0)
            if c != 1:
                line = rest[:axis] + (None,) + rest[axis:]
                out.append(LineViolation("line-count", axis, line, c))
    return ValidationReport(tuple(out))


def iter_hypercube_transversals(h: LatinHypercube01) -> Iterator[HypercubeTransversal]:
    """All transversals, choosing one element per first-axis hyperplane in order."""
    n, d = h.order, h.dim
    planes = [h.hyperplane(i) for i in range(n)]
    chosen: list[Element] = []

    def rec(i, used):
        if i == n:
            yield HypercubeTransversal(tuple(chosen))
            return
        for e in planes[i]:
            if all(not (used[m] >> e[m + 1]) & 1 for m in range(d)):
                chosen.append(e)
                yield from rec(i + 1, [used[m] | (1 << e[m + 1]) for m in range(d)])
                chosen.pop()

    yield from rec(0, [0] * d)


def count_transversals_brute(h: LatinHypercube01, *, max_order: int = 8, max_dim: int = 3) -> int:
    if h.order > max_order or h.dim > max_dim:
        raise TooLarge(f"brute-force guard is n <= {max_order}, d <= {max_dim}")
    if not validate_hypercube(h).valid:
        raise InvalidSquare("count_transversals_brute needs a valid hypercube")
    return sum(1 for _ in iter_hypercube_transversals(h))


def require_transversal(h: LatinHypercube01, x: HypercubeTransversal) -> None:
    if not x.is_valid_for(h):
        raise NotATransversal("not a transversal of the given hypercube")


def transversal_from_square(square: LatinSquare, t) -> HypercubeTransversal:
    """Lift a Transversal of `square` to the matching transversal of from_square(square)."""
    off = square.alphabet_offset
    return HypercubeTransversal.of((r, c, s - off) for (r, c), s in zip(t.positions, t.symbols))
