"""Exact transversal counting and sequential importance sampling."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import TooLarge
from .latin import LatinSquare, Transversal, require_valid

DEFAULT_MAX_ORDER = 14
SIS_CHUNK = 4096


@dataclass(frozen=True)
class CountResult:
    count: int
    nodes_visited: int
    elapsed: float  # seconds


@dataclass(frozen=True)
class EstimateResult:
    mean: float
    stderr: float
    log_mean: float
    samples: int
    seed: int
    successes: int = 0
    log_stderr: float = 0.0  # delta-method stderr of log_mean


def _guard(square: LatinSquare, max_order: int | None) -> None:
    limit = DEFAULT_MAX_ORDER if max_order is None else max_order
    if square.order > limit:
        raise TooLarge(f"order {square.order} exceeds the exact-search guard {limit}")


def _cells(square: LatinSquare) -> np.ndarray:
    return np.ascontiguousarray(square.normalized(), dtype=np.int64)


def _count_py(cells, first_only=False):
    # bigint masks: any order
    n = cells.shape[0]
    rows = [list(map(int, row)) for row in cells]
    count = nodes = 0

    def rec(r, cm, sm):
        nonlocal count, nodes
        if r == n:
            count += 1
            return first_only
        row = rows[r]
        for c in range(n):
            if not (cm >> c) & 1 and not (sm >> row[c]) & 1:
                nodes += 1
                if rec(r + 1, cm | (1 << c), sm | (1 << row[c])):
                    return True
        return False

    rec(0, 0, 0)
    return count, nodes


def _prefixes(cells):
    # legal (c0, c1) choices for the top two rows
    n = cells.shape[0]
    out = []
    for c0 in range(n):
        for c1 in range(n):
            if c1 != c0 and cells[1, c1] != cells[0, c0]:
                out.append((c0, c1))
    return out


def count_exact(square: LatinSquare, *, max_order: int | None = None, workers: int = 1) -> CountResult:
    """Exact number of transversals by row-by-row backtracking.

    With workers > 1 the subtrees under the top two rows are counted
    concurrently; count and node total are identical to the serial run.
    """
    require_valid(square)
    _guard(square, max_order)
    start = time.perf_counter()
    cells = _cells(square)
    n = cells.shape[0]
    if n > _kernels.WORD_ORDER_LIMIT:
        count, nodes = _count_py(cells)
    elif workers <= 1 or n < 3:
        count, nodes = _kernels.count_from(cells, 0, 0, 0, False)
        count, nodes = int(count), int(nodes)
    else:
        prefixes = _prefixes(cells)

        def sub(pc):
            c0, c1 = pc
            cm = (1 << c0) | (1 << c1)
            sm = (1 << int(cells[0, c0])) | (1 << int(cells[1, c1]))
            return _kernels.count_from(cells, 2, cm, sm, False)

        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(sub, prefixes))
        count = sum(int(c) for c, _ in parts)
        nodes = n + len(prefixes) + sum(int(v) for _, v in parts)
    return CountResult(count, nodes, time.perf_counter() - start)


def has_transversal(square: LatinSquare, *, max_order: int | None = None) -> bool:
    """True iff the square has at least one transversal (stops at the first hit)."""
    require_valid(square)
    _guard(square, max_order)
    cells = _cells(square)
    if cells.shape[0] > _kernels.WORD_ORDER_LIMIT:
        return _count_py(cells, first_only=True)[0] > 0
    return _kernels.count_from(cells, 0, 0, 0, True)[0] > 0


def iter_transversals(square: LatinSquare, *, max_order: int | None = None) -> Iterator[Transversal]:
    """Transversals in lexicographic order of their column sequence."""
    require_valid(square)
    _guard(square, max_order)
    cells = _cells(square)
    n = cells.shape[0]
    rows = [list(map(int, row)) for row in cells]
    cols = [0] * n

    def rec(r, cm, sm):
        if r == n:
            yield Transversal.from_columns(square, cols)
            return
        row = rows[r]
        for c in range(n):
            if not (cm >> c) & 1 and not (sm >> row[c]) & 1:
                cols[r] = c
                yield from rec(r + 1, cm | (1 << c), sm | (1 << row[c]))

    yield from rec(0, 0, 0)


def enumerate_transversals(square: LatinSquare, limit: int | None = None, *,
                           max_order: int | None = None) -> list[Transversal]:
    """The first `limit` transversals (all of them when limit is None)."""
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    out = []
    for t in iter_transversals(square, max_order=max_order):
        out.append(t)
        if limit is not None and len(out) >= limit:
            break
    return out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), chunk]))


def _allowed_mask(n, allowed):
    if allowed is None:
        return np.ones((n, n), dtype=np.bool_)
    mask = np.ascontiguousarray(allowed, dtype=np.bool_)
    if mask.shape != (n, n):
        raise ValueError(f"allowed mask must have shape {(n, n)}")
    return mask


_WALKERS = {"fixed": _kernels.sis_fixed, "mrv": _kernels.sis_mrv}


def _walk_chunks(cells, mask, samples, seed, row_order, workers, keep_cols=False):
    if row_order not in _WALKERS:
        raise ValueError(f"row_order must be one of {sorted(_WALKERS)}")
    walker = _WALKERS[row_order]
    n = cells.shape[0]
    sizes = [min(SIS_CHUNK, samples - lo) for lo in range(0, samples, SIS_CHUNK)]

    def run(k):
        u = _chunk_rng(seed, k).random((sizes[k], n))
        cols = np.full((sizes[k], n), -1, dtype=np.int64)
        lw = walker(cells, mask, u, cols)
        return lw, (cols if keep_cols else None)

    if workers <= 1 or len(sizes) == 1:
        return [run(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run, range(len(sizes))))


def summarize_log_weights(logw: np.ndarray, seed: int) -> EstimateResult:
    m = len(logw)
    finite = np.isfinite(logw)
    ok = int(finite.sum())
    if ok == 0:
        return EstimateResult(0.0, 0.0, -math.inf, m, seed, 0)
    top = float(logw[finite].max())
    w = np.where(finite, np.exp(np.where(finite, logw, top) - top), 0.0)
    mean_s = float(w.mean())
    sd_s = float(w.std(ddof=1)) if m > 1 else 0.0
    log_mean = top + math.log(mean_s)
    rel = sd_s / math.sqrt(m) / mean_s
    mean = math.exp(log_mean) if log_mean < 709.0 else math.inf
    stderr = mean * rel if math.isfinite(mean) else math.inf
    return EstimateResult(mean, stderr, log_mean, m, seed, ok, rel)


def estimate_sis(square: LatinSquare, samples: int, seed: int, *, row_order: str = "fixed",
                 allowed=None, workers: int = 1) -> EstimateResult:
    """Unbiased sequential-importance-sampling estimate of the transversal count.

    Each walk extends a partial transversal one row at a time, choosing a
    legal column uniformly; its weight is the product of the legal-choice
    counts (0 on a dead end). `row_order="mrv"` extends the most
    constrained row first, which keeps far more walks alive on large
    squares. `allowed` restricts walks to a boolean cell mask.
    Samples are split into fixed chunks with counter-derived seeds, so the
    result does not depend on `workers`.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    require_valid(square)
    cells = _cells(square)
    mask = _allowed_mask(cells.shape[0], allowed)
    parts = _walk_chunks(cells, mask, samples, seed, row_order, workers)
    return summarize_log_weights(np.concatenate([lw for lw, _ in parts]), seed)


def sample_transversal(square: LatinSquare, seed: int, *, allowed=None,
                       max_walks: int = 1_000_000) -> Transversal | None:
    """First completed most-constrained-first random walk, or None.

    Deterministic for a fixed seed. Not uniform over transversals.
    """
    require_valid(square)
    cells = _cells(square)
    n = cells.shape[0]
    mask = _allowed_mask(n, allowed)
    done = 0
    k = 0
    while done < max_walks:
        size = min(SIS_CHUNK // 8 or 1, max_walks - done)
        u = _chunk_rng(seed, k).random((size, n))
        cols = np.full((size, n), -1, dtype=np.int64)
        lw = _kernels.sis_mrv(cells, mask, u, cols)
        hits = np.flatnonzero(np.isfinite(lw))
        if len(hits):
            return Transversal.from_columns(square, cols[hits[0]].tolist())
        done += size
        k += 1
    return None
