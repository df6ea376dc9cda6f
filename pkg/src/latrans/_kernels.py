"""Compiled inner loops. Nothing here validates its inputs."""
from __future__ import annotations

import numpy as np
from numba import njit

# Bitmask kernels hold column/symbol sets in one int64 word.
WORD_ORDER_LIMIT = 62


@njit(cache=True, nogil=True)
def jm_chain(cells, moves, seed):
    """Run the Jacobson-Matthews chain from `cells` (modified copy returned).

    `moves` counts transitions that land on a proper square, i.e. steps of
    the chain watched on proper squares, whose stationary law is uniform.
    """
    np.random.seed(seed)
    n = cells.shape[0]
    cube = np.zeros((n, n, n), dtype=np.int8)
    for x in range(n):
        for y in range(n):
            cube[x, y, cells[x, y]] = 1
    proper = True
    ix = iy = iz = -1
    done = 0
    while done < moves or not proper:
        if proper:
            while True:
                x = np.random.randint(n)
                y = np.random.randint(n)
                z = np.random.randint(n)
                if cube[x, y, z] == 0:
                    break
            x1 = 0
            while cube[x1, y, z] != 1:
                x1 += 1
            y1 = 0
            while cube[x, y1, z] != 1:
                y1 += 1
            z1 = 0
            while cube[x, y, z1] != 1:
                z1 += 1
        else:
            x, y, z = ix, iy, iz
            # each line through the -1 cell holds exactly two 1s; pick one
            pick = np.random.randint(2)
            x1 = 0
            while True:
                if cube[x1, y, z] == 1:
                    if pick == 0:
                        break
                    pick -= 1
                x1 += 1
            pick = np.random.randint(2)
            y1 = 0
            while True:
                if cube[x, y1, z] == 1:
                    if pick == 0:
                        break
                    pick -= 1
                y1 += 1
            pick = np.random.randint(2)
            z1 = 0
            while True:
                if cube[x, y, z1] == 1:
                    if pick == 0:
                        break
                    pick -= 1
                z1 += 1
        cube[x, y, z] += 1
        cube[x, y1, z1] += 1
        cube[x1, y, z1] += 1
        cube[x1, y1, z] += 1
        cube[x, y, z1] -= 1
        cube[x, y1, z] -= 1
        cube[x1, y, z] -= 1
        cube[x1, y1, z1] -= 1
        if cube[x1, y1, z1] < 0:
            proper = False
            ix, iy, iz = x1, y1, z1
        else:
            proper = True
            done += 1
    out = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if cube[x, y, z] == 1:
                    out[x, y] = z
    return out


@njit(cache=True, nogil=True)
def count_from(cells, row0, colmask, symmask, first_only):
    """Count completions of a partial transversal covering rows < row0.

    Returns (count, nodes) where nodes counts successful placements.
    """
    n = cells.shape[0]
    if row0 == n:
        return 1, 0
    count = 0
    nodes = 0
    next_c = np.zeros(n, dtype=np.int64)
    chosen = np.full(n, -1, dtype=np.int64)
    cm = colmask
    sm = symmask
    r = row0
    while r >= row0:
        c = chosen[r]
        if c >= 0:
            cm ^= np.int64(1) << c
            sm ^= np.int64(1) << cells[r, c]
            chosen[r] = -1
        c = next_c[r]
        while c < n:
            if ((cm >> c) & 1) == 0 and ((sm >> cells[r, c]) & 1) == 0:
                break
            c += 1
        if c == n:
            r -= 1
            continue
        next_c[r] = c + 1
        chosen[r] = c
        cm |= np.int64(1) << c
        sm |= np.int64(1) << cells[r, c]
        nodes += 1
        if r == n - 1:
            count += 1
            if first_only:
                return count, nodes
        else:
            r += 1
            next_c[r] = 0
            chosen[r] = -1
    return count, nodes


@njit(cache=True, nogil=True)
def sis_fixed(cells, allowed, uniforms, out_cols):
    """Row-order SIS walks; returns log-weights (-inf on dead ends)."""
    m = uniforms.shape[0]
    n = cells.shape[0]
    logw = np.empty(m, dtype=np.float64)
    usedc = np.zeros(n, dtype=np.bool_)
    useds = np.zeros(n, dtype=np.bool_)
    for t in range(m):
        usedc[:] = False
        useds[:] = False
        acc = 0.0
        for r in range(n):
            k = 0
            for c in range(n):
                if allowed[r, c] and not usedc[c] and not useds[cells[r, c]]:
                    k += 1
            if k == 0:
                acc = -np.inf
                break
            acc += np.log(k)
            pick = int(uniforms[t, r] * k)
            if pick >= k:
                pick = k - 1
            for c in range(n):
                if allowed[r, c] and not usedc[c] and not useds[cells[r, c]]:
                    if pick == 0:
                        usedc[c] = True
                        useds[cells[r, c]] = True
                        out_cols[t, r] = c
                        break
                    pick -= 1
        logw[t] = acc
    return logw


@njit(cache=True, nogil=True)
def sis_mrv(cells, allowed, uniforms, out_cols):
    """SIS walks that always extend the row with fewest legal columns.

    Ties go to the lowest row index. Still unbiased: the row is a function
    of the current state and the column is uniform over its legal set.
    """
    m = uniforms.shape[0]
    n = cells.shape[0]
    pos = np.empty((n, n), dtype=np.int64)
    for r in range(n):
        for c in range(n):
            pos[r, cells[r, c]] = c
    logw = np.empty(m, dtype=np.float64)
    legal = np.empty((n, n), dtype=np.bool_)
    cnt = np.empty(n, dtype=np.int64)
    done = np.empty(n, dtype=np.bool_)
    for t in range(m):
        for r in range(n):
            k = 0
            for c in range(n):
                legal[r, c] = allowed[r, c]
                if allowed[r, c]:
                    k += 1
            cnt[r] = k
            done[r] = False
        acc = 0.0
        for step in range(n):
            best = -1
            for r in range(n):
                if not done[r] and (best < 0 or cnt[r] < cnt[best]):
                    best = r
            k = cnt[best]
            if k == 0:
                acc = -np.inf
                break
            acc += np.log(k)
            pick = int(uniforms[t, step] * k)
            if pick >= k:
                pick = k - 1
            col = -1
            for c in range(n):
                if legal[best, c]:
                    if pick == 0:
                        col = c
                        break
                    pick -= 1
            done[best] = True
            out_cols[t, best] = col
            s = cells[best, col]
            for r in range(n):
                if done[r]:
                    continue
                if legal[r, col]:
                    legal[r, col] = False
                    cnt[r] -= 1
                c2 = pos[r, s]
                if legal[r, c2]:
                    legal[r, c2] = False
                    cnt[r] -= 1
        logw[t] = acc
    return logw
