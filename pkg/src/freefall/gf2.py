"""Dense linear algebra over GF(2) with rows packed into Python integers."""

from __future__ import annotations

import numpy as np


def _pack_rows(mat) -> list[int]:
    m = np.asarray(mat, dtype=np.uint8) % 2
    return [int("".join(map(str, row[::-1])), 2) if row.size else 0 for row in m]


def gf2_rank(mat) -> int:
    """Rank over GF(2) of a 0/1 matrix."""
    m = np.asarray(mat)
    if m.size == 0:
        return 0
    pivots: dict[int, int] = {}
    for x in _pack_rows(m):
        while x:
            top = x.bit_length() - 1
            if top not in pivots:
                pivots[top] = x
                break
            x ^= pivots[top]
    return len(pivots)


def gf2_nullspace(mat) -> list[np.ndarray]:
    """Basis of ``{v : mat @ v = 0 mod 2}`` as 0/1 vectors."""
    a = np.asarray(mat, dtype=np.uint8) % 2
    rows, cols = a.shape
    a = a.copy()
    pivot_cols = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(a[r:, c])[0] if r < rows else []
        if len(hit) == 0:
            continue
        p = r + hit[0]
        a[[r, p]] = a[[p, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivot_cols]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for i, c in enumerate(pivot_cols):
            v[c] = a[i, f]
        basis.append(v)
    return basis
