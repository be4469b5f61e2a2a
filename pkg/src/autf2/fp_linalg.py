"""Dense linear algebra over prime fields (numpy int64, Gaussian elimination)."""
from __future__ import annotations

import numpy as np

__all__ = ["is_prime", "row_reduce", "rank", "nullspace", "solve", "solve_many", "mat_inverse"]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def row_reduce(a: np.ndarray, p: int, limit: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p and the pivot columns.

    With ``limit`` only the first ``limit`` columns are used as pivots; the
    remaining columns ride along (augmented systems).
    """
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols if limit is None else limit):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            a[nzr] = (a[nzr] - np.outer(col[nzr], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(a: np.ndarray, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(row_reduce(a, p)[1])


def nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of {v : a v = 0} as rows."""
    a = np.asarray(a, dtype=np.int64)
    cols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    red, piv = row_reduce(a, p)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, c in enumerate(piv):
            basis[i, c] = (-red[r, f]) % p
    return basis


def solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution of a v = b mod p, or None when inconsistent."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    rows, cols = a.shape
    red, piv = row_reduce(np.hstack([a, b]), p)
    if cols in piv:
        return None
    v = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(piv):
        v[c] = red[r, cols]
    return v


def mat_inverse(a: np.ndarray, p: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    red, piv = row_reduce(np.hstack([a, np.eye(n, dtype=np.int64)]), p)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular mod p")
    return red[:, n:]


def solve_many(a: np.ndarray, bs: np.ndarray, p: int) -> tuple[list[np.ndarray | None], int]:
    """Solve a v = b for each column b of ``bs`` with a single elimination.

    Returns (one solution or None per column, rank of a).
    """
    a = np.asarray(a, dtype=np.int64)
    bs = np.asarray(bs, dtype=np.int64)
    rows, cols = a.shape
    red, apiv = row_reduce(np.hstack([a, bs.reshape(rows, -1)]), p, limit=cols)
    rk = len(apiv)
    out: list = []
    for k in range(bs.reshape(rows, -1).shape[1]):
        col = red[:, cols + k]
        if np.any(col[rk:]):
            out.append(None)
            continue
        v = np.zeros(cols, dtype=np.int64)
        for r, c in enumerate(apiv):
            v[c] = col[r]
        out.append(v)
    return out, rk
