"""Small dense linear algebra over F_q (vectors and matrices as int arrays)."""
from __future__ import annotations

import numpy as np

from .field import FiniteField


def vec_add(f: FiniteField, x, y) -> np.ndarray:
    return f.add_table[np.asarray(x), np.asarray(y)]


def vec_sub(f: FiniteField, x, y) -> np.ndarray:
    return f.add_table[np.asarray(x), f.neg_table[np.asarray(y)]]


def vec_scale(f: FiniteField, s: int, x) -> np.ndarray:
    return f.mul_table[s, np.asarray(x)]


def field_sum(f: FiniteField, arr, axis: int = -1) -> np.ndarray:
    """Reduce ``arr`` along ``axis`` with field addition."""
    arr = np.moveaxis(np.asarray(arr), axis, 0)
    if f.ell == 1:
        return arr.sum(axis=0) % f.p
    out = arr[0]
    for k in range(1, arr.shape[0]):
        out = f.add_table[out, arr[k]]
    return out


def dot(f: FiniteField, x, y) -> np.ndarray:
    """Standard dot product along the last axis (broadcasting)."""
    return field_sum(f, f.mul_table[np.asarray(x), np.asarray(y)], axis=-1)


def mat_vec(f: FiniteField, mat, x) -> np.ndarray:
    """``mat @ x`` for a (r, c) matrix and vectors ``x`` of shape (..., c)."""
    mat = np.asarray(mat)
    x = np.asarray(x)
    prods = f.mul_table[mat, x[..., None, :]]
    return field_sum(f, prods, axis=-1)


def bilinear(f: FiniteField, gram, x, y) -> int:
    """x^T G y for a symmetric Gram matrix G."""
    return int(dot(f, x, mat_vec(f, gram, y)))


def rank(f: FiniteField, vectors) -> int:
    rows = [list(map(int, v)) for v in vectors]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = f.inv(rows[r][col])
        rows[r] = [f.mul(inv, v) for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                c = rows[i][col]
                rows[i] = [f.sub(a, f.mul(c, b)) for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def span_points(f: FiniteField, basis, base=None) -> np.ndarray:
    """All points ``base + sum t_i basis_i``, shape (q^k, d), in t-encoding order."""
    basis = np.asarray(basis, dtype=np.int64)
    k = len(basis)
    if base is None:
        d = basis.shape[1]
        base = np.zeros(d, dtype=np.int64)
    base = np.asarray(base, dtype=np.int64)
    pts = base[None, :]
    for v in basis:
        multiples = f.mul_table[np.arange(f.q)[:, None], v[None, :]]  # (q, d)
        pts = f.add_table[pts[:, None, :], multiples[None, :, :]].reshape(-1, len(base))
    return pts if k else pts.copy()
