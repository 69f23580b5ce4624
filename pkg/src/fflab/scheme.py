"""The orthogonal-group association scheme on non-square non-isotropic projective points.

Ambient space F_q^(2m+1) carries Q(x) = 2(x_1 x_(m+1) + ... + x_m x_(2m)) + x_(2m+1)^2 with
polar form B(x, y) = x S y^T. Vertices are the lines [x] with Q(x) a non-square.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import HypothesisViolation, NotRegular, SizeLimitExceeded
from .field import FiniteField
from .geometry import PointSet, all_points, check_budget, congruence_matrix, encode
from .linalg import dot, mat_vec

SPECTRUM_LIMIT = 2000


def form_matrix(f: FiniteField, m: int) -> np.ndarray:
    """The Gram matrix S of Q in dimension 2m + 1."""
    d = 2 * m + 1
    S = np.zeros((d, d), dtype=np.int64)
    for i in range(m):
        S[i, m + i] = S[m + i, i] = 1
    S[-1, -1] = 1
    return S


def _projective_reps(f: FiniteField, pts: np.ndarray) -> np.ndarray:
    """Smallest code among the nonzero scalings of each point."""
    scalars = np.arange(1, f.q)
    scaled = f.mul_table[scalars[:, None, None], pts[None, :, :]]
    return encode(f, scaled).min(axis=0)


@dataclass(frozen=True, eq=False)
class SchemeGraph:
    field: FiniteField
    m: int
    vertices: np.ndarray  # (n, 2m+1) representatives, ordered by code
    relations: np.ndarray  # (n, n) relation index

    @property
    def d(self) -> int:
        return 2 * self.m + 1

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def classes(self) -> int:
        return (self.field.q + 1) // 2

    @cached_property
    def adjacency(self) -> np.ndarray:
        return (self.relations == 1).astype(np.int64)

    def relation(self, i: int, k: int) -> int:
        return int(self.relations[i, k])

    def index_of(self, point) -> int:
        """Vertex index of the line through ``point`` (ValueError if not a vertex)."""
        code = int(_projective_reps(self.field, np.asarray(point, dtype=np.int64)[None, :])[0])
        codes = encode(self.field, self.vertices)
        i = int(np.searchsorted(codes, code))
        if i >= len(codes) or codes[i] != code:
            raise ValueError("point does not span a vertex line")
        return i


def classify(f: FiniteField, qx: np.ndarray, qy: np.ndarray, bxy: np.ndarray) -> np.ndarray:
    """Relation index from u = B(x,y)^2 / (Q(x) Q(y)) for distinct lines."""
    u = f.mul_table[f.square_table[bxy], f.inv_table[f.mul_table[qx, qy]]]
    half = (f.q - 1) // 2
    out = np.empty(u.shape, dtype=np.int64)
    zero = u == 0
    e = f.log_table[np.where(zero, 1, u)]
    if np.any(e[~zero] % 2):
        raise AssertionError("u must be a square for two non-square lines")
    idx = (1 - e // 2) % half
    idx = np.where(idx == 0, half, idx)
    idx = np.where(e == 0, 1, idx)
    out[:] = idx
    out[zero] = (f.q + 1) // 2
    return out


def build_scheme(f: FiniteField, m: int) -> SchemeGraph:
    d = 2 * m + 1
    check_budget(f, d)
    S = form_matrix(f, m)
    pts = all_points(f, d)[1:]
    qvals = dot(f, pts, mat_vec(f, S, pts))
    pts = pts[f.eta_table[qvals] == -1]
    reps = np.unique(_projective_reps(f, pts))
    from .geometry import decode

    verts = decode(f, reps, d)
    qv = dot(f, verts, mat_vec(f, S, verts))
    sv = mat_vec(f, S, verts)
    gram = dot(f, verts[:, None, :], sv[None, :, :])
    rel = classify(f, qv[:, None], qv[None, :], gram)
    np.fill_diagonal(rel, 0)
    rel.setflags(write=False)
    verts.setflags(write=False)
    return SchemeGraph(f, m, verts, rel)


def expected_size(q: int, m: int) -> int:
    return q**m * (q**m - 1) // 2


def expected_degree(q: int, m: int) -> int:
    return (q ** (m - 1) - 1) * (q**m + 1)


def expected_eigenvalues(q: int, m: int) -> set[int]:
    return {expected_degree(q, m), -(q - 2) * q ** (m - 1) - 1, q ** (m - 1) - 1}


def r1_degree(gph: SchemeGraph) -> int:
    degrees = gph.adjacency.sum(axis=1)
    if len(degrees) and np.any(degrees != degrees[0]):
        raise NotRegular(f"R1 degrees range over {degrees.min()}..{degrees.max()}")
    return int(degrees[0]) if len(degrees) else 0


def check_axioms(gph: SchemeGraph) -> dict[str, bool]:
    """Exhaustive check of the five scheme axioms; returns a verdict per axiom."""
    rel = gph.relations
    k = gph.classes
    mats = [(rel == i).astype(np.int64) for i in range(k + 1)]
    out = {
        "diagonal": bool(np.array_equal(mats[0], np.eye(gph.n, dtype=np.int64))),
        "partition": bool(np.all((rel >= 0) & (rel <= k))),
        "transpose": all(any(np.array_equal(a.T, b) for b in mats) for a in mats),
    }
    constant = True
    commutative = True
    for a in range(k + 1):
        for b in range(k + 1):
            prod = mats[a] @ mats[b]
            for v in range(k + 1):
                vals = prod[rel == v]
                if len(vals) and np.any(vals != vals[0]):
                    constant = False
            if not np.array_equal(prod, mats[b] @ mats[a]):
                # with constant intersection numbers, p^v_ab = p^v_ba iff A_a A_b = A_b A_a
                commutative = False
    out["intersection_numbers"] = constant
    out["commutative"] = commutative
    return out


def intersection_numbers(gph: SchemeGraph) -> np.ndarray:
    """p[v, a, b]; assumes the axioms hold (use :func:`check_axioms`)."""
    rel = gph.relations
    k = gph.classes
    mats = [(rel == i).astype(np.int64) for i in range(k + 1)]
    out = np.zeros((k + 1, k + 1, k + 1), dtype=np.int64)
    for v in range(k + 1):
        i, j = np.argwhere(rel == v)[0]
        for a in range(k + 1):
            for b in range(k + 1):
                out[v, a, b] = int(mats[a][i] @ mats[b][:, j])
    return out


@dataclass(frozen=True)
class SpectrumReport:
    n: int
    degree: int
    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]
    snapped: bool


def _spectrum(gph: SchemeGraph):
    if gph.n > SPECTRUM_LIMIT:
        raise SizeLimitExceeded(f"|V| = {gph.n} exceeds {SPECTRUM_LIMIT}")
    return np.linalg.eigh(gph.adjacency.astype(float))


def r1_spectrum(gph: SchemeGraph, tol: float = 1e-6) -> SpectrumReport:
    """Distinct eigenvalues of the R1 adjacency, snapped to integers within ``tol``."""
    vals, _ = _spectrum(gph)
    rounded = np.round(vals)
    snapped = bool(np.all(np.abs(vals - rounded) <= tol))
    keys = rounded if snapped else vals
    distinct, counts = np.unique(keys if snapped else np.round(vals, 9), return_counts=True)
    return SpectrumReport(gph.n, r1_degree(gph), tuple(float(x) for x in distinct[::-1]),
                          tuple(int(c) for c in counts[::-1]), snapped)


@dataclass(frozen=True)
class EdgeBoundReport:
    size: int
    edges: int
    bound: float
    spectral: float

    @property
    def passed(self) -> bool:
        return self.edges <= self.bound + 1e-9


def edge_count(gph: SchemeGraph, W) -> int:
    """1_W A 1_W: ordered adjacent pairs inside W."""
    idx = np.asarray(list(W), dtype=np.int64)
    if len(idx) == 0:
        return 0
    return int(gph.adjacency[np.ix_(idx, idx)].sum())


def edge_bound_check(gph: SchemeGraph, W) -> EdgeBoundReport:
    """e(W, W) against (lambda_1 / n)|W|^2 + (q^(m-1) - 1)|W|, plus the eigen-expansion of e."""
    idx = np.unique(np.asarray(list(W), dtype=np.int64))
    e = edge_count(gph, idx)
    q, m, n = gph.field.q, gph.m, gph.n
    lam1 = r1_degree(gph)
    bound = lam1 / n * len(idx) ** 2 + (q ** (m - 1) - 1) * len(idx)
    spectral = float("nan")
    if n <= SPECTRUM_LIMIT:
        vals, vecs = _spectrum(gph)
        ind = np.zeros(n)
        ind[idx] = 1.0
        alpha = vecs.T @ ind
        spectral = float(np.sum(vals * alpha**2))
    return EdgeBoundReport(len(idx), e, bound, spectral)


# -- bridge from sphere zero-pairs to graph edges ------------------------------------


@dataclass(frozen=True)
class BridgeReport:
    zero_pairs: int  # off-diagonal pairs (a, b), a != b, with ||a - b|| = 0
    edges: int  # e(W, W) for W the vertex lines of the transformed set
    symmetric: bool  # A = -A

    @property
    def factor(self) -> float:
        return self.zero_pairs / self.edges if self.edges else float("nan")


def sphere_to_form(f: FiniteField, m: int) -> np.ndarray:
    """Invertible M with Q(M x) = ||x||; exists iff (-1)^m is a square in F_q."""
    if not f.is_square(f.pow(f.neg(1), m)):
        raise HypothesisViolation("Q is not equivalent to the sum of squares here")
    d = 2 * m + 1
    return congruence_matrix(f, form_matrix(f, m), [1] * d)


def zero_pair_bridge(gph: SchemeGraph, A: PointSet) -> BridgeReport:
    """Compare zero-distance pairs of A on S_g with R1 edges among the lines of M A."""
    f, m = gph.field, gph.m
    if A.d != gph.d:
        raise ValueError("dimension mismatch")
    M = sphere_to_form(f, m)
    X = A.coords
    norms = dot(f, X, X)
    if np.any(norms != f.primitive):
        raise HypothesisViolation("A must lie on the sphere of primitive radius")
    diff = f.add_table[X[:, None, :], f.neg_table[X][None, :, :]]
    zero = dot(f, diff, diff) == 0
    np.fill_diagonal(zero, False)
    Y = mat_vec(f, M, X)
    W = sorted({gph.index_of(y) for y in Y})
    neg = PointSet.from_coords(f, f.neg_table[X])
    return BridgeReport(int(zero.sum()), edge_count(gph, W), neg == A)
