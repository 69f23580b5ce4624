"""Points of F_q^d, the paraboloid and spheres, and quadratic-form geometry.

Points are stored as integer coordinate arrays. A point's *code* is its index
in C order over the grid ``(q,) * d`` (last coordinate fastest), which is also
its position in a :class:`~fflab.fourier.ComplexGrid`.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CaseMismatch, ImpossibleCase, SizeLimitExceeded
from .field import FiniteField
from .linalg import bilinear, dot, field_sum, mat_vec, rank, span_points, vec_add

ENUM_LIMIT = 4_000_000
SUBSPACE_SEARCH_LIMIT = 4096


def check_budget(f: FiniteField, d: int, limit: int = ENUM_LIMIT) -> None:
    if f.q**d > limit:
        raise SizeLimitExceeded(f"q^d = {f.q}^{d} exceeds budget {limit}")


@lru_cache(maxsize=32)
def _all_points(f: FiniteField, d: int) -> np.ndarray:
    grids = np.indices((f.q,) * d, dtype=np.int64).reshape(d, -1).T
    grids.setflags(write=False)
    return grids


def all_points(f: FiniteField, d: int) -> np.ndarray:
    """Every point of F_q^d as a (q^d, d) array, ordered by code."""
    check_budget(f, d)
    return _all_points(f, d)


def encode(f: FiniteField, coords) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    d = coords.shape[-1]
    weights = f.q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return coords @ weights


def decode(f: FiniteField, codes, d: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    weights = f.q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return (codes[..., None] // weights) % f.q


def norm(f: FiniteField, x) -> np.ndarray | int:
    """||x|| = x_1^2 + ... + x_d^2 along the last axis."""
    x = np.asarray(x, dtype=np.int64)
    out = field_sum(f, f.square_table[x], axis=-1)
    return int(out) if np.ndim(out) == 0 else out


class PointSet:
    """A finite subset of F_q^d, kept as sorted unique codes."""

    def __init__(self, f: FiniteField, d: int, codes: Iterable[int]):
        self.field = f
        self.d = d
        self.codes = np.unique(np.asarray(list(codes) if not isinstance(codes, np.ndarray) else codes,
                                          dtype=np.int64))
        if len(self.codes) and (self.codes[0] < 0 or self.codes[-1] >= f.q**d):
            raise ValueError("point code out of range")

    @classmethod
    def from_coords(cls, f: FiniteField, coords) -> "PointSet":
        coords = np.asarray(coords, dtype=np.int64)
        if coords.ndim != 2:
            raise ValueError("coords must be a 2-d array of points")
        if np.any((coords < 0) | (coords >= f.q)):
            raise ValueError("coordinates must lie in [0, q)")
        return cls(f, coords.shape[1], encode(f, coords))

    @classmethod
    def empty(cls, f: FiniteField, d: int) -> "PointSet":
        return cls(f, d, np.empty(0, dtype=np.int64))

    @classmethod
    def full(cls, f: FiniteField, d: int) -> "PointSet":
        check_budget(f, d)
        return cls(f, d, np.arange(f.q**d, dtype=np.int64))

    @property
    def coords(self) -> np.ndarray:
        return decode(self.field, self.codes, self.d)

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self):
        for row in self.coords:
            yield tuple(int(v) for v in row)

    def __contains__(self, point) -> bool:
        code = int(encode(self.field, np.asarray(point)))
        i = np.searchsorted(self.codes, code)
        return bool(i < len(self.codes) and self.codes[i] == code)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PointSet) and self.field == other.field and self.d == other.d
                and np.array_equal(self.codes, other.codes))

    def __repr__(self) -> str:
        return f"PointSet(q={self.field.q}, d={self.d}, size={len(self)})"

    def indicator(self) -> np.ndarray:
        """Boolean mask over all q^d codes."""
        mask = np.zeros(self.field.q**self.d, dtype=bool)
        mask[self.codes] = True
        return mask

    def issubset(self, other: "PointSet") -> bool:
        return bool(np.all(np.isin(self.codes, other.codes)))

    def translate(self, v) -> "PointSet":
        return PointSet.from_coords(self.field, vec_add(self.field, self.coords, np.asarray(v)))

    def map_coords(self, fn) -> "PointSet":
        return PointSet.from_coords(self.field, fn(self.coords))

    def subset(self, mask) -> "PointSet":
        return PointSet(self.field, self.d, self.codes[np.asarray(mask, dtype=bool)])

    def union(self, other: "PointSet") -> "PointSet":
        return PointSet(self.field, self.d, np.concatenate([self.codes, other.codes]))

    def sample(self, rng: np.random.Generator, size: int) -> "PointSet":
        size = min(size, len(self))
        return PointSet(self.field, self.d, rng.choice(self.codes, size=size, replace=False))


@dataclass(frozen=True)
class Variety:
    """The paraboloid ``x_d = x_1^2 + ... + x_{d-1}^2`` or the sphere ``||x|| = j``."""

    field: FiniteField
    kind: str
    d: int
    j: int | None = None

    def __post_init__(self):
        if self.kind not in ("paraboloid", "sphere"):
            raise ValueError(f"unknown variety kind {self.kind!r}")
        if self.kind == "sphere" and self.j is None:
            raise ValueError("a sphere needs a radius j")
        if self.kind == "paraboloid" and self.d < 2:
            raise ValueError("paraboloid needs d >= 2")

    def contains(self, x) -> np.ndarray | bool:
        f = self.field
        x = np.asarray(x, dtype=np.int64)
        if self.kind == "sphere":
            out = norm(f, x) == self.j
        else:
            out = norm(f, x[..., :-1]) == x[..., -1]
        return bool(out) if np.ndim(out) == 0 else out

    def points(self) -> PointSet:
        return _enumerate_variety(self)

    def __len__(self) -> int:
        return len(self.points())

    def sample(self, rng: np.random.Generator, size: int) -> PointSet:
        """About ``size`` distinct random points, drawn without enumerating the variety.

        Useful when q^d is too large to list; the draw is uniform over the free
        coordinates rather than exactly uniform over the variety.
        """
        f, d = self.field, self.d
        total = f.q ** (d - 1) if self.kind == "paraboloid" else sphere_size(f, d, self.j)
        size = min(size, total)
        codes: set[int] = set()
        roots = np.array([f.sqrt(a) if f.is_square(a) else -1 for a in range(f.q)], dtype=np.int64)
        while len(codes) < size:
            batch = max(16, 2 * (size - len(codes)))
            head = rng.integers(0, f.q, size=(batch, d - 1))
            if self.kind == "paraboloid":
                last = norm(f, head)
            else:
                root = roots[f.add_table[self.j, f.neg_table[norm(f, head)]]]
                keep = root >= 0
                head, root = head[keep], root[keep]
                flip = rng.integers(0, 2, size=len(root)).astype(bool)
                last = np.where(flip, f.neg_table[root], root)
            for c in encode(f, np.concatenate([head, np.atleast_1d(last)[:, None]], axis=1)):
                if len(codes) == size:
                    break
                codes.add(int(c))
        return PointSet(f, d, np.fromiter(codes, dtype=np.int64, count=len(codes)))

    def quadric(self):
        """(Gram diagonal, linear part, constant) with the variety = {Q + L + c = 0}."""
        f, d = self.field, self.d
        if self.kind == "sphere":
            return np.ones(d, dtype=np.int64), np.zeros(d, dtype=np.int64), f.neg(self.j)
        diag = np.ones(d, dtype=np.int64)
        diag[-1] = 0
        lin = np.zeros(d, dtype=np.int64)
        lin[-1] = f.neg(1)
        return diag, lin, 0


def paraboloid(f: FiniteField, d: int) -> Variety:
    return Variety(f, "paraboloid", d)


def sphere(f: FiniteField, d: int, j: int) -> Variety:
    return Variety(f, "sphere", d, j)


@lru_cache(maxsize=64)
def _enumerate_variety(v: Variety) -> PointSet:
    f, d = v.field, v.d
    if v.kind == "paraboloid":
        base = all_points(f, d - 1)
        coords = np.concatenate([base, norm(f, base)[:, None]], axis=1)
        return PointSet.from_coords(f, coords)
    check_budget(f, d)
    pts = all_points(f, d)
    return PointSet(f, d, np.flatnonzero(norm(f, pts) == v.j))


def enumerate_variety(v: Variety) -> PointSet:
    return v.points()


def quadric_count(f: FiniteField, n: int, r: int, det: int = 1) -> int:
    """Number of solutions of a nondegenerate diagonal quadratic form = r in n variables.

    ``det`` is the product of the diagonal coefficients; only its square class matters.
    """
    q, eta = f.q, f.eta_table
    if n == 0:
        return 1 if r == 0 else 0
    if n % 2 == 1:
        sign = f.element(-1) if (n - 1) // 2 % 2 else 1
        return q ** (n - 1) + q ** ((n - 1) // 2) * int(eta[f.mul(f.mul(sign, r), det)])
    sign = f.element(-1) if (n // 2) % 2 else 1
    v = q - 1 if r == 0 else -1
    return q ** (n - 1) + v * q ** ((n - 2) // 2) * int(eta[f.mul(sign, det)])


def sphere_size(f: FiniteField, n: int, r: int) -> int:
    """|{x in F_q^n : ||x|| = r}| in closed form."""
    return quadric_count(f, n, r, 1)


# -- quadratic form equivalence -------------------------------------------------


def _diagonalize(f: FiniteField, gram: np.ndarray) -> list[tuple[np.ndarray, int]]:
    """Orthogonal basis of a nondegenerate symmetric form as (vector, norm) pairs."""
    d = gram.shape[0]
    basis = [np.eye(d, dtype=np.int64)[i] for i in range(d)]
    out = []
    while basis:
        pick = next((i for i, v in enumerate(basis) if bilinear(f, gram, v, v)), None)
        if pick is None:
            # all norms vanish: some pair pairs nontrivially, and v+w then has norm 2B(v, w) != 0
            i, k = next((i, k) for i in range(len(basis)) for k in range(i + 1, len(basis))
                        if bilinear(f, gram, basis[i], basis[k]))
            basis[i] = vec_add(f, basis[i], basis[k])
            pick = i
        v = basis.pop(pick)
        nv = bilinear(f, gram, v, v)
        if nv == 0:
            raise ValueError("form is degenerate")
        out.append((v, nv))
        inv = f.inv(nv)
        for idx, w in enumerate(basis):
            c = f.mul(bilinear(f, gram, w, v), inv)
            basis[idx] = f.add_table[w, f.neg_table[f.mul_table[c, v]]]
    return out


def congruence_matrix(f: FiniteField, gram, targets: Sequence[int]) -> np.ndarray:
    """Invertible T whose columns t_i satisfy B(t_i, t_k) = targets[i] * [i == k].

    Raises ValueError when the discriminants disagree. Each step finds a vector of the
    next target norm inside the span of two orthogonal basis vectors by an O(q^2)
    scan (a nondegenerate binary form represents every nonzero value).
    """
    gram = np.asarray(gram, dtype=np.int64)
    d = gram.shape[0]
    work = _diagonalize(f, gram)
    cols = []
    for target in targets[:-1]:
        (w1, c1), (w2, c2) = work[0], work[1]
        a, b = _represent(f, c1, c2, target)
        t = vec_add(f, f.mul_table[a, w1], f.mul_table[b, w2])
        # the complement of t inside span(w1, w2)
        t_perp = vec_add(f, f.mul_table[f.neg(f.mul(b, c2)), w1], f.mul_table[f.mul(a, c1), w2])
        cols.append(t)
        work = [(t_perp, f.mul(f.mul(c1, c2), target))] + work[2:]
    (w, c) = work[0]
    s = f.sqrt(f.div(targets[-1], c))
    if s is None:
        raise ValueError("forms are not equivalent (discriminant mismatch)")
    cols.append(f.mul_table[s, w])
    mat = np.stack(cols, axis=1)
    assert rank(f, mat.T) == d
    return mat


def _represent(f: FiniteField, c1: int, c2: int, target: int) -> tuple[int, int]:
    sq = f.square_table
    for a in range(f.q):
        rest = f.sub(target, f.mul(c1, sq[a]))
        b = f.sqrt(f.div(rest, c2))
        if b is not None:
            return a, b
    raise AssertionError("binary nondegenerate forms are universal; unreachable")


@dataclass(frozen=True)
class FormTransform:
    """An invertible T with ||T x|| equal to the diagonal normal form at x."""

    field: FiniteField
    matrix: np.ndarray = dc_field(repr=False)
    coefficients: tuple[int, ...]
    alpha: int

    @property
    def d(self) -> int:
        return len(self.coefficients)

    def apply(self, x) -> np.ndarray:
        return mat_vec(self.field, self.matrix, np.asarray(x, dtype=np.int64))

    def normal_form(self, x) -> np.ndarray | int:
        f = self.field
        x = np.asarray(x, dtype=np.int64)
        terms = f.mul_table[np.asarray(self.coefficients), f.square_table[x]]
        out = field_sum(f, terms, axis=-1)
        return int(out) if np.ndim(out) == 0 else out


def normal_form_coefficients(f: FiniteField, d: int) -> tuple[tuple[int, ...], int]:
    """Diagonal of the hyperbolic-pairs-plus-alpha normal form and its alpha."""
    if d < 2:
        raise CaseMismatch("the normal form needs d >= 2")
    minus_one = f.neg(1)
    eta = f.eta_table
    if d % 2 == 0:
        sign_class = int(eta[f.pow(minus_one, d // 2)])
        pairs = (d - 2) // 2
    else:
        sign_class = int(eta[f.pow(minus_one, (d - 1) // 2)])
        pairs = (d - 1) // 2
    # 1 = eta(sign) * eta(alpha), alpha in {1, lambda}
    alpha = 1 if sign_class == 1 else f.nonsquare
    coeffs = [1, minus_one] * pairs
    if d % 2 == 0:
        coeffs += [1, f.neg(alpha)]
    else:
        coeffs += [alpha]
    return tuple(coeffs), alpha


def form_equivalence(f: FiniteField, d: int) -> FormTransform:
    coeffs, alpha = normal_form_coefficients(f, d)
    mat = congruence_matrix(f, np.eye(d, dtype=np.int64), coeffs)
    mat.setflags(write=False)
    return FormTransform(f, mat, coeffs, alpha)


# -- affine subspaces ------------------------------------------------------------


@dataclass(frozen=True)
class AffineSubspace:
    field: FiniteField
    base: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def d(self) -> int:
        return len(self.base)

    def points(self) -> PointSet:
        pts = span_points(self.field, np.asarray(self.basis, dtype=np.int64).reshape(-1, self.d),
                          np.asarray(self.base))
        return PointSet.from_coords(self.field, pts)

    def __len__(self) -> int:
        return self.field.q**self.dim


def sphere_subspace_case(f: FiniteField, d: int, j: int) -> tuple[int, int]:
    """(case number 1..5, dimension k) of the affine subspace guaranteed on S_j."""
    if j == 0 or d < 2:
        raise CaseMismatch("need j != 0 and d >= 2")
    if d % 2 == 0:
        return 1, (d - 2) // 2
    if d < 3:
        raise CaseMismatch("odd d must be >= 3")
    if d % 4 == 1:
        if d < 5:
            raise CaseMismatch("d = 4k + 1 needs k >= 1")
        return (3, (d - 1) // 2) if f.is_square(j) else (2, (d - 3) // 2)
    return (5, (d - 1) // 2) if f.is_square(f.neg(j)) else (4, (d - 3) // 2)


def subspace_on_sphere(f: FiniteField, d: int, j: int) -> AffineSubspace:
    """An affine subspace inside S_j built in normal-form coordinates and pulled back."""
    _, k = sphere_subspace_case(f, d, j)
    ft = form_equivalence(f, d)
    coeffs = ft.coefficients
    base = np.zeros(d, dtype=np.int64)
    if d % 2 == 0:
        # a^2 - alpha b^2 = j in the last two coordinates
        a, b = _represent(f, coeffs[-2], coeffs[-1], j)
        base[-2:] = (a, b)
    else:
        a = f.sqrt(f.div(j, ft.alpha))
        if a is not None:
            base[-1] = a
        else:
            # a^2 - b^2 + alpha c^2 = j in the last three coordinates
            for c in range(f.q):
                rest = f.sub(j, f.mul(ft.alpha, f.square_table[c]))
                if rest:
                    a, b = _represent(f, 1, f.neg(1), rest)
                    base[-3:] = (a, b, c)
                    break
    directions = []
    for i in range(k):
        u = np.zeros(d, dtype=np.int64)
        u[2 * i] = u[2 * i + 1] = 1
        directions.append(u)
    base_pt = ft.apply(base)
    basis = [ft.apply(u) for u in directions]
    return AffineSubspace(f, tuple(int(v) for v in base_pt),
                          tuple(tuple(int(v) for v in u) for u in basis))


def isotropic_basis(f: FiniteField, n: int) -> list[tuple[int, ...]]:
    """Basis of a maximal totally isotropic subspace of (F_q^n, ||.||)."""
    if n < 2:
        return []
    ft = form_equivalence(f, n)
    pairs = (n - 1) // 2 if n % 2 else (n - 2) // 2 + (ft.alpha == 1)
    basis = []
    for i in range(pairs):
        u = np.zeros(n, dtype=np.int64)
        u[2 * i] = u[2 * i + 1] = 1
        basis.append(tuple(int(v) for v in ft.apply(u)))
    return basis


def paraboloid_subspace(f: FiniteField, d: int) -> AffineSubspace:
    """W x {0} inside P, with W maximal totally isotropic in F_q^(d-1)."""
    basis = tuple(w + (0,) for w in isotropic_basis(f, d - 1))
    return AffineSubspace(f, (0,) * d, basis)


def mutually_orthogonal(f: FiniteField, d: int) -> list[tuple[int, ...]]:
    """d/2 linearly independent vectors with every pairwise dot product (and norm) zero."""
    if d % 2 or (d % 4 == 2 and f.q % 4 == 3):
        raise ImpossibleCase(f"no {d}/2 mutually orthogonal vectors in F_{f.q}^{d}")
    minus_one = f.neg(1)
    blocks: list[list[list[int]]] = []
    if d % 4 == 2:
        i = f.sqrt(minus_one)
        blocks.append([[1, i]])
    if d >= 4:
        a = b = None
        for a in range(f.q):
            b = f.sqrt(f.sub(minus_one, f.square_table[a]))
            if b is not None:
                break
        four = [[1, 0, a, b], [0, 1, b, f.neg(a)]]
        blocks = [four] * (d // 4) + blocks
    vectors = []
    offset = 0
    for block in blocks:
        width = len(block[0])
        for row in block:
            v = [0] * d
            v[offset:offset + width] = row
            vectors.append(tuple(int(x) for x in v))
        offset += width
    return vectors


def max_affine_subspace_dim(v: Variety) -> int:
    """Largest k such that some k-dimensional affine subspace lies inside ``v``.

    Exhaustive over base points and over sets of projective directions, with early
    exit once a dimension is reached; only feasible at tiny sizes.
    """
    f, d = v.field, v.d
    check_budget(f, d, SUBSPACE_SEARCH_LIMIT)
    diag, lin, _ = v.quadric()
    pts = all_points(f, d)
    first_nz = np.argmax(pts != 0, axis=1)
    proj = pts[(pts.any(axis=1)) & (pts[np.arange(len(pts)), first_nz] == 1)]
    q_dir = field_sum(f, f.mul_table[diag, f.square_table[proj]], axis=-1)
    proj = proj[q_dir == 0]
    lin_dir = dot(f, proj, lin)
    # Gram of directions under B(u, w) = sum diag_i u_i w_i
    weighted = f.mul_table[diag[None, :], proj]
    ortho = np.zeros((len(proj), len(proj)), dtype=bool)
    for i in range(len(proj)):
        ortho[i] = dot(f, weighted[i][None, :], proj) == 0
    two = f.element(2)
    best = 0
    upper = _witt_upper_bound(v)
    for p in v.points().coords:
        cond = f.add_table[f.mul_table[two, dot(f, weighted, p[None, :])], lin_dir] == 0
        cand = np.flatnonzero(cond)
        best = max(best, _largest_isotropic(f, proj, ortho, cand, best))
        if best >= upper:
            break
    return best


def _witt_upper_bound(v: Variety) -> int:
    return v.d // 2


def _largest_isotropic(f, proj, ortho, cand, floor) -> int:
    best = floor
    d = proj.shape[1]

    def dfs(chosen: list[int], span_codes: set[int], remaining: np.ndarray):
        nonlocal best
        if len(chosen) > best:
            best = len(chosen)
        if len(chosen) + len(remaining) <= best:
            return
        for pos, idx in enumerate(remaining):
            code = int(encode(f, proj[idx]))
            if code in span_codes:
                continue
            nxt = remaining[pos + 1:]
            nxt = nxt[ortho[idx, nxt]]
            new_span = span_codes | {int(c) for c in encode(
                f, span_points(f, proj[chosen + [idx]]).reshape(-1, d))}
            dfs(chosen + [idx], new_span, nxt)

    cand = cand[ortho[cand, cand]]
    dfs([], {0}, cand)
    return best
