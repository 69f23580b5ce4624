"""Distance sets between a set on a variety and an arbitrary set.

mu(t) counts pairs (a, b) in A x B with ||a - b|| = t, and Delta(A, B) is the set of
attained t. The theorem checks assert the explicit inequalities

    |Delta(A, B)| >= c * min{q, |A||B| / q^(d-1), |A| / q^e}

that the second-moment method yields, with (c, e) depending on the variety.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import (EmptySet, EmptyShell, HypothesisViolation, ImpossibleCase,
                     OmegaNotCovering, SizeLimitExceeded, SupportViolation)
from .field import FiniteField, gauss_sum
from .fourier import ComplexGrid, fourier_hat
from .geometry import (PointSet, all_points, check_budget, encode, form_equivalence,
                       mutually_orthogonal, norm, paraboloid, quadric_count, sphere)
from .linalg import dot, span_points

PAIR_LIMIT = 10**8


# -- profiles -------------------------------------------------------------------------


@dataclass(frozen=True)
class DistanceProfile:
    q: int
    mu: tuple[int, ...]  # mu[t] for t = 0..q-1 (field encodings)

    @property
    def delta(self) -> frozenset[int]:
        return frozenset(t for t, c in enumerate(self.mu) if c)

    @property
    def mu_square_sum(self) -> int:
        return sum(c * c for c in self.mu)

    @property
    def pair_count(self) -> int:
        return sum(self.mu)

    @property
    def cs_lower_bound(self) -> Fraction:
        """|A|^2 |B|^2 / sum mu^2, a lower bound for |Delta| by Cauchy-Schwarz."""
        s = self.mu_square_sum
        return Fraction(self.pair_count**2, s) if s else Fraction(0)


def _diff_norms(A: PointSet, B: PointSet) -> np.ndarray:
    f = A.field
    out = np.empty((len(A), len(B)), dtype=np.int64)
    bc = f.neg_table[B.coords]
    step = max(1, 4_000_000 // max(1, len(B) * A.d))
    ac = A.coords
    for s in range(0, len(A), step):
        out[s:s + step] = norm(f, f.add_table[ac[s:s + step, None, :], bc[None, :, :]])
    return out


def distance_profile(A: PointSet, B: PointSet) -> DistanceProfile:
    if A.d != B.d or A.field != B.field:
        raise ValueError("A and B must live in the same space")
    if len(A) * len(B) > PAIR_LIMIT:
        raise SizeLimitExceeded(f"{len(A)} x {len(B)} pairs exceed {PAIR_LIMIT}")
    q = A.field.q
    if len(A) == 0 or len(B) == 0:
        return DistanceProfile(q, (0,) * q)
    counts = np.bincount(_diff_norms(A, B).reshape(-1), minlength=q)
    return DistanceProfile(q, tuple(int(c) for c in counts))


class DistanceKernel:
    """Batched distance profiles for many (A, B) pairs with A inside a fixed row set.

    mu_t(A, B) = 1_A^T M_t 1_B with M_t[x, y] = [||x - y|| = t]; rows are restricted to
    ``rows`` (typically a variety) so that the products stay small.
    """

    def __init__(self, f: FiniteField, d: int, rows: np.ndarray | None = None, limit: int = 10**8):
        check_budget(f, d)
        n = f.q**d
        rows = np.arange(n) if rows is None else np.asarray(rows, dtype=np.int64)
        if len(rows) * n > limit:
            raise SizeLimitExceeded("distance kernel too large")
        pts = all_points(f, d)
        self.field, self.d, self.rows = f, d, rows
        self.row_index = {int(c): i for i, c in enumerate(rows)}
        self.norms = norm(f, f.add_table[pts[rows][:, None, :], f.neg_table[pts][None, :, :]])
        self._masks = [(self.norms == t).astype(np.float32) for t in range(f.q)]

    def indicator_rows(self, sets) -> np.ndarray:
        out = np.zeros((len(sets), len(self.rows)), dtype=np.float32)
        for i, s in enumerate(sets):
            out[i, [self.row_index[int(c)] for c in s.codes]] = 1
        return out

    @staticmethod
    def indicator_cols(sets, n: int) -> np.ndarray:
        out = np.zeros((len(sets), n), dtype=np.float32)
        for i, s in enumerate(sets):
            out[i, s.codes] = 1
        return out

    def paired(self, IA: np.ndarray, IB: np.ndarray) -> np.ndarray:
        """mu for row-aligned pairs (IA[i], IB[i]); shape (batch, q)."""
        out = np.empty((len(IA), self.field.q), dtype=np.int64)
        for t, M in enumerate(self._masks):
            out[:, t] = np.rint(np.einsum("ij,ij->i", IA @ M, IB)).astype(np.int64)
        return out

    def cross(self, IA: np.ndarray, IB: np.ndarray) -> np.ndarray:
        """mu for every combination; shape (|IA|, |IB|, q)."""
        out = np.empty((len(IA), len(IB), self.field.q), dtype=np.int64)
        for t, M in enumerate(self._masks):
            out[:, :, t] = np.rint((IA @ M) @ IB.T).astype(np.int64)
        return out


# -- second-moment bounds ------------------------------------------------------------


@dataclass(frozen=True)
class MuSquareReport:
    exact: int
    bound1: float
    bound2: float | None

    @property
    def passed(self) -> bool:
        tol = 1e-9 * max(1.0, abs(self.bound1))
        ok = self.exact <= self.bound1 + tol
        if self.bound2 is not None:
            ok = ok and self.exact <= self.bound2 + 1e-9 * max(1.0, abs(self.bound2))
        return ok


def _mu_first_bound(A: PointSet, B: PointSet) -> float:
    """|A|^2|B|^2/q + (|A|/q) sum_{a, s != 0} |sum_b chi(2s a.b - s||b||)|^2."""
    f, q = A.field, A.field.q
    if len(A) == 0 or len(B) == 0:
        return 0.0
    w = f.add_table[f.mul_table[f.element(2), dot(f, A.coords[:, None, :], B.coords[None, :, :])],
                    f.neg_table[norm(f, B.coords)][None, :]]
    hist = np.zeros((len(A), q))
    np.add.at(hist, (np.repeat(np.arange(len(A)), len(B)), w.reshape(-1)), 1)
    sums = hist @ f.char_matrix[:, 1:]  # column s: sum_c hist[a, c] chi(s c)
    second = len(A) / q * float(np.sum(np.abs(sums) ** 2))
    return len(A) ** 2 * len(B) ** 2 / q + second


def _mu_second_bound(A: PointSet, B: PointSet, omega: PointSet) -> float:
    """|A|^2|B|^2/q + q^(d-1)|A| sum_{b, b', s != 0} Omega^(2s(b' - b)) chi(s(||b'|| - ||b||))."""
    f, q, d = A.field, A.field.q, A.d
    if len(A) == 0 or len(B) == 0:
        return 0.0
    hat = fourier_hat(ComplexGrid.indicator(omega)).values
    bc = B.coords
    diff = f.add_table[bc[None, :, :], f.neg_table[bc][:, None, :]]  # [b, b'] = b' - b
    nb = norm(f, bc)
    dn = f.add_table[nb[None, :], f.neg_table[nb][:, None]]  # ||b'|| - ||b||
    total = 0j
    for s in range(1, q):
        codes = encode(f, f.mul_table[f.mul(2, s), diff])
        total += np.sum(hat[codes] * f.chi_table[f.mul_table[s, dn]])
    return len(A) ** 2 * len(B) ** 2 / q + q ** (d - 1) * len(A) * total.real


def mu_square_bounds(A: PointSet, B: PointSet, omega: PointSet | None = None) -> MuSquareReport:
    """Exact sum of mu^2 with the two averaged character-sum upper bounds."""
    exact = distance_profile(A, B).mu_square_sum
    b1 = _mu_first_bound(A, B)
    b2 = None
    if omega is not None:
        if not A.issubset(omega):
            raise OmegaNotCovering("Omega must contain A")
        b2 = _mu_second_bound(A, B, omega)
    return MuSquareReport(exact, b1, b2)


def sphere_mu_third_term(f: FiniteField, d: int, j: int, size_a: int, B: PointSet) -> complex:
    """q^-2 eta^d(-1) G1^d |A| sum_{b,b',s,r != 0} eta^d(r) chi(jr + s^2||b'-b||/r) chi(s(||b'||-||b||))."""
    q = f.q
    if len(B) == 0:
        return 0j
    bc = B.coords
    nb = norm(f, bc)
    n1 = norm(f, f.add_table[bc[None, :, :], f.neg_table[bc][:, None, :]])
    n2 = f.add_table[nb[None, :], f.neg_table[nb][:, None]]
    hist = np.bincount((n1 * q + n2).reshape(-1), minlength=q * q).reshape(q, q)
    s = np.arange(1, q)
    r = np.arange(1, q)
    eta_r = f.eta_table[r].astype(float) ** d
    s2_over_r = f.mul_table[f.square_table[s][:, None], f.inv_table[r][None, :]]  # (s, r)
    jr = f.mul_table[j, r]
    kernel = np.zeros((q, q), dtype=np.complex128)
    for a in range(q):
        inner = f.add_table[jr[None, :], f.mul_table[a, s2_over_r]]  # (s, r)
        rsum = f.chi_table[inner] @ eta_r  # per s
        for b in range(q):
            kernel[a, b] = np.sum(rsum * f.chi_table[f.mul_table[s, b]])
    coef = q**-2.0 * float(f.eta_table[f.neg(1)]) ** d * gauss_sum(f) ** d * size_a
    return coef * complex(np.sum(hist * kernel))


@dataclass(frozen=True)
class SphereMuSquareReport:
    exact: int
    main_terms: float
    third_term: complex

    @property
    def rhs(self) -> float:
        return self.main_terms + self.third_term.real

    @property
    def passed(self) -> bool:
        return self.exact <= self.rhs + 1e-9 * max(1.0, abs(self.rhs))


def sphere_mu_square_bound(A: PointSet, B: PointSet, j: int) -> SphereMuSquareReport:
    f, q, d = A.field, A.field.q, A.d
    if not sphere(f, d, j).contains(A.coords).all():
        raise SupportViolation("A must lie on the sphere S_j")
    exact = distance_profile(A, B).mu_square_sum
    main = len(A) ** 2 * len(B) ** 2 / q + q ** (d - 1) * len(A) * len(B)
    return SphereMuSquareReport(exact, main, sphere_mu_third_term(f, d, j, len(A), B))


# -- Mattila functional ----------------------------------------------------------------


@dataclass(frozen=True)
class MattilaReport:
    value: float
    bound: float  # min{q, q / M_A(q)}
    delta_size: int


def mattila(A: PointSet) -> MattilaReport:
    if len(A) == 0:
        raise EmptySet("A must be nonempty")
    f, q, d = A.field, A.field.q, A.d
    power = np.abs(fourier_hat(ComplexGrid.indicator(A)).values) ** 2
    norms = norm(f, all_points(f, d))
    shells = np.bincount(norms, weights=power, minlength=q)[1:]
    value = float(q) ** (3 * d + 1) / len(A) ** 4 * float(np.sum(shells**2))
    bound = float(q) if value <= 1 else q / value
    return MattilaReport(value, bound, len(distance_profile(A, A).delta))


# -- theorem checks ------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremVerdict:
    theorem: str
    hypotheses: dict = dc_field(default_factory=dict)
    lhs: int = 0
    rhs: float = 0.0

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs - 1e-9


def explicit_threshold(constant: Fraction, q: int, d: int, size_a: int, size_b: int,
                       exponent: Fraction) -> float:
    """constant * min{q, |A||B|/q^(d-1), |A|/q^exponent}."""
    terms = (q, size_a * size_b / q ** (d - 1), size_a / q ** float(exponent))
    return float(constant) * min(terms)


THEOREMS = {
    # id: (constant, exponent as a function of d)
    "paraboloid-odd": (Fraction(1, 3), lambda d: Fraction(d - 3, 2)),
    "paraboloid-even": (Fraction(1, 3), lambda d: Fraction(d - 2, 2)),
    "sphere-odd": (Fraction(1, 4), lambda d: Fraction(d - 3, 2)),
    "sphere-even": (Fraction(1, 4), lambda d: Fraction(d - 2, 2)),
    "zero-sphere": (Fraction(1, 3), lambda d: Fraction(d - 2, 2)),
}


def paraboloid_theorem_id(f: FiniteField, d: int) -> str:
    if d % 4 == 3 and f.q % 4 == 3:
        return "paraboloid-odd"
    if d >= 4 and d % 2 == 0:
        return "paraboloid-even"
    raise HypothesisViolation("needs d = 4k - 1 with q = 3 mod 4, or even d >= 4")


def sphere_theorem_id(f: FiniteField, d: int, j: int, variant: str | None = None) -> str:
    if j == 0:
        raise HypothesisViolation("radius must be nonzero")
    square = f.is_square(j)
    if d >= 4 and d % 2 == 0:
        found = "sphere-even"
    elif square and d % 4 == 3 and f.q % 4 == 3:
        found = "sphere-odd"  # square radius branch
    elif not square and ((d % 4 == 1 and d >= 5) or (d % 4 == 3 and f.q % 4 == 1)):
        found = "sphere-odd"  # non-square radius branch
    else:
        raise HypothesisViolation(f"no sphere theorem covers d={d}, q={f.q}, j={j}")
    if variant is not None and variant != found:
        raise HypothesisViolation(f"variant {variant!r} does not match parameters ({found})")
    return found


def zero_sphere_theorem_id(f: FiniteField, d: int) -> str:
    if d % 4 != 2 or f.q % 4 != 3:
        raise HypothesisViolation("needs d = 4k + 2 and q = 3 mod 4")
    return "zero-sphere"


def verdict(theorem: str, q: int, d: int, size_a: int, size_b: int, delta_size: int,
            **hyp) -> TheoremVerdict:
    const, expo = THEOREMS[theorem]
    rhs = explicit_threshold(const, q, d, size_a, size_b, expo(d))
    return TheoremVerdict(theorem, {"q": q, "d": d, **hyp}, delta_size, rhs)


def theorem_paraboloid_distance(A: PointSet, B: PointSet) -> TheoremVerdict:
    f, d = A.field, A.d
    tid = paraboloid_theorem_id(f, d)
    if not paraboloid(f, d).contains(A.coords).all():
        raise SupportViolation("A must lie on the paraboloid")
    delta = len(distance_profile(A, B).delta)
    return verdict(tid, f.q, d, len(A), len(B), delta)


def theorem_sphere_distance(A: PointSet, B: PointSet, j: int,
                            variant: str | None = None) -> TheoremVerdict:
    f, d = A.field, A.d
    tid = sphere_theorem_id(f, d, j, variant)
    if not sphere(f, d, j).contains(A.coords).all():
        raise SupportViolation("A must lie on S_j")
    delta = len(distance_profile(A, B).delta)
    return verdict(tid, f.q, d, len(A), len(B), delta, j=j)


def theorem_zero_sphere_distance(A: PointSet, B: PointSet) -> TheoremVerdict:
    f, d = A.field, A.d
    tid = zero_sphere_theorem_id(f, d)
    if not sphere(f, d, 0).contains(A.coords).all():
        raise SupportViolation("A must lie on S_0")
    delta = len(distance_profile(A, B).delta)
    return verdict(tid, f.q, d, len(A), len(B), delta, j=0)


def boxed_statement(theorem: str, q: int, d: int, size_a: int, size_b: int) -> float | None:
    """The stated threshold conclusion (q/3, q/4 or q/144) if its hypotheses apply, else None."""
    odd = theorem in ("paraboloid-odd", "sphere-odd")
    if odd:
        if size_a * size_b < 4 * q**d:
            return None
        return q / 3 if theorem == "paraboloid-odd" else q / 4
    if size_a * size_b < 16 * q**d:
        return None
    if q ** ((d - 1) / 2) < size_a < q ** (d / 2):
        return None
    return q / 144


# -- sharpness constructions ---------------------------------------------------------------


@dataclass(frozen=True)
class SharpConstruction:
    kind: str
    case: int
    A: PointSet
    B: PointSet
    radii: tuple[int, ...]
    delta: frozenset[int]
    expected_a: int
    expected_b: int
    j: int | None = None

    @property
    def epsilon(self) -> float:
        """Implied epsilon with |R| = q^(1 - epsilon)."""
        return 1 - math.log(len(self.radii), self.A.field.q)


SHARP_KINDS = ("para-3", "sphere-c-1", "sphere-c-3", "sphere-c-3-2")


def radius_set(f: FiniteField, size: int, shell_sizes) -> tuple[int, ...]:
    """First ``size`` radii in the order 1, ..., q-1, 0 whose shell is nonempty."""
    out = []
    for r in list(range(1, f.q)) + [0]:
        if shell_sizes(r) > 0:
            out.append(r)
        if len(out) == size:
            return tuple(out)
    raise EmptyShell(f"cannot find {size} radii with nonempty shells in F_{f.q}")


def _sharp_layout(kind: str, f: FiniteField, d: int, j: int | None):
    """(case, number of isotropic directions, tail width n, radius) for a construction."""
    q = f.q
    if kind == "para-3":
        if d % 4 == 3 and q % 4 == 3:
            return 1, (d - 3) // 2, 3, None
        if d >= 4 and d % 2 == 0 and q % 4 == 1:
            return 2, (d - 2) // 2, 2, None
        if d % 4 == 2 and d >= 6 and q % 4 == 3:
            return 3, (d - 2) // 2, 2, None
        raise ImpossibleCase(f"para-3 does not apply at d={d}, q={q}")
    if kind == "sphere-c-1":
        if j is None or j == 0:
            raise HypothesisViolation("sphere-c-1 needs a nonzero radius j")
        if f.is_square(j) and d % 4 == 3 and q % 4 == 3:
            return 1, (d - 3) // 2, 3, j
        if not f.is_square(j) and ((d % 4 == 1 and d >= 5) or (d % 4 == 3 and q % 4 == 1)):
            return 2, (d - 3) // 2, 3, j
        raise ImpossibleCase(f"sphere-c-1 does not apply at d={d}, q={q}, j={j}")
    if kind == "sphere-c-3":
        if j is None or j == 0:
            raise HypothesisViolation("sphere-c-3 needs a nonzero radius j")
        if d < 4 or d % 2:
            raise ImpossibleCase("sphere-c-3 needs even d >= 4")
        if d % 4 == 0 and q % 4 == 3:
            return 1, (d - 4) // 2, 4, j
        return 1, (d - 2) // 2, 2, j
    if kind == "sphere-c-3-2":
        if d % 4 != 2 or d < 6 or q % 4 != 3:
            raise ImpossibleCase("sphere-c-3-2 needs d = 4k + 2 and q = 3 mod 4")
        return 1, (d - 2) // 2, 2, 0
    raise ValueError(f"unknown construction kind {kind!r}")


def _diag_form(f: FiniteField, coeffs, pts: np.ndarray) -> np.ndarray:
    """sum_i coeffs_i x_i^2 for each row x of ``pts``."""
    out = np.zeros(len(pts), dtype=np.int64)
    for i, c in enumerate(coeffs):
        out = f.add_table[out, f.mul_table[c, f.square_table[pts[:, i]]]]
    return out


def _tail_center(f: FiniteField, n: int, j: int, coeffs) -> np.ndarray:
    """Smallest-code point c of the n-dim tail with sum coeffs_i c_i^2 = j."""
    pts = all_points(f, n)
    hits = np.flatnonzero(_diag_form(f, coeffs, pts) == j)
    if len(hits) == 0:
        raise EmptyShell(f"no tail point of norm {j}")
    return pts[hits[0]]


def sharp_construction(kind: str, f: FiniteField, d: int, rsize: int,
                       j: int | None = None) -> SharpConstruction:
    """Build (A, B) with Delta(A, B) equal to a chosen radius set R of size ``rsize``."""
    case, k, n, radius = _sharp_layout(kind, f, d, j)
    if rsize < 1:
        raise ValueError("rsize must be positive")
    head = d - n
    # standard coordinates when the head admits k mutually orthogonal vectors
    try:
        vecs = mutually_orthogonal(f, head) if head else []
        coeffs = [1] * d
        transform = None
        if len(vecs) < k:
            raise ImpossibleCase("not enough orthogonal vectors")
        vecs = vecs[:k]
        directions = [list(v) + [0] * n for v in vecs]
    except ImpossibleCase:
        # normal-form coordinates: hyperbolic pairs carry isotropic directions
        ft = form_equivalence(f, d)
        coeffs = list(ft.coefficients)
        transform = ft
        directions = []
        for i in range(k):
            u = [0] * d
            u[2 * i] = u[2 * i + 1] = 1
            directions.append(u)
    tail_coeffs = coeffs[head:]
    det = 1
    for c in tail_coeffs:
        det = f.mul(det, c)

    def shell_size(r):
        return quadric_count(f, n, r, det)

    radii = radius_set(f, rsize, shell_size)
    directions = np.asarray(directions, dtype=np.int64).reshape(-1, d)
    span = span_points(f, directions) if len(directions) else np.zeros((1, d), dtype=np.int64)

    if kind in ("para-3", "sphere-c-3-2"):
        center = np.zeros(n, dtype=np.int64)
    else:
        center = _tail_center(f, n, radius, tail_coeffs)
    tail_pts = all_points(f, n)
    rel = f.add_table[tail_pts, f.neg_table[center][None, :]]
    shell = tail_pts[np.isin(_diag_form(f, tail_coeffs, rel), radii)]

    a_pts = span.copy()
    a_pts[:, head:] = center[None, :]
    padded = np.zeros((len(shell), d), dtype=np.int64)
    padded[:, head:] = shell
    b_full = f.add_table[span[:, None, :], padded[None, :, :]].reshape(-1, d)
    if transform is not None:
        a_pts = transform.apply(a_pts)
        b_full = transform.apply(b_full)
    A = PointSet.from_coords(f, a_pts)
    B = PointSet.from_coords(f, b_full)
    expected_a = f.q**k
    expected_b = expected_a * sum(shell_size(r) for r in radii)
    delta = distance_profile(A, B).delta
    return SharpConstruction(kind, case, A, B, radii, delta, expected_a, expected_b, radius)


def smallest_sharp_parameters() -> list[tuple[str, int, int, int | None]]:
    """(kind, q, d, j) at the smallest admissible sizes of each construction and case."""
    return [
        ("para-3", 3, 3, None),
        ("para-3", 5, 4, None),
        ("para-3", 3, 6, None),
        ("sphere-c-1", 3, 3, 1),
        ("sphere-c-1", 5, 3, 2),
        ("sphere-c-1", 3, 5, 2),
        ("sphere-c-3", 3, 4, 1),
        ("sphere-c-3", 5, 4, 1),
        ("sphere-c-3-2", 3, 6, None),
    ]
