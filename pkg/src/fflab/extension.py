"""Extension estimates: exponent arithmetic and empirical norm-ratio probes.

The extension operator sends f on a variety V to (f dsigma)^v on F_q^d. The best
constant R*_V(p -> r) is a supremum over all f; here we only evaluate the ratio

    ||(f dsigma)^v||_{L^r(F_q^d, dc)} / ||f||_{L^p(V, dsigma)}

over explicit families of test functions, so every reported maximum is a lower
bound for R*_V(p -> r).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .energy import additive_energy, paraboloid_isotropic_set
from .errors import BadExponent, BadRange
from .fourier import (ComplexGrid, CountingDC, SurfaceSigma, extension_inverse, fourier_tilde,
                      lr_norm, power_norm)
from .geometry import PointSet, Variety, encode, norm, paraboloid_subspace, subspace_on_sphere
from .linalg import span_points

Exponent = Fraction | float  # float only for math.inf

ENERGY_ROUTE_LIMIT = 4000
FAMILIES = ("random-subsets", "subspaces", "random-complex", "single-points", "full-variety")
INDICATOR_FAMILIES = ("random-subsets", "subspaces", "single-points", "full-variety")


def _exponent(value) -> Exponent:
    if isinstance(value, float) and math.isinf(value):
        if value < 0:
            raise BadExponent("exponent must be >= 1")
        return math.inf
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        out = Fraction(value)
    except (TypeError, ValueError) as exc:
        raise BadExponent(f"not an exponent: {value!r}") from exc
    if out < 1:
        raise BadExponent(f"exponent must be >= 1, got {out}")
    return out


def _reciprocal(e: Exponent) -> Fraction:
    return Fraction(0) if e == math.inf else 1 / e


def _conjugate(e: Exponent) -> Exponent:
    if e == math.inf:
        return Fraction(1)
    if e == 1:
        return math.inf
    return e / (e - 1)


@dataclass(frozen=True)
class ExponentPair:
    """(p, r) held exactly as fractions, with math.inf for the endpoint."""

    p: Exponent
    r: Exponent

    def __post_init__(self):
        object.__setattr__(self, "p", _exponent(self.p))
        object.__setattr__(self, "r", _exponent(self.r))

    @property
    def inverse(self) -> tuple[Fraction, Fraction]:
        """(1/p, 1/r), the coordinates used for convex-hull pictures."""
        return _reciprocal(self.p), _reciprocal(self.r)

    @property
    def dual(self) -> "ExponentPair":
        """(p', r'), the Hoelder conjugates."""
        return ExponentPair(_conjugate(self.p), _conjugate(self.r))

    def floats(self) -> tuple[float, float]:
        return float(self.p), float(self.r)

    def __str__(self) -> str:
        return f"({self.p} -> {self.r})"


def stein_tomas_pair(d: int) -> ExponentPair:
    return ExponentPair(2, Fraction(2 * d + 2, d - 1))


def even_paraboloid_pair(d: int) -> ExponentPair:
    """L^2 -> L^((2d+4)/d), the critical pair when d is even."""
    return ExponentPair(2, Fraction(2 * d + 4, d))


def paraboloid_l4_pair(d: int) -> ExponentPair:
    return ExponentPair(Fraction(4 * d - 4, 3 * d - 5), 4)


def sphere_l4_pair(d: int) -> ExponentPair:
    return ExponentPair(Fraction(4 * d, 3 * d - 2), 4)


# -- exponent arithmetic -----------------------------------------------------------


def critical_r2(d: int, kstar: int) -> Fraction:
    """2(d^2 - d k - d + k) / ((d - 1)(d - 1 - k)) for a maximal subspace of dimension k."""
    if d < 2 or not 0 <= kstar <= d - 2:
        raise BadRange(f"need d >= 2 and 0 <= k* <= d - 2, got d={d}, k*={kstar}")
    return Fraction(2 * (d * d - d * kstar - d + kstar), (d - 1) * (d - 1 - kstar))


def paraboloid_kstar(d: int, q: int) -> tuple[int, int, Fraction]:
    """(case, k*, closed-form r_2) for the paraboloid, by parity of d and the class of -1."""
    if d < 2:
        raise BadRange("need d >= 2")
    if d % 2 == 0:
        return 1, (d - 2) // 2, Fraction(2 * d + 4, d)
    if d % 4 == 3 and q % 4 == 3:
        return 2, (d - 3) // 2, Fraction(2 * d + 6, d + 1)
    if d % 4 == 1:
        if d < 5:
            raise BadRange("d = 4k + 1 needs k >= 1")
        return 3, (d - 1) // 2, Fraction(2 * d + 2, d - 1)
    return 4, (d - 1) // 2, Fraction(2 * d + 2, d - 1)


def necessary_region(d: int, k: int, p, r) -> bool:
    """Whether (p, r) satisfies r >= 2d/(d-1) and r >= p(d-k)/((p-1)(d-1-k)).

    Evaluated in the reciprocal coordinates (1/p, 1/r), which handles the
    endpoints p = 1 and p, r = inf without division by zero.
    """
    if not 0 <= k <= d - 2:
        raise BadRange(f"need 0 <= k <= d - 2, got k={k}")
    x, y = ExponentPair(p, r).inverse
    return y <= Fraction(d - 1, 2 * d) and y <= (1 - x) * Fraction(d - 1 - k, d - k)


def necessary_corners(d: int, k: int) -> tuple[tuple[Fraction, Fraction], ...]:
    """Vertices (1/p, 1/r) of the necessary region, counter-clockwise from the origin."""
    if not 0 <= k <= d - 2:
        raise BadRange(f"need 0 <= k <= d - 2, got k={k}")
    top = Fraction(d - 1, 2 * d)
    knee = Fraction(d * d - d * k - d - k, 2 * d * (d - 1 - k))
    return (Fraction(0), Fraction(0)), (Fraction(0), top), (knee, top), (Fraction(1), Fraction(0))


def on_boundary(d: int, k: int, x: Fraction, y: Fraction) -> bool:
    """(x, y) = (1/p, 1/r) lies in the region and on one of its two binding constraints or an axis."""
    inside = y <= Fraction(d - 1, 2 * d) and y <= (1 - x) * Fraction(d - 1 - k, d - k)
    edges = (y == Fraction(d - 1, 2 * d), y == (1 - x) * Fraction(d - 1 - k, d - k), x == 0, y == 0)
    return inside and any(edges)


# -- norms --------------------------------------------------------------------------


def _slices(v: Variety, values: np.ndarray) -> Iterator[np.ndarray]:
    """|(f dsigma)^v| on each hyperplane m_1 = c, as flat arrays of length q^(d-1).

    Working one slice at a time keeps memory at q^(d-1) even when q^d is large.
    """
    f, d = v.field, v.d
    pts = v.points().coords
    rest = encode(f, pts[:, 1:]) if d > 1 else np.zeros(len(pts), dtype=np.int64)
    size = f.q ** (d - 1)
    nz = values != 0
    pts, rest, vals = pts[nz], rest[nz], values[nz]
    scale = 1.0 / len(v.points())
    mat = f.char_matrix
    for c in range(f.q):
        w = vals * f.chi_table[f.mul_table[c, pts[:, 0]]]
        g = np.bincount(rest, weights=w.real, minlength=size) + 1j * np.bincount(
            rest, weights=w.imag, minlength=size)
        cube = g.reshape((f.q,) * (d - 1))
        for axis in range(d - 1):
            cube = np.moveaxis(np.tensordot(cube, mat, axes=([axis], [0])), -1, axis)
        yield np.abs(cube.reshape(-1)) * scale


def extension_norms(v: Variety, values, rs) -> dict:
    """||(f dsigma)^v||_{L^r(dc)} for each r in ``rs`` (one pass over the transform)."""
    values = np.asarray(values, dtype=np.complex128)
    rs = [_exponent(r) for r in rs]
    parts = {r: [] for r in rs}
    for absval in _slices(v, values):
        top = float(absval.max(initial=0.0))
        for r in rs:
            if r == math.inf or top == 0:
                parts[r].append((top, 0.0))
            else:
                parts[r].append((top, float(np.sum((absval / top) ** float(r)))))
    out = {}
    for r in rs:
        top = max((t for t, _ in parts[r]), default=0.0)
        if r == math.inf or top == 0:
            out[r] = top
        else:
            total = sum(s * (t / top) ** float(r) for t, s in parts[r] if t > 0)
            out[r] = top * total ** (1.0 / float(r))
    return out


def extension_norm(v: Variety, values, r) -> float:
    r = _exponent(r)
    return extension_norms(v, values, [r])[r]


def function_norm(v: Variety, values, p) -> float:
    """||f||_{L^p(V, dsigma)} for f given by its values on v.points()."""
    absval = np.abs(np.asarray(values, dtype=np.complex128))
    return power_norm(absval, float(_exponent(p)), 1.0 / len(absval))


def extension_ratio(v: Variety, values, pair: ExponentPair) -> float:
    den = function_norm(v, values, pair.p)
    return extension_norm(v, values, pair.r) / den if den else 0.0


def indicator_values(v: Variety, A: PointSet) -> np.ndarray:
    codes = v.points().codes
    return np.isin(codes, A.codes).astype(np.complex128)


def l4_via_energy(v: Variety, A: PointSet) -> float:
    """||(1_A dsigma)^v||_{L^4(dc)} from q^d E(A) / |V|^4."""
    f = v.field
    return (f.q**v.d * additive_energy(A) / len(v.points()) ** 4) ** 0.25


def indicator_ratio(v: Variety, A: PointSet, pair: ExponentPair, via_energy: bool | None = None) -> float:
    """Extension ratio of 1_A; at r = 4 the numerator comes from the energy when affordable."""
    if len(A) == 0:
        return 0.0
    if via_energy is None:
        via_energy = pair.r == 4 and len(A) <= ENERGY_ROUTE_LIMIT
    den = (len(A) / len(v.points())) ** float(_reciprocal(pair.p))
    if via_energy:
        if pair.r != 4:
            raise BadExponent("the energy route needs r = 4")
        return l4_via_energy(v, A) / den
    return extension_norm(v, indicator_values(v, A), pair.r) / den


def single_point_ratio(v: Variety, pair: ExponentPair) -> float:
    """Closed form q^(d/r) |V|^(1/p - 1) for any f supported on one point."""
    n = len(v.points())
    x, y = pair.inverse
    return float(v.field.q) ** (v.d * float(y)) * float(n) ** (float(x) - 1)


# -- families and sweeps -------------------------------------------------------------


@dataclass(frozen=True)
class Member:
    ident: int
    label: str
    values: np.ndarray | None = None  # general complex test function on v.points()
    support: PointSet | None = None  # indicator test function


def subspace_sets(v: Variety, rng: np.random.Generator | None = None, count: int = 4) -> list[PointSet]:
    """Affine subspaces inside ``v``: the constructed one, its nested sub-spans and images."""
    f, d = v.field, v.d
    if v.kind == "paraboloid":
        H = paraboloid_subspace(f, d)
    elif v.j == 0:
        return []
    else:
        H = subspace_on_sphere(f, d, v.j)
    base = np.asarray(H.base, dtype=np.int64)
    basis = np.asarray(H.basis, dtype=np.int64).reshape(len(H.basis), d)
    out = []
    for i in range(len(basis) + 1):
        out.append(PointSet.from_coords(f, span_points(f, basis[:i], base)))
    full = out[-1]
    out.append(PointSet.from_coords(f, f.neg_table[full.coords]))
    if v.kind == "paraboloid" and rng is not None:
        # (x, s) -> (x + a, s + 2 a.x + ||a||) maps P onto itself and affine sets to affine sets
        for _ in range(count):
            a = rng.integers(0, f.q, size=d - 1)
            X = full.coords
            head = f.add_table[X[:, :-1], a[None, :]]
            out.append(PointSet.from_coords(f, np.concatenate([head, norm(f, head)[:, None]], axis=1)))
    if v.kind == "paraboloid" and d % 4 == 3:
        out.append(paraboloid_isotropic_set(f, d))
    return [A for A in out if v.contains(A.coords).all()]


def family_members(v: Variety, family: str, rng: np.random.Generator, count: int = 16,
                   max_size: int = 2000) -> list[Member]:
    """Deterministic (given ``rng``) list of test functions of one family."""
    n = len(v.points())
    codes = v.points().codes
    f, d = v.field, v.d
    if family == "full-variety":
        return [Member(0, "full", support=v.points())]
    if family == "single-points":
        picks = np.unique(np.concatenate([codes[:1], rng.choice(codes, size=min(count, n) - 1,
                                                                  replace=False)]))
        return [Member(i, f"point:{c}", support=PointSet(f, d, [c])) for i, c in enumerate(picks)]
    if family == "random-subsets":
        top = min(n, max_size)
        sizes = np.unique(np.geomspace(1, top, num=count).round().astype(int))
        out = []
        for i in range(count):
            size = int(sizes[i % len(sizes)])
            out.append(Member(i, f"random:{size}", support=PointSet(f, d, rng.choice(codes, size=size,
                                                                                      replace=False))))
        return out
    if family == "subspaces":
        return [Member(i, f"subspace:{len(A)}", support=A)
                for i, A in enumerate(subspace_sets(v, rng, count=max(1, count // 4)))]
    if family == "random-complex":
        return [Member(i, "complex", values=rng.standard_normal(n) + 1j * rng.standard_normal(n))
                for i in range(count)]
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def member_ratio(v: Variety, m: Member, pair: ExponentPair) -> float:
    if m.support is not None:
        return indicator_ratio(v, m.support, pair)
    return extension_ratio(v, m.values, pair)


@dataclass(frozen=True)
class RatioReport:
    variety: Variety
    pair: ExponentPair
    family: str
    ratio: float
    argmax: int
    label: str
    members: int

    def below(self, c_test: float) -> bool:
        return self.ratio <= c_test


def ratio_sweep(v: Variety, p, r, family: str, rng: np.random.Generator | None = None,
                count: int = 16, include_subspaces: bool = True) -> RatioReport:
    """Max extension ratio over a family; ties go to the lowest member id.

    Unless disabled, the affine-subspace members are swept as well, since they
    are the natural near-extremizers.
    """
    pair = ExponentPair(p, r)
    rng = np.random.default_rng(0) if rng is None else rng
    members = family_members(v, family, rng, count)
    if include_subspaces and family != "subspaces":
        extra = family_members(v, "subspaces", rng, count)
        members += [Member(len(members) + m.ident, m.label, m.values, m.support) for m in extra]
    best, arg, label = -1.0, -1, ""
    for m in members:
        ratio = member_ratio(v, m, pair)
        if ratio > best:
            best, arg, label = ratio, m.ident, m.label
    return RatioReport(v, pair, family, best, arg, label, len(members))


def sweep_all(v: Variety, p, r, rng: np.random.Generator | None = None, count: int = 16) -> RatioReport:
    """Max over every family, reported under the family that attains it."""
    rng = np.random.default_rng(0) if rng is None else rng
    reports = [ratio_sweep(v, p, r, fam, rng, count, include_subspaces=False) for fam in FAMILIES]
    return max(reports, key=lambda rep: (rep.ratio, -FAMILIES.index(rep.family)))


def monotone_norms(v: Variety, values, rs, ps, rtol: float = 1e-12) -> bool:
    """Extension norms decrease in r and L^p(dsigma) norms increase in p, for this f."""
    rs = sorted((_exponent(r) for r in rs), key=float)
    ps = sorted((_exponent(p) for p in ps), key=float)
    ext = extension_norms(v, values, rs)
    e_ok = all(ext[b] <= ext[a] * (1 + rtol) for a, b in zip(rs, rs[1:]))
    fn = [function_norm(v, values, p) for p in ps]
    f_ok = all(b >= a * (1 - rtol) for a, b in zip(fn, fn[1:]))
    return e_ok and f_ok


# -- restriction side ----------------------------------------------------------------


def dual_restriction_ratio(g: ComplexGrid, v: Variety, p_dual, r_dual) -> float:
    """||g~||_{L^p'(V, dsigma)} / ||g||_{L^r'(dc)}."""
    num = lr_norm(fourier_tilde(g), float(_exponent(p_dual)), SurfaceSigma(v))
    den = lr_norm(g, float(_exponent(r_dual)), CountingDC())
    return num / den if den else 0.0


def extension_grid(v: Variety, values) -> ComplexGrid:
    """(f dsigma)^v as a full grid (needs q^d within the enumeration budget)."""
    f = v.field
    grid = np.zeros(f.q**v.d, dtype=np.complex128)
    grid[v.points().codes] = values
    return extension_inverse(ComplexGrid(f, v.d, grid), v)


def hoelder_witness(v: Variety, values, r) -> ComplexGrid:
    """g = |F|^(r-2) F for F = (f dsigma)^v, so that <F, g> = ||F||_r ||g||_r'."""
    r = float(_exponent(r))
    F = extension_grid(v, values)
    if math.isinf(r):
        top = np.abs(F.values).max()
        g = np.where(np.abs(F.values) == top, F.values / np.where(top, top, 1), 0)
        return ComplexGrid(v.field, v.d, g)
    return ComplexGrid(v.field, v.d, np.abs(F.values) ** (r - 2) * F.values)


def adjoint_pairing(v: Variety, values, g: ComplexGrid) -> tuple[complex, complex]:
    """(sum_m F(m) conj g(m), |V|^-1 sum_x f(x) conj g~(x)) -- equal by duality."""
    F = extension_grid(v, values)
    lhs = complex(np.vdot(g.values, F.values))
    gt = fourier_tilde(g).values[v.points().codes]
    rhs = complex(np.vdot(gt, np.asarray(values, dtype=np.complex128))) / len(v.points())
    return lhs, rhs
