"""Additive energy, zero-distance pairs and point-hyperplane incidences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DegeneratePlane, HypothesisViolation, SizeLimitExceeded, SupportViolation
from .field import FiniteField
from .fourier import ComplexGrid, CountingDC, extension_inverse, lr_norm
from .geometry import (ENUM_LIMIT, PointSet, Variety, all_points, encode, mutually_orthogonal, norm,
                       paraboloid, sphere)
from .linalg import dot, span_points

ENERGY_LIMIT = 100_000
DEFAULT_C_TEST = 8.0


# -- counting kernels -------------------------------------------------------------


def _pair_codes(f: FiniteField, X: np.ndarray, Y: np.ndarray, subtract: bool = False) -> np.ndarray:
    """Codes of x + y (or x - y) for all pairs, shape (|X|, |Y|)."""
    rhs = f.neg_table[Y] if subtract else Y
    combined = f.add_table[X[:, None, :], rhs[None, :, :]]
    return encode(f, combined)


def sum_representation(A: PointSet) -> np.ndarray:
    """Counts r(x) = #{(a, b) in A^2 : a + b = x} over the distinct sums x."""
    if len(A) > ENERGY_LIMIT:
        raise SizeLimitExceeded(f"|A| = {len(A)} exceeds {ENERGY_LIMIT}")
    if len(A) == 0:
        return np.zeros(0, dtype=np.int64)
    X = A.coords
    f = A.field
    size = f.q**A.d
    step = max(1, 2_000_000 // max(1, len(X)))
    chunks = (_pair_codes(f, X[start:start + step], X).reshape(-1)
              for start in range(0, len(X), step))
    if size <= 4_000_000:
        counts = np.zeros(size, dtype=np.int64)
        for codes in chunks:
            counts += np.bincount(codes, minlength=size)
        return counts[counts > 0]
    keys, counts = np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    for codes in chunks:
        k, c = np.unique(codes, return_counts=True)
        keys, inverse = np.unique(np.concatenate([keys, k]), return_inverse=True)
        counts = np.bincount(inverse, weights=np.concatenate([counts, c]),
                             minlength=len(keys)).astype(np.int64)
    return counts


def additive_energy(A: PointSet) -> int:
    """E(A) = #{(a, b, c, d) in A^4 : a + b = c + d}, exactly."""
    r = sum_representation(A).astype(np.int64)
    return int(np.sum(r * r))


def difference_norms(A: PointSet, B: PointSet | None = None) -> np.ndarray:
    """Matrix of ||a - b|| for a in A, b in B."""
    B = A if B is None else B
    f = A.field
    diff = f.add_table[A.coords[:, None, :], f.neg_table[B.coords][None, :, :]]
    return norm(f, diff)


@lru_cache(maxsize=8)
def _isotropic_mask(f: FiniteField, d: int) -> np.ndarray:
    return norm(f, all_points(f, d)) == 0


def _autocorrelation(A: PointSet) -> np.ndarray:
    """#{(a, b) in A^2 : a - b = x} for every x, by FFT.

    Base-q codes read in base p give the coordinates of (Z_p)^(l d), the additive
    group of F_q^d, so a p-ary FFT of the indicator computes the exact correlation.
    """
    f = A.field
    cube = A.indicator().astype(float).reshape((f.p,) * (f.ell * A.d))
    freq = np.fft.fftn(cube)
    return np.rint(np.fft.ifftn(np.abs(freq) ** 2).real).astype(np.int64).reshape(-1)


def zero_distance_pairs(A: PointSet) -> int:
    """N(A) = #{(a, b) in A^2 : ||a - b|| = 0}, diagonal included."""
    if len(A) == 0:
        return 0
    f, d = A.field, A.d
    # the FFT costs about q^d log q^d against |A|^2 d for the direct pair table
    if len(A) ** 2 * d > 4 * f.q**d and f.q**d <= ENUM_LIMIT:
        return int(_autocorrelation(A)[_isotropic_mask(f, d)].sum())
    return int(np.count_nonzero(difference_norms(A) == 0))


def l4_energy_identity(A: PointSet, v: Variety) -> tuple[float, float]:
    """(||(A dsigma)^v||_{L^4(dc)}^4, q^d E(A) / |V|^4) for A on the variety ``v``."""
    f, d = A.field, A.d
    if not A.issubset(v.points()):
        raise SupportViolation("A must lie on the variety")
    ext = extension_inverse(ComplexGrid.indicator(A), v)
    lhs = lr_norm(ext, 4, CountingDC()) ** 4
    rhs = f.q**d * additive_energy(A) / len(v.points()) ** 4
    return lhs, float(rhs)


def right_angle_split(A: PointSet) -> tuple[int, int]:
    """(E1, E2): quadruples a + b = c + d split by whether ||a_ - b_|| = 0 or ||d_ - b_|| = 0.

    ``a_`` is the point with its last coordinate dropped (the paraboloid's base point).
    E1 holds the quadruples where either norm vanishes; both counts are made
    independently by walking all triples (a, b, d) and testing c = a + b - d in A.
    """
    f = A.field
    X = A.coords
    n = len(X)
    if n > 400:
        raise SizeLimitExceeded("triple enumeration is limited to |A| <= 400")
    member = A.indicator()
    base = X[:, :-1]
    bn = norm(f, f.add_table[base[:, None, :], f.neg_table[base][None, :, :]])
    zero_ab = bn == 0
    e1 = e2 = 0
    sums = f.add_table[X[:, None, :], X[None, :, :]]  # a + b
    for k in range(n):
        c = f.add_table[sums, f.neg_table[X[k]][None, None, :]]
        hit = member[encode(f, c)]
        zero_db = (bn[k][None, :] == 0)  # ||d_ - b_|| with d = X[k], b along axis 1
        first = hit & (zero_ab | zero_db)
        e1 += int(np.count_nonzero(first))
        e2 += int(np.count_nonzero(hit & ~(zero_ab | zero_db)))
    return e1, e2


# -- theorem checks -----------------------------------------------------------------


@dataclass(frozen=True)
class EnergyReport:
    size: int
    energy: int
    cubic_term: Fraction
    square_term: float
    ratio: float
    c_test: float

    @property
    def bound(self) -> float:
        return float(self.cubic_term) + self.square_term

    @property
    def passed(self) -> bool:
        return self.ratio <= self.c_test


def _report(size: int, value: int, q: int, d: int, exp_num: int, power: int, c_test: float):
    """Build the report for value <= C (size^(power+1)/q + q^(exp_num/2) size^power)."""
    cubic = Fraction(size ** (power + 1), q)
    square = q ** (exp_num / 2) * size**power
    ratio = value / (float(cubic) + square) if size else 0.0
    return EnergyReport(size, value, cubic, square, ratio, c_test)


def paraboloid_energy_check(A: PointSet, c_test: float = DEFAULT_C_TEST) -> EnergyReport:
    f, d = A.field, A.d
    if d % 4 != 3 or f.q % 4 != 3:
        raise HypothesisViolation("needs d = 3 mod 4 and q = 3 mod 4")
    if not A.issubset(paraboloid(f, d).points()):
        raise SupportViolation("A must lie on the paraboloid")
    return _report(len(A), additive_energy(A), f.q, d, d - 2, 2, c_test)


def paraboloid_isotropic_set(f: FiniteField, d: int) -> PointSet:
    """V x {0}^3 on P, with V a totally isotropic subspace of F_q^(d-3) of size q^((d-3)/2).

    Closed under a + b - c, so E(A) = |A|^3.
    """
    if d < 3:
        raise ValueError("need d >= 3")
    basis = mutually_orthogonal(f, d - 3) if d > 3 else []
    head = span_points(f, np.asarray(basis, dtype=np.int64).reshape(len(basis), d - 3))
    pts = np.concatenate([head, np.zeros((len(head), 3), dtype=np.int64)], axis=1)
    return PointSet.from_coords(f, pts)


def check_sphere_hypotheses(f: FiniteField, d: int) -> None:
    if not (d % 4 == 1 and d >= 5) and not (d % 4 == 3 and f.q % 4 == 1):
        raise HypothesisViolation("needs d = 4k + 1, or d = 4k - 1 with q = 1 mod 4")


def primitive_sphere(f: FiniteField, d: int) -> Variety:
    """The sphere S_g with g the field's primitive element."""
    return sphere(f, d, f.primitive)


def _on_primitive_sphere(A: PointSet) -> None:
    if not primitive_sphere(A.field, A.d).contains(A.coords).all():
        raise SupportViolation("A must lie on the sphere of primitive radius")


def sphere_energy_check(A: PointSet, c_test: float = DEFAULT_C_TEST) -> EnergyReport:
    f, d = A.field, A.d
    check_sphere_hypotheses(f, d)
    _on_primitive_sphere(A)
    return _report(len(A), additive_energy(A), f.q, d, d - 2, 2, c_test)


def sphere_zero_pairs_check(A: PointSet, c_test: float = DEFAULT_C_TEST) -> EnergyReport:
    """Zero-distance pairs on S_g against C (|A|^2/q + q^((d-3)/2) |A|)."""
    f, d = A.field, A.d
    check_sphere_hypotheses(f, d)
    _on_primitive_sphere(A)
    return _report(len(A), zero_distance_pairs(A), f.q, d, d - 3, 1, c_test)


def zero_pairs_bound(size: int, q: int, d: int) -> float:
    """|A|^2/q + q^((d-2)/2) |A|, the bound with constant exactly one."""
    return size * size / q + q ** ((d - 2) / 2) * size


def zero_pairs_check(A: PointSet) -> EnergyReport:
    """N(A) against |A|^2/q + q^((d-2)/2)|A| with constant one, for d = 4k + 2 and q = 3 mod 4."""
    f, d = A.field, A.d
    if d % 4 != 2 or f.q % 4 != 3:
        raise HypothesisViolation("needs d = 4k + 2 and q = 3 mod 4")
    return _report(len(A), zero_distance_pairs(A), f.q, d, d - 2, 1, 1.0)


# -- incidences ---------------------------------------------------------------------


@dataclass(frozen=True)
class IncidenceReport:
    points: int
    planes: int
    incidences: int
    main_term: Fraction
    deviation: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound * (1 + 1e-12)


def _normalize_planes(f: FiniteField, planes) -> tuple[np.ndarray, np.ndarray]:
    normals = np.asarray([b for b, _ in planes], dtype=np.int64).reshape(len(planes), -1)
    offsets = np.asarray([c for _, c in planes], dtype=np.int64)
    if len(normals) == 0:
        return normals, offsets
    if np.any(~normals.any(axis=1)):
        raise DegeneratePlane("hyperplane normal must be nonzero")
    lead = normals[np.arange(len(normals)), np.argmax(normals != 0, axis=1)]
    scale = f.inv_table[lead]
    normals = f.mul_table[scale[:, None], normals]
    offsets = f.mul_table[scale, offsets]
    keyed = np.concatenate([normals, offsets[:, None]], axis=1)
    keyed = np.unique(keyed, axis=0)
    return keyed[:, :-1], keyed[:, -1]


def point_hyperplane_incidences(U: PointSet, planes) -> IncidenceReport:
    """Count incidences between U and the distinct hyperplanes {x : x.b = c}."""
    f, d = U.field, U.d
    normals, offsets = _normalize_planes(f, list(planes))
    nu, nv = len(U), len(normals)
    if nu and nv:
        dots = dot(f, U.coords[:, None, :], normals[None, :, :])
        inc = int(np.count_nonzero(dots == offsets[None, :]))
    else:
        inc = 0
    main = Fraction(nu * nv, f.q)
    return IncidenceReport(nu, nv, inc, main, abs(inc - float(main)),
                           f.q ** ((d - 1) / 2) * math.sqrt(nu * nv))
