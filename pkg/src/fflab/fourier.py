"""Fourier analysis on F_q^d.

Conventions, with chi the canonical additive character:

* hat:   f^(m)  = q^-d  sum_x chi(-x.m) f(x)
* tilde: f~(x)  =       sum_m chi(-m.x) f(m)
* vee:   f^v(m) = q^-d  sum_x chi(x.m)  f(x)
* (f dsigma)^v(m) = |V|^-1 sum_{x in V} chi(m.x) f(x)

All transforms factor over coordinates, so they are computed as ``d`` passes of
a ``q x q`` character matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, HypothesisViolation, SupportViolation
from .field import FiniteField, gauss_sum
from .geometry import PointSet, Variety, all_points, check_budget, norm, paraboloid


@dataclass(frozen=True, eq=False)
class ComplexGrid:
    """A function F_q^d -> C stored as a flat array indexed by point code."""

    field: FiniteField
    d: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if vals.shape[0] != self.field.q**self.d:
            raise ValueError(f"grid needs {self.field.q**self.d} values, got {vals.shape[0]}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, f: FiniteField, d: int) -> "ComplexGrid":
        check_budget(f, d)
        return cls(f, d, np.zeros(f.q**d, dtype=np.complex128))

    @classmethod
    def indicator(cls, points: PointSet) -> "ComplexGrid":
        return cls(points.field, points.d, points.indicator().astype(np.complex128))

    @classmethod
    def random(cls, f: FiniteField, d: int, rng: np.random.Generator) -> "ComplexGrid":
        n = f.q**d
        return cls(f, d, rng.standard_normal(n) + 1j * rng.standard_normal(n))

    def __getitem__(self, point) -> complex:
        from .geometry import encode

        return complex(self.values[int(encode(self.field, np.asarray(point)))])

    def cube(self) -> np.ndarray:
        return self.values.reshape((self.field.q,) * self.d)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0)


# -- measures -----------------------------------------------------------------


@dataclass(frozen=True)
class CountingDC:
    """Counting measure on F_q^d."""


@dataclass(frozen=True)
class NormalizedDN:
    """Counting measure scaled by q^-d."""


@dataclass(frozen=True)
class SurfaceSigma:
    """Normalized surface measure: mass 1/|V| on each point of ``variety``."""

    variety: Variety


MeasureKind = CountingDC | NormalizedDN | SurfaceSigma


# -- transforms -----------------------------------------------------------------


def _separable(g: ComplexGrid, mat: np.ndarray, scale: float) -> ComplexGrid:
    out = g.cube()
    for axis in range(g.d):
        out = np.moveaxis(np.tensordot(out, mat, axes=([axis], [0])), -1, axis)
    return ComplexGrid(g.field, g.d, out.reshape(-1) * scale)


def fourier_hat(g: ComplexGrid) -> ComplexGrid:
    f = g.field
    return _separable(g, np.conj(f.char_matrix), float(f.q) ** -g.d)


def fourier_tilde(g: ComplexGrid) -> ComplexGrid:
    return _separable(g, np.conj(g.field.char_matrix), 1.0)


def fourier_vee(g: ComplexGrid) -> ComplexGrid:
    f = g.field
    return _separable(g, f.char_matrix, float(f.q) ** -g.d)


def fourier_inverse(g: ComplexGrid) -> ComplexGrid:
    """Recover f from f^ via f(x) = sum_m f^(m) chi(m.x)."""
    return _separable(g, g.field.char_matrix, 1.0)


def extension_inverse(g: ComplexGrid, v: Variety) -> ComplexGrid:
    """(g dsigma)^v on F_q^d for ``g`` supported on ``v``."""
    pts = v.points()
    mask = pts.indicator()
    if np.any(g.values[~mask] != 0):
        raise SupportViolation("function is not supported on the variety")
    f = g.field
    return _separable(g, f.char_matrix, 1.0 / len(pts))


def lr_norm(g: ComplexGrid, r: float, measure: MeasureKind = CountingDC()) -> float:
    """L^r norm of ``g`` for the given measure; ``r = math.inf`` gives the sup norm."""
    if not isinstance(r, (int, float)) or math.isnan(r) or r < 1:
        raise BadExponent(f"exponent must be >= 1 or inf, got {r!r}")
    absval = np.abs(g.values)
    if isinstance(measure, SurfaceSigma):
        absval = absval[measure.variety.points().codes]
        weight = 1.0 / len(absval)
    elif isinstance(measure, NormalizedDN):
        weight = float(g.field.q) ** -g.d
    elif isinstance(measure, CountingDC):
        weight = 1.0
    else:
        raise TypeError(f"unknown measure {measure!r}")
    return power_norm(absval, r, weight)


def power_norm(absval: np.ndarray, r: float, weight: float) -> float:
    """(weight * sum |v|^r)^(1/r), or max |v| when r is infinite."""
    top = float(np.max(absval, initial=0.0))
    if math.isinf(r):
        return top
    if top == 0:
        return 0.0
    # factor out the max so large r does not overflow
    return float(top * (weight * np.sum((absval / top) ** r)) ** (1.0 / r))


# -- closed forms -----------------------------------------------------------------


def paraboloid_hat_closed(f: FiniteField, d: int, m) -> complex:
    """Normalized transform of the paraboloid indicator at ``m``, in closed form.

    Completing the square coordinatewise gives the quadratic-character factor
    eta^(d-1)(-m_d); it differs from eta^(d-1)(m_d) exactly when d - 1 is odd and
    q = 3 mod 4.
    """
    m = [int(v) for v in m]
    q = f.q
    *head, md = m
    if md == 0:
        return complex(q**-1.0) if not any(head) else 0j
    arg = f.div(norm(f, head) if head else 0, f.mul(f.element(4), md))
    eta = int(f.eta_table[f.neg(md)]) ** (d - 1)
    return float(q) ** -d * complex(f.chi_table[arg]) * eta * gauss_sum(f) ** (d - 1)


def paraboloid_hat_grid(f: FiniteField, d: int) -> ComplexGrid:
    pts = all_points(f, d)
    head, md = pts[:, :-1], pts[:, -1]
    out = np.zeros(len(pts), dtype=np.complex128)
    nz = md != 0
    four_md = f.mul_table[f.element(4), md[nz]]
    args = f.mul_table[norm(f, head[nz]), f.inv_table[four_md]]
    eta = f.eta_table[f.neg_table[md[nz]]].astype(float) ** (d - 1)
    out[nz] = float(f.q) ** -d * f.chi_table[args] * eta * gauss_sum(f) ** (d - 1)
    out[0] = 1.0 / f.q
    return ComplexGrid(f, d, out)


def _sphere_kernel(f: FiniteField, d: int, j: int, norms: np.ndarray) -> np.ndarray:
    """sum_{r != 0} eta^d(r) chi(j r + n / (4 r)) for each value n in ``norms``."""
    r = np.arange(1, f.q)
    inv4r = f.inv_table[f.mul_table[f.element(4), r]]
    eta_d = f.eta_table[r].astype(float) ** d
    args = f.add_table[f.mul_table[j, r][None, :], f.mul_table[norms[:, None], inv4r[None, :]]]
    return (f.chi_table[args] * eta_d[None, :]).sum(axis=1)


def sphere_hat_closed(f: FiniteField, d: int, j: int, m) -> complex:
    """Normalized transform of the sphere ``||x|| = j`` at ``m`` via the Kloosterman-type sum."""
    return complex(_sphere_hat_values(f, d, j, np.asarray([m], dtype=np.int64))[0])


def _sphere_hat_values(f: FiniteField, d: int, j: int, pts: np.ndarray) -> np.ndarray:
    q = f.q
    eta_m1 = float(f.eta_table[f.neg(1)]) ** d
    coef = float(q) ** (-d - 1) * eta_m1 * gauss_sum(f) ** d
    out = coef * _sphere_kernel(f, d, j, np.atleast_1d(norm(f, pts)))
    out[~pts.any(axis=1)] += 1.0 / q
    return out


def sphere_hat_grid(f: FiniteField, d: int, j: int) -> ComplexGrid:
    return ComplexGrid(f, d, _sphere_hat_values(f, d, j, all_points(f, d)))


def _check_zero_sphere(f: FiniteField, d: int) -> None:
    if d % 4 != 2 or f.q % 4 != 3:
        raise HypothesisViolation("closed form needs d = 2 mod 4 and q = 3 mod 4")


def zero_sphere_hat_closed(f: FiniteField, d: int, alpha) -> complex:
    _check_zero_sphere(f, d)
    alpha = np.asarray(alpha, dtype=np.int64)
    n = norm(f, alpha)
    total = complex(np.sum(f.chi_table[f.mul_table[np.arange(1, f.q), n]]))
    delta = 1.0 / f.q if not alpha.any() else 0.0
    return delta - float(f.q) ** (-(d + 2) / 2) * total


def zero_sphere_hat_grid(f: FiniteField, d: int) -> ComplexGrid:
    _check_zero_sphere(f, d)
    pts = all_points(f, d)
    n = norm(f, pts)
    # sum_{r != 0} chi(r n) is q - 1 at n = 0 and -1 otherwise
    sums = np.where(n == 0, f.q - 1, -1).astype(np.complex128)
    out = -float(f.q) ** (-(d + 2) / 2) * sums
    out[0] += 1.0 / f.q
    return ComplexGrid(f, d, out)


def restriction_distance_identity(A: PointSet, t: int) -> tuple[float, float]:
    """Both sides of the sphere-energy / paraboloid-restriction identity at radius ``t``.

    lhs = sum_{m in S_t} |A^(m)|^2 computed on F_q^d; rhs = q^(-d-2) times the squared
    L^2(P, dsigma) norm of (A (x) chi_t)~ computed on F_q^(d+1).
    """
    f, d = A.field, A.d
    if t == 0:
        raise ValueError("t must be nonzero")
    from .geometry import sphere

    a_hat = fourier_hat(ComplexGrid.indicator(A))
    shell = sphere(f, d, t).points().codes
    lhs = float(np.sum(np.abs(a_hat.values[shell]) ** 2))

    check_budget(f, d + 1)
    chi_t = f.chi_table[f.mul_table[np.arange(f.q), t]]
    tensor = np.outer(A.indicator().astype(np.complex128), chi_t).reshape(-1)
    lifted = fourier_tilde(ComplexGrid(f, d + 1, tensor))
    l2 = lr_norm(lifted, 2, SurfaceSigma(paraboloid(f, d + 1)))
    rhs = float(f.q) ** (-d - 2) * l2**2
    return lhs, rhs
