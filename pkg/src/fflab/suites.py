"""Verification suites behind the command line: each returns a list of CheckRecords."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import distance as dist
from . import energy as en
from . import extension as ext
from . import fourier as fo
from . import scheme as sc
from .errors import (CaseMismatch, HypothesisViolation, ImpossibleCase, SizeLimitExceeded)
from .field import FiniteField, field_of_order, gauss_closed_form, gauss_sum, odd_prime_powers
from .geometry import PointSet, paraboloid, sphere, sphere_size, subspace_on_sphere

SKIPPABLE = (HypothesisViolation, CaseMismatch, ImpossibleCase, SizeLimitExceeded)


def decimal(x) -> str:
    """12 significant digits, so reports stay diff-stable across platforms."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = format(x, ".12g")
    return "0" if out == "-0" else out


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str  # pass | fail | skip
    lhs: str = ""
    rhs: str = ""
    tolerance: str = ""
    elapsed_ms: float = 0.0
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Outcome:
    """What a check body returns: the relation lhs <= rhs (or equality) and its verdict."""

    passed: bool | None  # None: reported, not asserted
    lhs: object = ""
    rhs: object = ""
    tolerance: object = ""
    detail: str = ""


def run_check(name: str, body: Callable[[], Outcome]) -> CheckRecord:
    start = time.perf_counter()
    try:
        out = body()
    except SKIPPABLE as exc:
        return CheckRecord(name, "skip", detail=str(exc),
                           elapsed_ms=round((time.perf_counter() - start) * 1e3, 3))
    ms = round((time.perf_counter() - start) * 1e3, 3)
    lhs = out.lhs if isinstance(out.lhs, str) else decimal(out.lhs)
    rhs = out.rhs if isinstance(out.rhs, str) else decimal(out.rhs)
    tol = out.tolerance if isinstance(out.tolerance, str) else decimal(out.tolerance)
    status = "skip" if out.passed is None else "pass" if out.passed else "fail"
    return CheckRecord(name, status, lhs, rhs, tol, ms, out.detail)


@dataclass(frozen=True)
class Params:
    q: int | None = None
    d: int | None = None
    m: int | None = None
    j: int | None = None
    kind: str | None = None
    rsize: int | None = None
    trials: int = 100
    ctest: float = en.DEFAULT_C_TEST
    qmax: int = 121


def _need(value, flag: str):
    if value is None:
        raise ValueError(f"{flag} is required for this command")
    return value


def _field(params: Params) -> FiniteField:
    return field_of_order(_need(params.q, "--q"))


def _random_subset(points: PointSet, rng: np.random.Generator, cap: int | None = None) -> PointSet:
    top = len(points) if cap is None else min(cap, len(points))
    return points.sample(rng, int(rng.integers(1, top + 1)))


# -- gauss ------------------------------------------------------------------------


def gauss_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    out = []
    for q in odd_prime_powers(params.qmax):
        def body(q=q):
            f = field_of_order(q)
            err = abs(gauss_sum(f) - gauss_closed_form(f)) / math.sqrt(q)
            return Outcome(err <= 1e-9, err, 0, 1e-9)
        out.append(run_check(f"gauss-closed-form[q={q}]", body))
    return out


# -- fourier ------------------------------------------------------------------------


def _max_err(a: fo.ComplexGrid, b: fo.ComplexGrid) -> float:
    return float(np.max(np.abs(a.values - b.values)))


def fourier_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    f, d = _field(params), _need(params.d, "--d")
    out = []

    def para():
        brute = fo.fourier_hat(fo.ComplexGrid.indicator(paraboloid(f, d).points()))
        err = _max_err(brute, fo.paraboloid_hat_grid(f, d))
        return Outcome(err <= 1e-9, err, 0, 1e-9)

    out.append(run_check("paraboloid-transform", para))
    radii = [params.j] if params.j is not None else list(range(f.q))
    for j in radii:
        def sph(j=j):
            brute = fo.fourier_hat(fo.ComplexGrid.indicator(sphere(f, d, j).points()))
            err = _max_err(brute, fo.sphere_hat_grid(f, d, j))
            return Outcome(err <= 1e-9, err, 0, 1e-9)
        out.append(run_check(f"sphere-transform[j={j}]", sph))

    def zero():
        closed = fo.zero_sphere_hat_grid(f, d)
        brute = fo.fourier_hat(fo.ComplexGrid.indicator(sphere(f, d, 0).points()))
        err = _max_err(brute, closed)
        return Outcome(err <= 1e-9, err, 0, 1e-9)

    out.append(run_check("zero-sphere-transform", zero))
    out.append(sphere_size_check(f, d, 0))

    def restriction_identity():
        full = PointSet.full(f, d)
        worst = 0.0
        for _ in range(params.trials):
            A = _random_subset(full, rng)
            t = int(rng.integers(1, f.q))
            lhs, rhs = fo.restriction_distance_identity(A, t)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        return Outcome(worst <= 1e-9, worst, 0, 1e-9, f"{params.trials} random sets")

    out.append(run_check("restriction-distance-identity", restriction_identity))
    return out


# -- energy -------------------------------------------------------------------------


def _ratio_check(reports: list[en.EnergyReport], ctest: float) -> Outcome:
    worst = max(r.ratio for r in reports)
    return Outcome(worst <= ctest, worst, ctest, 0, f"max ratio over {len(reports)} sets")


def energy_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    f, d = _field(params), _need(params.d, "--d")
    out = []
    cap = 400

    def para_energy():
        if d % 4 != 3 or f.q % 4 != 3:
            raise HypothesisViolation("needs d = 3 mod 4 and q = 3 mod 4")
        v = paraboloid(f, d)
        sets = [v.sample(rng, int(rng.integers(1, cap + 1))) for _ in range(params.trials)]
        sets.append(en.paraboloid_isotropic_set(f, d))
        return _ratio_check([en.paraboloid_energy_check(A, params.ctest) for A in sets], params.ctest)

    out.append(run_check("paraboloid-energy", para_energy))

    def sharp_energy():
        if d < 3 or (d - 3) % 4:
            raise HypothesisViolation("the isotropic-span set needs d = 3 mod 4")
        A = en.paraboloid_isotropic_set(f, d)
        e = en.additive_energy(A)
        return Outcome(e == len(A) ** 3, e, len(A) ** 3, 0)

    out.append(run_check("paraboloid-sharp-energy", sharp_energy))

    def sphere_sets():
        en.check_sphere_hypotheses(f, d)
        v = en.primitive_sphere(f, d)
        sets = [v.sample(rng, int(rng.integers(1, cap + 1))) for _ in range(params.trials)]
        sets.append(subspace_on_sphere(f, d, f.primitive).points())
        return sets

    out.append(run_check("sphere-energy", lambda: _ratio_check(
        [en.sphere_energy_check(A, params.ctest) for A in sphere_sets()], params.ctest)))
    out.append(run_check("sphere-zero-pairs", lambda: _ratio_check(
        [en.sphere_zero_pairs_check(A, params.ctest) for A in sphere_sets()], params.ctest)))

    def zero_pairs():
        if d % 4 != 2 or f.q % 4 != 3:
            raise HypothesisViolation("needs d = 4k + 2 and q = 3 mod 4")
        reps = []
        for _ in range(params.trials):
            size = int(rng.integers(1, min(f.q**d, 2000) + 1))
            A = PointSet(f, d, rng.choice(f.q**d, size=size, replace=False))
            reps.append(en.zero_pairs_check(A))
        return _ratio_check(reps, 1.0)

    out.append(run_check("zero-pairs-constant-one", zero_pairs))

    def l4():
        worst = 0.0
        for v in (paraboloid(f, d), en.primitive_sphere(f, d)):
            pts = v.points()
            for _ in range(max(1, params.trials // 2)):
                A = _random_subset(pts, rng, cap)
                lhs, rhs = en.l4_energy_identity(A, v)
                worst = max(worst, abs(lhs - rhs) / rhs)
        return Outcome(worst <= 1e-9, worst, 0, 1e-9)

    out.append(run_check("l4-energy-identity", l4))

    def split():
        worst = 0
        v = paraboloid(f, d)
        for _ in range(min(params.trials, 20)):
            A = v.sample(rng, int(rng.integers(1, 60)))
            e1, e2 = en.right_angle_split(A)
            worst = max(worst, abs(e1 + e2 - en.additive_energy(A)))
        return Outcome(worst == 0, worst, 0, 0)

    out.append(run_check("right-angle-split", split))

    def incidences():
        reps = []
        for _ in range(params.trials):
            U = PointSet(f, d, rng.choice(f.q**d, size=int(rng.integers(0, min(f.q**d, 400) + 1)),
                                          replace=False))
            k = int(rng.integers(1, 60))
            normals = rng.integers(0, f.q, size=(k, d))
            normals[~normals.any(axis=1), 0] = 1
            planes = [(b, int(c)) for b, c in zip(normals, rng.integers(0, f.q, size=k))]
            reps.append(en.point_hyperplane_incidences(U, planes))
        worst = max(r.deviation / r.bound if r.bound else 0.0 for r in reps)
        return Outcome(all(r.passed for r in reps), worst, 1, 0, "deviation / bound")

    out.append(run_check("incidence-mixing", incidences))
    return out


# -- scheme -------------------------------------------------------------------------


def scheme_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    f, m = _field(params), _need(params.m, "--m")
    q = f.q
    gph = sc.build_scheme(f, m)
    out = [run_check("scheme-size", lambda: Outcome(gph.n == sc.expected_size(q, m), gph.n,
                                                     sc.expected_size(q, m), 0))]

    def axioms():
        if gph.n > 400:
            raise SizeLimitExceeded("exhaustive axiom check limited to 400 vertices")
        verdicts = sc.check_axioms(gph)
        bad = [k for k, ok in verdicts.items() if not ok]
        return Outcome(not bad, len(bad), 0, 0, ",".join(bad) or "all five hold")

    out.append(run_check("scheme-axioms", axioms))
    out.append(run_check("r1-degree", lambda: Outcome(
        sc.r1_degree(gph) == sc.expected_degree(q, m), sc.r1_degree(gph), sc.expected_degree(q, m), 0)))

    def spectrum():
        rep = sc.r1_spectrum(gph)
        got = {int(round(x)) for x in rep.eigenvalues}
        want = sc.expected_eigenvalues(q, m)
        shown = " ".join(decimal(x) for x in rep.eigenvalues)
        return Outcome(rep.snapped and got == want, shown,
                       " ".join(str(x) for x in sorted(want, reverse=True)), 1e-6,
                       "multiplicities " + " ".join(str(c) for c in rep.multiplicities))

    out.append(run_check("r1-spectrum", spectrum))

    def edges():
        worst = -math.inf
        fails = 0
        for _ in range(params.trials):
            W = rng.choice(gph.n, size=int(rng.integers(1, gph.n + 1)), replace=False)
            rep = sc.edge_bound_check(gph, W)
            fails += not rep.passed
            worst = max(worst, rep.edges - rep.bound)
        return Outcome(fails == 0, worst, 0, 1e-9, "max of e(W,W) - bound")

    out.append(run_check("edge-bound", edges))
    return out


# -- distance -----------------------------------------------------------------------


def distance_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    f, d = _field(params), _need(params.d, "--d")
    q = f.q
    full = PointSet.full(f, d)
    out = []

    def random_b():
        return PointSet(f, d, rng.choice(q**d, size=int(rng.integers(1, q**d + 1)), replace=False))

    def cs():
        worst = math.inf
        for _ in range(params.trials):
            prof = dist.distance_profile(_random_subset(full, rng, 200), random_b())
            worst = min(worst, len(prof.delta) - float(prof.cs_lower_bound))
        return Outcome(worst >= 0, worst, 0, 0, "min of |Delta| - |A|^2|B|^2 / sum mu^2")

    out.append(run_check("cauchy-schwarz-count", cs))

    def mu():
        reps = [dist.mu_square_bounds(A, random_b(), A)
                for A in (_random_subset(full, rng, 100) for _ in range(min(params.trials, 50)))]
        return Outcome(all(r.passed for r in reps), len([r for r in reps if not r.passed]), 0, 0)

    out.append(run_check("mu-square-bounds", mu))

    if params.j is not None:
        def sphere_form():
            S = sphere(f, d, params.j).points()
            reps = [dist.sphere_mu_square_bound(_random_subset(S, rng, 100), random_b(), params.j)
                    for _ in range(min(params.trials, 50))]
            worst = max(r.exact - r.rhs for r in reps)
            return Outcome(all(r.passed for r in reps), worst, 0, 0, "max of exact - bound")
        out.append(run_check("sphere-mu-square-form", sphere_form))

    def theorem_runs(name: str, variety_pts: PointSet, judge):
        def body():
            kernel = dist.DistanceKernel(f, d, variety_pts.codes)
            As = [_random_subset(variety_pts, rng) for _ in range(params.trials)]
            Bs = [random_b() for _ in range(params.trials)]
            mu_ = kernel.paired(kernel.indicator_rows(As), kernel.indicator_cols(Bs, q**d))
            worst, fails = math.inf, 0
            for A, B, row in zip(As, Bs, mu_):
                v = judge(len(A), len(B), int(np.count_nonzero(row)))
                fails += not v.passed
                worst = min(worst, v.lhs - v.rhs)
            return Outcome(fails == 0, worst, 0, 1e-9, f"min of |Delta| - threshold over {len(As)} pairs")
        out.append(run_check(name, body))

    try:
        tid = dist.paraboloid_theorem_id(f, d)
        theorem_runs("distance-paraboloid", paraboloid(f, d).points(),
                     lambda a, b, n: dist.verdict(tid, q, d, a, b, n))
    except HypothesisViolation as exc:
        out.append(CheckRecord("distance-paraboloid", "skip", detail=str(exc)))
    if params.j:
        try:
            tid_s = dist.sphere_theorem_id(f, d, params.j)
            theorem_runs("distance-sphere", sphere(f, d, params.j).points(),
                         lambda a, b, n: dist.verdict(tid_s, q, d, a, b, n, j=params.j))
        except HypothesisViolation as exc:
            out.append(CheckRecord("distance-sphere", "skip", detail=str(exc)))
    try:
        dist.zero_sphere_theorem_id(f, d)
        theorem_runs("distance-zero-sphere", sphere(f, d, 0).points(),
                     lambda a, b, n: dist.verdict("zero-sphere", q, d, a, b, n, j=0))
    except HypothesisViolation as exc:
        out.append(CheckRecord("distance-zero-sphere", "skip", detail=str(exc)))

    def mattila():
        rep = dist.mattila(_random_subset(full, rng))
        return Outcome(None, rep.delta_size, rep.bound, "",
                       f"M_A = {decimal(rep.value)}; implicit constant, reported only")

    out.append(run_check("mattila-report", mattila))
    return out


# -- extension ----------------------------------------------------------------------


def extension_suite(params: Params, rng: np.random.Generator) -> list[CheckRecord]:
    out = []

    def r2():
        bad = 0
        for d in range(2, 22):
            for q in (3, 5):
                try:
                    _, k, closed = ext.paraboloid_kstar(d, q)
                except Exception:
                    continue
                bad += ext.critical_r2(d, k) != closed
        return Outcome(bad == 0, bad, 0, 0, "d = 2..21, both classes of -1")

    out.append(run_check("critical-exponent", r2))

    def corners():
        bad = sum(not ext.on_boundary(d, k, x, y)
                  for d in range(2, 22) for k in range(d - 1) for x, y in ext.necessary_corners(d, k))
        return Outcome(bad == 0, bad, 0, 0)

    out.append(run_check("necessary-corners", corners))
    if params.q is None or params.d is None:
        return out
    f, d = _field(params), params.d
    kind = params.kind or "paraboloid"
    if kind == "paraboloid":
        v = paraboloid(f, d)
    else:
        v = sphere(f, d, params.j if params.j is not None else 1)
    count = max(2, min(params.trials, 32))

    def stein_tomas():
        if v.kind == "sphere" and not v.j:
            raise HypothesisViolation("the probe needs a nonzero radius")
        rep = ext.sweep_all(v, *ext.stein_tomas_pair(d).floats(), rng=rng, count=count)
        return Outcome(rep.below(params.ctest), rep.ratio, params.ctest, 0,
                       f"{rep.family} member {rep.argmax} ({rep.label})")

    out.append(run_check("stein-tomas-probe", stein_tomas))

    def mono():
        members = ext.family_members(v, "random-complex", rng, min(count, 8))
        ok = all(ext.monotone_norms(v, mm.values, [1, 2, 3, 4, math.inf], [1, 2, 4, math.inf])
                 for mm in members)
        return Outcome(ok, int(ok), 1, 1e-12)

    out.append(run_check("norm-monotonicity", mono))

    def two_ways():
        worst = 0.0
        pair = ext.ExponentPair(2, 4)
        for mm in ext.family_members(v, "random-subsets", rng, min(count, 8), max_size=300):
            a = ext.indicator_ratio(v, mm.support, pair, via_energy=True)
            b = ext.indicator_ratio(v, mm.support, pair, via_energy=False)
            worst = max(worst, abs(a - b) / a)
        return Outcome(worst <= 1e-9, worst, 0, 1e-9)

    out.append(run_check("l4-two-ways", two_ways))
    return out


SUITES = {
    "gauss": gauss_suite,
    "fourier": fourier_suite,
    "energy": energy_suite,
    "scheme": scheme_suite,
    "distance": distance_suite,
    "extension": extension_suite,
}


def sharp_checks(c: dist.SharpConstruction) -> list[CheckRecord]:
    prof = dist.distance_profile(c.A, c.B)
    got = sorted(prof.delta)
    return [
        run_check("sharp-delta-equals-radii", lambda: Outcome(
            prof.delta == frozenset(c.radii), " ".join(map(str, got)),
            " ".join(map(str, sorted(c.radii))), 0)),
        run_check("sharp-size-a", lambda: Outcome(len(c.A) == c.expected_a, len(c.A), c.expected_a, 0)),
        run_check("sharp-size-b", lambda: Outcome(len(c.B) == c.expected_b, len(c.B), c.expected_b, 0)),
    ]


def sphere_size_check(f: FiniteField, d: int, j: int) -> CheckRecord:
    return run_check("sphere-size", lambda: Outcome(
        len(sphere(f, d, j).points()) == sphere_size(f, d, j), len(sphere(f, d, j).points()),
        sphere_size(f, d, j), 0))
