"""Acceptance suite: one test per criterion, each with its tolerance and time limit.

A PASS/FAIL line per criterion is printed in the terminal summary (see conftest.py).
"""
import itertools
import json
import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from fflab import distance as dist
from fflab import energy as en
from fflab import extension as ext
from fflab import fourier as fo
from fflab import scheme as sc
from fflab.cli import main
from fflab.field import field_of_order, gauss_closed_form, gauss_sum, make_field, odd_prime_powers
from fflab.geometry import PointSet, all_points, paraboloid, sphere, sphere_size, subspace_on_sphere
from fflab.linalg import dot

pytestmark = pytest.mark.acceptance


@contextmanager
def time_limit(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f} s, limit {seconds} s"


def direct_hat(f, d, pts):
    """q^-d sum_{x in pts} chi(-x.m) at every m, one character per (m, x) pair."""
    grid = all_points(f, d)
    out = np.zeros(len(grid), dtype=np.complex128)
    step = max(1, 2_000_000 // max(1, len(pts)))
    for s in range(0, len(grid), step):
        phases = dot(f, grid[s:s + step, None, :], pts[None, :, :])
        out[s:s + step] = f.chi_table[f.neg_table[phases]].sum(axis=1)
    return out / f.q**d


def log_uniform(rng, top):
    return int(min(top, max(1, round(math.exp(rng.uniform(0, math.log(top)))))))


# 1 ------------------------------------------------------------------------------


def test_criterion_01_gauss_closed_form():
    with time_limit(1):
        qs = odd_prime_powers(121)
        assert qs[0] == 3 and qs[-1] == 121 and len(qs) == 35
        for q in qs:
            f = field_of_order(q)
            direct, closed = gauss_sum(f), gauss_closed_form(f)
            assert abs(direct - closed) / abs(closed) <= 1e-9, q


# 2 ------------------------------------------------------------------------------


def test_criterion_02_paraboloid_transform():
    with time_limit(10):
        for q, d in [(3, 2), (3, 3), (5, 2), (5, 3), (7, 2), (7, 3), (3, 4)]:
            f = make_field(q)
            brute = direct_hat(f, d, paraboloid(f, d).points().coords)
            closed = fo.paraboloid_hat_grid(f, d).values
            pointwise = np.array([fo.paraboloid_hat_closed(f, d, m) for m in all_points(f, d)])
            assert np.max(np.abs(brute - closed)) <= 1e-9, (q, d)
            assert np.max(np.abs(brute - pointwise)) <= 1e-9, (q, d)


# 3 ------------------------------------------------------------------------------


def test_criterion_03_zero_sphere_transform():
    with time_limit(60):
        f3 = make_field(3)
        zero = sphere(f3, 6, 0).points()
        assert len(zero) == 225 == sphere_size(f3, 6, 0)
        # the definition summed pair by pair, where that is affordable
        assert np.max(np.abs(direct_hat(f3, 6, zero.coords) - fo.zero_sphere_hat_grid(f3, 6).values)) <= 1e-9
        for q, d in [(3, 6), (7, 6), (3, 10)]:
            f = make_field(q)
            brute = fo.fourier_hat(fo.ComplexGrid.indicator(sphere(f, d, 0).points())).values
            closed = fo.zero_sphere_hat_grid(f, d).values
            assert np.max(np.abs(brute - closed)) <= 1e-9, (q, d)
        pts = all_points(f3, 6)[[0, 1, 100, 728]]
        for m, want in zip(pts, fo.zero_sphere_hat_grid(f3, 6).values[[0, 1, 100, 728]]):
            assert abs(fo.zero_sphere_hat_closed(f3, 6, m) - want) <= 1e-9


# 4 ------------------------------------------------------------------------------


def test_criterion_04_sphere_transform():
    with time_limit(60):
        for q in (3, 5, 7):
            f = make_field(q)
            for d in (2, 3, 4):
                for j in range(q):
                    brute = direct_hat(f, d, sphere(f, d, j).points().coords)
                    closed = fo.sphere_hat_grid(f, d, j).values
                    assert np.max(np.abs(brute - closed)) <= 1e-9, (q, d, j)


# 5 ------------------------------------------------------------------------------


def _l4_agrees(A, v):
    lhs, rhs = en.l4_energy_identity(A, v)
    return abs(lhs - rhs) <= 1e-9 * rhs


def test_criterion_05_l4_energy_identity():
    rng = np.random.default_rng(5)
    with time_limit(60):
        f3 = make_field(3)
        for v in (paraboloid(f3, 3), en.primitive_sphere(f3, 3)):
            pts = v.points()
            for bits in itertools.product((False, True), repeat=len(pts)):
                if any(bits):
                    assert _l4_agrees(PointSet(f3, 3, pts.codes[list(bits)]), v)
        for q in (5, 7):
            f = make_field(q)
            for v in (paraboloid(f, 3), en.primitive_sphere(f, 3)):
                pts = v.points()
                for _ in range(500):
                    A = pts.sample(rng, int(rng.integers(1, len(pts) + 1)))
                    assert _l4_agrees(A, v)


# 6 ------------------------------------------------------------------------------


def test_criterion_06_zero_pairs_constant_one():
    rng = np.random.default_rng(6)
    with time_limit(30):
        for q, d in [(3, 6), (7, 6)]:
            f = make_field(q)
            for _ in range(1000):
                size = log_uniform(rng, min(q**d, 4000))
                A = PointSet(f, d, rng.choice(q**d, size=size, replace=False))
                n = en.zero_distance_pairs(A)
                assert n <= len(A) ** 2 / q + q ** ((d - 2) / 2) * len(A) + 1e-9, (q, d, len(A))
                assert en.zero_pairs_check(A).passed


# 7 ------------------------------------------------------------------------------


def test_criterion_07_energy_bounds():
    rng = np.random.default_rng(7)
    c_test = en.DEFAULT_C_TEST
    with time_limit(300):
        for q, d in [(3, 7), (7, 7)]:
            f = make_field(q)
            v = paraboloid(f, d)
            sharp = en.paraboloid_isotropic_set(f, d)
            assert len(sharp) == q ** ((d - 3) // 2)
            assert en.additive_energy(sharp) == len(sharp) ** 3
            sets = [v.sample(rng, log_uniform(rng, 1000)) for _ in range(1000)]
            sets += ext.subspace_sets(v, rng, count=8)
            worst = max(en.paraboloid_energy_check(A, c_test).ratio for A in sets)
            assert worst <= c_test, (q, d, worst)
        for q, d, cap in [(5, 5, 1000), (13, 3, 1000), (5, 9, 400)]:
            f = make_field(q)
            v = en.primitive_sphere(f, d)
            H = subspace_on_sphere(f, d, f.primitive).points()
            assert en.additive_energy(H) == len(H) ** 3
            sets = [v.sample(rng, log_uniform(rng, cap)) for _ in range(1000)]
            sets += ext.subspace_sets(v, rng) + [H]
            worst_e = max(en.sphere_energy_check(A, c_test).ratio for A in sets)
            worst_n = max(en.sphere_zero_pairs_check(A, c_test).ratio for A in sets)
            assert worst_e <= c_test and worst_n <= c_test, (q, d, worst_e, worst_n)


# 8 ------------------------------------------------------------------------------


def test_criterion_08_association_scheme():
    rng = np.random.default_rng(8)
    problems = []
    with time_limit(300):
        for q, m in [(3, 1), (3, 2), (5, 1), (5, 2)]:
            g = sc.build_scheme(make_field(q), m)
            if g.n != q**m * (q**m - 1) // 2:
                problems.append(f"size at {(q, m)}")
            if (q, m) != (5, 2) and not all(sc.check_axioms(g).values()):
                problems.append(f"axioms at {(q, m)}")
            degree = (q ** (m - 1) - 1) * (q**m + 1)
            if sc.r1_degree(g) != degree:
                problems.append(f"degree at {(q, m)}")
            rep = sc.r1_spectrum(g, tol=1e-6)
            want = {degree, -(q - 2) * q ** (m - 1) - 1, q ** (m - 1) - 1}
            got = {int(round(x)) for x in rep.eigenvalues}
            if not rep.snapped or got != want:
                problems.append(f"eigenvalues at {(q, m)}: {sorted(got)} != {sorted(want)}")
            for _ in range(1000):
                W = rng.choice(g.n, size=int(rng.integers(1, g.n + 1)), replace=False)
                if not sc.edge_bound_check(g, W).passed:
                    problems.append(f"edge bound at {(q, m)}")
                    break
    assert not problems, "; ".join(problems)


# 9 ------------------------------------------------------------------------------


def _distance_batch(f, d, rows, judge, rng, pairs=10_000):
    q = f.q
    kernel = dist.DistanceKernel(f, d, rows.codes)
    failures = 0
    for start in range(0, pairs, 2000):
        n = min(2000, pairs - start)
        As = [rows.sample(rng, log_uniform(rng, len(rows))) for _ in range(n)]
        Bs = [PointSet(f, d, rng.choice(q**d, size=log_uniform(rng, q**d), replace=False))
              for _ in range(n)]
        mu = kernel.paired(kernel.indicator_rows(As), kernel.indicator_cols(Bs, q**d))
        for A, B, row in zip(As, Bs, mu):
            failures += not judge(len(A), len(B), int(np.count_nonzero(row))).passed
    return failures


def test_criterion_09_distance_theorems():
    rng = np.random.default_rng(9)
    with time_limit(600):
        # exhaustive subsets of the paraboloid at (3, 3) against 1000 random B
        f3 = make_field(3)
        P = paraboloid(f3, 3).points()
        tid = dist.paraboloid_theorem_id(f3, 3)
        kernel = dist.DistanceKernel(f3, 3, P.codes)
        subsets = [PointSet(f3, 3, P.codes[list(bits)])
                   for bits in itertools.product((False, True), repeat=len(P))]
        Bs = [PointSet(f3, 3, rng.choice(27, size=int(rng.integers(1, 28)), replace=False))
              for _ in range(1000)]
        mu = kernel.cross(kernel.indicator_rows(subsets), kernel.indicator_cols(Bs, 27))
        deltas = np.count_nonzero(mu, axis=2)
        failures = 0
        for i, A in enumerate(subsets):
            for k, B in enumerate(Bs):
                failures += not dist.verdict(tid, 3, 3, len(A), len(B), int(deltas[i, k])).passed
        assert failures == 0

        f7, f5 = make_field(7), make_field(5)
        runs = [
            (f7, 3, paraboloid(f7, 3).points(), dist.paraboloid_theorem_id(f7, 3), {}),
            (f7, 3, sphere(f7, 3, 1).points(), dist.sphere_theorem_id(f7, 3, 1), {"j": 1}),
            (f5, 4, sphere(f5, 4, 1).points(), dist.sphere_theorem_id(f5, 4, 1), {"j": 1}),
            (f3, 6, sphere(f3, 6, 0).points(), dist.zero_sphere_theorem_id(f3, 6), {"j": 0}),
        ]
        assert [r[3] for r in runs] == ["paraboloid-odd", "sphere-odd", "sphere-even", "zero-sphere"]
        for f, d, rows, tid, hyp in runs:
            judge = lambda a, b, n, f=f, d=d, tid=tid, hyp=hyp: dist.verdict(tid, f.q, d, a, b, n, **hyp)
            assert _distance_batch(f, d, rows, judge, rng) == 0, tid


# 10 -----------------------------------------------------------------------------


def test_criterion_10_sharp_constructions():
    with time_limit(10):
        kinds = set()
        for kind, q, d, j in dist.smallest_sharp_parameters():
            f = make_field(q)
            kinds.add(kind)
            for rsize in (1, 2, 3):
                c = dist.sharp_construction(kind, f, d, rsize, j)
                assert dist.distance_profile(c.A, c.B).delta == frozenset(c.radii)
                assert len(c.radii) == rsize
                assert len(c.A) == c.expected_a and len(c.B) == c.expected_b
        assert kinds == set(dist.SHARP_KINDS)


# 11 -----------------------------------------------------------------------------


def test_criterion_11_restriction_distance_identity():
    rng = np.random.default_rng(11)
    with time_limit(30):
        for q, d in [(3, 2), (5, 2), (5, 3)]:
            f = make_field(q)
            full = PointSet.full(f, d)
            for _ in range(100):
                A = full.sample(rng, int(rng.integers(1, q**d + 1)))
                t = int(rng.integers(1, q))
                lhs, rhs = fo.restriction_distance_identity(A, t)
                assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs)), (q, d, t)


# 12 -----------------------------------------------------------------------------


def test_criterion_12_incidence_mixing():
    rng = np.random.default_rng(12)
    f = make_field(7)
    with time_limit(30):
        failures = 0
        for _ in range(1000):
            U = PointSet(f, 3, rng.choice(343, size=int(rng.integers(0, 344)), replace=False))
            k = int(rng.integers(1, 400))
            normals = rng.integers(0, 7, size=(k, 3))
            normals[~normals.any(axis=1), 0] = 1
            rep = en.point_hyperplane_incidences(U, list(zip(normals, rng.integers(0, 7, size=k))))
            bound = 7 ** ((3 - 1) / 2) * math.sqrt(rep.points * rep.planes)
            failures += abs(rep.incidences - rep.points * rep.planes / 7) > bound + 1e-9
        assert failures == 0


# 13 -----------------------------------------------------------------------------


def _critical_case(d, q):
    """(k*, closed-form r2) straight from the four cases."""
    if d % 2 == 0:
        return (d - 2) // 2, Fraction(2 * d + 4, d)
    if d % 4 == 3 and q % 4 == 3:
        return (d - 3) // 2, Fraction(2 * d + 6, d + 1)
    return (d - 1) // 2, Fraction(2 * d + 2, d - 1)


def test_criterion_13_exponent_arithmetic():
    seen = set()
    for d in range(2, 22):
        for q in (3, 5):
            if d % 4 == 1 and d < 5:
                continue
            k, closed = _critical_case(d, q)
            case, k_lib, r2 = ext.paraboloid_kstar(d, q)
            seen.add(case)
            assert (k_lib, r2) == (k, closed)
            assert ext.critical_r2(d, k) == closed
            assert isinstance(ext.critical_r2(d, k), Fraction)
    assert seen == {1, 2, 3, 4}
    for d in range(2, 22):
        for k in range(d - 1):
            corners = ext.necessary_corners(d, k)
            top = Fraction(d - 1, 2 * d)
            knee_x = 1 - top * Fraction(d - k, d - 1 - k)
            assert corners == ((0, 0), (0, top), (knee_x, top), (1, 0))
            for x, y in corners:
                p = math.inf if x == 0 else 1 / x
                r = math.inf if y == 0 else 1 / y
                assert ext.necessary_region(d, k, p, r)
                assert ext.on_boundary(d, k, x, y)
            # just outside each binding edge
            eps = Fraction(1, 10**6)
            assert not ext.necessary_region(d, k, 2 / knee_x, 1 / (top + eps))
            assert not ext.necessary_region(d, k, 1 / ((knee_x + 1) / 2),
                                            1 / ((1 - (knee_x + 1) / 2) * Fraction(d - 1 - k, d - k) + eps))


# 14 -----------------------------------------------------------------------------


def _strip_timing(text):
    doc = json.loads(text)
    for c in doc["checks"]:
        c.pop("elapsed_ms")
    return json.dumps(doc, sort_keys=True)


def test_criterion_14_determinism(tmp_path):
    base = ["sweep", "--suite", "distance", "--qs", "3", "5", "7", "--ds", "2", "3",
            "--trials", "20", "--seed", "14"]
    outs = []
    for i, extra in enumerate([["--jobs", "1"], ["--jobs", "1"], ["--jobs", "2"]]):
        path = tmp_path / f"run{i}.json"
        assert main(base + extra + ["--out", str(path)]) in (0, 1)
        outs.append(path.read_text())
    assert _strip_timing(outs[0]) == _strip_timing(outs[1]) == _strip_timing(outs[2])
    fixed = []
    for i in range(2):
        path = tmp_path / f"fixed{i}.json"
        main(base + ["--no-timing", "--out", str(path)])
        fixed.append(path.read_bytes())
    assert fixed[0] == fixed[1]
