from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import naive_distances
from fflab import distance as D
from fflab.errors import (EmptySet, HypothesisViolation, ImpossibleCase, OmegaNotCovering,
                          SizeLimitExceeded, SupportViolation)
from fflab.field import make_field
from fflab.geometry import PointSet, paraboloid, sphere

sets = st.builds(
    lambda p, d, a, b: (PointSet(make_field(p), d, [c % p**d for c in a]),
                        PointSet(make_field(p), d, [c % p**d for c in b])),
    st.sampled_from([3, 5, 7]), st.integers(1, 3),
    st.lists(st.integers(0, 342), min_size=1, max_size=15),
    st.lists(st.integers(0, 342), min_size=1, max_size=15))


@given(sets)
def test_profile_matches_oracle(pair):
    A, B = pair
    prof = D.distance_profile(A, B)
    naive = naive_distances(A.coords.tolist(), B.coords.tolist(), A.field.p)
    assert {t: c for t, c in enumerate(prof.mu) if c} == naive
    assert prof.pair_count == len(A) * len(B)
    assert prof.delta == frozenset(naive)


@given(sets)
def test_cauchy_schwarz_lower_bound(pair):
    A, B = pair
    prof = D.distance_profile(A, B)
    assert len(prof.delta) >= prof.cs_lower_bound
    assert prof.mu_square_sum >= Fraction(prof.pair_count**2, A.field.q)


def test_profile_examples():
    f = make_field(5)
    A = PointSet.from_coords(f, [[0, 0]])
    B = PointSet.from_coords(f, [[1, 0], [1, 2], [0, 0]])
    prof = D.distance_profile(A, B)
    assert prof.mu == (2, 1, 0, 0, 0)
    assert prof.cs_lower_bound == Fraction(9, 5)
    empty = D.distance_profile(PointSet.empty(f, 2), B)
    assert empty.delta == frozenset() and empty.cs_lower_bound == 0


def test_profile_errors():
    f = make_field(3)
    with pytest.raises(ValueError):
        D.distance_profile(PointSet.full(f, 2), PointSet.full(f, 3))
    with pytest.raises(SizeLimitExceeded):
        D.distance_profile(PointSet.full(make_field(3), 10), PointSet.full(make_field(3), 10))


def test_kernel_agrees_with_profiles(rng):
    f = make_field(5)
    v = paraboloid(f, 3).points()
    kern = D.DistanceKernel(f, 3, v.codes)
    As = [v.sample(rng, int(rng.integers(1, 10))) for _ in range(6)]
    Bs = [PointSet(f, 3, rng.choice(125, size=int(rng.integers(1, 30)), replace=False)) for _ in range(4)]
    IA, IB = kern.indicator_rows(As), kern.indicator_cols(Bs, 125)
    cross = kern.cross(IA, IB)
    for i, A in enumerate(As):
        for k, B in enumerate(Bs):
            assert tuple(cross[i, k]) == D.distance_profile(A, B).mu
    paired = kern.paired(IA[:4], IB)
    for i in range(4):
        assert tuple(paired[i]) == D.distance_profile(As[i], Bs[i]).mu


@given(sets)
def test_mu_square_bounds(pair):
    A, B = pair
    rep = D.mu_square_bounds(A, B, A)
    assert rep.passed
    assert rep.exact == D.distance_profile(A, B).mu_square_sum


def test_mu_second_bound_with_variety(rng):
    f = make_field(7)
    omega = paraboloid(f, 3).points()
    for _ in range(10):
        A = omega.sample(rng, 20)
        B = PointSet(f, 3, rng.choice(343, size=40, replace=False))
        assert D.mu_square_bounds(A, B, omega).passed
    with pytest.raises(OmegaNotCovering):
        D.mu_square_bounds(PointSet.from_coords(f, [[1, 0, 0]]), B, omega)


def test_sphere_mu_square_bound(rng):
    for q, d, j in [(5, 3, 1), (5, 3, 2), (7, 3, 3), (3, 4, 1)]:
        f = make_field(q)
        S = sphere(f, d, j).points()
        for _ in range(5):
            A = S.sample(rng, int(rng.integers(1, len(S) + 1)))
            B = PointSet(f, d, rng.choice(q**d, size=int(rng.integers(1, 60)), replace=False))
            assert D.sphere_mu_square_bound(A, B, j).passed
    with pytest.raises(SupportViolation):
        D.sphere_mu_square_bound(PointSet.from_coords(f, [[0, 0, 0, 0]]), B, 1)


def test_sphere_mu_third_term_real():
    f = make_field(5)
    B = PointSet.from_coords(f, [[0, 0, 0], [1, 2, 3]])
    t = D.sphere_mu_third_term(f, 3, 1, 4, B)
    assert abs(t.imag) < 1e-9
    assert D.sphere_mu_third_term(f, 3, 1, 4, PointSet.empty(f, 3)) == 0


def test_mattila():
    f = make_field(5)
    single = D.mattila(PointSet.from_coords(f, [[1, 1]]))
    assert single.delta_size == 1
    assert single.value > 1 and single.bound == pytest.approx(5 / single.value)
    full = D.mattila(PointSet.full(make_field(3), 2))
    assert full.value < 1e-12 and full.bound == 3.0 and full.delta_size == 3
    with pytest.raises(EmptySet):
        D.mattila(PointSet.empty(f, 2))


def test_theorem_ids():
    f3, f5, f7 = make_field(3), make_field(5), make_field(7)
    assert D.paraboloid_theorem_id(f3, 3) == "paraboloid-odd"
    assert D.paraboloid_theorem_id(f5, 4) == "paraboloid-even"
    with pytest.raises(HypothesisViolation):
        D.paraboloid_theorem_id(f5, 3)
    assert D.sphere_theorem_id(f7, 3, 1) == "sphere-odd"
    assert D.sphere_theorem_id(f5, 5, 2) == "sphere-odd"
    assert D.sphere_theorem_id(f5, 4, 1) == "sphere-even"
    with pytest.raises(HypothesisViolation):
        D.sphere_theorem_id(f7, 3, 3)
    with pytest.raises(HypothesisViolation):
        D.sphere_theorem_id(f5, 4, 0)
    with pytest.raises(HypothesisViolation):
        D.sphere_theorem_id(f5, 4, 1, variant="sphere-odd")
    assert D.zero_sphere_theorem_id(f3, 6) == "zero-sphere"
    with pytest.raises(HypothesisViolation):
        D.zero_sphere_theorem_id(f5, 6)


def test_explicit_threshold_examples():
    assert D.explicit_threshold(Fraction(1, 3), 7, 3, 7, 343, Fraction(0)) == pytest.approx(7 / 3)
    assert D.explicit_threshold(Fraction(1, 3), 7, 3, 1, 1, Fraction(0)) == pytest.approx(1 / 147)
    v = D.verdict("sphere-even", 5, 4, 25, 625, 5)
    assert v.rhs == pytest.approx(0.25 * min(5, 25 * 625 / 125, 25 / 5))
    assert v.passed


def test_theorem_wrappers(rng):
    f = make_field(7)
    P = paraboloid(f, 3).points()
    A = P.sample(rng, 10)
    B = PointSet(f, 3, rng.choice(343, size=50, replace=False))
    assert D.theorem_paraboloid_distance(A, B).passed
    S = sphere(f, 3, 1).points()
    assert D.theorem_sphere_distance(S.sample(rng, 10), B, 1).passed
    with pytest.raises(SupportViolation):
        D.theorem_paraboloid_distance(PointSet.from_coords(f, [[1, 0, 0]]), B)
    f3 = make_field(3)
    Z = sphere(f3, 6, 0).points()
    B3 = PointSet(f3, 6, rng.choice(729, size=100, replace=False))
    v = D.theorem_zero_sphere_distance(Z.sample(rng, 30), B3)
    assert v.passed and v.hypotheses["j"] == 0


def test_boxed_statement():
    assert D.boxed_statement("paraboloid-odd", 3, 3, 9, 27) == 1.0
    assert D.boxed_statement("sphere-odd", 7, 3, 7, 49) is None
    assert D.boxed_statement("sphere-odd", 7, 3, 49, 343) == pytest.approx(7 / 4)
    assert D.boxed_statement("paraboloid-even", 5, 4, 100, 100) == pytest.approx(5 / 144)
    # excluded middle range q^((d-1)/2) < |A| < q^(d/2)
    assert D.boxed_statement("paraboloid-even", 5, 4, 20, 625) is None


SHARP_TABLE = [
    # kind, q, d, j, rsize, case, |A|, |B|
    ("para-3", 3, 3, None, 2, 1, 1, 18),
    ("para-3", 5, 4, None, 3, 2, 5, 60),
    ("para-3", 3, 6, None, 2, 3, 9, 72),
    ("sphere-c-1", 3, 3, 1, 2, 1, 1, 18),
    ("sphere-c-1", 5, 3, 2, 3, 2, 1, 70),
    ("sphere-c-1", 3, 5, 2, 2, 2, 3, 54),
    ("sphere-c-3", 3, 4, 1, 2, 1, 1, 48),
    ("sphere-c-3", 5, 4, 1, 3, 1, 5, 60),
    ("sphere-c-3-2", 3, 6, None, 2, 1, 9, 72),
]


@pytest.mark.parametrize("kind, q, d, j, rsize, case, size_a, size_b", SHARP_TABLE)
def test_sharp_constructions(kind, q, d, j, rsize, case, size_a, size_b):
    f = make_field(q)
    c = D.sharp_construction(kind, f, d, rsize, j)
    assert c.case == case
    assert (len(c.A), len(c.B)) == (size_a, size_b) == (c.expected_a, c.expected_b)
    assert c.delta == frozenset(c.radii) and len(c.radii) == rsize
    if kind.startswith("para"):
        assert paraboloid(f, d).contains(c.A.coords).all()
    else:
        assert sphere(f, d, c.j).contains(c.A.coords).all()


def test_sharp_radius_order_puts_zero_last():
    c = D.sharp_construction("para-3", make_field(3), 3, 3)
    assert c.radii == (1, 2, 0)
    assert c.epsilon == pytest.approx(0.0)


def test_sharp_errors():
    f5 = make_field(5)
    with pytest.raises(ImpossibleCase):
        D.sharp_construction("para-3", f5, 3, 1)
    with pytest.raises(HypothesisViolation):
        D.sharp_construction("sphere-c-1", f5, 3, 1, 0)
    with pytest.raises(ValueError):
        D.sharp_construction("cube", f5, 3, 1)
    with pytest.raises(ValueError):
        D.sharp_construction("para-3", make_field(3), 3, 0)
    assert len(D.smallest_sharp_parameters()) == 9
