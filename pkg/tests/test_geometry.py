import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import naive_norm
from fflab.errors import CaseMismatch, ImpossibleCase, SizeLimitExceeded
from fflab.field import field_of_order, make_field
from fflab.geometry import (PointSet, all_points, decode, encode, form_equivalence, isotropic_basis,
                            max_affine_subspace_dim, mutually_orthogonal, norm,
                            normal_form_coefficients, paraboloid, paraboloid_subspace, quadric_count,
                            sphere, sphere_size, sphere_subspace_case, subspace_on_sphere)
from fflab.linalg import dot, rank


def test_norm_examples():
    assert norm(make_field(3), [0, 0, 0]) == 0
    assert norm(make_field(3), [1, 1]) == 2
    assert norm(make_field(5), [1, 2, 3]) == 4


@given(st.sampled_from([3, 5, 7]), st.integers(1, 4), st.data())
def test_encode_decode_roundtrip(p, d, data):
    f = make_field(p)
    code = data.draw(st.integers(0, p**d - 1))
    x = decode(f, code, d)
    assert int(encode(f, x)) == code
    # last coordinate varies fastest
    assert int(encode(f, [0] * (d - 1) + [1])) == 1


def test_pointset_basics():
    f = make_field(5)
    A = PointSet.from_coords(f, [[1, 2], [1, 2], [0, 4]])
    assert len(A) == 2 and (1, 2) in A and (2, 1) not in A
    assert list(A) == [(0, 4), (1, 2)]
    assert A.translate([4, 3]) == PointSet.from_coords(f, [[4, 2], [0, 0]])
    assert A.issubset(PointSet.full(f, 2))
    assert len(A.union(PointSet.from_coords(f, [[3, 3]]))) == 3
    with pytest.raises(ValueError):
        PointSet.from_coords(f, [[5, 0]])


def test_enumeration_examples():
    f3 = make_field(3)
    assert list(paraboloid(f3, 2).points()) == [(0, 0), (1, 1), (2, 1)]
    assert len(sphere(f3, 2, 1)) == 4
    assert len(sphere(f3, 6, 0)) == 225


@pytest.mark.parametrize("q, d", [(3, 2), (3, 3), (5, 2), (5, 3), (7, 2), (3, 4), (9, 2)])
def test_membership_agrees_with_enumeration(q, d):
    f = field_of_order(q)
    pts = all_points(f, d)
    P = paraboloid(f, d)
    assert len(P) == q ** (d - 1)
    assert np.array_equal(np.flatnonzero(P.contains(pts)), P.points().codes)
    for j in range(q):
        S = sphere(f, d, j)
        assert np.array_equal(np.flatnonzero(S.contains(pts)), S.points().codes)
        assert len(S) == sphere_size(f, d, j)


def test_naive_membership_prime_field():
    f = make_field(5)
    for j in range(5):
        expected = [x for x in itertools.product(range(5), repeat=3) if naive_norm(x, 5) == j]
        assert list(sphere(f, 3, j).points()) == expected


def test_quadric_count_with_coefficients():
    f = make_field(7)
    coeffs = [1, 3, 5]
    pts = all_points(f, 3)
    vals = dot(f, f.square_table[pts], np.array(coeffs))
    for r in range(7):
        assert int(np.count_nonzero(vals == r)) == quadric_count(f, 3, r, 15 % 7)


def test_enumeration_budget():
    with pytest.raises(SizeLimitExceeded):
        sphere(make_field(11), 7, 1).points()


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 13, 25, 27])
@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_form_equivalence(q, d):
    f = field_of_order(q)
    ft = form_equivalence(f, d)
    assert rank(f, ft.matrix.T) == d
    if q**d <= 10**5:
        pts = all_points(f, d)
    else:
        pts = np.random.default_rng(q * d).integers(0, q, size=(10_000, d))
    assert np.array_equal(norm(f, ft.apply(pts)), ft.normal_form(pts))


def test_normal_form_frozen():
    assert normal_form_coefficients(make_field(7), 4) == ((1, 6, 1, 6), 1)
    assert normal_form_coefficients(make_field(5), 3) == ((1, 4, 1), 1)
    # -1 is a non-square mod 7, so alpha is the non-square class in d = 3
    assert normal_form_coefficients(make_field(7), 3) == ((1, 6, 3), 3)


@pytest.mark.parametrize("q", [3, 5, 7, 9, 13])
@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7])
def test_subspace_on_sphere_all_cases(q, d):
    f = field_of_order(q)
    for j in range(1, q):
        case, k = sphere_subspace_case(f, d, j)
        H = subspace_on_sphere(f, d, j)
        assert H.dim == k
        pts = H.points()
        assert len(pts) == q**k
        assert sphere(f, d, j).contains(pts.coords).all()


def test_subspace_case_mismatch():
    with pytest.raises(CaseMismatch):
        sphere_subspace_case(make_field(5), 4, 0)
    with pytest.raises(CaseMismatch):
        sphere_subspace_case(make_field(5), 1, 1)


def test_subspace_examples():
    f5 = make_field(5)
    assert sphere_subspace_case(f5, 5, 1) == (3, 2)
    assert len(subspace_on_sphere(f5, 5, 1).points()) == 25
    assert len(subspace_on_sphere(make_field(11), 4, 1).points()) == 11
    f7 = make_field(7)
    j = 3  # non-square, and -3 = 4 is a square: case 5
    assert sphere_subspace_case(f7, 3, j)[0] == 5
    # a non-square j with -j non-square does not exist mod 7 since -1 is a non-square
    assert [j for j in range(1, 7) if not f7.is_square(j) and not f7.is_square(f7.neg(j))] == []
    assert sphere_subspace_case(f7, 3, 1) == (4, 0)


def test_mutually_orthogonal():
    f3 = make_field(3)
    assert mutually_orthogonal(f3, 4) == [(1, 0, 1, 1), (0, 1, 1, 2)]
    assert mutually_orthogonal(make_field(5), 2) == [(1, 2)]
    with pytest.raises(ImpossibleCase):
        mutually_orthogonal(make_field(7), 6)
    for q, d in [(3, 8), (5, 6), (7, 4), (13, 10)]:
        f = make_field(q)
        V = np.array(mutually_orthogonal(f, d))
        assert (dot(f, V[:, None, :], V[None, :, :]) == 0).all()
        assert rank(f, V) == d // 2


@pytest.mark.parametrize("q", [3, 5, 7])
@pytest.mark.parametrize("d", range(2, 9))
def test_paraboloid_subspace_dimension(q, d):
    f = make_field(q)
    H = paraboloid_subspace(f, d)
    # maximal isotropic dimension: (d-2)/2 for even d; otherwise by the class of -1
    if d % 2 == 0:
        k = (d - 2) // 2
    elif d % 4 == 3 and q % 4 == 3:
        k = (d - 3) // 2
    else:
        k = (d - 1) // 2
    assert H.dim == k
    assert paraboloid(f, d).contains(H.points().coords).all()
    W = np.array(isotropic_basis(f, d - 1), dtype=np.int64).reshape(-1, d - 1)
    assert (dot(f, W[:, None, :], W[None, :, :]) == 0).all()


@pytest.mark.parametrize("variety, expected", [
    (lambda: paraboloid(make_field(5), 2), 0),
    (lambda: sphere(make_field(3), 2, 1), 0),
    (lambda: paraboloid(make_field(3), 4), 1),
    (lambda: sphere(make_field(5), 5, 1), 2),
])
def test_max_affine_subspace(variety, expected):
    assert max_affine_subspace_dim(variety()) == expected


def test_variety_sample_stays_on_variety(rng):
    f = make_field(5)
    v = sphere(f, 9, f.primitive)  # far too big to enumerate comfortably
    A = v.sample(rng, 300)
    assert len(A) == 300 and v.contains(A.coords).all()
    P = paraboloid(make_field(3), 2)
    assert P.sample(rng, 100) == P.points()
