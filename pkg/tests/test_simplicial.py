import itertools
import random

import pytest

import gogtool as gt
from gogtool.errors import CapExceeded, ValidationError
from gogtool.simplicial import (
    SimplicialComplex,
    boundary_matrix,
    homology,
    is_m_flag_wrt,
    is_m_pseudosimplex,
    lemma_connectivity_bound,
    m_joinable,
    random_complex,
    smith_normal_form,
)

HOLLOW = SimplicialComplex.from_maximal([{0, 1}, {1, 2}, {0, 2}])
SPHERE = SimplicialComplex.from_maximal([{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}])
POINTS = SimplicialComplex.from_maximal([{0}, {1}])
RP2 = SimplicialComplex.from_maximal(
    [
        {1, 2, 3}, {1, 3, 4}, {1, 2, 6}, {1, 4, 5}, {1, 5, 6},
        {2, 3, 5}, {2, 4, 5}, {2, 4, 6}, {3, 4, 6}, {3, 5, 6},
    ]
)


def test_from_maximal_normalises():
    cx = SimplicialComplex.from_maximal([{0, 1}, {1}, {0, 1}], vertices=[0, 1, 2])
    assert cx.maximal_faces == (frozenset({2}), frozenset({0, 1}))
    assert cx.vertices == (0, 1, 2)
    assert cx.is_face({0}) and cx.is_face({0, 1}) and not cx.is_face({0, 2})


def test_f_vector_and_json_roundtrip():
    assert SPHERE.f_vector() == (4, 6, 4)
    again = SimplicialComplex.from_json_dict(SPHERE.to_json_dict())
    assert again == SPHERE


def test_homology_known_values():
    assert homology(HOLLOW).betti == (1, 1)
    assert homology(SPHERE).betti == (1, 0, 1)
    assert homology(POINTS).betti == (2,)
    two_triangles = SimplicialComplex.from_maximal([{0, 1, 2}, {1, 2, 3}])
    assert homology(two_triangles).betti == (1, 0, 0)


def test_homology_torsion_projective_plane():
    rep = homology(RP2)
    assert rep.betti == (1, 0, 0)
    assert rep.torsion == ((), (2,), ())


def test_homology_caveat_attached():
    assert "necessary condition" in homology(HOLLOW).caveat


def test_homology_face_cap():
    with pytest.raises(CapExceeded):
        homology(SPHERE, face_cap=3)


def test_smith_normal_form_basics():
    assert smith_normal_form([[1, 0], [0, 1]], 2) == [1, 1]
    assert smith_normal_form([[2, 4], [4, 8]], 2) == [2]
    assert smith_normal_form([[2, 0], [0, 3]], 2) == [1, 6]
    assert smith_normal_form([[0, 0], [0, 0]], 2) == []
    assert smith_normal_form([], 0) == []
    # gcds of minors: d1=2, d1*d2=4, d1*d2*d3=|det|=624
    d = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]], 3)
    assert d == [2, 2, 156]
    for a, b in zip(d, d[1:]):
        assert b % a == 0


def test_smith_normal_form_against_sympy():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf

    rng = random.Random(8)
    for _ in range(20):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        rows = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
        ours = smith_normal_form(rows, n)
        theirs = sympy_snf(sympy.Matrix(rows))
        ref = sorted(
            abs(theirs[i, i]) for i in range(min(m, n)) if theirs[i, i] != 0
        )
        assert sorted(ours) == ref


def test_boundary_matrix_squares_to_zero():
    rows1, n1 = boundary_matrix(SPHERE, 1)
    rows2, n2 = boundary_matrix(SPHERE, 2)
    prod = [
        [sum(rows1[i][t] * rows2[t][j] for t in range(len(rows2))) for j in range(n2)]
        for i in range(len(rows1))
    ]
    assert all(v == 0 for row in prod for v in row)


def test_pseudosimplex_examples():
    assert is_m_pseudosimplex(HOLLOW, {0, 1, 2}, 1)
    assert not is_m_pseudosimplex(HOLLOW, {0, 1, 2}, 2)
    assert is_m_pseudosimplex(HOLLOW, {0}, 5)
    assert not is_m_pseudosimplex(HOLLOW, {7}, 0)


def test_pseudosimplex_monotone_and_hereditary():
    rng = random.Random(5)
    for seed in range(10):
        cx = random_complex(seed, 8, 0.5)
        for _ in range(10):
            size = rng.randint(1, 4)
            sigma = rng.sample(range(8), size)
            for m in range(0, 4):
                if is_m_pseudosimplex(cx, sigma, m + 1):
                    assert is_m_pseudosimplex(cx, sigma, m)
            if is_m_pseudosimplex(cx, sigma, 2):
                for sub_size in range(1, size):
                    for sub in itertools.combinations(sigma, sub_size):
                        assert is_m_pseudosimplex(cx, sub, 2)


def test_m_joinable_examples():
    square = SimplicialComplex.from_maximal([{0, 1}, {1, 2}, {2, 3}, {0, 3}])
    assert not m_joinable(square, {0, 1}, {2, 3}, 1)
    full = SimplicialComplex.from_maximal([{0, 1, 2, 3}])
    assert m_joinable(full, {0, 1}, {2, 3}, 2)
    assert m_joinable(HOLLOW, {0, 1}, {0, 1}, 1)  # idempotent on a pseudosimplex


def test_flag_check_full_simplex():
    full = SimplicialComplex.from_maximal([{0, 1, 2, 3, 4}])
    for m in (1, 2, 3):
        assert is_m_flag_wrt(full, (0, 1), m).holds


def test_flag_check_counterexample():
    # a missing mixed triangle: rho={1,2} and tau={0} are vertex-wise
    # joinable but the union is no 2-pseudosimplex
    res = is_m_flag_wrt(HOLLOW, (0,), 2)
    assert not res.holds
    rho, tau = res.counterexample
    assert set(rho) | set(tau) == {0, 1, 2}


def test_flag_requires_pseudosimplex_sigma():
    with pytest.raises(ValidationError):
        is_m_flag_wrt(HOLLOW, (0, 1, 2), 2)


def test_connectivity_bound_full_simplex():
    full = SimplicialComplex.from_maximal([{0, 1, 2, 3}])
    cb = lemma_connectivity_bound(full, (0, 1, 2, 3), 2, 1)
    assert cb.bound == 1 and cb.failed is None


def test_connectivity_bound_hollow_triangle():
    cb = lemma_connectivity_bound(HOLLOW, (0, 1, 2), 1, 1)
    assert cb.bound == 0
    rep = homology(HOLLOW)
    assert rep.betti[0] == 1  # 0-connected indeed


def test_connectivity_bound_isolated_vertex():
    cx = SimplicialComplex.from_maximal([{0, 1}, {1, 2}, {0, 2}, {9}])
    cb = lemma_connectivity_bound(cx, (0, 1, 2), 1, 1)
    assert cb.bound is None and "9" in cb.failed


def test_connectivity_bound_validates_args():
    with pytest.raises(ValidationError):
        lemma_connectivity_bound(HOLLOW, (0,), 1, 0)
    with pytest.raises(ValidationError):
        lemma_connectivity_bound(HOLLOW, (0,), -1, 1)


def test_random_complex_determinism_and_extremes():
    assert random_complex(42, 9, 0.4, ground=3) == random_complex(42, 9, 0.4, ground=3)
    assert random_complex(1, 5, 1.0).maximal_faces == (frozenset(range(5)),)
    assert all(len(f) == 1 for f in random_complex(1, 5, 0.0).maximal_faces)
    with pytest.raises(ValidationError):
        random_complex(1, 5, 1.5)


def test_random_complex_ground_planted():
    for seed in range(5):
        cx = random_complex(seed, 10, 0.2, ground=4)
        assert cx.is_face({0, 1, 2, 3})


def test_random_complex_drop_removes_material():
    dense = random_complex(7, 10, 0.8, ground=3, drop=0.0)
    holey = random_complex(7, 10, 0.8, ground=3, drop=0.5)
    n_dense = len(dense.faces_of_size(3))
    n_holey = len(holey.faces_of_size(3))
    assert n_holey < n_dense
    assert holey.is_face({0, 1, 2})  # ground immune


def test_random_complex_max_dim_cap():
    cx = random_complex(3, 6, 1.0, max_dim=2)
    assert cx.dimension == 2
