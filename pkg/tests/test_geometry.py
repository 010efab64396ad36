import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minkval.geometry import (Ball, Polytope, body_from_json, body_to_json, cube, kappa, minkowski_combine,
                              project_volume, project_volumes, random_polytope, reflect, simplex, sphere_area,
                              steiner_point, support_eval, zonotope, zonotope_volume)
from minkval.hull import affine_rank, facet_structure, hull_volume, intrinsic_volumes_lowdim, planar_hull_measures
from minkval.sphere import build_sphere_grid

seeds = st.integers(0, 2**31 - 1)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- constants


def test_kappa_values():
    assert kappa(0) == 1.0
    assert kappa(1) == pytest.approx(2.0)
    assert kappa(2) == pytest.approx(math.pi)
    assert kappa(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi ** 2)


# ---------------------------------------------------------------- hull


def test_planar_hull_square_and_segment():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], float)
    area, perim = planar_hull_measures(sq)
    assert area == pytest.approx(1.0)
    assert perim == pytest.approx(4.0)
    seg = np.array([[0, 0], [2, 0], [1, 0]], float)
    area, perim = planar_hull_measures(seg)
    assert area == pytest.approx(0.0, abs=1e-14)
    assert perim == pytest.approx(4.0)


def test_planar_hull_batch_matches_single():
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((50, 9, 2))
    area, perim = planar_hull_measures(pts)
    for k in range(50):
        a, p = planar_hull_measures(pts[k])
        assert area[k] == pytest.approx(a, rel=1e-12)
        assert perim[k] == pytest.approx(p, rel=1e-12)


def test_hull_volume_flat_is_zero():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float)
    assert hull_volume(pts) == 0.0
    assert affine_rank(pts)[0] == 2


def test_intrinsic_volumes_of_cube():
    V = intrinsic_volumes_lowdim(cube(3).vertices)
    assert V == pytest.approx([1.0, 3.0, 3.0, 1.0])


def test_facet_structure_cube():
    fs = facet_structure(cube(3).vertices)
    assert len(fs.normals) == 6
    assert fs.areas == pytest.approx(np.ones(6))


def test_facet_structure_rejects_flat():
    with pytest.raises(ValueError):
        facet_structure(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float))


# ---------------------------------------------------------------- bodies


def test_polytope_validation():
    with pytest.raises(ValueError):
        Polytope(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        Polytope([[0.0, np.nan, 0.0]])
    with pytest.raises(ValueError):
        Ball([0, 0, 0], -1.0)


def test_vertices_are_read_only():
    P = cube(3)
    with pytest.raises(ValueError):
        P.vertices[0, 0] = 5.0


def test_support_eval_requires_unit_vector():
    with pytest.raises(ValueError):
        support_eval(cube(3), [1.0, 1.0, 0.0])
    assert support_eval(cube(3), unit([1, 1, 1])) == pytest.approx(math.sqrt(3))


def test_support_of_cube_and_ball():
    u = unit([1, -2, 3])
    assert cube(3, -1, 1).support(u[None])[0] == pytest.approx(np.abs(u).sum())
    assert Ball([1, 0, 0], 2.0).support(u[None])[0] == pytest.approx(2.0 + u[0])


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_minkowski_sum_is_support_additive(s1, s2, a, b):
    K = random_polytope(3, 7, s1)
    L = random_polytope(3, 9, s2)
    M = minkowski_combine([K, L], [a, b])
    U = np.random.default_rng(s1 ^ s2).standard_normal((40, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    assert np.allclose(M.support(U), a * K.support(U) + b * L.support(U), atol=1e-10)


def test_minkowski_of_balls_is_ball():
    B = minkowski_combine([Ball.unit(3), Ball([1, 0, 0], 2.0)], [1.0, 0.5])
    assert isinstance(B, Ball)
    assert B.radius == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_rotation_equivariance_of_support(seed):
    rng = np.random.default_rng(seed)
    K = random_polytope(3, 10, seed)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    U = rng.standard_normal((30, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    # h(theta K, u) = h(K, theta^{-1} u)
    assert np.allclose(K.rotate(Q).support(U), K.support(U @ Q), atol=1e-12)


def test_reflect_and_translate():
    K = cube(3).translate([1, 2, 3])
    R = reflect(K)
    u = unit([1, 1, 0])
    assert R.support(u[None])[0] == pytest.approx(K.support(-u[None])[0])


def test_simplex_difference_body_ratio():
    # V(T - T) / V(T) = C(2n, n) for a simplex
    T = simplex(3)
    D = minkowski_combine([T, reflect(T)], [1, 1])
    assert D.volume() / T.volume() == pytest.approx(20.0)


def test_projection_of_cube_onto_diagonal_plane():
    u = unit([1, 1, 1])
    frame = np.linalg.svd(np.eye(3) - np.outer(u, u))[0][:, :2]
    assert project_volume(cube(3), frame) == pytest.approx(math.sqrt(3))


def test_project_volume_rejects_bad_frame():
    with pytest.raises(ValueError):
        project_volume(cube(3), np.array([[1.0, 1.0], [0, 1.0], [0, 0]]))


def test_project_volumes_ball():
    frames = np.eye(3)[None, :, :2]
    assert project_volumes(np.eye(3), frames)[0] > 0
    assert project_volume(Ball.unit(3), np.eye(3)[:, :2]) == pytest.approx(math.pi)


def test_zonotope_volume_matches_hull():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((6, 3))
    assert zonotope_volume(G) == pytest.approx(zonotope(G).volume(), rel=1e-10)
    assert zonotope_volume(np.eye(3)) == pytest.approx(1.0)


def test_steiner_point_of_translated_ball():
    g = build_sphere_grid(3, 4000)
    assert np.allclose(steiner_point(Ball([0.5, -1.0, 2.0], 1.0), g), [0.5, -1.0, 2.0], atol=1e-2)


def test_body_json_roundtrip():
    for B in (cube(3), Ball([1, 2, 3], 0.5)):
        C = body_from_json(body_to_json(B))
        U = np.eye(3)
        assert np.allclose(C.support(U), B.support(U))
    with pytest.raises(ValueError):
        body_from_json({"type": "blob"})
