import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minkval.grassmann import (GrassmannFunction, GrassmannSample, RotationMeasure, Subspace, cosine,
                               cosine_matrix, cosine_transform, haar_rotations, lifted_convolution, perp,
                               perp_transform, pole, pole_rotations, principal_cosines, radon_to_sphere,
                               rotation_mapping_pole, sample_from_json, sample_grassmann, sample_to_json,
                               sample_zonal, stabilizer_rotations, subspaces_containing)
from minkval.sphere import ZonalProfile, build_sphere_grid

seeds = st.integers(0, 2**31 - 1)


def random_subspace(n, i, seed):
    return sample_grassmann(n, i, 1, seed).subspace(0)


# ---------------------------------------------------------------- subspaces


def test_subspace_validation():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Subspace.span([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    E = Subspace.span([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    assert (E.n, E.i) == (3, 2)
    assert np.allclose(E.projector, np.diag([1.0, 1.0, 0.0]))


def test_canonical_frame_depends_only_on_span():
    E = random_subspace(4, 2, 3)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))
    F = Subspace(E.frame @ Q)
    assert np.allclose(E.canonical().frame, F.canonical().frame, atol=1e-10)


def test_perp_is_orthogonal_complement():
    E = random_subspace(4, 1, 9)
    P = perp(E)
    assert P.i == 3
    assert np.abs(E.frame.T @ P.frame).max() < 1e-12
    with pytest.raises(ValueError):
        perp(Subspace(np.eye(3)))


def test_cosine_of_special_pairs():
    e = np.eye(3)
    assert cosine(Subspace(e[:, :1]), Subspace(e[:, :1])) == pytest.approx(1.0)
    assert cosine(Subspace(e[:, :1]), Subspace(e[:, 1:2])) == pytest.approx(0.0)
    # planes with normals at angle t have cosine |cos t|
    t = 0.7
    A = Subspace(e[:, :2])
    B = Subspace(np.column_stack([e[:, 0], [0.0, math.cos(t), math.sin(t)]]))
    assert cosine(A, B) == pytest.approx(math.cos(t))
    with pytest.raises(ValueError):
        cosine(A, Subspace(e[:, :1]))


@settings(max_examples=40, deadline=None)
@given(seeds, seeds, st.sampled_from([(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]))
def test_cosine_is_symmetric_bounded_and_complement_invariant(s1, s2, ni):
    n, i = ni
    E, F = random_subspace(n, i, s1), random_subspace(n, i, s2)
    c = cosine(E, F)
    assert 0.0 <= c <= 1.0 + 1e-12
    assert c == pytest.approx(cosine(F, E), abs=1e-12)
    assert c == pytest.approx(cosine(perp(E), perp(F)), abs=1e-10)
    assert c == pytest.approx(np.prod(principal_cosines(E, F)), abs=1e-10)


def test_cosine_matrix_matches_pairwise():
    A = sample_grassmann(4, 2, 5, 1)
    B = sample_grassmann(4, 2, 7, 2)
    M = cosine_matrix(A.frames, B.frames)
    assert M.shape == (5, 7)
    assert M[3, 4] == pytest.approx(cosine(A.subspace(3), B.subspace(4)))
    with pytest.raises(ValueError):
        cosine_matrix(A.frames, sample_grassmann(4, 1, 3, 0).frames)


# ---------------------------------------------------------------- samples


def test_grassmann_sample_is_uniform():
    S = sample_grassmann(4, 2, 20000, 5)
    assert S.total_mass() == pytest.approx(1.0)
    # E[P_E] = (i/n) I for the invariant measure
    P = np.einsum("k,kni,kmi->nm", S.weights, S.frames, S.frames)
    assert np.abs(P - 0.5 * np.eye(4)).max() < 0.02


def test_grassmann_sample_validation():
    with pytest.raises(ValueError):
        sample_grassmann(3, 3, 10, 0)
    with pytest.raises(ValueError):
        sample_grassmann(3, 1, 0, 0)
    with pytest.raises(ValueError):
        GrassmannSample(np.ones((2, 3, 1)), [0.5, 0.5])
    with pytest.raises(ValueError):
        GrassmannSample(np.eye(3)[None, :, :1], [np.inf])


def test_sample_operations():
    S = sample_grassmann(3, 1, 10, 0)
    assert S.perp().i == 2
    assert S.scaled(2.0).total_mass() == pytest.approx(2.0)
    assert S.reweighted(-np.ones(10)).total_variation() == pytest.approx(10.0)
    R = haar_rotations(3, 1, np.random.default_rng(0))[0]
    assert np.allclose(S.rotate(R).frames[2], R @ S.frames[2])


def test_sample_json_roundtrip():
    S = sample_grassmann(4, 2, 6, 1)
    T = sample_from_json(sample_to_json(S))
    assert np.allclose(cosine_matrix(S.frames, T.frames).diagonal(), 1.0)
    bad = sample_to_json(S)
    bad["i"] = 3
    with pytest.raises(ValueError):
        sample_from_json(bad)


# ---------------------------------------------------------------- rotations


@pytest.mark.parametrize("n", [3, 4])
def test_pole_rotations_map_pole(n):
    rng = np.random.default_rng(n)
    U = rng.standard_normal((50, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    U[0] = pole(n)
    for R in (pole_rotations(U), pole_rotations(U, rng)):
        assert np.allclose(R @ pole(n), U)
        assert np.allclose(np.einsum("kab,kac->kbc", R, R), np.eye(n))


def test_stabilizer_fixes_pole_and_rotation_mapping_pole():
    S = stabilizer_rotations(4, 5, np.random.default_rng(0))
    assert np.allclose(S @ pole(4), pole(4))
    with pytest.raises(ValueError):
        rotation_mapping_pole([1.0, 1.0, 0.0])
    u = np.array([0.6, 0.0, 0.8])
    assert np.allclose(rotation_mapping_pole(u, stabilizer_seed=3) @ pole(3), u)


def test_subspaces_containing_contain_the_direction():
    U = np.eye(4)[:2]
    F = subspaces_containing(U, 3, 8, np.random.default_rng(0))
    assert F.shape == (2, 8, 4, 3)
    for k in range(2):
        P = np.einsum("cni,cmi->cnm", F[k], F[k])
        assert np.allclose(P @ U[k], U[k])


def test_rotation_measure_hat_and_convolution():
    rng = np.random.default_rng(1)
    a = RotationMeasure(haar_rotations(3, 4, rng), rng.random(4))
    b = RotationMeasure(haar_rotations(3, 3, rng), rng.random(3))
    assert np.allclose(a.hat().hat().rotations, a.rotations)
    ab = a.convolve(b)
    assert ab.weights.sum() == pytest.approx(a.weights.sum() * b.weights.sum())
    # (a * b)^ = b^ * a^ as measures: compare sorted atoms
    lhs = ab.hat()
    rhs = b.hat().convolve(a.hat())
    key = lambda m: np.lexsort(np.round(m.rotations.reshape(len(m.weights), -1), 9).T)
    assert np.allclose(lhs.rotations[key(lhs)], rhs.rotations[key(rhs)])
    assert np.allclose(lhs.weights[key(lhs)], rhs.weights[key(rhs)])


# ---------------------------------------------------------------- functions and transforms


def test_grassmann_function_rotation_and_lookup():
    f = GrassmannFunction(lambda F: F[:, 0, 0] ** 2, 3, 1)
    R = haar_rotations(3, 1, np.random.default_rng(2))[0]
    E = random_subspace(3, 1, 4)
    assert f.rotate(R).at(E.rotate(R)) == pytest.approx(f.at(E))
    S = sample_grassmann(3, 2, 30, 0)
    vals = np.arange(30.0)
    t = GrassmannFunction.tabulated(S, vals)
    assert np.array_equal(t(S.frames), vals)
    assert np.allclose((t + t.scaled(2.0))(S.frames), 3 * vals)
    assert np.allclose(f.se(S.perp().frames), 0.0)


@pytest.mark.parametrize("n,i", [(3, 1), (3, 2), (4, 2)])
def test_cosine_transform_of_constant(n, i):
    # int |cos(E, F)| dE is 1/2 for lines or hyperplanes in R^3, 1/3 for planes in R^4
    expected = {(3, 1): 0.5, (3, 2): 0.5, (4, 2): 1 / 3}[(n, i)]
    S = sample_grassmann(n, i, 20000, 7)
    Cf = cosine_transform(GrassmannFunction.constant(n, i, 1.0), S)
    F = sample_grassmann(n, i, 5, 8).frames
    vals, se = Cf(F), Cf.se(F)
    assert np.all(np.abs(vals - expected) < 4 * se + 1e-3)


def test_cosine_transform_rejects_mismatched_sample():
    with pytest.raises(ValueError):
        cosine_transform(GrassmannFunction.constant(4, 1, 1.0), sample_grassmann(4, 2, 3, 0))


def test_perp_transform_swaps_dimension():
    f = GrassmannFunction(lambda F: F[:, 2, :].sum(axis=1) ** 2, 3, 1)
    g = perp_transform(f)
    assert g.i == 2
    E = Subspace(np.eye(3)[:, :2])
    assert g.at(E) == pytest.approx(1.0)


def test_radon_transform_on_lines_and_planes():
    grid = build_sphere_grid(3, 400)
    f1 = GrassmannFunction(lambda F: F[:, 0, 0] ** 2, 3, 1)
    r1 = radon_to_sphere(f1, 1, grid, inner_count=2)
    assert np.allclose(r1.values, grid.nodes[:, 0] ** 2)
    # |P_E e_3|^2 averaged over planes through u is (1 + u_3^2) / 2
    f2 = GrassmannFunction(lambda F: (F[:, 2, :] ** 2).sum(axis=1), 3, 2)
    r2 = radon_to_sphere(f2, 2, grid, inner_count=64)
    assert np.abs(r2.values - 0.5 * (1 + grid.nodes[:, 2] ** 2)).max() < 1e-3
    with pytest.raises(ValueError):
        radon_to_sphere(f2, 1, grid)


def test_sample_zonal_dirac_and_uniform():
    rng = np.random.default_rng(0)
    V = sample_zonal(ZonalProfile.dirac(), 3, 10, rng)
    assert np.allclose(V, pole(3))
    V = sample_zonal(ZonalProfile(lambda t: np.ones_like(t)), 3, 20000, rng)
    assert abs(V[:, 2].mean()) < 0.02
    assert np.allclose(np.linalg.norm(V, axis=1), 1.0)
    with pytest.raises(ValueError):
        sample_zonal(ZonalProfile(atoms=((0.5, -1.0),)), 3, 10, rng)


def test_lifted_convolution_of_constant_is_exact():
    rng = np.random.default_rng(0)
    V = sample_zonal(ZonalProfile(lambda t: 1 + t), 3, 50, rng)
    est, se = lifted_convolution(GrassmannFunction.constant(3, 2, 2.5), V, np.eye(3), rng)
    assert est == pytest.approx(2.5)
    assert se == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n,i", [(3, 2), (4, 2), (4, 3)])
def test_stratified_subspaces_through_u_are_unbiased(n, i):
    # E[P_E] = u u^T + (i-1)/(n-1) (I - u u^T) over i-subspaces containing u
    rng = np.random.default_rng(11)
    u = np.random.default_rng(0).standard_normal(n)
    u /= np.linalg.norm(u)
    uu = np.outer(u, u)
    target = uu + (i - 1) / (n - 1) * (np.eye(n) - uu)
    means = []
    for _ in range(400):
        F = subspaces_containing(u[None], i, 16, rng)[0]
        means.append(np.einsum("cni,cmi->nm", F, F) / 16)
    assert np.abs(np.mean(means, axis=0) - target).max() < 0.01
    F = subspaces_containing(u[None], i, 16, rng)[0]
    assert np.allclose(np.einsum("cni,cmi->cnm", F, F) @ u, u)
