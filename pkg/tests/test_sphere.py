import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minkval.geometry import cube, random_polytope
from minkval.sphere import (SphericalFunction, SupportBody, UnsupportedDimensionError, ZonalProfile,
                            approximate_identity, build_sphere_grid, convolve_callable, convolve_zonal,
                            convolve_zonal_at, function_from_json, function_to_json, grid_from_json,
                            grid_to_json, is_support_function, pair, random_rotation, ring_points)


@pytest.fixture(scope="module")
def g3():
    return build_sphere_grid(3, 4000)


@pytest.fixture(scope="module")
def g4():
    return build_sphere_grid(4, 4000)


# ---------------------------------------------------------------- grids


@pytest.mark.parametrize("kind", ["fibonacci", "quasi_random", "monte_carlo"])
@pytest.mark.parametrize("n", [3, 4])
def test_grid_is_symmetric_and_normalised(kind, n):
    g = build_sphere_grid(n, 1001, kind, seed=5)
    assert g.size == 1002
    assert np.allclose(g.nodes[g.antipode], -g.nodes)
    assert g.weights.sum() == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(g.nodes, axis=1), 1.0)
    # odd integrands vanish, second moments are 1/n
    assert abs(g.integrate(g.nodes[:, 0] ** 3)) < 1e-14
    # i.i.d. nodes: standard error of the second moment is about 0.25 / sqrt(500)
    tol = 0.06 if kind == "monte_carlo" else 0.01
    assert g.integrate(g.nodes[:, 0] ** 2) == pytest.approx(1.0 / n, abs=tol)


def test_grid_rejects_bad_input():
    with pytest.raises(UnsupportedDimensionError):
        build_sphere_grid(5, 1000)
    with pytest.raises(ValueError):
        build_sphere_grid(3, 10)
    with pytest.raises(ValueError):
        build_sphere_grid(3, 1000, kind="lebedev")


def test_grid_id_is_deterministic():
    a = build_sphere_grid(3, 500, "quasi_random", seed=2)
    b = build_sphere_grid(3, 500, "quasi_random", seed=2)
    c = build_sphere_grid(3, 500, "quasi_random", seed=3)
    assert a.grid_id == b.grid_id != c.grid_id


def test_grid_quadrature_converges():
    err = []
    for N in (500, 2000, 8000):
        g = build_sphere_grid(3, N)
        err.append(abs(g.integrate(np.abs(g.nodes[:, 2])) - 0.5))
    assert err[2] < err[0]
    assert err[2] < 1e-3


def test_grid_json_roundtrip(g3):
    h = grid_from_json(grid_to_json(g3))
    assert h.grid_id == g3.grid_id
    f = SphericalFunction(g3, g3.nodes[:, 0], np.full(g3.size, 0.1))
    f2 = function_from_json(function_to_json(f), h)
    assert np.array_equal(f2.values, f.values)
    with pytest.raises(ValueError):
        function_from_json(function_to_json(f), build_sphere_grid(3, 200))


# ---------------------------------------------------------------- functions


def test_spherical_function_algebra(g3):
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 0])
    c = SphericalFunction.constant(g3, 2.0)
    assert (f + c).mean() == pytest.approx(2.0, abs=1e-12)
    assert np.allclose((f - f).values, 0.0)
    assert np.allclose((f * 3.0).values, 3 * f.values)
    assert np.allclose(f.reflect().values, -f.values)
    with pytest.raises(ValueError):
        f + SphericalFunction.constant(build_sphere_grid(3, 200), 1.0)


def test_pairing_of_coordinate_functions(g3):
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 0])
    assert pair(f, f) == pytest.approx(1 / 3, abs=0.01)


def test_interpolation_is_exact_at_nodes(g3):
    f = SphericalFunction.from_callable(g3, lambda X: np.abs(X).sum(axis=1))
    assert np.allclose(f.at(g3.nodes[:50]), f.values[:50], atol=1e-10)


@pytest.mark.parametrize("n", [3, 4])
def test_interpolation_of_smooth_function(n):
    g = build_sphere_grid(n, 4000)
    f = SphericalFunction.from_callable(g, lambda X: X[:, 0] + 0.5 * X[:, 1] ** 2)
    rng = np.random.default_rng(0)
    P = rng.standard_normal((200, n))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    assert np.abs(f.at(P) - (P[:, 0] + 0.5 * P[:, 1] ** 2)).max() < 0.08


def test_rotation_of_function(g3):
    R = random_rotation(3, np.random.default_rng(1))
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 2])
    fr = f.rotate(R)
    # (theta f)(u) = f(theta^{-1} u)
    assert np.abs(fr.values - (g3.nodes @ R)[:, 2]).max() < 0.03


# ---------------------------------------------------------------- zonal measures


def test_profile_masses():
    n = 3
    assert ZonalProfile.dirac(2.0).total_mass(n) == pytest.approx(2.0)
    assert ZonalProfile(lambda t: np.ones_like(t)).total_mass(n) == pytest.approx(1.0)
    # |t| has mean 1/2 against the probability measure on S^2
    # kink at t = 0 limits the profile quadrature accuracy
    assert ZonalProfile(lambda t: np.abs(t)).total_mass(n) == pytest.approx(0.5, abs=1e-4)
    with pytest.raises(ValueError):
        ZonalProfile(atoms=((1.5, 1.0),))


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("m", [1, 4, 16])
def test_approximate_identity_has_unit_mass(n, m):
    zeta = approximate_identity(m, n)
    assert zeta.total_mass(n) == pytest.approx(1.0, abs=1e-10)
    t_out = math.cos(1.0 / m) - 1e-9
    assert zeta.eval_density(np.array([t_out, -1.0])).max() == 0.0


def test_approximate_identity_converges_and_rejects_bad_m():
    U = build_sphere_grid(3, 300).nodes
    gaps = [np.abs(convolve_callable(lambda X: X[:, 0], approximate_identity(m, 3), U) - U[:, 0]).max()
            for m in (4, 8, 16)]
    assert gaps[0] > gaps[1] > gaps[2]
    with pytest.raises(ValueError):
        approximate_identity(0, 3)


def test_dirac_convolution_is_identity(g3):
    f = SphericalFunction.from_callable(g3, lambda X: np.exp(X[:, 0]))
    assert np.array_equal(convolve_zonal(f, ZonalProfile.dirac()).values, f.values)
    g = convolve_zonal(f, ZonalProfile(atoms=((-1.0, 1.0),)))
    assert np.array_equal(g.values, f.values[g3.antipode])


def test_convolution_of_linear_function_with_cosine_kernel(g3):
    # u_1 * |t| = c u_1 with c = int |t| t dv... odd => u_1 * t = u_1 / 3
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 0])
    h = convolve_zonal(f, ZonalProfile(lambda t: t))
    assert np.abs(h.values - g3.nodes[:, 0] / 3).max() < 5e-3


def test_ring_atoms_average_over_rings(g3):
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 2] ** 2)
    u = np.array([[0.0, 0.0, 1.0]])
    R = ring_points(u, 0.0, 32)
    assert np.allclose(R @ u[0], 0.0, atol=1e-12)
    v = convolve_zonal_at(f, ZonalProfile(atoms=((0.0, 1.0),)), u)
    assert v[0] == pytest.approx(0.0, abs=0.02)


def test_convolution_is_rotation_equivariant(g3):
    K = random_polytope(3, 12, 4)
    R = random_rotation(3, np.random.default_rng(2))
    zeta = ZonalProfile(lambda t: (1 + t) ** 2)
    f = SphericalFunction(g3, K.support(g3.nodes))
    fr = SphericalFunction(g3, K.rotate(R).support(g3.nodes))
    P = g3.nodes[:100]
    a = convolve_zonal_at(fr, zeta, P)
    b = convolve_zonal_at(f, zeta, P @ R)
    assert np.abs(a - b).max() < 0.02


def test_hat_of_profile_is_same_profile():
    z = ZonalProfile(lambda t: t ** 2, ((0.3, 1.0),))
    assert z.hat() is z or z.hat().atoms == z.atoms


# ---------------------------------------------------------------- support bodies


def test_cube_support_passes_convexity_check(g3):
    f = SphericalFunction(g3, cube(3, -1, 1).support(g3.nodes))
    ok, wit = is_support_function(f)
    assert ok and wit is None


@pytest.mark.parametrize("n", [3, 4])
def test_constant_is_support_function(n):
    g = build_sphere_grid(n, 2000)
    assert is_support_function(SphericalFunction.constant(g, 1.0))[0]


def test_nonconvex_function_is_detected(g3):
    f = SphericalFunction.from_callable(g3, lambda X: X[:, 0] ** 3)
    ok, wit = is_support_function(f)
    assert not ok
    assert set(wit) >= {"x", "y", "H(x+y)", "allowance"}


def test_negative_function_fails(g3):
    # -1 is not sublinear: H(x)+H(-x) = -2|x| < 0 = H(0)
    assert not is_support_function(SphericalFunction.constant(g3, -1.0))[0]


def test_support_check_requires_enough_trials(g3):
    with pytest.raises(ValueError):
        is_support_function(SphericalFunction.constant(g3, 1.0), trials=10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_random_polytope_support_on_grid_is_convex(seed):
    g = build_sphere_grid(3, 2000)
    K = random_polytope(3, 10, seed)
    assert is_support_function(SphericalFunction(g, K.support(g.nodes)), seed=seed)[0]


def test_support_body_operations(g3):
    K = cube(3, -1, 1)
    B = SupportBody(g3, K.support(g3.nodes))
    x = np.array([0.5, 0.0, -1.0])
    assert np.allclose(B.translate(x).values, (K.translate(x)).support(g3.nodes))
    assert np.allclose(B.reflect().values, B.values)
    assert np.allclose(B.scale(2).values, 2 * B.values)
    P = g3.nodes[::97]
    assert np.abs(B.support(3 * P) - 3 * K.support(P)).max() < 1e-9
