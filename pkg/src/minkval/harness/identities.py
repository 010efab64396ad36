"""Identity suite: convolution calculus, transforms and two-route agreements.

Each family is a function ``(cfg, n, instance) -> list[CheckResult]`` whose
randomness is derived from ``(cfg.seed, family, instance)`` only.
"""
from __future__ import annotations

import math

import numpy as np

from .. import grassmann as gm
from ..geometry import Polytope, cube, kappa, project_volumes
from ..measures import (area_measure, ball_polytope, cosine_kernel_transform, mixed_quermass_pair,
                        mixed_volume_fit, quermass_kubota, quermass_steiner_fit, surface_area_measure)
from ..sphere import (SphericalFunction, ZonalProfile, approximate_identity, convolve_callable,
                      convolve_zonal, convolve_zonal_at, is_support_function, pair as sphere_pair)
from ..valuations import (CroftonMeasure, apply_crofton_minkowski, crofton_value, difference_body,
                          klain_function, crofton_valuation, pi_i_constant, pi_i_crofton_measure,
                          projection_body_i_support)
from . import common
from .checks import CheckResult, derive_seed, make, se_tol, worst_pointwise

# ---------------------------------------------------------------- helpers


def _test_profile() -> ZonalProfile:
    """A smooth nonnegative zonal density, not even in t."""
    return ZonalProfile(lambda t: 0.75 * (1.0 + t) ** 2 * (1.0 + 0.5 * t), (), -1.0, "test")


def _quadrature_se(f_values: np.ndarray, grid, zeta: ZonalProfile, points: np.ndarray) -> np.ndarray:
    """``sigma_hat / sqrt(N)`` of the integrand ``f(v) zeta(u.v)`` at each point."""
    T = np.clip(points @ grid.nodes.T, -1.0, 1.0)
    integrand = zeta.eval_density(T) * f_values
    return integrand.std(axis=1, ddof=1) / math.sqrt(grid.size)


def _sub_nodes(grid, count: int, rng) -> np.ndarray:
    idx = np.sort(rng.choice(grid.size, size=min(count, grid.size), replace=False))
    return idx


def _principal_fn(frames: np.ndarray, i: int) -> np.ndarray:
    """A fixed symmetric function of the principal cosines with the reference subspace."""
    M = frames[:, :i, :]  # rows of the reference frame are the first i basis vectors
    c = np.linalg.svd(M, compute_uv=False)
    return np.sum(c ** 2, axis=1) + np.prod(c, axis=1) ** 3 + np.sin(3 * c[:, 0])


# ---------------------------------------------------------------- families


def conv_equivariance(cfg, n, inst):
    seed = derive_seed(cfg.seed, "conv.equivariance", inst)
    rng = np.random.default_rng(seed)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    K = common.body(n, seed)
    theta = gm.haar_rotations(n, 1, rng)[0]
    zeta = _test_profile()
    pts = g.nodes[_sub_nodes(g, 200, rng)]
    f = SphericalFunction(g, K.support(g.nodes))
    f_rot = SphericalFunction(g, K.rotate(theta).support(g.nodes))
    lhs = convolve_zonal_at(f_rot, zeta, pts)
    rhs = convolve_zonal_at(f, zeta, pts @ theta)
    se = np.sqrt(_quadrature_se(f_rot.values, g, zeta, pts) ** 2 + _quadrature_se(f.values, g, zeta, pts @ theta) ** 2)
    tol = np.maximum(cfg.floor, cfg.tol_mult * se)
    return [worst_pointwise("conv.equivariance", "convolution with a zonal measure commutes with rotations",
                            lhs, rhs, tol, seed, se=se,
                            witness={"family": "conv.equivariance", "n": n, "instance": inst})]


def conv_group_consistency(cfg, n, inst):
    seed = derive_seed(cfg.seed, "conv.group", inst)
    rng = np.random.default_rng(seed)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    K = common.body(n, seed)
    zeta = _test_profile()
    f = SphericalFunction(g, K.support(g.nodes))
    pts = g.nodes[_sub_nodes(g, 20, rng)]
    sphere = convolve_zonal_at(f, zeta, pts)
    sphere_se = _quadrature_se(f.values, g, zeta, pts)
    mass = zeta.total_mass(n)
    M = max(1000, cfg.gr_samples // 4)
    group, group_se = np.empty(len(pts)), np.empty(len(pts))
    e = gm.pole(n)
    for k, u in enumerate(pts):
        V = gm.sample_zonal(zeta, n, M, rng)
        mu = gm.RotationMeasure.from_sphere_sample(V, rng)
        eta = gm.rotation_mapping_pole(u, int(rng.integers(2**31)))
        pts_k = np.einsum("ab,kcb,c->ka", eta, mu.rotations, e)
        vals = mass * K.support(pts_k)
        group[k] = vals.mean()
        group_se[k] = vals.std(ddof=1) / math.sqrt(M)
    se = np.sqrt(sphere_se ** 2 + group_se ** 2)
    return [worst_pointwise("conv.group_consistency",
                            "sphere-level zonal convolution agrees with the rotation-group definition",
                            sphere, group, np.maximum(cfg.floor, cfg.tol_mult * se), seed, se=se,
                            witness={"family": "conv.group_consistency", "n": n, "instance": inst})]


def conv_adjoint(cfg, n, inst):
    seed = derive_seed(cfg.seed, "conv.adjoint", inst)
    rng = np.random.default_rng(seed)
    K, L = common.pair(n, seed)
    e = gm.pole(n)
    sigma = gm.RotationMeasure(gm.haar_rotations(n, 5, rng), rng.random(5) + 0.2)
    M = cfg.gr_samples

    def lhs_terms(eta):
        # g * sigma at eta, times f(eta e)
        pts = np.einsum("mab,kcb,c->mka", eta, sigma.rotations, e)
        conv = (L.support(pts.reshape(-1, n)).reshape(M, -1) * sigma.weights).sum(axis=1)
        return conv * K.support(eta @ e)

    def rhs_terms(eta):
        pts = np.einsum("mab,kbc,c->mka", eta, sigma.rotations, e)
        conv = (K.support(pts.reshape(-1, n)).reshape(M, -1) * sigma.weights).sum(axis=1)
        return L.support(eta @ e) * conv

    a = lhs_terms(gm.haar_rotations(n, M, rng))
    b = rhs_terms(gm.haar_rotations(n, M, rng))
    se = math.hypot(a.std(ddof=1), b.std(ddof=1)) / math.sqrt(M)
    out = [make("conv.adjoint", "pairing adjoint: <g*sigma, f> = <g, f*sigma^>", a.mean(), b.mean(),
                se_tol(cfg, se), seed, se=se, witness={"family": "conv.adjoint", "n": n, "instance": inst})]
    # sphere-level zonal version on the quadrature grid
    g = common.grid(n, min(cfg.sphere_nodes, 5000), cfg.seed)
    zeta = _test_profile()
    fK = SphericalFunction(g, K.support(g.nodes))
    fL = SphericalFunction(g, L.support(g.nodes))
    l2 = sphere_pair(convolve_zonal(fL, zeta), fK)
    r2 = sphere_pair(fL, convolve_zonal(fK, zeta.hat()))
    # symmetric quadrature kernel: exact up to rounding
    out.append(make("conv.adjoint_zonal", "pairing adjoint for zonal measures on the sphere", l2, r2,
                    1e-9 * max(1.0, abs(r2)), seed))
    return out


def conv_antihomomorphism(cfg, n, inst):
    seed = derive_seed(cfg.seed, "conv.antihom", inst)
    rng = np.random.default_rng(seed)
    K = common.body(n, seed)
    mu = gm.RotationMeasure(gm.haar_rotations(n, 6, rng), rng.random(6) + 0.1)
    sigma = gm.RotationMeasure(gm.haar_rotations(n, 7, rng), rng.random(7) + 0.1)
    e = gm.pole(n)
    e1 = np.eye(n)[0]

    def F(R):
        return K.support(R @ e) + np.einsum("kii->k", R) * K.support(R @ e1)

    A = mu.convolve(sigma).hat()
    B = sigma.hat().convolve(mu.hat())
    out = [make("conv.antihomomorphism_exact", "hat reverses convolution order (atomic measures)",
                A.integrate(F), B.integrate(F), 1e-10 * max(1.0, abs(B.integrate(F))), seed)]
    M = cfg.gr_samples
    pm, ps = mu.weights / mu.weights.sum(), sigma.weights / sigma.weights.sum()
    a = mu.rotations[rng.choice(6, M, p=pm)]
    b = sigma.rotations[rng.choice(7, M, p=ps)]
    lhs = F(np.transpose(a @ b, (0, 2, 1)))
    a2 = mu.rotations[rng.choice(6, M, p=pm)]
    b2 = sigma.rotations[rng.choice(7, M, p=ps)]
    rhs = F(np.transpose(b2, (0, 2, 1)) @ np.transpose(a2, (0, 2, 1)))
    scale = mu.weights.sum() * sigma.weights.sum()
    se = scale * math.hypot(lhs.std(ddof=1), rhs.std(ddof=1)) / math.sqrt(M)
    out.append(make("conv.antihomomorphism_mc", "hat reverses convolution order (independent draws)",
                    scale * lhs.mean(), scale * rhs.mean(), se_tol(cfg, se), seed, se=se,
                    witness={"family": "conv.antihomomorphism", "n": n, "instance": inst}))
    return out


def hat_lemma(cfg, n, inst):
    seed = derive_seed(cfg.seed, "hat.lemma", inst)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(1, n):
        R = gm.haar_rotations(n, 1000, rng)
        ref = np.eye(n)[:, :i]
        a = _principal_fn(np.einsum("kba,bi->kai", R, ref), i)
        b = _principal_fn(np.einsum("kab,bi->kai", R, ref), i)
        out.append(worst_pointwise(f"hat.invariant_function.i{i}",
                                   "hat fixes functions invariant under the stabiliser of the reference subspace",
                                   a, b, np.full(len(a), 1e-9), seed,
                                   witness={"family": "hat.lemma", "n": n, "instance": inst}))
    return out


def hat_zonal(cfg, n, inst):
    seed = derive_seed(cfg.seed, "hat.zonal", inst)
    rng = np.random.default_rng(seed)
    e = gm.pole(n)
    R = gm.haar_rotations(n, 1000, rng)
    prof = lambda t: np.cos(3 * t) + t ** 2  # noqa: E731
    a = prof(np.einsum("kba,b->ka", R, e) @ e)
    b = prof(np.einsum("kab,b->ka", R, e) @ e)
    out = [worst_pointwise("hat.zonal_function", "hat fixes zonal functions", a, b, np.full(len(a), 1e-12), seed)]
    # group level: f * mu versus f * mu^ for a lifted zonal measure, both
    # evaluated on the same lift so the standard error is that of the paired difference
    K = common.body(n, seed)
    zeta = _test_profile()
    M = max(1000, cfg.gr_samples // 4)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    pts = g.nodes[_sub_nodes(g, 10, rng)]
    lhs, rhs, se = [], [], []
    for u in pts:
        eta = gm.rotation_mapping_pole(u, int(rng.integers(2**31)))
        mu = gm.RotationMeasure.from_sphere_sample(gm.sample_zonal(zeta, n, M, rng), rng)
        v1 = K.support(np.einsum("ab,kcb,c->ka", eta, mu.rotations, e))
        v2 = K.support(np.einsum("ab,kbc,c->ka", eta, mu.rotations, e))
        lhs.append(v1.mean())
        rhs.append(v2.mean())
        se.append((v1 - v2).std(ddof=1) / math.sqrt(M))
    se = np.asarray(se)
    out.append(worst_pointwise("hat.zonal_measure", "convolution with a zonal measure equals convolution with its hat",
                               lhs, rhs, np.maximum(cfg.floor, cfg.tol_mult * se), seed, se=se,
                               witness={"family": "hat.zonal", "n": n, "instance": inst}))
    return out


def dirac(cfg, n, inst):
    seed = derive_seed(cfg.seed, "dirac", inst)
    rng = np.random.default_rng(seed)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    K = common.body(n, seed)
    f = SphericalFunction(g, K.support(g.nodes))
    h = convolve_zonal(f, ZonalProfile.dirac())
    out = [worst_pointwise("dirac.sphere", "convolution with the point mass at the pole is the identity",
                           h.values, f.values, np.full(g.size, 1e-12), seed)]
    pts = g.nodes[_sub_nodes(g, 50, rng)]
    e = gm.pole(n)
    vals = []
    for u in pts:
        eta = gm.rotation_mapping_pole(u, int(rng.integers(2**31)))
        H = gm.stabilizer_rotations(n, 64, rng)
        vals.append(K.support(np.einsum("ab,kcb,c->ka", eta, H, e)).mean())
    out.append(worst_pointwise("dirac.group", "lifted point mass at the pole acts as the identity",
                               np.asarray(vals), K.support(pts), np.full(len(pts), 1e-12), seed))
    return out


def approx_identity(cfg, n, inst):
    seed = derive_seed(cfg.seed, "approx_identity", inst)
    g = common.grid(n, min(cfg.sphere_nodes, 2000), cfg.seed)
    target = g.nodes[:, 0]
    gaps = {}
    out = []
    for m in (4, 8, 16):
        zeta = approximate_identity(m, n)
        conv = convolve_callable(lambda X: X[:, 0], zeta, g.nodes)
        gaps[m] = float(np.abs(conv - target).max())
        out.append(make(f"approx_identity.mass.m{m:02d}", "approximate identity has unit mass",
                        zeta.total_mass(n), 1.0, 1e-10, seed))
        t_out = math.cos(1.0 / m) - 1e-6
        out.append(make(f"approx_identity.support.m{m:02d}", "approximate identity vanishes off its cap",
                        float(np.abs(zeta.eval_density(np.linspace(-1, t_out, 200))).max()), 0.0, 0.0, seed))
    for a, b in ((4, 8), (8, 16)):
        out.append(make(f"approx_identity.decreasing.m{a:02d}_m{b:02d}",
                        "sup |g * f_m - g| decreases as the cap shrinks", gaps[b], gaps[a], 0.0, seed,
                        relation="lt", witness={"family": "approx_identity", "gaps": gaps}))
    return out


def _signed_density(n, i, k, rng):
    G = gm.sample_grassmann(n, i, 1, int(rng.integers(2**31))).frames[0]
    alpha = -0.4 + 0.2 * k
    beta = 1.0 + 0.3 * k

    def rule(F):
        return alpha + beta * gm.cosine_matrix(F, G[None])[:, 0] ** 2

    return gm.GrassmannFunction(rule, n, i)


def klain_cosine(cfg, n, inst):
    """Klain function of a Crofton valuation equals the cosine transform of its measure."""
    seed = derive_seed(cfg.seed, "klain.cosine", inst)
    rng = np.random.default_rng(seed)
    out = []
    for i in cfg.degrees if n == cfg.n else range(1, n):
        S = common.gr_sample(n, i, cfg.gr_samples, derive_seed(cfg.seed, "klain.sample", i))
        for k in range(5):
            f = _signed_density(n, i, k, rng)
            sigma = CroftonMeasure(S.reweighted(S.weights * f(S.frames)), symmetrize=False)
            phi = crofton_valuation(sigma)
            C = gm.cosine_transform(f, S)
            Fs = gm.sample_grassmann(n, i, 50, int(rng.integers(2**31)))
            lhs, rhs, se, indep = [], [], [], []
            for j, F in enumerate(Fs.frames):
                E = gm.Subspace(F)
                k1 = klain_function(phi, E, Polytope(rng.standard_normal((i + 3, i)) @ F.T))
                if j < 10:
                    k2 = klain_function(phi, E, Polytope(rng.standard_normal((i + 3, i)) @ F.T))
                    indep.append(abs(k1 - k2) / max(abs(k1), 1e-300))
                lhs.append(k1)
                rhs.append(float(C(F[None])[0]))
                se.append(float(C.se(F[None])[0]))
            se = np.asarray(se)
            out.append(worst_pointwise(f"klain.cosine_transform.i{i}.m{k}",
                                       "Klain function of a Crofton valuation is the cosine transform of its measure",
                                       lhs, rhs, np.maximum(cfg.floor, cfg.tol_mult * se), seed, se=se,
                                       witness={"family": "klain.cosine", "n": n, "instance": inst, "i": i, "measure": k},
                                       note="signed measure"))
            out.append(make(f"klain.probe_independence.i{i}.m{k}", "Klain function does not depend on the probe",
                            max(indep), 0.0, 1e-6, seed, note="relative difference of two probes, 10 subspaces"))
    return out


def cosine_selfadjoint(cfg, n, inst, kernel=None, id_prefix="cosine.selfadjoint"):
    """``<C f, g> = <f, C g>`` with independent outer and inner samples."""
    seed = derive_seed(cfg.seed, "cosine.selfadjoint", inst)
    rng = np.random.default_rng(seed)
    kernel = kernel or gm.cosine_matrix
    out = []
    K = Polytope(common.body(n, seed).vertices * np.r_[2.0, np.ones(n - 1)])
    L = Polytope(common.body(n, seed + 1).vertices * np.r_[np.ones(n - 1), 2.0])
    outer = max(200, cfg.gr_samples // 10)
    inner = max(500, cfg.gr_samples // 5)
    for i in cfg.degrees if n == cfg.n else range(1, n):
        def f(Fr):
            return project_volumes(K.vertices, Fr)

        def g(Fr):
            return project_volumes(L.vertices, Fr)

        def double(a_fn, b_fn):
            Fo = gm.sample_grassmann(n, i, outer, int(rng.integers(2**31))).frames
            Fi = gm.sample_grassmann(n, i, inner, int(rng.integers(2**31))).frames
            a, b = a_fn(Fo), b_fn(Fi)
            Kmat = np.vstack([kernel(Fo[s:s + 256], Fi) for s in range(0, outer, 256)])
            t_outer = a * (Kmat @ b) / inner
            t_inner = b * (a @ Kmat) / outer
            est = t_outer.mean()
            se = math.sqrt(t_outer.var(ddof=1) / outer + t_inner.var(ddof=1) / inner)
            return est, se

        lhs, se1 = double(g, f)   # <C f, g>: outer g(F) (C f)(F)
        rhs, se2 = double(f, g)   # <f, C g>
        se = math.hypot(se1, se2)
        out.append(make(f"{id_prefix}.i{i}", "cosine transform is self-adjoint", lhs, rhs, se_tol(cfg, se), seed,
                        se=se, witness={"family": "cosine.selfadjoint", "n": n, "instance": inst, "i": i,
                                        "bodies": [K.vertices.tolist(), L.vertices.tolist()]}))
    return out


def perturbed_cosine_kernel(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``|cos(E, F)| (1 + 3 x(E))`` with ``x(E) = |P_E e_1|^2``: no longer symmetric,
    so the self-adjointness check must fail on it."""
    x = np.sum(A[:, 0, :] ** 2, axis=1)
    return gm.cosine_matrix(A, B) * (1.0 + 3.0 * x)[:, None]


def radon_lifted(cfg, n, inst):
    """Radon transform versus convolution with the uniform measure on a subsphere."""
    seed = derive_seed(cfg.seed, "radon.lifted", inst)
    rng = np.random.default_rng(seed)
    K = common.body(n, seed)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    idx = _sub_nodes(g, 20, rng)
    pts = g.nodes[idx]
    out = []
    for i in range(1, n):
        f = gm.GrassmannFunction(lambda Fr: project_volumes(K.vertices, Fr), n, i)
        F = gm.radon_frames(pts, i, cfg.inner, seed)
        v = f(F.reshape(-1, n, i)).reshape(len(pts), cfg.inner)
        radon = v.mean(axis=1)
        radon_se = v.std(axis=1, ddof=1) / math.sqrt(cfg.inner)
        M = max(1000, cfg.gr_samples // 10)
        lifted, lifted_se = np.empty(len(pts)), np.empty(len(pts))
        for k, u in enumerate(pts):
            w = rng.standard_normal((M, i))
            w /= np.linalg.norm(w, axis=1, keepdims=True)
            V = np.zeros((M, n))
            V[:, :i] = w
            eta = gm.rotation_mapping_pole(u, int(rng.integers(2**31)))
            lifted[k], lifted_se[k] = gm.lifted_convolution(f, V, eta, rng)
        se = np.hypot(radon_se, lifted_se)
        out.append(worst_pointwise(f"radon.lifted_convolution.i{i}",
                                   "Radon transform equals convolution with the uniform measure on a subsphere",
                                   radon, lifted, np.maximum(cfg.floor, cfg.tol_mult * se), seed, se=se,
                                   witness={"family": "radon.lifted", "n": n, "instance": inst, "i": i}))
    return out


def pi_i_two_route(cfg, n, inst):
    """``c R_{n-i}(vol_i^perp(K|.))`` against ``V_i(K|u^perp)`` measured directly."""
    seed = derive_seed(cfg.seed, "pi_i.two_route", inst)
    K = cube(n) if inst == 0 else common.body(n, seed)
    g = common.grid(n, min(cfg.sphere_nodes, 1000), cfg.seed)
    out = []
    for i in cfg.degrees if n == cfg.n else range(1, n):
        c = pi_i_constant(n, i)
        f = gm.perp_transform(gm.GrassmannFunction(lambda Fr: project_volumes(K.vertices, Fr), n, i))
        R = gm.radon_to_sphere(f, n - i, g, cfg.inner, seed)
        direct, _ = projection_body_i_support(K, i, g.nodes)
        se = c * R.se
        out.append(worst_pointwise(f"pi_i.radon_route.i{i}", "Pi_i support as a Radon transform of projection functions",
                                   c * R.values, direct, np.maximum(cfg.floor, cfg.tol_mult * se), seed, se=se,
                                   witness={"family": "pi_i.two_route", "n": n, "instance": inst, "i": i}))
    return out


def crofton_pi_i(cfg, n, inst):
    """Support function of Pi_i from its Crofton measure, node by node."""
    seed = derive_seed(cfg.seed, "crofton.pi_i", inst)
    K = cube(n) if inst == 0 else common.body(n, seed)
    g = common.grid(n, min(cfg.sphere_nodes, 2000), cfg.seed)
    out = []
    for i in cfg.degrees if n == cfg.n else range(1, n):
        sigma = pi_i_crofton_measure(n, i, min(cfg.inner, 256), seed)
        h = apply_crofton_minkowski(sigma, K, g)
        direct, _ = projection_body_i_support(K, i, g.nodes)
        out.append(worst_pointwise(f"crofton.pi_i.i{i}", "Minkowski valuation from its Crofton measure reproduces Pi_i",
                                   h.values, direct, np.maximum(cfg.floor, cfg.tol_mult * h.se), seed, se=h.se,
                                   witness={"family": "crofton.pi_i", "n": n, "instance": inst, "i": i}))
        ok, wit = is_support_function(h, trials=1000, tol=1e-9, seed=seed)
        out.append(make(f"crofton.pi_i.support_function.i{i}", "output is a support function",
                        0.0 if ok else 1.0, 0.0, 0.0, seed, witness=wit))
    return out


def mixed_volume_oracle(cfg, n, inst):
    seed = derive_seed(cfg.seed, "mixed.polynomial", inst)
    K, L = common.pair(n, seed)
    coef, resid = mixed_volume_fit(K, L)
    out = [make("mixed.polynomial_fit", "volume of aK + bL is a homogeneous polynomial", resid, 0.0, 1e-6, seed)]
    w = mixed_quermass_pair(K, L, n - 1)
    out.append(make("mixed.area_measure_route", "mixed volume from the surface area measure",
                    w, coef[1], 0.01 * abs(coef[1]), seed, note="1% budget",
                    witness={"family": "mixed.polynomial", "n": n, "instance": inst}))
    w2 = mixed_quermass_pair(L, K, n - 1)
    out.append(make("mixed.area_measure_route_swapped", "mixed volume from the surface area measure (roles swapped)",
                    w2, coef[n - 1], 0.01 * abs(coef[n - 1]), seed, note="1% budget"))
    return out


def kubota_steiner(cfg, n, inst):
    seed = derive_seed(cfg.seed, "kubota.steiner", inst)
    K = cube(n) if inst == 0 else common.body(n, seed)
    q = quermass_steiner_fit(K)
    out = []
    if inst == 0 and n == 3:
        for j, target in enumerate((1.0, 2.0, math.pi, 4 * math.pi / 3)):
            out.append(make(f"kubota.cube_target.W{j}", "quermassintegrals of the unit cube", q[j], target,
                            0.01 * target, seed, note="1% budget"))
    for i in range(1, n):
        S = common.gr_sample(n, i, cfg.gr_samples, derive_seed(cfg.seed, "kubota.sample", i))
        val, se = quermass_kubota(K, i, S)
        tol = max(0.01 * abs(q[n - i]), cfg.tol_mult * se)
        out.append(make(f"kubota.steiner.W{n - i}", "Kubota projection average agrees with the Steiner fit",
                        val, q[n - i], tol, seed, se=se, witness={"family": "kubota.steiner", "n": n, "instance": inst}))
    return out


def steiner_area_measures(cfg, n, inst):
    seed = derive_seed(cfg.seed, "steiner.area", inst)
    from scipy.spatial import ConvexHull

    K = cube(n) if inst == 0 else common.body(n, seed)
    masses = [area_measure(K, i).total_mass() for i in range(n)]
    Q, _ = ball_polytope(n, 3000 if n == 3 else 1500)
    out = []
    for eps in (0.1, 0.5, 1.0):
        pts = (K.vertices[:, None, :] + eps * Q[None]).reshape(-1, n)
        lhs = ConvexHull(pts).area
        rhs = sum(eps ** (n - 1 - i) * math.comb(n - 1, i) * masses[i] for i in range(n))
        out.append(make(f"steiner.area_measures.eps{eps:g}", "surface area of parallel bodies from area measures",
                        lhs, rhs, 0.01 * rhs, seed, note="1% budget"))
    return out


def kiderlen_difference(cfg, n, inst):
    seed = derive_seed(cfg.seed, "kiderlen.d", inst)
    g = common.grid(n, cfg.sphere_nodes, cfg.seed)
    K = common.body(n, seed)
    f = SphericalFunction(g, K.support(g.nodes))
    conv = convolve_zonal(f, ZonalProfile(None, ((1.0, 1.0), (-1.0, 1.0))))
    D = difference_body(K)
    return [worst_pointwise("kiderlen.difference_body", "difference body as convolution with two antipodal atoms",
                            conv.values, D.support(g.nodes), np.full(g.size, 1e-9), seed)]


def cauchy_projection(cfg, n, inst):
    """Projection body from surface area atoms versus direct projection."""
    seed = derive_seed(cfg.seed, "cauchy", inst)
    rng = np.random.default_rng(seed)
    K = cube(n) if inst == 0 else common.body(n, seed)
    U = rng.standard_normal((1000, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    atoms = cosine_kernel_transform(surface_area_measure(K), U)
    direct, _ = projection_body_i_support(K, n - 1, U)
    tol = 1e-9 if inst == 0 else 1e-6 * np.abs(direct)
    return [worst_pointwise("cauchy.projection_body", "projection body from the surface area measure",
                            atoms, direct, np.broadcast_to(tol, direct.shape), seed)]


FAMILIES = {
    "conv.equivariance": (conv_equivariance, lambda c: 3),
    "conv.group_consistency": (conv_group_consistency, lambda c: 2),
    "conv.adjoint": (conv_adjoint, lambda c: 2),
    "conv.antihomomorphism": (conv_antihomomorphism, lambda c: 2),
    "hat.lemma": (hat_lemma, lambda c: 1),
    "hat.zonal": (hat_zonal, lambda c: 1),
    "dirac": (dirac, lambda c: 1),
    "approx_identity": (approx_identity, lambda c: 1),
    "klain.cosine": (klain_cosine, lambda c: 1),
    "cosine.selfadjoint": (cosine_selfadjoint, lambda c: 1),
    "radon.lifted": (radon_lifted, lambda c: 2),
    "pi_i.two_route": (pi_i_two_route, lambda c: 4),
    "crofton.pi_i": (crofton_pi_i, lambda c: 1 + max(1, c.body_count // 2)),
    "mixed.polynomial": (mixed_volume_oracle, lambda c: 3),
    "kubota.steiner": (kubota_steiner, lambda c: 1 + c.body_count),
    "steiner.area": (steiner_area_measures, lambda c: 2),
    "kiderlen.d": (kiderlen_difference, lambda c: 2),
    "cauchy": (cauchy_projection, lambda c: 1 + c.body_count),
}
