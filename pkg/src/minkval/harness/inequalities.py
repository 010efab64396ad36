"""Inequality suite: symmetry of mixed quermassintegrals under even Minkowski
valuations, the radial factor, and Brunn-Minkowski type inequalities.

Operators are referred to by short names: ``pi`` is the projection body
(degree n-1), ``pi<i>`` the projection body of order i and ``lambda<i>`` the
map ``K -> V_i(K) B``.
"""
from __future__ import annotations

import math

import numpy as np

from ..geometry import Polytope, kappa, zonotope_volume
from ..hull import hull_volume
from ..measures import ball_polytope, area_measure, mixed_quermass_pair, surface_area_measure
from ..valuations import intrinsic_volume, projection_body_generators, projection_body_i_support
from . import common
from .checks import derive_seed, make, rel_or_se_tol, se_tol, worst_pointwise

# relative budget for quantities that go through arc-discretised area measures
AREA_REL = 1e-3


def _operators(n: int) -> list[tuple[str, int]]:
    if n == 3:
        return [("pi1", 1), ("pi2", 2), ("lambda1", 1), ("lambda2", 2)]
    return [("pi2", 2), ("pi3", 3), ("lambda2", 2), ("lambda3", 3)]


def _radial(name: str, n: int, i: int) -> float:
    """``r(Phi_i)`` with ``Phi_i B = r B``."""
    if name.startswith("pi"):
        return math.comb(n - 1, i) * kappa(n - 1) / kappa(n - 1 - i)
    return math.comb(n, i) * kappa(n) / kappa(n - i)


def op_support(name: str, i: int, K: Polytope, U: np.ndarray) -> np.ndarray:
    """Exact support function of ``Phi_i K`` at the rows of ``U``."""
    U = np.atleast_2d(U)
    n = K.dim
    if name.startswith("lambda"):
        return np.full(len(U), intrinsic_volume(K, i))
    if i == n - 1:
        Z = projection_body_generators(K)
        return 0.5 * np.abs(U @ Z.T).sum(axis=1)
    return projection_body_i_support(K, i, U)[0]


def has_top_quermass(name: str, i: int, n: int) -> bool:
    return name.startswith("lambda") or i == n - 1


def top_quermass(name: str, i: int, K: Polytope) -> float:
    """``W_{n-1-i}(Phi_i K)`` where it is available in closed form."""
    n = K.dim
    if name.startswith("lambda"):
        return kappa(n) * intrinsic_volume(K, i) ** (i + 1)
    if i == n - 1:
        return zonotope_volume(projection_body_generators(K))
    raise ValueError(f"no closed form for {name} of degree {i} in dimension {n}")


def _mixed(K: Polytope, name: str, i: int, L: Polytope) -> float:
    """``W_{n-1-i}(K, Phi_i L) = (1/n) int h(Phi_i L, u) dS_i(K, u)``."""
    S = area_measure(K, i)
    return float(S.weights @ op_support(name, i, L, S.directions)) / K.dim


def _exact_area(i: int, n: int) -> bool:
    # masses of S_i are exact in every order, but integrating a support
    # function is exact only against the facet atoms of S_{n-1}; lower orders
    # spread each normal cone over quadrature points
    return i == n - 1


# ---------------------------------------------------------------- families


def symmetry(cfg, n, inst):
    """``W_{n-1-i}(K, Phi_i L) = W_{n-1-i}(L, Phi_i K)``."""
    seed = derive_seed(cfg.seed, "symmetry", inst)
    K, L = common.pair(n, seed)
    out = []
    for name, i in _operators(n):
        a = _mixed(K, name, i, L)
        b = _mixed(L, name, i, K)
        out.append(make(f"symmetry.{name}", "mixed quermassintegral symmetry under an even Minkowski valuation",
                        a, b, rel_or_se_tol(cfg, b, 0.01), seed, note="1% budget",
                        witness={"family": "symmetry", "n": n, "instance": inst, "op": name}))
    return out


def radial_ball(cfg, n, inst):
    """``Phi_i Q`` is a ball of radius ``r(Phi_i)`` up to the roundness of ``Q``.

    ``Q`` is a polytope with ``(1-delta) B <= Q <= (1+delta) B``, so by
    monotonicity and homogeneity its image lies between ``(1-delta)^i r B``
    and ``(1+delta)^i r B``; that band is the pointwise tolerance.
    """
    seed = derive_seed(cfg.seed, "radial.ball", inst)
    V, delta = ball_polytope(n, 600)
    Q = Polytope(V)
    U = common.grid(n, min(cfg.sphere_nodes, 500 if n == 3 else 100), cfg.seed).nodes
    out = []
    for name, i in _operators(n):
        if not name.startswith("pi"):
            continue
        h = op_support(name, i, Q, U)
        r = _radial(name, n, i)
        band = r * max((1 + delta) ** i - 1, 1 - (1 - delta) ** i)
        # the coarse ball polytope in R^4 only supports the Hausdorff band
        mean_tol = 0.01 * r if n == 3 else band
        out.append(make(f"radial.ball.{name}", "image of the ball is the ball of radius r", float(h.mean()), r,
                        mean_tol, seed, note="mean over directions"))
        out.append(worst_pointwise(f"radial.ball_roundness.{name}", "image of the ball is round", h,
                                   np.full(len(h), r), np.full(len(h), band), seed,
                                   note=f"band from Hausdorff distance {delta:.3g}",
                                   witness={"family": "radial.ball", "n": n}))
    return out


def radial_factor(cfg, n, inst):
    """``W_{n-1}(Phi_i K) = r(Phi_i) W_{n-i}(K)`` via the mean width of ``Phi_i K``."""
    seed = derive_seed(cfg.seed, "radial.factor", inst)
    K = common.body(n, seed)
    S = common.gr_sample(n, 1, cfg.gr_samples, derive_seed(cfg.seed, "radial.lines", 0))
    U = S.frames[:, :, 0]
    out = []
    for name, i in _operators(n):
        if not name.startswith("pi"):
            continue
        h = op_support(name, i, K, U)
        lhs = kappa(n) * float(h.mean())
        se = kappa(n) * float(h.std(ddof=1)) / math.sqrt(len(h))
        W = area_measure(K, i).total_mass() / n
        rhs = _radial(name, n, i) * W
        out.append(make(f"radial.factor.{name}", "W_{n-1}(Phi_i K) = r(Phi_i) W_{n-i}(K)", lhs, rhs,
                        rel_or_se_tol(cfg, rhs, 0.01, se), seed, se=se, note="mean width over random lines",
                        witness={"family": "radial.factor", "n": n, "instance": inst, "op": name}))
    return out


def brunn_minkowski(cfg, n, inst):
    """``W(Phi(K+L))^{1/i(i+1)} >= W(Phi K)^{1/i(i+1)} + W(Phi L)^{1/i(i+1)}`` for degrees ``i >= 2``.

    Only operators whose image quermassintegral has a closed form take part,
    which leaves out ``Pi_2`` in R^4.
    """
    seed = derive_seed(cfg.seed, "bm", inst)
    rng = np.random.default_rng(seed)
    # in R^4 the projection body of K + L is a zonotope whose volume sums over
    # 4-subsets of its facets, so the pair is kept small there
    K, L = common.pair(n, seed) if n == 3 else common.pair(n, seed, 6, 8)
    common.require_interior(K)
    common.require_interior(L)
    KL = Polytope((K.vertices[:, None, :] + L.vertices[None]).reshape(-1, n)).pruned()
    H = Polytope(0.7 * K.vertices + rng.standard_normal(n))
    KH = Polytope((K.vertices[:, None, :] + H.vertices[None]).reshape(-1, n)).pruned()
    out = []
    for name, i in _operators(n):
        if i < 2 or not has_top_quermass(name, i, n):
            continue
        p = 1.0 / (i * (i + 1))

        def side(A, B, AB):
            return top_quermass(name, i, AB) ** p, top_quermass(name, i, A) ** p + top_quermass(name, i, B) ** p

        lhs, rhs = side(K, L, KL)
        # both sides are volumes or area-measure masses, exact up to rounding
        tol = se_tol(cfg)
        wit = {"family": "bm", "n": n, "instance": inst, "op": name,
               "bodies": [K.vertices.tolist(), L.vertices.tolist()]}
        out.append(make(f"bm.{name}.inequality", "Brunn-Minkowski inequality for Phi_i", lhs, rhs, tol, seed,
                        relation="geq", witness=wit))
        # equality analysis needs Phi_i K to have interior
        U = common.grid(n, 200, cfg.seed).nodes[:100]
        width = float((op_support(name, i, K, U) + op_support(name, i, K, -U)).min())
        if width <= se_tol(cfg):
            out.append(make(f"bm.{name}.equality_skipped", "image body lacks interior; equality analysis skipped",
                            width, 0.0, 0.0, seed, relation="geq", note="skipped"))
            continue
        out.append(make(f"bm.{name}.strict", "strict inequality for non-homothetic bodies", lhs, rhs, tol, seed,
                        relation="gt", witness=wit))
        lh, rh = side(K, H, KH)
        out.append(make(f"bm.{name}.homothetic", "equality for homothetic bodies", (lh - rh) / rh, 0.0, 1e-3, seed,
                        note="relative gap, L = 0.7 K + x"))
    return out


def minkowski_classical(cfg, n, inst):
    """Minkowski's inequality and Brunn-Minkowski for quermassintegrals and mixed volumes."""
    seed = derive_seed(cfg.seed, "classical", inst)
    rng = np.random.default_rng(seed)
    K, L = common.pair(n, seed)
    M = common.body(n, seed + 1)
    H = Polytope(0.7 * K.vertices + rng.standard_normal(n))
    out = []

    def W_mixed(A, B, j):
        # W_j(A, B) with j = n - 1 - order
        return mixed_quermass_pair(A, B, n - 1 - j)

    def W(A, j):
        return hull_volume(A.vertices) if j == 0 else area_measure(A, n - j).total_mass() / n

    def msum(A, B):
        return Polytope((A.vertices[:, None, :] + B.vertices[None]).reshape(-1, n)).pruned()

    for j in range(n - 1):
        exact = j == 0 or _exact_area(n - 1 - j, n)
        for label, B in (("pair", L), ("homothetic", H)):
            lhs = W_mixed(K, B, j) ** (n - j)
            rhs = W(K, j) ** (n - j - 1) * W(B, j)
            tol = 1e-9 * rhs if exact else AREA_REL * rhs
            rel = "geq" if label == "pair" else "approx"
            out.append(make(f"classical.minkowski.W{j}.{label}", "Minkowski inequality for mixed quermassintegrals",
                            lhs, rhs, tol if label == "pair" else max(tol, 1e-3 * rhs), seed, relation=rel))
        for label, B in (("pair", L), ("homothetic", H)):
            q = 1.0 / (n - j)
            lhs = W(msum(K, B), j) ** q
            rhs = W(K, j) ** q + W(B, j) ** q
            tol = 1e-9 * rhs  # volumes and area-measure masses only
            rel = "geq" if label == "pair" else "approx"
            out.append(make(f"classical.bm_quermass.W{j}.{label}",
                            "Brunn-Minkowski inequality for quermassintegrals", lhs, rhs,
                            tol if label == "pair" else max(tol, 1e-3 * rhs), seed, relation=rel))
    # V(K+L[n-1], M)^{1/(n-1)} >= ... with one slot filled by M
    q = 1.0 / (n - 1)
    V = lambda A: mixed_quermass_pair(A, M, n - 1)  # noqa: E731
    lhs = V(msum(K, L)) ** q
    rhs = V(K) ** q + V(L) ** q
    out.append(make("classical.bm_mixed", "Brunn-Minkowski inequality for mixed volumes with a fixed body",
                    lhs, rhs, 1e-9 * rhs, seed, relation="geq"))
    return out


def interior(cfg, n, inst):
    """Operators map bodies with interior to bodies with interior."""
    seed = derive_seed(cfg.seed, "interior", inst)
    K = common.body(n, seed)
    U = common.grid(n, min(cfg.sphere_nodes, 2000), cfg.seed).nodes
    half = U[: len(U) // 2]
    out = []
    for name, i in _operators(n):
        w = op_support(name, i, K, half) + op_support(name, i, K, -half)
        out.append(make(f"interior.{name}", "image body has non-empty interior", float(w.min()), 0.0,
                        se_tol(cfg), seed, relation="gt", note="minimum width over directions"))
    return out


def surface_sanity(cfg, n, inst):
    """Facet atoms of the surface area measure sum to zero and to the surface area."""
    seed = derive_seed(cfg.seed, "surface", inst)
    K = common.body(n, seed)
    S = surface_area_measure(K)
    centroid = float(np.linalg.norm(S.weights @ S.directions))
    return [make("surface.closed", "surface area measure has zero centroid", centroid, 0.0,
                 1e-10 * S.total_mass(), seed)]


FAMILIES = {
    "symmetry": (symmetry, lambda c: c.body_count),
    "radial.ball": (radial_ball, lambda c: 1),
    "radial.factor": (radial_factor, lambda c: c.body_count),
    "bm": (brunn_minkowski, lambda c: c.pair_count),
    "classical": (minkowski_classical, lambda c: max(1, c.body_count // 2)),
    "interior": (interior, lambda c: max(1, c.body_count // 4)),
    "surface": (surface_sanity, lambda c: max(1, c.body_count // 4)),
}
