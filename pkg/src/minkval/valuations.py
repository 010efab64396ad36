"""Real and Minkowski valuations generated by measures on Grassmannians.

A Minkowski valuation of degree ``i`` with Crofton measure ``sigma`` has
support function ``h(Phi K, eta e_n) = int vol_i(K | eta E) dsigma(E)``; the
measure must be invariant under rotations fixing the pole ``e_n`` for this
to be independent of the choice of ``eta``.  Sampled measures are made
invariant on the fly by composing with random stabiliser rotations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .geometry import (Ball, Polytope, intrinsic_volumes_of_projection, kappa, minkowski_combine,
                       project_volumes, reflect, zonotope)
from .grassmann import (GrassmannFunction, GrassmannSample, Subspace, _stratified_lines3, cosine_matrix,
                        load_sample, perp_frames, pole_rotations, radon_to_sphere, reference_subspace,
                        sample_grassmann)
from .hull import affine_rank, hull_volume, intrinsic_volumes_lowdim
from .measures import (DegenerateBodyError, area_measure, quermass_from_area_measures,
                       quermass_steiner_fit, surface_area_measure)
from .sphere import SphereGrid, SphericalFunction, SupportBody

__all__ = [
    "CroftonMeasure",
    "RealValuation",
    "MinkowskiValuation",
    "FromCrofton",
    "ProjectionBody",
    "ProjectionBodyI",
    "DifferenceBody",
    "LambdaI",
    "MeanSectionEven",
    "valuation_from_config",
    "pi_i_crofton_measure",
    "pi_i_constant",
    "crofton_value",
    "crofton_value_se",
    "crofton_valuation",
    "apply_crofton_minkowski",
    "crofton_support_at",
    "projection_body",
    "projection_body_generators",
    "projection_body_i",
    "projection_body_i_support",
    "difference_body",
    "lambda_i",
    "intrinsic_volume",
    "mean_section_even",
    "klain_function",
    "associated_body",
    "associated_body_at",
]


# ---------------------------------------------------------------- measures

@dataclass(frozen=True, eq=False)
class CroftonMeasure:
    """Sampled signed measure on Gr_{i,n} used as a Crofton measure.

    With ``symmetrize`` every evaluation at a direction composes the sample
    with a fresh random rotation fixing the pole (seeded by ``seed`` and the
    node index).
    """

    sample: GrassmannSample
    symmetrize: bool = True
    seed: int = 0

    @property
    def degree(self) -> int:
        return self.sample.i

    @property
    def n(self) -> int:
        return self.sample.n

    def total_variation(self) -> float:
        return self.sample.total_variation()

    def total_mass(self) -> float:
        return self.sample.total_mass()


def pi_i_constant(n: int, i: int) -> float:
    """Total mass of the Crofton measure of ``Pi_i``.

    Kubota's formula inside ``u^perp`` gives
    ``V_i(K|u^perp) = C(n-1,i) kappa_{n-1} / (kappa_i kappa_{n-1-i}) * E vol_i(K|E)``
    with ``E`` uniform among i-subspaces of ``u^perp``.
    """
    return math.comb(n - 1, i) * kappa(n - 1) / (kappa(i) * kappa(n - 1 - i))


def pi_i_crofton_measure(n: int, i: int, count: int = 64, seed: int = 0) -> CroftonMeasure:
    """Crofton measure of ``Pi_i``: i-subspaces of the pole's complement.

    Each subspace is the complement of ``span{e_n}`` plus a random
    (n-i-1)-frame of ``e_n^perp``.  For lines in R^3 the frames are
    stratified over the half circle; in R^4 the frame (or its complement in
    ``e_n^perp``) runs over a randomly rotated Fibonacci half-sphere.  Total
    mass is :func:`pi_i_constant`.
    """
    if not 1 <= i <= n - 1:
        raise ValueError("need 1 <= i <= n-1")
    c = pi_i_constant(n, i)
    rng = np.random.default_rng(seed)
    k = n - i - 1
    if k == 0:
        frames = np.eye(n)[None, :, : n - 1]
        return CroftonMeasure(GrassmannSample(frames, [c]), True, seed)
    if n == 3 and k == 1:
        phi = math.pi * (np.arange(count) + rng.random()) / count
        W = np.zeros((count, n, 1))
        W[:, 0, 0] = np.cos(phi)
        W[:, 1, 0] = np.sin(phi)
    elif n == 4:
        V = _stratified_lines3(count, rng)[:, :, None]
        W = np.zeros((count, n, k))
        W[:, : n - 1, :] = V if k == 1 else perp_frames(V)
    else:
        g = rng.standard_normal((count, n - 1, k))
        q, r = np.linalg.qr(g)
        W = np.zeros((count, n, k))
        W[:, : n - 1, :] = q
    span = np.concatenate([np.broadcast_to(np.eye(n)[:, n - 1:], (count, n, 1)), W], axis=2)
    return CroftonMeasure(GrassmannSample(perp_frames(span), np.full(count, c / count)), True, seed)


# ---------------------------------------------------------------- real valuations

@dataclass(frozen=True, eq=False)
class RealValuation:
    """Rule ``K -> phi(K)`` with its degree of homogeneity."""

    rule: Callable
    degree: int
    even: bool = True
    label: str = ""

    def __call__(self, K) -> float:
        return float(self.rule(K))


def _proj(K, frames: np.ndarray) -> np.ndarray:
    if isinstance(K, Ball):
        return np.full(len(frames), kappa(frames.shape[2]) * K.radius ** frames.shape[2])
    return project_volumes(K.vertices, frames)


def crofton_value(sigma: CroftonMeasure, K) -> float:
    """``int vol_i(K|E) dsigma(E)`` as a weighted sum over the sample."""
    return float(np.sum(sigma.sample.weights * _proj(K, sigma.sample.frames)))


def crofton_value_se(sigma: CroftonMeasure, K) -> tuple[float, float]:
    """Value and i.i.d. standard error of :func:`crofton_value`."""
    terms = sigma.sample.weights * _proj(K, sigma.sample.frames)
    m = len(terms)
    se = float(np.std(m * terms, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return float(terms.sum()), se


def crofton_valuation(sigma: CroftonMeasure) -> RealValuation:
    return RealValuation(lambda K: crofton_value(sigma, K), sigma.degree, True, "crofton")


def intrinsic_volume(K, i: int, method: str = "area") -> float:
    """``V_i(K)``; ``method`` is ``"area"`` (area measures, exact for polytopes)
    or ``"steiner"`` (fitted Steiner polynomial)."""
    n = K.dim
    if isinstance(K, Ball):
        return math.comb(n, i) * kappa(n) / kappa(n - i) * K.radius ** i
    if method == "steiner":
        W = np.asarray(quermass_steiner_fit(K).values)
    elif method == "area":
        W = quermass_from_area_measures(K)
    else:
        raise ValueError("method must be 'area' or 'steiner'")
    if i == n:
        return float(W[0])
    return float(math.comb(n, i) * W[n - i] / kappa(n - i))


def klain_function(phi: RealValuation, E: Subspace, probe: Polytope) -> float:
    """``phi(probe) / vol_i(probe)`` for a probe body lying in ``E``."""
    if phi.degree != E.i:
        raise ValueError("valuation degree must equal the subspace dimension")
    V = probe.vertices
    resid = V - V @ E.frame @ E.frame.T
    if np.abs(resid).max() > 1e-9 * max(1.0, float(np.abs(V).max())):
        raise ValueError("probe does not lie in the subspace")
    vol = hull_volume(V @ E.frame) if E.i > 1 else float(np.ptp(V @ E.frame))
    if vol <= 1e-12:
        raise ValueError("probe has zero i-volume")
    return phi(probe) / vol


# ---------------------------------------------------------------- Minkowski valuations

def _node_rotations(U: np.ndarray, symmetrize: bool, seed: int, start: int = 0) -> np.ndarray:
    if not symmetrize:
        return pole_rotations(U)
    out = np.empty((len(U), U.shape[1], U.shape[1]))
    for k, u in enumerate(U):
        out[k] = pole_rotations(u[None], np.random.default_rng([seed, start + k]))[0]
    return out


def crofton_support_at(sigma: CroftonMeasure, K, U: np.ndarray, start: int = 0,
                       block: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """``sum_j w_j vol_i(K | eta_u E_j)`` and its standard error at directions ``U``.

    ``start`` offsets the per-direction seed so that blocks of a grid can be
    evaluated independently and still agree with a single pass.
    """
    U = np.atleast_2d(np.asarray(U, float))
    S = sigma.sample
    m = len(S)
    vals = np.empty(len(U))
    se = np.empty(len(U))
    for s in range(0, len(U), block):
        eta = _node_rotations(U[s:s + block], sigma.symmetrize, sigma.seed, start + s)
        F = np.einsum("kab,jbi->kjai", eta, S.frames).reshape(-1, S.n, S.i)
        T = (_proj(K, F).reshape(len(eta), m)) * S.weights
        vals[s:s + block] = T.sum(axis=1)
        se[s:s + block] = (T * m).std(axis=1, ddof=1) / math.sqrt(m) if m > 1 else 0.0
    return vals, se


def apply_crofton_minkowski(sigma: CroftonMeasure, K, grid: SphereGrid) -> SphericalFunction:
    """Support function of ``Phi K`` at every grid node, with standard errors."""
    if K.dim != sigma.n or grid.dim != sigma.n:
        raise ValueError("dimension mismatch between measure, body and grid")
    vals, se = crofton_support_at(sigma, K, grid.nodes)
    return SphericalFunction(grid, vals, se)


def projection_body_generators(K: Polytope) -> np.ndarray:
    """Zonotope generators ``vol(F) n_F`` of the projection body, one per facet."""
    S = surface_area_measure(K)
    return S.weights[:, None] * S.directions


def projection_body(K) -> Polytope | Ball:
    """``Pi K`` with ``h(Pi K, u) = vol_{n-1}(K | u^perp)``.

    For a polytope this is the zonotope ``sum_F [-vol(F) n_F / 2, vol(F) n_F / 2]``.
    """
    if isinstance(K, Ball):
        n = K.dim
        return Ball(np.zeros(n), kappa(n - 1) * K.radius ** (n - 1))
    if hull_volume(K.vertices) <= 1e-12:
        raise DegenerateBodyError("projection body needs a full-dimensional polytope")
    return zonotope(projection_body_generators(K))


def _complement_frames(U: np.ndarray) -> np.ndarray:
    from .grassmann import _householder_to

    return _householder_to(np.atleast_2d(U))[:, :, : U.shape[-1] - 1]


def projection_body_i_support(K, i: int, U, method: str = "exact", inner: int = 256,
                              seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``h(Pi_i K, u) = V_i(K | u^perp)`` at the rows of ``U`` with standard errors.

    ``method="exact"`` measures the (n-1)-dimensional projection directly
    (zero error); ``method="kubota"`` averages i-volumes over ``inner``
    random i-subspaces of ``u^perp``.
    """
    U = np.atleast_2d(np.asarray(U, float))
    n = U.shape[1]
    if not 1 <= i <= n - 1:
        raise ValueError("need 1 <= i <= n-1")
    if isinstance(K, Ball):
        r = math.comb(n - 1, i) * kappa(n - 1) / kappa(n - 1 - i) * K.radius ** i
        return np.full(len(U), r), np.zeros(len(U))
    frames = _complement_frames(U)
    if method == "exact":
        return intrinsic_volumes_of_projection(K.vertices, frames, i), np.zeros(len(U))
    if method != "kubota":
        raise ValueError("method must be 'exact' or 'kubota'")
    sigma = pi_i_crofton_measure(n, i, inner, seed)
    return crofton_support_at(sigma, K, U)


def projection_body_i(K, i: int, grid: SphereGrid, method: str = "exact", inner: int = 256,
                      seed: int = 0) -> SupportBody | Polytope | Ball:
    """``Pi_i K`` as a body; ``Pi_{n-1}`` of a polytope is returned as a zonotope."""
    n = K.dim
    if isinstance(K, Polytope) and hull_volume(K.vertices) <= 1e-12:
        raise DegenerateBodyError("Pi_i needs a full-dimensional body")
    if isinstance(K, Ball):
        r = math.comb(n - 1, i) * kappa(n - 1) / kappa(n - 1 - i) * K.radius ** i
        return Ball(np.zeros(n), r)
    if i == n - 1 and method == "exact":
        return projection_body(K)
    vals, _ = projection_body_i_support(K, i, grid.nodes, method, inner, seed)
    return SupportBody(grid, vals)


def difference_body(K):
    """``DK = K + (-K)``."""
    if isinstance(K, Ball):
        return Ball(np.zeros(K.dim), 2 * K.radius)
    return minkowski_combine([K, reflect(K)], [1.0, 1.0])


def lambda_i(K, i: int, method: str = "steiner") -> Ball:
    """``Lambda_i K = V_i(K) B``."""
    return Ball(np.zeros(K.dim), intrinsic_volume(K, i, method))


def mean_section_even(K, i: int, c: float, grid: SphereGrid, inner: int = 256, seed: int = 0) -> SphericalFunction:
    """``c R_{n+1-i} vol_{n+1-i}(K|.)`` on the grid (even part of the mean section body)."""
    n = grid.dim
    if not 2 <= i <= n - 1:
        raise ValueError("need 2 <= i <= n-1")
    if c <= 0:
        raise ValueError("c must be positive")
    j = n + 1 - i
    f = GrassmannFunction(lambda F: _proj(K, F), n, j)
    return c * radon_to_sphere(f, j, grid, inner, seed)


def associated_body_at(sigma: CroftonMeasure, U, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(C_i sigma)(eta_u^{-1} E_ref)`` at the rows of ``U`` with standard errors."""
    U = np.atleast_2d(np.asarray(U, float))
    n, i = sigma.n, sigma.degree
    ref = np.eye(n)[:, :i]
    eta = _node_rotations(U, sigma.symmetrize, sigma.seed, start)
    F = np.einsum("kba,bi->kai", eta, ref)
    T = cosine_matrix(F, sigma.sample.frames) * sigma.sample.weights
    m = T.shape[1]
    se = (T * m).std(axis=1, ddof=1) / math.sqrt(m) if m > 1 else np.zeros(len(U))
    return T.sum(axis=1), se


def associated_body(sigma: CroftonMeasure, grid: SphereGrid) -> SphericalFunction:
    """Support function of the body whose image under the valuation of
    ``sigma`` is obtained from a unit cube in the reference subspace."""
    vals, se = associated_body_at(sigma, grid.nodes)
    return SphericalFunction(grid, vals, se)


# ---------------------------------------------------------------- operator objects

class MinkowskiValuation:
    """Common interface: ``support(K, U) -> (values, se)`` and ``degree``."""

    name = "minkowski"
    degree = 0
    even = True

    def support(self, K, U) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def on_grid(self, K, grid: SphereGrid) -> SphericalFunction:
        vals, se = self.support(K, grid.nodes)
        return SphericalFunction(grid, vals, se)

    def describe(self) -> dict:
        return {"op": self.name, "i": self.degree}


@dataclass(eq=False)
class FromCrofton(MinkowskiValuation):
    sigma: CroftonMeasure
    name: str = "crofton"

    @property
    def degree(self) -> int:
        return self.sigma.degree

    def support(self, K, U):
        return crofton_support_at(self.sigma, K, U)


class ProjectionBody(MinkowskiValuation):
    name = "pi"

    def __init__(self, n: int = 3):
        self.degree = n - 1

    def support(self, K, U):
        if isinstance(K, Ball):
            return projection_body_i_support(K, K.dim - 1, U)
        Z = projection_body_generators(K)
        U = np.atleast_2d(np.asarray(U, float))
        return 0.5 * np.abs(U @ Z.T).sum(axis=1), np.zeros(len(U))


@dataclass(eq=False)
class ProjectionBodyI(MinkowskiValuation):
    i: int
    method: str = "exact"
    inner: int = 256
    seed: int = 0
    name: str = "pi_i"

    @property
    def degree(self) -> int:
        return self.i

    def support(self, K, U):
        return projection_body_i_support(K, self.i, U, self.method, self.inner, self.seed)


class DifferenceBody(MinkowskiValuation):
    name = "d"
    degree = 1

    def support(self, K, U):
        U = np.atleast_2d(np.asarray(U, float))
        return K.support(U) + K.support(-U), np.zeros(len(U))


@dataclass(eq=False)
class LambdaI(MinkowskiValuation):
    i: int
    method: str = "steiner"
    name: str = "lambda_i"

    @property
    def degree(self) -> int:
        return self.i

    def support(self, K, U):
        U = np.atleast_2d(np.asarray(U, float))
        r = intrinsic_volume(K, self.i, self.method)
        return np.full(len(U), r), np.zeros(len(U))


@dataclass(eq=False)
class MeanSectionEven(MinkowskiValuation):
    i: int
    c: float = 1.0
    inner: int = 256
    seed: int = 0
    name: str = "mean_section_even"

    @property
    def degree(self) -> int:
        return self.i

    def support(self, K, U):
        U = np.atleast_2d(np.asarray(U, float))
        n = U.shape[1]
        j = n + 1 - self.i
        from .grassmann import radon_frames

        F = radon_frames(U, j, self.inner, self.seed)
        v = _proj(K, F.reshape(-1, n, j)).reshape(len(U), self.inner)
        se = v.std(axis=1, ddof=1) / math.sqrt(self.inner)
        return self.c * v.mean(axis=1), self.c * se


def valuation_from_config(cfg: dict, n: int = 3) -> MinkowskiValuation:
    """Build an operator from ``{"op": ..., "i": ...}``.

    Recognised ops: ``pi``, ``pi_i``, ``d``, ``lambda_i``,
    ``mean_section_even`` (optional ``c``), ``crofton`` (``sample_file``,
    ``symmetrize``, ``seed``).
    """
    op = cfg.get("op")
    if op == "pi":
        return ProjectionBody(n)
    if op == "pi_i":
        return ProjectionBodyI(int(cfg["i"]), cfg.get("method", "exact"), int(cfg.get("inner", 256)))
    if op == "d":
        return DifferenceBody()
    if op == "lambda_i":
        return LambdaI(int(cfg["i"]), cfg.get("method", "steiner"))
    if op == "mean_section_even":
        return MeanSectionEven(int(cfg["i"]), float(cfg.get("c", 1.0)), int(cfg.get("inner", 256)))
    if op == "crofton":
        if "sample_file" in cfg:
            sample = load_sample(cfg["sample_file"])
        else:
            sample = pi_i_crofton_measure(n, int(cfg["i"]), int(cfg.get("count", 64)),
                                          int(cfg.get("seed", 0))).sample
        if "i" in cfg and int(cfg["i"]) != sample.i:
            raise ValueError("declared degree does not match the sample")
        return FromCrofton(CroftonMeasure(sample, bool(cfg.get("symmetrize", True)), int(cfg.get("seed", 0))))
    raise ValueError(f"unknown operator {op!r}")
