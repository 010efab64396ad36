"""Area measures of polytopes, quermassintegrals and mixed volumes.

Each quantity has two independent routes so that one can check the other:
face/normal-cone atoms, hull volumes of parallel bodies (Steiner
polynomial), projection averages over Grassmannians, and polynomial fits of
Minkowski-combination volumes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .geometry import Ball, Polytope, kappa, project_volumes, sphere_area
from .grassmann import GrassmannSample
from .hull import facet_structure, hull_volume
from .sphere import SphereGrid, build_sphere_grid

__all__ = [
    "AtomicMeasure",
    "QuermassVector",
    "DegenerateBodyError",
    "NumericalConditioningError",
    "surface_area_measure",
    "area_measure",
    "even_area_measure",
    "mixed_quermass_pair",
    "quermass_steiner_fit",
    "quermass_kubota",
    "quermass_from_area_measures",
    "mixed_volume_fit",
    "cosine_kernel_transform",
    "intrinsic_from_quermass",
    "ball_polytope",
    "measure_to_json",
    "measure_from_json",
]


class DegenerateBodyError(ValueError):
    pass


class NumericalConditioningError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite (possibly signed) measure on S^{n-1} given by weighted directions."""

    dim: int
    directions: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        D = np.array(self.directions, dtype=float).reshape(-1, self.dim)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(D) != len(w):
            raise ValueError("one weight per atom")
        if len(D) and np.abs(np.linalg.norm(D, axis=1) - 1.0).max() > 1e-12:
            raise ValueError("atom directions must be unit vectors")
        if not np.all(np.isfinite(w)):
            raise ValueError("atom weights must be finite")
        D.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", D)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.sum(self.weights * fn(self.directions)))

    def reflect(self) -> "AtomicMeasure":
        """Image under ``u -> -u``."""
        return AtomicMeasure(self.dim, -self.directions, self.weights, self.label)

    def scaled(self, c: float) -> "AtomicMeasure":
        return AtomicMeasure(self.dim, self.directions, c * self.weights, self.label)

    def rotate(self, rot) -> "AtomicMeasure":
        D = self.directions @ np.asarray(rot, float).T
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        return AtomicMeasure(self.dim, D, self.weights, self.label)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        if other.dim != self.dim:
            raise ValueError("measures live in different dimensions")
        return AtomicMeasure(self.dim, np.vstack([self.directions, other.directions]),
                             np.concatenate([self.weights, other.weights]), self.label)

    def merged(self, decimals: int = 9) -> "AtomicMeasure":
        """Atoms with equal (rounded) directions combined, sorted by direction."""
        if len(self) == 0:
            return self
        key = np.round(self.directions, decimals) + 0.0
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        w = np.zeros(len(uniq))
        np.add.at(w, inv.reshape(-1), self.weights)
        D = uniq / np.linalg.norm(uniq, axis=1, keepdims=True)
        return AtomicMeasure(self.dim, D, w, self.label)


@dataclass(frozen=True)
class QuermassVector:
    """Quermassintegrals ``W_0..W_n`` with the route that produced them."""

    values: tuple
    provenance: str
    residual: float = 0.0
    hausdorff_error: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def intrinsic(self) -> np.ndarray:
        """``V_0..V_n`` from ``kappa_{n-i} V_i = C(n,i) W_{n-i}``."""
        return intrinsic_from_quermass(np.asarray(self.values))


def intrinsic_from_quermass(W) -> np.ndarray:
    W = np.asarray(W, float)
    n = len(W) - 1
    return np.array([math.comb(n, i) * W[n - i] / kappa(n - i) if n - i > 0 else W[0]
                     for i in range(n + 1)])


# ---------------------------------------------------------------- area measures

def _require_full(P: Polytope) -> None:
    if not isinstance(P, Polytope):
        raise TypeError("area measures are implemented for polytopes and balls")
    if hull_volume(P.vertices) <= 1e-12:
        raise DegenerateBodyError("polytope has empty interior")


def surface_area_measure(P: Polytope) -> AtomicMeasure:
    """One atom per facet: outer unit normal with the facet's (n-1)-volume."""
    _require_full(P)
    fs = facet_structure(P.vertices)
    return AtomicMeasure(P.dim, fs.normals, fs.areas, "S_{n-1}")


def _slerp_midpoints(a: np.ndarray, b: np.ndarray, step: float) -> tuple[np.ndarray, float]:
    angle = math.acos(max(-1.0, min(1.0, float(a @ b))))
    k = max(1, math.ceil(angle / step))
    w = b - (a @ b) * a
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return a[None], angle
    w /= nw
    t = angle * (np.arange(k) + 0.5) / k
    return np.cos(t)[:, None] * a + np.sin(t)[:, None] * w, angle


def _tri_area(a, b, c) -> np.ndarray:
    """Solid angles of spherical triangles (rows of a, b, c in R^3)."""
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def _subdivide(tris: np.ndarray, levels: int) -> np.ndarray:
    for _ in range(levels):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        nrm = lambda x: x / np.linalg.norm(x, axis=1, keepdims=True)  # noqa: E731
        ab, bc, ca = nrm(a + b), nrm(b + c), nrm(c + a)
        tris = np.concatenate([np.stack(t, axis=1) for t in
                               ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))])
    return tris


def _cone_patch(normals: np.ndarray, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Atoms covering the spherical polygon spanned by unit vectors in R^3."""
    centre = normals.mean(axis=0)
    centre /= np.linalg.norm(centre)
    ref = normals[0] - (normals[0] @ centre) * centre
    ref /= np.linalg.norm(ref)
    other = np.cross(centre, ref)
    ang = np.arctan2(normals @ other, normals @ ref)
    ring = normals[np.argsort(ang)]
    tris = np.stack([np.broadcast_to(centre, ring.shape), ring, np.roll(ring, -1, axis=0)], axis=1)
    tris = _subdivide(tris, levels)
    area = _tri_area(tris[:, 0], tris[:, 1], tris[:, 2])
    mid = tris.sum(axis=1)
    mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    return mid, area


def area_measure(P, i: int, grid: SphereGrid | None = None, arc_step: float = 0.02,
                 patch_levels: int = 5) -> AtomicMeasure:
    """Area measure of order ``i`` as weighted atoms.

    Every i-face ``F`` contributes ``vol_i(F) / C(n-1, i)`` times the spherical
    measure of its normal cone, spread over points of the cone.  Order 0 is
    the spherical Lebesgue measure, represented on ``grid``.  A ball of radius
    ``r`` has ``r^i`` times the spherical Lebesgue measure in every order.
    """
    n = P.dim
    if not 0 <= i <= n - 1:
        raise ValueError(f"order must lie in 0..{n - 1}")
    if isinstance(P, Ball) or i == 0:
        if not isinstance(P, Ball):
            _require_full(P)
        g = grid if grid is not None else build_sphere_grid(n, 4000)
        r = P.radius ** i if isinstance(P, Ball) else 1.0
        return AtomicMeasure(n, g.nodes, r * sphere_area(n) * g.weights, f"S_{i}")
    if i == n - 1:
        return surface_area_measure(P)
    _require_full(P)
    fs = facet_structure(P.vertices)
    dirs, wts = [], []
    c = math.comb(n - 1, i)
    if i == n - 2:
        for a, b, vol in fs.ridges:
            pts, angle = _slerp_midpoints(fs.normals[a], fs.normals[b], arc_step)
            dirs.append(pts)
            wts.append(np.full(len(pts), vol * angle / (c * len(pts))))
    elif n == 4 and i == 1:
        for length, facets, direction in fs.edges:
            N = fs.normals[list(facets)]
            N = N - np.outer(N @ direction, direction)
            N /= np.linalg.norm(N, axis=1, keepdims=True)
            q, _ = np.linalg.qr(np.column_stack([direction, np.eye(4)]))
            basis = q[:, 1:4]
            pts3, area = _cone_patch(N @ basis, patch_levels)
            dirs.append(pts3 @ basis.T)
            wts.append(length * area / c)
    else:
        raise ValueError("orders between 1 and n-2 are implemented for n <= 4")
    D = np.vstack(dirs)
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return AtomicMeasure(n, D, np.concatenate(wts), f"S_{i}")


def even_area_measure(P, i: int, grid: SphereGrid | None = None, **kw) -> AtomicMeasure:
    """``s_i = S_i(K)/2 + S_i(-K)/2``."""
    S = area_measure(P, i, grid, **kw)
    half = S.scaled(0.5)
    return AtomicMeasure(S.dim, np.vstack([half.directions, -half.directions]),
                         np.concatenate([half.weights, half.weights]), f"s_{i}")


def mixed_quermass_pair(K, L, i: int, grid: SphereGrid | None = None, measure: AtomicMeasure | None = None,
                        **kw) -> float:
    """``W_{n-1-i}(K, L) = (1/n) int h(L, u) dS_i(K, u)``.

    ``measure`` may be passed to reuse (or replace, e.g. by the even part) the
    area measure of ``K``.
    """
    n = K.dim
    if L.dim != n:
        raise ValueError("bodies live in different dimensions")
    if not 0 <= i <= n - 1:
        raise ValueError(f"order must lie in 0..{n - 1}")
    S = measure if measure is not None else area_measure(K, i, grid, **kw)
    return S.integrate(L.support) / n


def quermass_from_area_measures(K, grid: SphereGrid | None = None) -> np.ndarray:
    """``W_0..W_n`` with ``W_{n-i}(K) = |S_i(K)| / n`` and ``W_0 = V(K)``."""
    n = K.dim
    W = np.empty(n + 1)
    W[0] = hull_volume(K.vertices) if isinstance(K, Polytope) else kappa(n) * K.radius ** n
    for i in range(n):
        W[n - i] = area_measure(K, i, grid).total_mass() / n
    return W


def cosine_kernel_transform(S: AtomicMeasure, points) -> np.ndarray:
    """``(1/2) int |u . v| dS(v)`` at each row ``u`` of ``points``."""
    U = np.atleast_2d(np.asarray(points, float))
    return 0.5 * np.abs(U @ S.directions.T) @ S.weights


# ---------------------------------------------------------------- quermassintegrals

def ball_polytope(n: int, node_count: int = 3000) -> tuple[np.ndarray, float]:
    """Vertices of a symmetric polytope approximating the unit ball, and its
    Hausdorff distance to the ball.

    Vertices come from a symmetric Fibonacci grid; the polytope is then
    scaled to the surface area of the sphere, which cancels most of the
    first-order bias of an inscribed polytope in mixed volumes with the ball.
    """
    from scipy.spatial import ConvexHull

    g = build_sphere_grid(n, node_count, "fibonacci", seed=0)
    hull = ConvexHull(g.nodes)
    s = (sphere_area(n) / hull.area) ** (1.0 / (n - 1))
    inradius = -float(hull.equations[:, -1].max())
    delta = max(s - 1.0, 1.0 - s * inradius)
    return s * g.nodes, delta


_BALL_CACHE: dict = {}


def _ball_vertices(n: int, node_count: int):
    key = (n, node_count)
    if key not in _BALL_CACHE:
        _BALL_CACHE[key] = ball_polytope(n, node_count)
    return _BALL_CACHE[key]


def quermass_steiner_fit(K, epsilons=None, ball_nodes: int | None = None,
                         max_condition: float = 1e8) -> QuermassVector:
    """Fit the Steiner polynomial of ``V(K + eps Q)`` for a ball polytope ``Q``.

    The end coefficients are pinned (``W_0 = V(K)``, ``W_n = kappa_n``); the
    middle ones come from least squares on hull volumes of ``K + eps Q`` after
    removing the pinned terms (with ``V(Q)`` for the top one).  The parallel
    bodies are exact polytopes, so the only modelling error is ``Q`` versus
    the ball, reported as ``hausdorff_error``.
    """
    if isinstance(K, Ball):
        kn = kappa(K.dim)
        return QuermassVector(tuple(kn * K.radius ** (K.dim - i) for i in range(K.dim + 1)), "exact")
    if not isinstance(K, Polytope):
        raise TypeError("the Steiner fit needs a Polytope or a Ball")
    n = K.dim
    V = K.vertices
    scale = float(np.linalg.norm(V - V.mean(axis=0), axis=1).max())
    if scale <= 0:
        scale = 1.0
    if epsilons is None:
        epsilons = scale * np.array([0.1, 0.2, 0.35, 0.5, 0.75, 1.0])
    eps = np.asarray(epsilons, float)
    if np.any(eps <= 0) or len(np.unique(eps)) < n + 1:
        raise ValueError(f"need at least {n + 1} distinct positive epsilons")
    if ball_nodes is None:
        ball_nodes = 3000 if n == 3 else 1500
    Q, delta = _ball_vertices(n, ball_nodes)
    volQ = hull_volume(Q)
    volK = hull_volume(V)
    try:
        from scipy.spatial import ConvexHull

        Kv = V[ConvexHull(V).vertices] if volK > 0 else V
    except Exception:
        Kv = V
    vols = np.array([hull_volume((Kv[:, None, :] + e * Q[None]).reshape(-1, n)) for e in eps])
    A = np.column_stack([math.comb(n, j) * eps ** j for j in range(1, n)])
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > max_condition:
        raise NumericalConditioningError(f"Steiner fit condition number {cond:.3g} exceeds {max_condition:.3g}")
    rhs = vols - volK - eps ** n * volQ
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    fitted = A @ coef + volK + eps ** n * volQ
    residual = float(np.abs(fitted - vols).max() / vols.max())
    W = (volK, *coef.tolist(), kappa(n))
    return QuermassVector(tuple(float(x) for x in W), "steiner_fit", residual, delta)


def quermass_kubota(K, i: int, gr_sample: GrassmannSample) -> tuple[float, float]:
    """``W_{n-i}(K) = (kappa_n/kappa_i) int vol_i(K|E) dE`` over the sample.

    Returns the estimate and its standard error (i.i.d. formula).
    """
    n = K.dim
    if not 1 <= i <= n - 1:
        raise ValueError("need 1 <= i <= n-1")
    if gr_sample.i != i or gr_sample.n != n:
        raise ValueError("sample lives on the wrong Grassmannian")
    c = kappa(n) / kappa(i)
    if isinstance(K, Ball):
        return c * kappa(i) * K.radius ** i * gr_sample.total_mass(), 0.0
    vals = project_volumes(K.vertices, gr_sample.frames)
    w = gr_sample.weights
    m = len(w)
    est = c * float(np.sum(w * vals))
    se = c * float(np.std(m * w * vals, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return est, se


def mixed_volume_fit(K: Polytope, L: Polytope, grid_size: int | None = None) -> tuple[np.ndarray, float]:
    """Mixed volumes ``V(K[n-j], L[j])`` for ``j = 0..n`` from hull volumes.

    ``V(a K + b L)`` is computed on an ``(n+1) x (n+1)`` grid of positive
    ``(a, b)`` and fitted by the homogeneous polynomial
    ``sum_j C(n,j) a^{n-j} b^j V_j``.  Returns the coefficients and the largest
    relative residual of the fit.
    """
    n = K.dim
    m = grid_size or n + 1
    ab = np.linspace(0.5, 1.5, m)
    rows, vals = [], []
    for a in ab:
        for b in ab:
            P = (a * K.vertices[:, None, :] + b * L.vertices[None, :, :]).reshape(-1, n)
            vals.append(hull_volume(P))
            rows.append([math.comb(n, j) * a ** (n - j) * b ** j for j in range(n + 1)])
    A = np.asarray(rows)
    y = np.asarray(vals)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.abs(A @ coef - y).max() / np.abs(y).max())
    return coef, residual


# ---------------------------------------------------------------- serialisation

def measure_to_json(S: AtomicMeasure) -> dict:
    return {"dim": S.dim, "atoms": [{"dir": d.tolist(), "w": float(w)} for d, w in zip(S.directions, S.weights)]}


def measure_from_json(data: dict) -> AtomicMeasure:
    atoms = data.get("atoms", [])
    n = int(data["dim"])
    D = np.array([a["dir"] for a in atoms], dtype=float).reshape(-1, n)
    w = np.array([a["w"] for a in atoms], dtype=float)
    return AtomicMeasure(n, D, w)


def save_measure(S: AtomicMeasure, path) -> None:
    Path(path).write_text(json.dumps(measure_to_json(S)))


def load_measure(path) -> AtomicMeasure:
    return measure_from_json(json.loads(Path(path).read_text()))
