"""Convex bodies, support functions, projections and Minkowski arithmetic."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .hull import affine_rank, hull_volume, intrinsic_volumes_lowdim, planar_hull_measures

__all__ = [
    "kappa",
    "sphere_area",
    "Polytope",
    "Ball",
    "support_eval",
    "minkowski_combine",
    "reflect",
    "project_volume",
    "project_volumes",
    "hull_volume",
    "steiner_point",
    "random_polytope",
    "cube",
    "simplex",
    "zonotope",
    "zonotope_volume",
    "intrinsic_volumes_of_projection",
    "body_to_json",
    "body_from_json",
    "save_body",
    "load_body",
]

UNIT_TOL = 1e-12
FRAME_TOL = 1e-10


def kappa(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return n * kappa(n)


def _as_directions(u, n: int | None = None) -> np.ndarray:
    U = np.asarray(u, dtype=float)
    if U.ndim == 1:
        U = U[None]
    if n is not None and U.shape[1] != n:
        raise ValueError(f"direction dimension {U.shape[1]} does not match body dimension {n}")
    return U


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of a finite vertex list."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float, copy=True)
        if V.ndim == 1:
            V = V[None]
        if V.ndim != 2 or len(V) == 0:
            raise ValueError("a polytope needs a non-empty (m, n) vertex array")
        if V.shape[1] < 2:
            raise ValueError("ambient dimension must be at least 2")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertices must be finite")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def support(self, U) -> np.ndarray:
        U = _as_directions(U, self.dim)
        return (U @ self.vertices.T).max(axis=1)

    def translate(self, x) -> "Polytope":
        return Polytope(self.vertices + np.asarray(x, float))

    def scale(self, lam: float) -> "Polytope":
        return Polytope(lam * self.vertices)

    def rotate(self, rot) -> "Polytope":
        return Polytope(self.vertices @ np.asarray(rot, float).T)

    def volume(self) -> float:
        return hull_volume(self.vertices)

    def is_full_dimensional(self, tol: float = 1e-6) -> bool:
        return self.volume() > tol

    def pruned(self) -> "Polytope":
        """Same body with redundant vertices removed."""
        return Polytope(_prune(self.vertices))


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = np.array(self.center, dtype=float, copy=True).reshape(-1)
        if len(c) < 2:
            raise ValueError("ambient dimension must be at least 2")
        if not (self.radius >= 0):
            raise ValueError("radius must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, n: int) -> "Ball":
        return cls(np.zeros(n), 1.0)

    @property
    def dim(self) -> int:
        return len(self.center)

    def support(self, U) -> np.ndarray:
        U = _as_directions(U, self.dim)
        return U @ self.center + self.radius * np.linalg.norm(U, axis=1)

    def translate(self, x) -> "Ball":
        return Ball(self.center + np.asarray(x, float), self.radius)

    def scale(self, lam: float) -> "Ball":
        return Ball(lam * self.center, lam * self.radius)

    def rotate(self, rot) -> "Ball":
        return Ball(np.asarray(rot, float) @ self.center, self.radius)


def _prune(V: np.ndarray) -> np.ndarray:
    rank, _, _ = affine_rank(V)
    if rank == V.shape[1] and len(V) > V.shape[1] + 1:
        from scipy.spatial import ConvexHull

        return V[np.sort(ConvexHull(V).vertices)]
    return np.unique(V, axis=0)


def support_eval(body, u) -> float:
    """Support function value ``h(body, u)`` for a unit vector ``u``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError("support_eval needs a unit vector")
    return float(body.support(u[None])[0])


def minkowski_combine(bodies: Sequence, coeffs: Sequence[float], grid=None):
    """Minkowski combination ``sum(c_k * K_k)`` with nonnegative coefficients.

    Polytopes combine exactly (all weighted vertex sums, pruned); balls
    combine into a ball.  Any other mixture is returned as a support body
    sampled on ``grid`` (a default grid is built when none is given).
    """
    if len(bodies) != len(coeffs) or not bodies:
        raise ValueError("bodies and coeffs must be non-empty and of equal length")
    coeffs = [float(c) for c in coeffs]
    if any(c < 0 for c in coeffs):
        raise ValueError("Minkowski coefficients must be nonnegative")
    n = bodies[0].dim
    if any(b.dim != n for b in bodies):
        raise ValueError("bodies live in different dimensions")
    if all(isinstance(b, Polytope) for b in bodies):
        V = np.zeros((1, n))
        for b, c in zip(bodies, coeffs):
            if c == 0:
                continue
            V = _prune((V[:, None, :] + c * b.vertices[None, :, :]).reshape(-1, n))
        return Polytope(V)
    if all(isinstance(b, Ball) for b in bodies):
        return Ball(sum(c * b.center for b, c in zip(bodies, coeffs)),
                    sum(c * b.radius for b, c in zip(bodies, coeffs)))
    from .sphere import SupportBody, build_sphere_grid

    if grid is None:
        grid = build_sphere_grid(n, 4000)
    values = sum(c * b.support(grid.nodes) for b, c in zip(bodies, coeffs))
    return SupportBody(grid, values)


def reflect(body):
    """The body ``-K``."""
    if isinstance(body, Polytope):
        return Polytope(-body.vertices)
    if isinstance(body, Ball):
        return Ball(-body.center, body.radius)
    return body.reflect()


def _frame_of(E) -> np.ndarray:
    A = np.asarray(getattr(E, "frame", E), dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    return A


def _check_frames(A: np.ndarray) -> None:
    i = A.shape[-1]
    gram = np.swapaxes(A, -1, -2) @ A
    if np.abs(gram - np.eye(i)).max() > FRAME_TOL:
        raise ValueError("subspace frame is not orthonormal")


def project_volume(body, E) -> float:
    """i-volume of the orthogonal projection of ``body`` onto subspace ``E``.

    ``E`` is a Subspace or an (n, i) matrix with orthonormal columns.
    """
    A = _frame_of(E)
    _check_frames(A)
    n, i = A.shape
    if not 1 <= i <= n - 1:
        raise ValueError("projection subspace must have dimension 1..n-1")
    if isinstance(body, Ball):
        return kappa(i) * body.radius ** i
    if not isinstance(body, Polytope):
        raise TypeError("project_volume needs a Polytope or a Ball")
    if body.dim != n:
        raise ValueError("subspace and body dimensions differ")
    return float(project_volumes(body.vertices, A[None])[0])


def project_volumes(vertices: np.ndarray, frames: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Batched ``vol_i(conv(vertices) | E_k)`` for frames of shape (k, n, i).

    No orthonormality check; callers construct the frames.
    """
    V = np.asarray(vertices, float)
    F = np.asarray(frames, float)
    k, n, i = F.shape
    if i == 1:
        proj = np.einsum("mn,kn->km", V, F[:, :, 0])
        return proj.max(axis=1) - proj.min(axis=1)
    out = np.empty(k)
    if i == 2:
        for s in range(0, k, chunk):
            coords = np.einsum("mn,kni->kmi", V, F[s:s + chunk])
            out[s:s + chunk] = planar_hull_measures(coords)[0]
        return out
    for s in range(k):
        out[s] = hull_volume(V @ F[s])
    return out


def intrinsic_volumes_of_projection(vertices: np.ndarray, frames: np.ndarray, j: int) -> np.ndarray:
    """``V_j`` of the projection onto each frame's span, computed exactly.

    Projections of dimension 2 are batched; dimension 3 uses per-frame hulls.
    """
    V = np.asarray(vertices, float)
    F = np.asarray(frames, float)
    k, n, m = F.shape
    if j > m:
        return np.zeros(k)
    if j == 0:
        return np.ones(k)
    if m == 1:
        return project_volumes(V, F)
    if m == 2:
        out = np.empty(k)
        for s in range(0, k, 4096):
            coords = np.einsum("mn,kni->kmi", V, F[s:s + 4096])
            area, perim = planar_hull_measures(coords)
            out[s:s + 4096] = area if j == 2 else 0.5 * perim
        return out
    out = np.empty(k)
    for s in range(k):
        iv = intrinsic_volumes_lowdim(V @ F[s])
        out[s] = iv[j] if j < len(iv) else 0.0
    return out


def steiner_point(body, grid) -> np.ndarray:
    """Quadrature of ``n * h(K,u) u`` against the invariant probability measure."""
    if grid.dim != body.dim:
        raise ValueError("grid and body dimensions differ")
    h = body.support(grid.nodes)
    return body.dim * np.sum((grid.weights * h)[:, None] * grid.nodes, axis=0)


def random_polytope(n: int, vertex_count: int, seed: int) -> Polytope:
    """Vertices i.i.d. uniform on the unit sphere; resampled if flat."""
    if vertex_count < n + 1:
        raise ValueError("need at least n+1 vertices")
    rng = np.random.default_rng(seed)
    while True:
        X = rng.standard_normal((vertex_count, n))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if hull_volume(X) > 1e-9:
            return Polytope(X)


def cube(n: int, lo: float = 0.0, hi: float = 1.0) -> Polytope:
    return Polytope(np.array(list(itertools.product([lo, hi], repeat=n)), dtype=float))


def simplex(n: int) -> Polytope:
    """conv{0, e_1, ..., e_n}."""
    return Polytope(np.vstack([np.zeros(n), np.eye(n)]))


def zonotope(segments: np.ndarray) -> Polytope:
    """Sum of centred segments ``[-g/2, g/2]`` for the rows ``g`` of ``segments``."""
    G = np.asarray(segments, float)
    n = G.shape[1]
    V = np.zeros((1, n))
    for g in G:
        if not np.any(g):
            continue
        V = _prune(np.vstack([V - g / 2, V + g / 2]))
    return Polytope(V)


def zonotope_volume(segments: np.ndarray) -> float:
    """Volume of ``sum [-g/2, g/2]``: sum of |det| over n-subsets of generators."""
    G = np.asarray(segments, float)
    m, n = G.shape
    if m < n:
        return 0.0
    combos = itertools.combinations(range(m), n)
    total = 0.0
    while True:
        idx = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, 200000)), dtype=np.intp)
        if idx.size == 0:
            return total
        total += float(np.abs(np.linalg.det(G[idx.reshape(-1, n)])).sum())


def body_to_json(body) -> dict:
    if isinstance(body, Polytope):
        return {"type": "polytope", "dim": body.dim, "vertices": body.vertices.tolist()}
    if isinstance(body, Ball):
        return {"type": "ball", "center": body.center.tolist(), "radius": body.radius}
    raise TypeError(f"cannot serialise {type(body).__name__}")


def body_from_json(data: dict):
    kind = data.get("type")
    if kind == "polytope":
        P = Polytope(data["vertices"])
        if "dim" in data and int(data["dim"]) != P.dim:
            raise ValueError("declared dim does not match vertices")
        return P
    if kind == "ball":
        return Ball(data["center"], data["radius"])
    raise ValueError(f"unknown body type {kind!r}")


def save_body(body, path) -> None:
    Path(path).write_text(json.dumps(body_to_json(body)))


def load_body(path):
    return body_from_json(json.loads(Path(path).read_text()))
