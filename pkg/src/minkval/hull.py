"""Low-dimensional convex hull measurements.

Everything here works on raw point arrays.  The batched planar routine is the
hot path of the library: projections of a polytope onto thousands of planes
are measured at once with a vectorised gift-wrapping walk.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "affine_rank",
    "hull_volume",
    "planar_hull_measures",
    "intrinsic_volumes_lowdim",
    "facet_structure",
    "FacetStructure",
]

_RANK_TOL = 1e-10


def affine_rank(points: np.ndarray, tol: float = _RANK_TOL) -> tuple[int, np.ndarray, np.ndarray]:
    """Return ``(rank, origin, basis)`` of the affine hull of ``points``.

    ``basis`` has orthonormal rows spanning the affine hull directions.
    """
    pts = np.asarray(points, dtype=float)
    origin = pts.mean(axis=0)
    centred = pts - origin
    if len(pts) < 2:
        return 0, origin, np.zeros((0, pts.shape[1]))
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    scale = max(1.0, float(np.abs(centred).max()))
    rank = int(np.sum(s > tol * scale * max(1, len(pts)) ** 0.5))
    return rank, origin, vt[:rank]


def planar_hull_measures(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Area and perimeter of the convex hulls of a batch of planar point sets.

    Parameters
    ----------
    points : array, shape (B, m, 2) or (m, 2)

    Returns
    -------
    area, perimeter : arrays of shape (B,) (scalars for a single set)

    A segment has zero area and perimeter twice its length, so half the
    perimeter is the first intrinsic volume in every case.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 2
    if single:
        pts = pts[None]
    B, m, _ = pts.shape
    if m == 1:
        z = np.zeros(B)
        return (z[0], z[0]) if single else (z, z.copy())
    rows = np.arange(B)
    order = np.lexsort((pts[..., 1], pts[..., 0]), axis=-1)
    start = order[:, 0]
    origin = pts[rows, start]
    rel = pts - origin[:, None, :]
    scale = np.maximum(np.abs(rel).max(axis=(1, 2)), 1e-300)
    tiny = (1e-13 * scale) ** 2

    cur = start.copy()
    direction = np.tile(np.array([0.0, -1.0]), (B, 1))
    area = np.zeros(B)
    perim = np.zeros(B)
    active = np.ones(B, dtype=bool)
    two_pi = 2.0 * math.pi
    for _ in range(m + 1):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        p = rel[idx, cur[idx]]
        d = rel[idx] - p[:, None, :]
        dist2 = np.einsum("bmk,bmk->bm", d, d)
        e = direction[idx]
        cr = e[:, None, 0] * d[..., 1] - e[:, None, 1] * d[..., 0]
        dt = e[:, None, 0] * d[..., 0] + e[:, None, 1] * d[..., 1]
        ang = np.mod(np.arctan2(cr, dt), two_pi)
        # numerically straight-ahead points can wrap to just below 2*pi
        ang[ang > two_pi - 1e-12] = 0.0
        ang[dist2 <= tiny[idx, None]] = np.inf
        amin = ang.min(axis=1)
        stuck = ~np.isfinite(amin)
        cand = ang <= (amin[:, None] + 1e-12)
        nxt = np.argmax(np.where(cand, dist2, -1.0), axis=1)
        q = rel[idx, nxt]
        step = q - p
        area[idx] += np.where(stuck, 0.0, 0.5 * (p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]))
        perim[idx] += np.where(stuck, 0.0, np.hypot(step[:, 0], step[:, 1]))
        norm = np.hypot(step[:, 0], step[:, 1])
        safe = norm > 0
        newdir = np.where(safe[:, None], step / np.where(safe, norm, 1.0)[:, None], e)
        direction[idx] = newdir
        cur[idx] = nxt
        done = stuck | (nxt == start[idx])
        active[idx[done]] = False
    area = np.abs(area)
    if single:
        return float(area[0]), float(perim[0])
    return area, perim


def hull_volume(points: np.ndarray) -> float:
    """Volume of the convex hull of ``points`` in their ambient dimension.

    Lower-dimensional hulls have volume zero.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty (m, d) array")
    d = pts.shape[1]
    rank, _, _ = affine_rank(pts)
    if rank < d:
        return 0.0
    if d == 1:
        return float(pts.max() - pts.min())
    if d == 2:
        return float(planar_hull_measures(pts)[0])
    try:
        return float(ConvexHull(pts).volume)
    except QhullError:
        return 0.0


def _simplex_volume(vertices: np.ndarray) -> float:
    """k-volume of a k-simplex given by k+1 points in R^d."""
    edges = vertices[1:] - vertices[0]
    k = len(edges)
    gram = edges @ edges.T
    det = np.linalg.det(gram) if k else 1.0
    return math.sqrt(max(det, 0.0)) / math.factorial(k)


def _polytope3_v1(coords: np.ndarray) -> float:
    """First intrinsic volume of a full-dimensional polytope in R^3."""
    hull = ConvexHull(coords)
    normals = hull.equations[:, :3]
    total = 0.0
    for s, nbrs in enumerate(hull.neighbors):
        for k, t in enumerate(nbrs):
            if t <= s:
                continue
            edge = np.delete(hull.simplices[s], k)
            length = float(np.linalg.norm(coords[edge[0]] - coords[edge[1]]))
            c = float(np.clip(normals[s] @ normals[t], -1.0, 1.0))
            total += length * math.acos(c)
    return total / (2.0 * math.pi)


def intrinsic_volumes_lowdim(points: np.ndarray) -> np.ndarray:
    """Intrinsic volumes ``V_0..V_k`` of the hull of ``points``, exactly.

    ``k`` is the dimension of the affine hull, which must be at most 3.
    Intrinsic volumes do not depend on the ambient dimension, so the result
    is valid as ``V_j`` of the body in any space containing it; entries with
    ``j > k`` are zero and omitted.
    """
    rank, origin, basis = affine_rank(points)
    if rank == 0:
        return np.array([1.0])
    coords = (np.asarray(points, float) - origin) @ basis.T
    if rank == 1:
        return np.array([1.0, float(coords.max() - coords.min())])
    if rank == 2:
        area, perim = planar_hull_measures(coords)
        return np.array([1.0, 0.5 * perim, area])
    if rank == 3:
        hull = ConvexHull(coords)
        return np.array([1.0, _polytope3_v1(coords), 0.5 * hull.area, hull.volume])
    raise ValueError("exact intrinsic volumes need an affine hull of dimension <= 3")


class FacetStructure:
    """Merged facets, ridges and (in R^4) edges of a full-dimensional polytope.

    qhull triangulates facets; coplanar simplices are merged here so that
    every facet carries its true outer normal and (n-1)-volume.
    """

    def __init__(self, vertices: np.ndarray, tol: float = 1e-9):
        V = np.asarray(vertices, dtype=float)
        n = V.shape[1]
        rank, _, _ = affine_rank(V)
        if rank < n:
            raise ValueError("polytope is not full-dimensional")
        hull = ConvexHull(V)
        scale = max(1.0, float(np.abs(V).max()))
        eq = hull.equations
        group_of = np.full(len(eq), -1)
        reps: list[np.ndarray] = []
        for s, row in enumerate(eq):
            for g, rep in enumerate(reps):
                if np.all(np.abs(row[:n] - rep[:n]) < 1e-7) and abs(row[n] - rep[n]) < 1e-7 * scale:
                    group_of[s] = g
                    break
            else:
                group_of[s] = len(reps)
                reps.append(row)
        self.dim = n
        self.vertices = V
        self.hull_vertices = np.sort(hull.vertices)
        k = len(reps)
        normals = np.zeros((k, n))
        offsets = np.zeros(k)
        areas = np.zeros(k)
        for s, g in enumerate(group_of):
            areas[g] += _simplex_volume(V[hull.simplices[s]])
        for g in range(k):
            rows = eq[group_of == g]
            nv = rows[:, :n].mean(axis=0)
            normals[g] = nv / np.linalg.norm(nv)
            offsets[g] = -rows[:, n].mean()
        self.normals = normals
        self.offsets = offsets
        self.areas = areas
        hv = V[self.hull_vertices]
        incid = np.abs(hv @ normals.T - offsets) <= tol * scale * 10
        self.facet_vertices = [frozenset(self.hull_vertices[incid[:, g]].tolist()) for g in range(k)]
        # facet adjacency through the triangulation
        pairs = set()
        for s, nbrs in enumerate(hull.neighbors):
            for t in nbrs:
                a, b = group_of[s], group_of[t]
                if a != b:
                    pairs.add((min(a, b), max(a, b)))
        self.ridges = []
        seen = set()
        for a, b in sorted(pairs):
            common = self.facet_vertices[a] & self.facet_vertices[b]
            key = frozenset(common)
            if key in seen or len(common) < n - 1:
                continue
            pts = V[sorted(common)]
            r, origin, basis = affine_rank(pts)
            if r != n - 2:
                continue
            seen.add(key)
            if n - 2 == 0:
                vol = 1.0
            elif n - 2 == 1:
                vol = float(np.ptp(pts @ basis[0]))
            else:
                vol = hull_volume((pts - origin) @ basis.T)
            self.ridges.append((a, b, vol))
        self._edges = None

    @property
    def edges(self):
        """1-faces as ``(length, facet indices)`` pairs; needed in R^4."""
        if self._edges is None:
            self._edges = self._find_edges()
        return self._edges

    def _find_edges(self):
        n = self.dim
        V = self.vertices
        facets_of: dict[int, set[int]] = {}
        for g, fv in enumerate(self.facet_vertices):
            for v in fv:
                facets_of.setdefault(v, set()).add(g)
        out = []
        seen = set()
        hv = self.hull_vertices
        for a, b in itertools.combinations(hv.tolist(), 2):
            fs = facets_of.get(a, set()) & facets_of.get(b, set())
            if len(fs) < n - 1:
                continue
            fs = sorted(fs)
            if np.linalg.matrix_rank(self.normals[fs], tol=1e-8) < n - 1:
                continue
            common = frozenset.intersection(*(self.facet_vertices[g] for g in fs))
            if common in seen:
                continue
            pts = V[sorted(common)]
            r, origin, basis = affine_rank(pts)
            if r != 1:
                continue
            seen.add(common)
            out.append((float(np.ptp(pts @ basis[0])), tuple(fs), basis[0]))
        return out


def facet_structure(vertices: np.ndarray) -> FacetStructure:
    return FacetStructure(vertices)
