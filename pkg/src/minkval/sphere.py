"""Quadrature grids on S^{n-1}, spherical functions and zonal convolution.

Grids carry uniform weights and are antipodally symmetric, so odd
integrands vanish to rounding and ``f(-u)`` is available on the grid.
A zonal measure is described by its pushforward to ``t = u . v``: a
density against the invariant probability measure plus point atoms in
``t`` (an atom at ``t`` with ``|t| < 1`` is the uniform measure on the ring
``{v : u . v = t}``).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.stats import norm, qmc

__all__ = [
    "SphereGrid",
    "SphericalFunction",
    "ZonalProfile",
    "SupportBody",
    "build_sphere_grid",
    "convolve_zonal",
    "convolve_zonal_at",
    "convolve_callable",
    "approximate_identity",
    "pair",
    "is_support_function",
    "ring_points",
    "profile_density_constant",
    "random_rotation",
    "grid_to_json",
    "grid_from_json",
    "function_to_json",
    "function_from_json",
    "UnsupportedDimensionError",
]

GRID_KINDS = ("fibonacci", "quasi_random", "monte_carlo")
_CHUNK_ELEMS = 4_000_000


class UnsupportedDimensionError(ValueError):
    pass


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, sign-corrected)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def profile_density_constant(n: int) -> float:
    """``c`` with ``dv = c (1-t^2)^{(n-3)/2} dt`` for ``t = e . v`` under the
    invariant probability measure on S^{n-1}."""
    return math.gamma(n / 2) / (math.sqrt(math.pi) * math.gamma((n - 1) / 2))


# ---------------------------------------------------------------- grids

def _fibonacci_half3(half: int) -> np.ndarray:
    k = np.arange(half) + 0.5
    z = k / half
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * np.arange(half)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _super_fibonacci_half4(half: int) -> np.ndarray:
    # super-Fibonacci spiral on S^3, folded onto the upper half
    psi = 1.533751168755204288118041
    phi = math.sqrt(2.0)
    s = np.arange(half) + 0.5
    t = s / half
    d = 2 * math.pi * s
    r = np.sqrt(t)
    R = np.sqrt(1.0 - t)
    alpha = d / phi
    beta = d / psi
    X = np.column_stack([r * np.sin(alpha), r * np.cos(alpha), R * np.sin(beta), R * np.cos(beta)])
    X[X[:, 3] < 0] *= -1
    return X


def _half_nodes(n: int, half: int, kind: str, rng: np.random.Generator) -> np.ndarray:
    if kind == "fibonacci":
        base = _fibonacci_half3(half) if n == 3 else _super_fibonacci_half4(half)
        return base @ random_rotation(n, rng).T
    if kind == "quasi_random":
        sob = qmc.Sobol(d=n, scramble=True, seed=rng)
        u = sob.random_base2(max(1, math.ceil(math.log2(half))))[:half]
        X = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    elif kind == "monte_carlo":
        X = rng.standard_normal((half, n))
    else:
        raise ValueError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")
    return X / np.linalg.norm(X, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Uniformly weighted, antipodally symmetric node set on S^{n-1}.

    Node ``k + N/2`` is the antipode of node ``k``.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "custom"
    seed: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.dim:
            raise ValueError("nodes must have shape (N, dim)")
        if len(weights) != len(nodes):
            raise ValueError("one weight per node")
        if np.abs(np.linalg.norm(nodes, axis=1) - 1).max() > 1e-12:
            raise ValueError("grid nodes must be unit vectors")
        if abs(weights.sum() - 1.0) > 1e-12 or np.any(weights <= 0):
            raise ValueError("grid weights must be positive and sum to 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def grid_id(self) -> str:
        if "id" not in self._cache:
            h = hashlib.sha256()
            h.update(str(self.dim).encode())
            h.update(self.nodes.tobytes())
            h.update(self.weights.tobytes())
            self._cache["id"] = h.hexdigest()[:16]
        return self._cache["id"]

    @property
    def antipode(self) -> np.ndarray:
        """Index of ``-u`` for every node."""
        if "antipode" not in self._cache:
            N = self.size
            idx = (np.arange(N) + N // 2) % N
            if N % 2 or np.abs(self.nodes[idx] + self.nodes).max() > 1e-12:
                _, idx = self.tree.query(-self.nodes)
            self._cache["antipode"] = np.asarray(idx)
        return self._cache["antipode"]

    @property
    def tree(self) -> cKDTree:
        if "tree" not in self._cache:
            self._cache["tree"] = cKDTree(self.nodes)
        return self._cache["tree"]

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values, float)))

    def interpolation_weights(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Node indices and weights reproducing a function at arbitrary points.

        In R^3 the weights are the coefficients of ``x`` in the cone spanned by
        the enclosing triangle, so ``sum w f`` is the 1-homogeneous piecewise
        linear extension at ``x`` (for unit ``x`` the weights sum to about 1).
        In R^4 inverse-distance weights over the nearest nodes are used and
        scaled by ``|x|``.
        """
        X = np.atleast_2d(np.asarray(points, float))
        if self.dim == 3:
            return self._cone_weights(X)
        return self._knn_weights(X)

    def interpolate(self, values, points, homogeneous: bool = False) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, float))
        idx, w = self.interpolation_weights(X)
        out = np.sum(w * np.asarray(values, float)[idx], axis=1)
        if not homogeneous:
            out = out / np.sum(w, axis=1)
        return out

    @property
    def resolution(self) -> float:
        """Largest distance from a point of the sphere to the interpolation stencil."""
        if "rho" not in self._cache:
            if self.dim == 3:
                tri = self._triangulation()[0]
                P = self.nodes[tri]
                e = np.concatenate([np.linalg.norm(P[:, a] - P[:, b], axis=1) for a, b in ((0, 1), (1, 2), (0, 2))])
                self._cache["rho"] = float(e.max())
            else:
                rng = np.random.default_rng(0)
                probe = rng.standard_normal((4000, self.dim))
                probe /= np.linalg.norm(probe, axis=1, keepdims=True)
                d, _ = self.tree.query(probe, k=_KNN)
                self._cache["rho"] = float(d.max())
        return self._cache["rho"]

    def _triangulation(self):
        if "tri" not in self._cache:
            hull = ConvexHull(self.nodes)
            tri = hull.simplices
            inv = np.linalg.inv(np.transpose(self.nodes[tri], (0, 2, 1)))
            incident: list[list[int]] = [[] for _ in range(self.size)]
            for t, s in enumerate(tri):
                for v in s:
                    incident[v].append(t)
            deg = max(len(x) for x in incident)
            table = np.full((self.size, deg), -1)
            for v, lst in enumerate(incident):
                table[v, :len(lst)] = lst
            self._cache["tri"] = (tri, inv, table)
        return self._cache["tri"]

    def _cone_weights(self, X):
        tri, inv, table = self._triangulation()
        m = len(X)
        norms = np.linalg.norm(X, axis=1)
        U = X / np.where(norms > 0, norms, 1.0)[:, None]
        best_t = np.full(m, -1)
        best_lam = np.zeros((m, 3))
        best_score = np.full(m, -np.inf)
        for k in (1, 4, 12):
            todo = np.nonzero(best_score < -1e-12)[0]
            if len(todo) == 0:
                break
            _, nn = self.tree.query(U[todo], k=k)
            nn = np.asarray(nn).reshape(len(todo), -1)
            cand = table[nn].reshape(len(todo), -1)
            valid = cand >= 0
            safe = np.where(valid, cand, 0)
            lam = np.einsum("mcij,mj->mci", inv[safe], U[todo])
            score = np.where(valid, lam.min(axis=2), -np.inf)
            pick = np.argmax(score, axis=1)
            sc = score[np.arange(len(todo)), pick]
            better = sc > best_score[todo]
            rows = todo[better]
            best_score[rows] = sc[better]
            best_t[rows] = safe[np.arange(len(todo)), pick][better]
            best_lam[rows] = lam[np.arange(len(todo)), pick][better]
        idx = tri[best_t]
        w = np.clip(best_lam, 0.0, None) * norms[:, None]
        return idx, w

    def _knn_weights(self, X):
        norms = np.linalg.norm(X, axis=1)
        U = X / np.where(norms > 0, norms, 1.0)[:, None]
        d, idx = self.tree.query(U, k=_KNN)
        w = 1.0 / (d + 1e-12) ** 2
        w = w / w.sum(axis=1, keepdims=True)
        return idx, w * norms[:, None]


_KNN = 8


def build_sphere_grid(n: int, node_count: int, kind: str = "fibonacci", seed: int = 0) -> SphereGrid:
    """Quadrature grid for the invariant probability measure on S^{n-1}.

    ``node_count`` is rounded up to an even number so that the grid can be
    closed under ``u -> -u``; weights are uniform.
    """
    if n not in (3, 4):
        raise UnsupportedDimensionError(f"sphere grids are available for n in {{3, 4}}, got {n}")
    if node_count < 100:
        raise ValueError("node_count must be at least 100")
    if kind not in GRID_KINDS:
        raise ValueError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")
    half = (node_count + 1) // 2
    rng = np.random.default_rng([seed, GRID_KINDS.index(kind), n])
    H = _half_nodes(n, half, kind, rng)
    H /= np.linalg.norm(H, axis=1, keepdims=True)
    nodes = np.vstack([H, -H])
    weights = np.full(2 * half, 1.0 / (2 * half))
    return SphereGrid(n, nodes, weights, kind=kind, seed=seed)


# ---------------------------------------------------------------- functions

@dataclass(frozen=True, eq=False)
class SphericalFunction:
    """Values of a function at the nodes of a grid.

    ``se`` optionally holds a per-node standard error when the values are
    Monte Carlo estimates.
    """

    grid: SphereGrid
    values: np.ndarray
    se: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if len(v) != self.grid.size:
            raise ValueError("one value per grid node")
        if not np.all(np.isfinite(v)):
            raise ValueError("spherical function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.se is not None:
            s = np.array(self.se, dtype=float).reshape(-1)
            s.setflags(write=False)
            object.__setattr__(self, "se", s)

    @classmethod
    def from_callable(cls, grid: SphereGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "SphericalFunction":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def constant(cls, grid: SphereGrid, c: float) -> "SphericalFunction":
        return cls(grid, np.full(grid.size, float(c)))

    def _check(self, other: "SphericalFunction"):
        if other.grid is not self.grid and other.grid.grid_id != self.grid.grid_id:
            raise ValueError("spherical functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SphericalFunction):
            self._check(other)
            return SphericalFunction(self.grid, self.values + other.values, _add_se(self.se, other.se))
        return SphericalFunction(self.grid, self.values + float(other), self.se)

    def __sub__(self, other):
        if isinstance(other, SphericalFunction):
            self._check(other)
            return SphericalFunction(self.grid, self.values - other.values, _add_se(self.se, other.se))
        return SphericalFunction(self.grid, self.values - float(other), self.se)

    def __mul__(self, c: float):
        c = float(c)
        return SphericalFunction(self.grid, c * self.values, None if self.se is None else abs(c) * self.se)

    __rmul__ = __mul__

    def reflect(self) -> "SphericalFunction":
        """``u -> f(-u)``."""
        a = self.grid.antipode
        return SphericalFunction(self.grid, self.values[a], None if self.se is None else self.se[a])

    def at(self, points) -> np.ndarray:
        return self.grid.interpolate(self.values, points)

    def rotate(self, rot) -> "SphericalFunction":
        """``u -> f(rot^{-1} u)`` by interpolation."""
        R = np.asarray(rot, float)
        return SphericalFunction(self.grid, self.at(self.grid.nodes @ R))

    def mean(self) -> float:
        return self.grid.integrate(self.values)


def _add_se(a, b):
    if a is None and b is None:
        return None
    a = 0.0 if a is None else a
    b = 0.0 if b is None else b
    return np.sqrt(np.asarray(a) ** 2 + np.asarray(b) ** 2)


def pair(f: SphericalFunction, g: SphericalFunction) -> float:
    """Canonical pairing: the grid quadrature of ``f g``."""
    f._check(g)
    return float(np.sum(f.grid.weights * f.values * g.values))


# ---------------------------------------------------------------- zonal profiles

@dataclass(frozen=True, eq=False)
class ZonalProfile:
    """Zonal measure given by ``density(t)`` against the invariant probability
    measure plus atoms ``(t, weight)``.

    ``support_min`` is a lower bound for the support of the density in
    ``t`` (``-1`` when unknown); it lets quadrature concentrate on caps.
    """

    density: Callable[[np.ndarray], np.ndarray] | None = None
    atoms: tuple = ()
    support_min: float = -1.0
    label: str = ""

    def __post_init__(self):
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        for t, _ in atoms:
            if not -1.0 <= t <= 1.0:
                raise ValueError("zonal atoms must sit at t in [-1, 1]")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def dirac(cls, weight: float = 1.0) -> "ZonalProfile":
        return cls(atoms=((1.0, weight),), support_min=1.0, label="dirac")

    @classmethod
    def tabulated(cls, t: Sequence[float], values: Sequence[float], atoms=()) -> "ZonalProfile":
        tt = np.asarray(t, float)
        vv = np.asarray(values, float)
        order = np.argsort(tt)
        tt, vv = tt[order], vv[order]
        return cls(lambda s: np.interp(s, tt, vv, left=0.0, right=0.0), atoms, float(tt[0]), "tabulated")

    def eval_density(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        if self.density is None:
            return np.zeros_like(t)
        return np.asarray(self.density(t), float) * np.ones_like(t)

    def total_mass(self, n: int, order: int = 200) -> float:
        return self.density_mass(n, order) + sum(w for _, w in self.atoms)

    def density_mass(self, n: int, order: int = 200) -> float:
        if self.density is None:
            return 0.0
        theta, wq = _theta_rule(n, self.support_min, order)
        return float(np.sum(wq * self.eval_density(np.cos(theta))))

    def hat(self) -> "ZonalProfile":
        """Image under inversion of the lifted measure.

        For a zonal measure the law of ``e . theta e`` does not change under
        ``theta -> theta^{-1}``, so the profile is returned unchanged; the
        group-level routes test this rather than assume it.
        """
        return ZonalProfile(self.density, self.atoms, self.support_min, self.label + "^")

    def __add__(self, other: "ZonalProfile") -> "ZonalProfile":
        d1, d2 = self.density, other.density
        if d1 is None:
            dens = d2
        elif d2 is None:
            dens = d1
        else:
            dens = lambda t: d1(t) + d2(t)  # noqa: E731
        return ZonalProfile(dens, self.atoms + other.atoms, min(self.support_min, other.support_min))

    def scaled(self, c: float) -> "ZonalProfile":
        d = self.density
        dens = None if d is None else (lambda t: c * d(t))
        return ZonalProfile(dens, tuple((t, c * w) for t, w in self.atoms), self.support_min, self.label)


def _theta_rule(n: int, support_min: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in the polar angle with the invariant weight."""
    top = math.acos(max(-1.0, min(1.0, support_min)))
    x, w = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * top * (x + 1.0)
    c = profile_density_constant(n)
    wq = 0.5 * top * w * c * np.sin(theta) ** (n - 2)
    return theta, wq


def approximate_identity(m: int, n: int) -> ZonalProfile:
    """Polynomial bump concentrated on the cap of geodesic radius ``1/m``.

    ``(1 - ((1-t)/(1-cos(1/m)))^2)^3`` clipped at zero and normalised to unit
    mass against the invariant probability measure.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if n not in (3, 4):
        raise UnsupportedDimensionError(f"n must be 3 or 4, got {n}")
    t0 = math.cos(1.0 / m)
    width = 1.0 - t0

    def bump(t):
        s = (1.0 - np.asarray(t, float)) / width
        return np.clip(1.0 - s * s, 0.0, None) ** 3

    raw = ZonalProfile(bump, (), t0)
    mass = raw.density_mass(n, order=400)
    return ZonalProfile(lambda t: bump(t) / mass, (), t0, label=f"bump_m{m}")


# ---------------------------------------------------------------- convolution

def ring_points(u: np.ndarray, t: float, count: int) -> np.ndarray:
    """``count`` points evenly spread on ``{v : u . v = t}`` for unit ``u``.

    Returns shape (len(u), count, n).
    """
    U = np.atleast_2d(np.asarray(u, float))
    m, n = U.shape
    s = math.sqrt(max(0.0, 1.0 - t * t))
    basis = _orth_complement(U)  # (m, n, n-1)
    if n == 3:
        phi = 2 * math.pi * (np.arange(count) + 0.5) / count
        local = np.column_stack([np.cos(phi), np.sin(phi)])
    else:
        local = _fibonacci_half3(count // 2)
        local = np.vstack([local, -local])
    return t * U[:, None, :] + s * np.einsum("mnk,ck->mcn", basis, local)


def _orth_complement(U: np.ndarray) -> np.ndarray:
    """Orthonormal bases of ``u^perp`` for each row, shape (m, n, n-1)."""
    m, n = U.shape
    # Householder reflection taking e_n to u; its other columns span u^perp
    e = np.zeros(n)
    e[-1] = 1.0
    v = U - e
    nv = np.einsum("mn,mn->m", v, v)
    H = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    ok = nv > 1e-30
    H[ok] -= 2.0 * np.einsum("mi,mj->mij", v[ok], v[ok]) / nv[ok, None, None]
    return H[:, :, : n - 1]


def convolve_zonal(f: SphericalFunction, zeta: ZonalProfile, ring_count: int = 64) -> SphericalFunction:
    """``(f * zeta)(u) = int f(v) zeta(u.v) dv`` plus the atomic terms, at every node.

    The density part is plain grid quadrature, so the map is linear in both
    arguments up to rounding.  An atom at ``t = 1`` contributes ``w f(u)``,
    one at ``t = -1`` contributes ``w f(-u)``; other atoms average ``f`` over
    a ring using interpolation.
    """
    return SphericalFunction(f.grid, convolve_zonal_at(f, zeta, f.grid.nodes, ring_count, _on_grid=True))


def convolve_zonal_at(f: SphericalFunction, zeta: ZonalProfile, points, ring_count: int = 64,
                      _on_grid: bool = False) -> np.ndarray:
    """Evaluate ``f * zeta`` at arbitrary unit vectors."""
    grid = f.grid
    P = np.atleast_2d(np.asarray(points, float))
    out = np.zeros(len(P))
    if zeta.density is not None:
        wf = grid.weights * f.values
        rows = max(1, _CHUNK_ELEMS // grid.size)
        for s in range(0, len(P), rows):
            T = np.clip(P[s:s + rows] @ grid.nodes.T, -1.0, 1.0)
            out[s:s + rows] = np.sum(zeta.eval_density(T) * wf, axis=1)
    for t, w in zeta.atoms:
        if w == 0.0:
            continue
        if t == 1.0:
            out += w * (f.values if _on_grid else f.at(P))
        elif t == -1.0:
            out += w * (f.values[grid.antipode] if _on_grid else f.at(-P))
        else:
            R = ring_points(P, t, ring_count)
            vals = f.at(R.reshape(-1, grid.dim)).reshape(len(P), -1)
            out += w * vals.mean(axis=1)
    return out


def convolve_callable(g: Callable[[np.ndarray], np.ndarray], zeta: ZonalProfile, points,
                      theta_order: int = 64, ring_count: int = 64) -> np.ndarray:
    """``(g * zeta)`` at ``points`` for a function given in closed form.

    The density part uses a product rule: Gauss-Legendre in the polar angle
    around each point times an even ring rule.  Accurate for narrow caps
    where a grid would see only a handful of nodes.
    """
    P = np.atleast_2d(np.asarray(points, float))
    n = P.shape[1]
    out = np.zeros(len(P))
    if zeta.density is not None:
        theta, wq = _theta_rule(n, zeta.support_min, theta_order)
        dens = zeta.eval_density(np.cos(theta))
        for th, wt, d in zip(theta, wq, dens):
            if d == 0.0:
                continue
            R = ring_points(P, math.cos(th), ring_count)
            out += wt * d * g(R.reshape(-1, n)).reshape(len(P), -1).mean(axis=1)
    for t, w in zeta.atoms:
        R = ring_points(P, t, 1 if abs(t) == 1.0 else ring_count)
        out += w * g(R.reshape(-1, n)).reshape(len(P), -1).mean(axis=1)
    return out


# ---------------------------------------------------------------- support bodies

@dataclass(frozen=True, eq=False)
class SupportBody:
    """Convex body known through support values on a grid."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if len(v) != self.grid.size:
            raise ValueError("one support value per grid node")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f: SphericalFunction) -> "SupportBody":
        return cls(f.grid, f.values)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def support(self, U) -> np.ndarray:
        """1-homogeneous interpolated extension ``H(x)``."""
        return self.grid.interpolate(self.values, U, homogeneous=True)

    def as_function(self) -> SphericalFunction:
        return SphericalFunction(self.grid, self.values)

    def reflect(self) -> "SupportBody":
        return SupportBody(self.grid, self.values[self.grid.antipode])

    def translate(self, x) -> "SupportBody":
        return SupportBody(self.grid, self.values + self.grid.nodes @ np.asarray(x, float))

    def scale(self, lam: float) -> "SupportBody":
        return SupportBody(self.grid, lam * self.values)

    def rotate(self, rot) -> "SupportBody":
        R = np.asarray(rot, float)
        return SupportBody(self.grid, self.support(self.grid.nodes @ R))


def _lipschitz_estimate(f: SphericalFunction) -> float:
    grid = f.grid
    d, idx = grid.tree.query(grid.nodes, k=min(7, grid.size))
    d, idx = d[:, 1:], idx[:, 1:]
    diff = np.abs(f.values[idx] - f.values[:, None])
    return float((diff / np.maximum(d, 1e-15)).max())


def is_support_function(f: SphericalFunction, trials: int = 1000, tol: float = 1e-9,
                        seed: int = 0) -> tuple[bool, dict | None]:
    """Search for a violation of subadditivity of the homogeneous extension.

    Random pairs ``x, y`` are tested for ``H(x+y) <= H(x) + H(y) + allowance``
    where the allowance adds to ``tol`` the interpolation error of the grid
    (estimated Lipschitz constant times grid resolution).  Returns
    ``(True, None)`` or ``(False, witness)`` with the first violating pair.
    """
    if trials < 1000:
        raise ValueError("at least 1000 trials are required")
    grid = f.grid
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((trials, grid.dim))
    Y = rng.standard_normal((trials, grid.dim))
    S = X + Y
    H = lambda Z: grid.interpolate(f.values, Z, homogeneous=True)  # noqa: E731
    hx, hy, hs = H(X), H(Y), H(S)
    slack = _lipschitz_estimate(f) * grid.resolution
    nx, ny, ns = (np.linalg.norm(Z, axis=1) for Z in (X, Y, S))
    if grid.dim == 3:
        # piecewise linear interpolation of a sublinear function lies above it,
        # so only the error at x + y can hide a true inequality
        allow = tol + slack * ns
    else:
        allow = tol + slack * (nx + ny + ns)
    gap = hs - hx - hy - allow
    bad = np.nonzero(gap > 0)[0]
    if len(bad) == 0:
        return True, None
    k = int(bad[0])
    return False, {
        "x": X[k].tolist(),
        "y": Y[k].tolist(),
        "H(x)": float(hx[k]),
        "H(y)": float(hy[k]),
        "H(x+y)": float(hs[k]),
        "allowance": float(allow[k]),
        "seed": seed,
        "trial": k,
    }


# ---------------------------------------------------------------- serialisation

def grid_to_json(grid: SphereGrid) -> dict:
    return {"dim": grid.dim, "nodes": grid.nodes.tolist(), "weights": grid.weights.tolist(),
            "kind": grid.kind, "seed": grid.seed, "grid_id": grid.grid_id}


def grid_from_json(data: dict) -> SphereGrid:
    return SphereGrid(int(data["dim"]), data["nodes"], data["weights"],
                      kind=data.get("kind", "custom"), seed=data.get("seed"))


def function_to_json(f: SphericalFunction) -> dict:
    out = {"grid_id": f.grid.grid_id, "values": f.values.tolist()}
    if f.se is not None:
        out["se"] = f.se.tolist()
    return out


def function_from_json(data: dict, grid: SphereGrid) -> SphericalFunction:
    if data.get("grid_id") not in (None, grid.grid_id):
        raise ValueError("function was stored for a different grid")
    return SphericalFunction(grid, data["values"], data.get("se"))


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj))
