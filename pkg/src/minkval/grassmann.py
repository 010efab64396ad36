"""Subspaces, sampled measures on Grassmannians, and transforms between them.

Subspaces are stored as orthonormal frames; batches of frames are arrays of
shape ``(k, n, i)``.  Measures are weighted sample sets.  The pole is the
last basis vector ``e_n`` and the reference i-subspace is spanned by the
first ``i`` basis vectors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import qr

from .sphere import SphereGrid, SphericalFunction, ZonalProfile, _fibonacci_half3, _theta_rule, random_rotation

__all__ = [
    "Subspace",
    "GrassmannSample",
    "GrassmannFunction",
    "RotationMeasure",
    "pole",
    "reference_subspace",
    "sample_grassmann",
    "cosine",
    "cosine_matrix",
    "principal_cosines",
    "cosine_transform",
    "radon_to_sphere",
    "radon_frames",
    "perp",
    "perp_frames",
    "perp_transform",
    "rotation_mapping_pole",
    "pole_rotations",
    "stabilizer_rotations",
    "haar_rotations",
    "sample_zonal",
    "lifted_convolution",
    "subspaces_containing",
    "sample_to_json",
    "sample_from_json",
]

FRAME_TOL = 1e-10


def pole(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[-1] = 1.0
    return e


def reference_subspace(n: int, i: int) -> "Subspace":
    return Subspace(np.eye(n)[:, :i])


def canonical_frame(A: np.ndarray) -> np.ndarray:
    """A frame that depends only on the span of ``A``.

    Column-pivoted QR of the projector, with each column's largest entry made
    positive, and rounding to strip noise below 1e-12.
    """
    i = A.shape[1]
    P = np.round(A @ A.T, 12)
    Q, _, _ = qr(P, pivoting=True)
    Q = Q[:, :i]
    signs = np.sign(Q[np.argmax(np.abs(Q), axis=0), np.arange(i)])
    return Q * np.where(signs == 0, 1.0, signs) + 0.0


@dataclass(frozen=True, eq=False)
class Subspace:
    """i-dimensional linear subspace of R^n given by an orthonormal frame."""

    frame: np.ndarray

    def __post_init__(self):
        A = np.array(self.frame, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        n, i = A.shape
        if not 1 <= i <= n:
            raise ValueError("frame must be n x i with 1 <= i <= n")
        if np.abs(A.T @ A - np.eye(i)).max() > FRAME_TOL:
            raise ValueError("frame columns are not orthonormal")
        A.setflags(write=False)
        object.__setattr__(self, "frame", A)

    @classmethod
    def span(cls, vectors) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (orthonormalised)."""
        M = np.atleast_2d(np.asarray(vectors, float))
        if M.shape[0] < M.shape[1]:
            M = M.T
        q, r = np.linalg.qr(M)
        if np.min(np.abs(np.diag(r))) < 1e-12:
            raise ValueError("spanning vectors are linearly dependent")
        return cls(q)

    @property
    def n(self) -> int:
        return self.frame.shape[0]

    @property
    def i(self) -> int:
        return self.frame.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def canonical(self) -> "Subspace":
        return Subspace(canonical_frame(self.frame))

    def rotate(self, rot) -> "Subspace":
        return Subspace(np.asarray(rot, float) @ self.frame)


def perp_frames(frames: np.ndarray) -> np.ndarray:
    """Orthonormal frames of the orthogonal complements, batched."""
    F = np.asarray(frames, float)
    k, n, i = F.shape
    Q, _ = np.linalg.qr(np.concatenate([F, np.broadcast_to(np.eye(n), (k, n, n))], axis=2))
    return Q[:, :, i:n]


def perp(E: Subspace) -> Subspace:
    if E.i == E.n:
        raise ValueError("the whole space has no nonzero complement")
    return Subspace(perp_frames(E.frame[None])[0])


def cosine(E: Subspace, F: Subspace) -> float:
    """``|det(A_E^T A_F)|``, the factor by which projection onto F scales i-volume in E."""
    if E.n != F.n or E.i != F.i:
        raise ValueError("subspaces must share ambient dimension and dimension")
    return float(abs(np.linalg.det(E.frame.T @ F.frame)))


def cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``|cos(A_j, B_k)|`` for two frame batches, shape (len(A), len(B))."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    if A.shape[1:] != B.shape[1:]:
        raise ValueError("frame batches have different shapes")
    i = A.shape[2]
    if i == 1:
        return np.abs(A[:, :, 0] @ B[:, :, 0].T)
    M = np.einsum("anj,bnk->abjk", A, B)
    return np.abs(np.linalg.det(M))


def principal_cosines(E: Subspace, F: Subspace) -> np.ndarray:
    """Cosines of the principal angles, in decreasing order."""
    return np.linalg.svd(E.frame.T @ F.frame, compute_uv=False)


@dataclass(frozen=True, eq=False)
class GrassmannSample:
    """Weighted set of i-subspaces; represents a (signed) measure on Gr_{i,n}."""

    frames: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        F = np.array(self.frames, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if F.ndim != 3 or len(F) != len(w):
            raise ValueError("frames must be (k, n, i) with one weight each")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        i = F.shape[2]
        gram = np.einsum("kni,knj->kij", F, F)
        if len(F) and np.abs(gram - np.eye(i)).max() > FRAME_TOL:
            raise ValueError("sample frames are not orthonormal")
        F.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "frames", F)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.frames.shape[1]

    @property
    def i(self) -> int:
        return self.frames.shape[2]

    def __len__(self) -> int:
        return len(self.weights)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def subspace(self, k: int) -> Subspace:
        return Subspace(self.frames[k])

    def rotate(self, rot) -> "GrassmannSample":
        return GrassmannSample(np.einsum("ab,kbi->kai", np.asarray(rot, float), self.frames), self.weights)

    def rotate_each(self, rots: np.ndarray) -> "GrassmannSample":
        return GrassmannSample(np.einsum("kab,kbi->kai", rots, self.frames), self.weights)

    def perp(self) -> "GrassmannSample":
        return GrassmannSample(perp_frames(self.frames), self.weights)

    def scaled(self, c: float) -> "GrassmannSample":
        return GrassmannSample(self.frames, c * self.weights)

    def reweighted(self, weights) -> "GrassmannSample":
        return GrassmannSample(self.frames, weights)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values, float)))


@dataclass(frozen=True, eq=False)
class GrassmannFunction:
    """Function on Gr_{i,n} evaluated on frame batches ``(k, n, i)``.

    ``se_rule`` optionally returns standard errors of Monte Carlo values.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    n: int
    i: int
    se_rule: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, frames) -> np.ndarray:
        F = np.asarray(frames, float)
        if F.ndim == 2:
            F = F[None]
        return np.asarray(self.rule(F), float).reshape(len(F))

    def at(self, E: Subspace) -> float:
        return float(self(E.frame[None])[0])

    def se(self, frames) -> np.ndarray:
        F = np.asarray(frames, float)
        if F.ndim == 2:
            F = F[None]
        if self.se_rule is None:
            return np.zeros(len(F))
        return np.asarray(self.se_rule(F), float).reshape(len(F))

    @classmethod
    def constant(cls, n: int, i: int, c: float) -> "GrassmannFunction":
        return cls(lambda F: np.full(len(F), float(c)), n, i)

    @classmethod
    def tabulated(cls, sample: GrassmannSample, values) -> "GrassmannFunction":
        """Nearest-subspace lookup of values stored on a sample."""
        vals = np.asarray(values, float)
        P = np.einsum("kni,kmi->knm", sample.frames, sample.frames).reshape(len(sample), -1)

        def rule(F):
            Q = np.einsum("kni,kmi->knm", F, F).reshape(len(F), -1)
            d = ((Q[:, None, :] - P[None]) ** 2).sum(axis=2)
            return vals[np.argmin(d, axis=1)]

        return cls(rule, sample.n, sample.i)

    def __add__(self, other: "GrassmannFunction") -> "GrassmannFunction":
        a, b = self.rule, other.rule
        return GrassmannFunction(lambda F: a(F) + b(F), self.n, self.i)

    def scaled(self, c: float) -> "GrassmannFunction":
        a = self.rule
        return GrassmannFunction(lambda F: c * a(F), self.n, self.i)

    def rotate(self, rot) -> "GrassmannFunction":
        """``E -> f(rot^{-1} E)``."""
        R = np.asarray(rot, float)
        a = self.rule
        return GrassmannFunction(lambda F: a(np.einsum("ba,kbi->kai", R, F)), self.n, self.i)


# ---------------------------------------------------------------- sampling

def haar_rotations(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of Haar-distributed orthogonal matrices."""
    q, r = np.linalg.qr(rng.standard_normal((count, n, n)))
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    return q * d[:, None, :]


def stabilizer_rotations(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rotations fixing the pole ``e_n``."""
    out = np.zeros((count, n, n))
    out[:, : n - 1, : n - 1] = haar_rotations(n - 1, count, rng)
    out[:, n - 1, n - 1] = 1.0
    return out


def _householder_to(U: np.ndarray) -> np.ndarray:
    """Reflections mapping ``e_n`` to each row of ``U`` (identity when equal)."""
    m, n = U.shape
    v = U - pole(n)
    nv = np.einsum("mn,mn->m", v, v)
    H = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    ok = nv > 1e-30
    H[ok] -= 2.0 * np.einsum("mi,mj->mij", v[ok], v[ok]) / nv[ok, None, None]
    return H


def pole_rotations(U: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Orthogonal matrices ``eta`` with ``eta e_n = u`` for each row ``u``.

    With ``rng`` the reflection is composed with a Haar element of the
    stabiliser of the pole, which makes ``eta`` uniform among all choices.
    """
    U = np.atleast_2d(np.asarray(U, float))
    H = _householder_to(U)
    if rng is None:
        return H
    return H @ stabilizer_rotations(U.shape[1], len(U), rng)


def rotation_mapping_pole(u, stabilizer_seed: int | None = None) -> np.ndarray:
    """An orthogonal ``eta`` with ``eta e_n = u``, randomised over the stabiliser."""
    u = np.asarray(u, float).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector")
    rng = None if stabilizer_seed is None else np.random.default_rng(stabilizer_seed)
    return pole_rotations(u[None], rng)[0]


def sample_grassmann(n: int, i: int, count: int, seed: int) -> GrassmannSample:
    """Orthonormalised Gaussian frames; uniform weights ``1/count``."""
    if not 1 <= i <= n - 1:
        raise ValueError("need 1 <= i <= n-1")
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((count, n, i)))
    q = q * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]
    return GrassmannSample(q, np.full(count, 1.0 / count))


def _stratified_lines3(count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` unit vectors in R^3 from a Fibonacci half-sphere under a Haar rotation."""
    return _fibonacci_half3(count) @ random_rotation(3, rng).T


def subspaces_containing(U: np.ndarray, i: int, count: int, rng: np.random.Generator,
                         stratified: bool = True) -> np.ndarray:
    """For each unit ``u``, ``count`` random i-subspaces containing ``u``.

    Built as ``span{u}`` plus a random (i-1)-frame of ``u^perp``.  With
    ``stratified`` the low-dimensional cases use a randomised stratified set
    instead of i.i.d. draws: lines in a plane (n = 3, i = 2) are spread over
    the half circle with one random offset, and for n = 4, i in {2, 3} the
    line (or the complement of the plane) inside ``u^perp`` runs over a
    randomly rotated Fibonacci half-sphere.  Each draw is still uniform.
    Returns frames of shape (len(U), count, n, i).
    """
    U = np.atleast_2d(np.asarray(U, float))
    m, n = U.shape
    if i < 1:
        raise ValueError("subspaces containing a line have dimension >= 1")
    basis = _householder_to(U)[:, :, : n - 1]  # columns span u^perp
    out = np.empty((m, count, n, i))
    out[:, :, :, 0] = U[:, None, :]
    if i == 1:
        return out
    if n - 1 == 2 and i == 2 and stratified:
        off = rng.random()
        phi = math.pi * (np.arange(count) + off) / count
        loc = np.column_stack([np.cos(phi), np.sin(phi)])[None, :, :, None]
        loc = np.broadcast_to(loc, (m, count, 2, 1))
    elif n - 1 == 3 and i in (2, 3) and stratified:
        V = _stratified_lines3(count, rng)
        loc = V[:, :, None] if i == 2 else perp_frames(V[:, :, None])
        loc = np.broadcast_to(loc[None], (m, count, 3, i - 1))
    else:
        g = rng.standard_normal((m, count, n - 1, i - 1))
        loc, r = np.linalg.qr(g)
    out[:, :, :, 1:] = np.einsum("mnk,mckj->mcnj", basis, loc)
    return out


# ---------------------------------------------------------------- transforms

def cosine_transform(f: GrassmannFunction, sample: GrassmannSample, chunk: int = 2048) -> GrassmannFunction:
    """``(C_i f)(F) = int |cos(E, F)| f(E) dE`` with ``dE`` the sample.

    The returned function also reports the standard error of the weighted
    sum, treating the sample as i.i.d. draws.
    """
    if f.n != sample.n or f.i != sample.i:
        raise ValueError("function and sample live on different Grassmannians")
    fv = f(sample.frames)
    w = sample.weights
    m = len(w)

    def terms(F):
        out = []
        for s in range(0, len(F), chunk):
            out.append(cosine_matrix(F[s:s + chunk], sample.frames) * (w * fv))
        return np.vstack(out)

    def rule(F):
        return terms(F).sum(axis=1)

    def se_rule(F):
        T = terms(F) * m
        return T.std(axis=1, ddof=1) / math.sqrt(m) if m > 1 else np.zeros(len(F))

    return GrassmannFunction(rule, f.n, f.i, se_rule)


def perp_transform(f: GrassmannFunction) -> GrassmannFunction:
    """``f^perp(E) = f(E^perp)``, a function on the complementary Grassmannian."""
    a = f.rule
    return GrassmannFunction(lambda F: a(perp_frames(F)), f.n, f.n - f.i)


def radon_frames(grid_nodes: np.ndarray, i: int, inner_count: int, seed: int, start: int = 0,
                 stratified: bool = True) -> np.ndarray:
    """Inner subspace frames used by :func:`radon_to_sphere` for a block of nodes.

    Node ``start + k`` draws from its own stream ``default_rng([seed, start + k])``,
    so any partition of the nodes reproduces the same frames.
    """
    U = np.atleast_2d(grid_nodes)
    out = np.empty((len(U), inner_count, U.shape[1], i))
    for k, u in enumerate(U):
        rng = np.random.default_rng([seed, start + k])
        out[k] = subspaces_containing(u[None], i, inner_count, rng, stratified)[0]
    return out


def radon_to_sphere(f: GrassmannFunction, i: int, grid: SphereGrid, inner_count: int = 512,
                    seed: int = 0, block: int = 256) -> SphericalFunction:
    """``(R_i f)(u)``: average of ``f`` over i-subspaces containing ``u``.

    Per-node standard errors use the i.i.d. formula even when the inner
    sample is stratified, so they overstate the actual error.
    """
    if i < 1:
        raise ValueError("the Radon transform needs i >= 1")
    if f.i != i or f.n != grid.dim:
        raise ValueError("function dimension does not match i and the grid")
    N = grid.size
    vals = np.empty(N)
    se = np.empty(N)
    for s in range(0, N, block):
        U = grid.nodes[s:s + block]
        F = radon_frames(U, i, inner_count, seed, start=s)
        v = f(F.reshape(-1, grid.dim, i)).reshape(len(U), inner_count)
        vals[s:s + block] = v.mean(axis=1)
        se[s:s + block] = v.std(axis=1, ddof=1) / math.sqrt(inner_count) if inner_count > 1 else 0.0
    return SphericalFunction(grid, vals, se)


# ---------------------------------------------------------------- group level

@dataclass(frozen=True, eq=False)
class RotationMeasure:
    """Weighted sample of orthogonal matrices, a measure on O(n)."""

    rotations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotations, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if R.ndim != 3 or len(R) != len(w):
            raise ValueError("rotations must be (k, n, n) with one weight each")
        object.__setattr__(self, "rotations", R)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.rotations.shape[1]

    def hat(self) -> "RotationMeasure":
        """Pushforward under inversion."""
        return RotationMeasure(np.transpose(self.rotations, (0, 2, 1)), self.weights)

    def convolve(self, other: "RotationMeasure") -> "RotationMeasure":
        """``mu * sigma``: image of the product measure under ``(a, b) -> a b``."""
        R = np.einsum("aij,bjk->abik", self.rotations, other.rotations).reshape(-1, self.n, self.n)
        w = np.outer(self.weights, other.weights).reshape(-1)
        return RotationMeasure(R, w)

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(self.weights * fn(self.rotations)))

    @classmethod
    def from_sphere_sample(cls, V: np.ndarray, rng: np.random.Generator, weights=None) -> "RotationMeasure":
        """Lift of a sphere measure: each ``v`` becomes ``eta_v h`` with ``h``
        Haar in the stabiliser of the pole."""
        V = np.atleast_2d(V)
        w = np.full(len(V), 1.0 / len(V)) if weights is None else np.asarray(weights, float)
        return cls(pole_rotations(V, rng), w)


def sample_zonal(profile: ZonalProfile, n: int, count: int, rng: np.random.Generator,
                 resolution: int = 4000) -> np.ndarray:
    """Draw unit vectors from a nonnegative zonal profile (normalised)."""
    atoms = [(t, w) for t, w in profile.atoms if w != 0]
    dens_mass = profile.density_mass(n) if profile.density is not None else 0.0
    masses = np.array([dens_mass] + [w for _, w in atoms])
    if np.any(masses < 0) or masses.sum() <= 0:
        raise ValueError("sampling needs a nonnegative profile with positive mass")
    which = rng.choice(len(masses), size=count, p=masses / masses.sum())
    t = np.empty(count)
    sel = which == 0
    if sel.any():
        top = math.acos(max(-1.0, min(1.0, profile.support_min)))
        theta = np.linspace(0.0, top, resolution + 1)
        mid = 0.5 * (theta[1:] + theta[:-1])
        pdf = profile.eval_density(np.cos(mid)) * np.sin(mid) ** (n - 2)
        cdf = np.concatenate([[0.0], np.cumsum(pdf)])
        cdf /= cdf[-1]
        t[sel] = np.cos(np.interp(rng.random(sel.sum()), cdf, theta))
    for k, (ta, _) in enumerate(atoms, start=1):
        t[which == k] = ta
    g = rng.standard_normal((count, n - 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    return np.column_stack([s[:, None] * g, t])


def lifted_convolution(f: GrassmannFunction, V: np.ndarray, eta: np.ndarray, rng: np.random.Generator,
                       weights=None) -> tuple[float, float]:
    """``(f * mu)(eta) = int f(eta theta^{-1} E_ref) dmu(theta)`` for the lift of a
    sphere measure given by samples ``V``.

    Each sample ``v`` is lifted to ``theta = eta_v h`` with ``h`` Haar in the
    stabiliser of the pole.  Returns the estimate and its standard error.
    """
    n, i = f.n, f.i
    M = RotationMeasure.from_sphere_sample(V, rng, weights)
    ref = np.eye(n)[:, :i]
    frames = np.einsum("ab,kcb,cj->kaj", eta, M.rotations, ref)
    vals = f(frames)
    m = len(vals)
    est = float(np.sum(M.weights * vals))
    se = float(np.std(m * M.weights * vals, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return est, se


# ---------------------------------------------------------------- serialisation

def sample_to_json(sample: GrassmannSample) -> dict:
    frames = [canonical_frame(F).tolist() for F in sample.frames]
    return {"n": sample.n, "i": sample.i, "frames": frames, "weights": sample.weights.tolist()}


def sample_from_json(data: dict) -> GrassmannSample:
    F = np.asarray(data["frames"], float)
    if F.shape[1:] != (int(data["n"]), int(data["i"])):
        raise ValueError("frame shape does not match declared n and i")
    return GrassmannSample(F, data["weights"])


def save_sample(sample: GrassmannSample, path) -> None:
    Path(path).write_text(json.dumps(sample_to_json(sample)))


def load_sample(path) -> GrassmannSample:
    return sample_from_json(json.loads(Path(path).read_text()))
