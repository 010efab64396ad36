"""Shared instance generators for the suites."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..geometry import Polytope, random_polytope
from ..grassmann import sample_grassmann
from ..hull import hull_volume
from ..sphere import build_sphere_grid

MIN_INTERIOR_VOLUME = 1e-6


class DegenerateInputError(ValueError):
    pass


@lru_cache(maxsize=8)
def grid(n: int, nodes: int, seed: int, kind: str = "fibonacci"):
    return build_sphere_grid(n, nodes, kind, seed)


@lru_cache(maxsize=16)
def gr_sample(n: int, i: int, count: int, seed: int):
    return sample_grassmann(n, i, count, seed)


def body(n: int, seed: int, lo: int = 8, hi: int = 20) -> Polytope:
    """Random polytope with ``lo..hi`` vertices on the sphere, then a random
    affine stretch so that instances are not all nearly round."""
    rng = np.random.default_rng([seed, 1])
    while True:
        m = int(rng.integers(lo, hi + 1))
        P = random_polytope(n, m, int(rng.integers(2**31)))
        A = np.eye(n) + 0.4 * rng.standard_normal((n, n))
        if abs(np.linalg.det(A)) < 0.2:
            continue
        P = Polytope(P.vertices @ A.T + rng.standard_normal(n))
        if hull_volume(P.vertices) > 100 * MIN_INTERIOR_VOLUME:
            return P


def pair(n: int, seed: int, lo: int = 8, hi: int = 20) -> tuple[Polytope, Polytope]:
    rng = np.random.default_rng([seed, 2])
    return body(n, int(rng.integers(2**31)), lo, hi), body(n, int(rng.integers(2**31)), lo, hi)


def require_interior(P: Polytope) -> None:
    if hull_volume(P.vertices) <= MIN_INTERIOR_VOLUME:
        raise DegenerateInputError("inequality checks need bodies with non-empty interior")
