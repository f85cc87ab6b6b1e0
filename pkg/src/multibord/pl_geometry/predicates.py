"""Exact sign predicates on dyadic grid coordinates.

Coordinates are stored as float64 arrays holding integers below 2**44, so
every coordinate difference is exact.  Determinants are evaluated by the
Leibniz expansion with a forward error bound; signs that the bound cannot
certify are recomputed with Python integers.  Topological decisions never rest
on an uncertified floating point sign.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations

import numpy as np

GRID_BITS = 44
# 24 terms of 4-fold products: relative error well under 64 ulp of the
# absolute sum; 1e-12 leaves a wide margin.
_FILTER = 1e-12


@lru_cache(maxsize=None)
def _leibniz(d: int):
    terms = []
    for perm in permutations(range(d)):
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        terms.append((perm, -1 if inv % 2 else 1))
    return terms


def snap_scale(points: np.ndarray) -> int:
    """Binary exponent ``s`` so that ``points * 2**s`` fits the grid."""
    m = float(np.max(np.abs(points))) if points.size else 1.0
    m = max(m, 1e-300)
    return GRID_BITS - 1 - int(np.ceil(np.log2(m)))


def snap(points: np.ndarray, scale: int) -> np.ndarray:
    """Round to the dyadic grid 2**-scale; returns integer-valued floats."""
    return np.rint(np.ldexp(np.asarray(points, dtype=float), scale))


def det_exact(rows) -> int:
    d = len(rows)
    total = 0
    for perm, sgn in _leibniz(d):
        p = sgn
        for i in range(d):
            p *= int(rows[i][perm[i]])
        total += p
    return total


def det_sign(mats: np.ndarray) -> np.ndarray:
    """Certified signs of ``det`` for a stack of integer-valued square matrices.

    ``mats`` has shape (..., d, d) with d <= 4; the result is an int8 array.
    """
    mats = np.asarray(mats, dtype=float)
    d = mats.shape[-1]
    det = np.zeros(mats.shape[:-2])
    bound = np.zeros(mats.shape[:-2])
    for perm, sgn in _leibniz(d):
        t = mats[..., 0, perm[0]].copy()
        for i in range(1, d):
            t = t * mats[..., i, perm[i]]
        det += sgn * t
        bound += np.abs(t)
    out = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= _FILTER * bound
    unsure &= bound > 0
    if np.any(unsure):
        idx = np.argwhere(unsure)
        for ix in map(tuple, idx):
            v = det_exact(mats[ix].tolist())
            out[ix] = (v > 0) - (v < 0)
    return out


def det_value(mats: np.ndarray) -> np.ndarray:
    """Float determinant (no certification); for magnitudes and ratios."""
    return np.linalg.det(np.asarray(mats, dtype=float))


def orient(points: np.ndarray) -> np.ndarray:
    """Sign of det[p1 - p0, ..., pd - p0] for stacks of d+1 points in R^d.

    ``points`` has shape (..., d+1, d).
    """
    p = np.asarray(points, dtype=float)
    return det_sign(p[..., 1:, :] - p[..., :1, :])


def orient_exact(points) -> int:
    p0 = [int(x) for x in points[0]]
    rows = [[int(x) - y for x, y in zip(q, p0)] for q in points[1:]]
    v = det_exact(rows)
    return (v > 0) - (v < 0)
