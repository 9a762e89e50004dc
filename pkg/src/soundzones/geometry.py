"""Shared distance computations.

Distances are computed from explicit row differences rather than the
Gram-matrix identity, which keeps the squared-distance matrix exactly
symmetric and non-negative (needed for reproducible affinities).
O(n^2 d) memory; intended for the few-dozen-row regime this toolkit
operates in.
"""

from __future__ import annotations

import numpy as np


def pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    diff = x[:, None, :] - x[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def pairwise_dists(points: np.ndarray) -> np.ndarray:
    return np.sqrt(pairwise_sq_dists(points))
