"""Exact t-SNE projection to 2-D.

Conditional affinities use a per-row Gaussian kernel whose bandwidth is
found by bisection over log sigma so that the row's effective neighbor
count 2^H (entropy in bits) hits the requested perplexity. The embedding
minimizes KL(P || Q) with a Student-t (1 degree of freedom) output
kernel by plain momentum gradient descent with early exaggeration.

Everything is O(n^2): intended for dozens of rows, not thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embeddings import ContrastiveMatrix
from .geometry import pairwise_sq_dists

_EPS = 1e-12
_PERP_TOL = 1e-5
_MAX_BISECT = 50
_LOG_SIGMA_LO = -40.0
_LOG_SIGMA_HI = 40.0


class ProjectionError(RuntimeError):
    """Raised when the optimization produces non-finite values."""


@dataclass(frozen=True)
class ProjectionResult:
    countries: tuple[str, ...]
    coords: np.ndarray
    final_kl: float
    initial_kl: float
    perplexity: float
    seed: int

    def __eq__(self, other):
        if not isinstance(other, ProjectionResult):
            return NotImplemented
        return (
            self.countries == other.countries
            and np.array_equal(self.coords, other.coords)
            and self.final_kl == other.final_kl
            and self.initial_kl == other.initial_kl
            and self.perplexity == other.perplexity
            and self.seed == other.seed
        )


def _row_affinities(sq_row: np.ndarray, perplexity: float) -> tuple[np.ndarray, float]:
    """Bisect log sigma until 2^H(p) matches the perplexity target.

    All bisection steps run even once inside the convergence tolerance:
    the narrow final bracket pins the probabilities far more precisely
    than the entropy tolerance alone would.
    """
    lo, hi = _LOG_SIGMA_LO, _LOG_SIGMA_HI
    p = None
    achieved = math.nan
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        beta = 0.5 * math.exp(-2.0 * mid)  # 1 / (2 sigma^2)
        logits = -beta * sq_row
        logits -= logits.max()
        w = np.exp(logits)
        p = w / w.sum()
        entropy_bits = float(-(p * np.log2(np.maximum(p, _EPS))).sum())
        achieved = 2.0**entropy_bits
        if achieved > perplexity:
            hi = mid
        else:
            lo = mid
    return p, achieved


def calibrate_affinities(sq_dists: np.ndarray, perplexity: float = 20.0) -> np.ndarray:
    """Conditional probabilities P(j|i) with per-row calibrated bandwidth.

    Each row is normalized over j != i and sums to 1; the diagonal is 0.
    Rows whose entropy cannot reach the target within the bisection
    budget raise a ValueError naming the row.
    """
    d2 = np.asarray(sq_dists, dtype=np.float64)
    n = d2.shape[0]
    if d2.ndim != 2 or d2.shape[1] != n:
        raise ValueError("sq_dists must be square")
    if n < 3:
        raise ValueError("affinity calibration needs at least 3 points")
    if (d2 < 0).any():
        raise ValueError("squared distances must be non-negative")
    if (np.diagonal(d2) != 0).any():
        raise ValueError("sq_dists must have a zero diagonal")
    if not 1.0 < perplexity <= n - 1:
        raise ValueError(f"perplexity must be in (1, {n - 1}], got {perplexity}")
    mask = ~np.eye(n, dtype=bool)
    result = np.zeros((n, n))
    for i in range(n):
        row = d2[i][mask[i]]
        p, achieved = _row_affinities(row, perplexity)
        if abs(achieved - perplexity) > _PERP_TOL:
            raise ValueError(
                f"row {i}: perplexity {perplexity} unreachable "
                f"(achieved {achieved:.6f} after {_MAX_BISECT} bisection steps)"
            )
        result[i][mask[i]] = p
    return result


def joint_affinities(conditional: np.ndarray) -> np.ndarray:
    """Symmetrized p_ij = (P(j|i) + P(i|j)) / (2n); sums to 1 over pairs."""
    n = conditional.shape[0]
    return (conditional + conditional.T) / (2.0 * n)


def kl_divergence(p_joint: np.ndarray, coords: np.ndarray) -> float:
    """KL(P || Q) of the joint affinities against the Student-t kernel."""
    q, _ = _student_t_q(coords)
    p = np.maximum(p_joint, _EPS)
    q = np.maximum(q, _EPS)
    mask = ~np.eye(p.shape[0], dtype=bool)
    return float((p_joint[mask] * (np.log(p[mask]) - np.log(q[mask]))).sum())


def _student_t_q(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # divide warnings are suppressed: degenerate coords surface as a
    # non-finite gradient, which the optimizer reports explicitly
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        num = 1.0 / (1.0 + pairwise_sq_dists(coords))
        np.fill_diagonal(num, 0.0)
        return num / num.sum(), num


def tsne(
    matrix: ContrastiveMatrix,
    perplexity: float = 20.0,
    seed: int = 0,
    iters: int = 1000,
    learning_rate: float = 200.0,
    exaggeration: float = 12.0,
    exaggeration_iters: int = 250,
    momentum_early: float = 0.5,
    momentum_late: float = 0.8,
    init: str = "gaussian",
) -> ProjectionResult:
    """Project standardized rows to 2-D by exact t-SNE.

    Early exaggeration multiplies P for the first ``exaggeration_iters``
    iterations; momentum switches from its early to late value at the
    same point. Initial coordinates are seeded Gaussian with standard
    deviation 1e-4 (or a PCA projection rescaled to that spread).
    Identical inputs and seed give bit-identical coordinates.
    """
    x = matrix.values
    n = x.shape[0]
    if n < 5:
        raise ValueError("t-SNE needs at least 5 rows")
    if not perplexity < n:
        raise ValueError(f"perplexity must be below the row count {n}")
    if init not in ("gaussian", "pca"):
        raise ValueError(f"unknown init mode: {init!r}")

    conditional = calibrate_affinities(pairwise_sq_dists(x), perplexity)
    p_joint = joint_affinities(conditional)

    rng = np.random.default_rng(seed)
    if init == "gaussian":
        y = rng.standard_normal((n, 2)) * 1e-4
    else:
        centred = x - x.mean(axis=0)
        _, _, vt = np.linalg.svd(centred, full_matrices=False)
        y = centred @ vt[:2].T
        spread = y[:, 0].std()
        y = y * (1e-4 / spread) if spread > 0 else rng.standard_normal((n, 2)) * 1e-4

    initial_kl = kl_divergence(p_joint, y)
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(iters):
        exag = exaggeration if it < exaggeration_iters else 1.0
        momentum = momentum_early if it < exaggeration_iters else momentum_late
        q, num = _student_t_q(y)
        coeff = (exag * p_joint - q) * num
        grad = 4.0 * ((np.diag(coeff.sum(axis=1)) - coeff) @ y)
        if not np.isfinite(grad).all():
            raise ProjectionError(f"non-finite gradient at iteration {it}")
        # per-coordinate gain adaptation, as in the reference optimizer
        inc = update * grad < 0.0
        gains[inc] += 0.2
        gains[~inc] *= 0.8
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)

    return ProjectionResult(
        countries=matrix.countries,
        coords=y,
        final_kl=kl_divergence(p_joint, y),
        initial_kl=initial_kl,
        perplexity=perplexity,
        seed=seed,
    )
