"""Association and agreement statistics for cluster/zone comparisons.

Implements the chi-squared upper tail (via the regularized incomplete
gamma function), a one-way MANOVA based on Wilks' Lambda with Bartlett's
chi-squared approximation, the chi-squared test of independence with
standardized residuals and Cramer's V, and the partition-agreement
measures ARI and NMI.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_SF_MAX_ITER = 1000
_SF_EPS = 1e-15


@dataclass(frozen=True)
class ManovaResult:
    """Wilks' Lambda test of group separation in a 2-D response space."""

    wilks_lambda: float
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two label sequences."""

    row_labels: tuple
    col_labels: tuple
    counts: np.ndarray
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError("counts must be a 2-D array")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("counts shape does not match label lists")
        if int(counts.sum()) != self.n:
            raise ValueError("n must equal the sum of counts")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class AssociationResult:
    """Chi-squared independence test bundle for one contingency table."""

    chi2: float
    df: int
    p_value: float
    cramers_v: float
    residuals: np.ndarray
    residual_variant: str
    low_expected: bool = field(default=False)


def chi_squared_sf(x: float, df: int) -> float:
    """Upper-tail probability P(X >= x) for a chi-squared variable.

    Evaluates Q(df/2, x/2) with the regularized incomplete gamma
    function: the power series of P(a, x) for x < a + 1 and the Lentz
    continued fraction of Q(a, x) otherwise. Absolute accuracy is
    better than 1e-10 over the tested grid.
    """
    if df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    a = 0.5 * df
    half = 0.5 * x
    if half == 0.0:
        return 1.0
    if x < df + 1.0:
        return 1.0 - _gamma_p_series(a, half)
    return _gamma_q_contfrac(a, half)


def _gamma_p_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a) * sum_n x^n / (a (a+1) ... (a+n))
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_SF_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _SF_EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError("incomplete gamma series did not converge")


def _gamma_q_contfrac(a: float, x: float) -> float:
    # Modified Lentz evaluation of the continued fraction for Q(a, x).
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _SF_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _SF_EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def wilks_manova(coords: np.ndarray, groups: Sequence) -> ManovaResult:
    """One-way MANOVA on 2-D responses via Wilks' Lambda.

    Lambda = det(W) / det(W + B) where W is the pooled within-group
    scatter and B the between-group scatter about the grand mean. The
    p-value uses Bartlett's approximation
    chi2 = -(n - 1 - (p + g) / 2) ln(Lambda) with df = p (g - 1), p = 2.
    """
    y = np.asarray(coords, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ValueError("coords must be an n x 2 array")
    labels = list(groups)
    n = y.shape[0]
    if len(labels) != n:
        raise ValueError("groups length must match coords rows")
    uniq = sorted(set(labels), key=lambda v: (str(type(v)), v))
    g = len(uniq)
    if g < 2:
        raise ValueError("MANOVA needs at least 2 groups")
    if n <= g:
        raise ValueError("MANOVA needs more observations than groups")

    grand = y.mean(axis=0)
    w = np.zeros((2, 2))
    b = np.zeros((2, 2))
    for label in uniq:
        members = y[np.fromiter((v == label for v in labels), dtype=bool)]
        mean = members.mean(axis=0)
        centred = members - mean
        w += centred.T @ centred
        offset = (mean - grand).reshape(2, 1)
        b += members.shape[0] * (offset @ offset.T)

    total = w + b
    det_total = float(np.linalg.det(total))
    if det_total <= 0.0:
        raise ValueError("total scatter matrix is singular")
    lam = float(np.linalg.det(w)) / det_total
    lam = min(max(lam, 0.0), 1.0)
    p = 2
    factor = n - 1 - (p + g) / 2.0
    statistic = max(-factor * math.log(max(lam, 1e-300)), 0.0)
    df = p * (g - 1)
    return ManovaResult(
        wilks_lambda=lam,
        statistic=statistic,
        df=df,
        p_value=chi_squared_sf(statistic, df),
    )


def crosstab(a: Sequence, b: Sequence, row_order=None, col_order=None) -> ContingencyTable:
    """Build the contingency table of two equal-length label sequences."""
    if len(a) != len(b):
        raise ValueError("label sequences must have equal length")
    rows = list(row_order) if row_order is not None else sorted(set(a), key=lambda v: (str(type(v)), v))
    cols = list(col_order) if col_order is not None else sorted(set(b), key=lambda v: (str(type(v)), v))
    row_idx = {v: i for i, v in enumerate(rows)}
    col_idx = {v: j for j, v in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for u, v in zip(a, b):
        counts[row_idx[u], col_idx[v]] += 1
    return ContingencyTable(tuple(rows), tuple(cols), counts, len(a))


def chi_squared_independence(table: ContingencyTable, residual_variant: str = "pearson") -> AssociationResult:
    """Chi-squared test of independence with standardized residuals.

    Expected counts are E_ij = row_i col_j / n. Residuals are Pearson
    (O - E) / sqrt(E) by default, or Haberman-adjusted when
    ``residual_variant="adjusted"``. Cramer's V is
    sqrt(chi2 / (n (min(r, c) - 1))). Tables with any expected count
    below 5 set the ``low_expected`` flag.
    """
    if residual_variant not in ("pearson", "adjusted"):
        raise ValueError(f"unknown residual variant: {residual_variant!r}")
    counts = table.counts.astype(np.float64)
    r, c = counts.shape
    if r < 2 or c < 2:
        raise ValueError("independence test needs at least a 2 x 2 table")
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    if (row == 0).any() or (col == 0).any():
        raise ValueError("contingency table has an all-zero row or column")
    n = counts.sum()
    expected = np.outer(row, col) / n
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    df = (r - 1) * (c - 1)
    pearson = (counts - expected) / np.sqrt(expected)
    if residual_variant == "adjusted":
        adjust = np.outer(1.0 - row / n, 1.0 - col / n)
        residuals = (counts - expected) / np.sqrt(expected * adjust)
    else:
        residuals = pearson
    v = math.sqrt(chi2 / (n * (min(r, c) - 1)))
    return AssociationResult(
        chi2=chi2,
        df=df,
        p_value=chi_squared_sf(chi2, df),
        cramers_v=v,
        residuals=residuals,
        residual_variant=residual_variant,
        low_expected=bool((expected < 5.0).any()),
    )


def adjusted_rand_index(a: Sequence, b: Sequence) -> float:
    """Rand index corrected for chance via the hypergeometric expectation.

    ARI = (Index - Expected) / (Max - Expected) over pair counts from
    the contingency table. When Max equals Expected (both partitions
    trivial in the same way) the partitions are necessarily identical
    and the value is 1.
    """
    if len(a) != len(b):
        raise ValueError("label sequences must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("ARI needs at least 2 items")
    joint = Counter(zip(a, b))
    sum_cells = sum(math.comb(v, 2) for v in joint.values())
    sum_a = sum(math.comb(v, 2) for v in Counter(a).values())
    sum_b = sum(math.comb(v, 2) for v in Counter(b).values())
    pairs = math.comb(n, 2)
    # Max == Expected iff 2 sum_a sum_b == (sum_a + sum_b) pairs, which
    # forces sum_a == sum_b in {0, pairs}: identical trivial partitions.
    if 2 * sum_a * sum_b == (sum_a + sum_b) * pairs:
        return 1.0
    expected = sum_a * sum_b / pairs
    maximum = 0.5 * (sum_a + sum_b)
    return (sum_cells - expected) / (maximum - expected)


def _sort_key(value):
    return (str(type(value)), value)


def _entropy_bits(counts: Counter, n: int) -> float:
    total = 0.0
    for key in sorted(counts, key=_sort_key):
        p = counts[key] / n
        total -= p * math.log2(p)
    return total


def normalized_mutual_information(a: Sequence, b: Sequence, normalizer: str = "arithmetic") -> float:
    """Mutual information between partitions, normalized to [0, 1].

    Entropies are in bits from empirical frequencies. The default
    normalizer is the arithmetic mean of the two entropies; "geometric"
    and "max" are also supported. Returns 0 whenever either entropy is
    zero (a trivial one-cluster partition carries no information).
    """
    if normalizer not in ("arithmetic", "geometric", "max"):
        raise ValueError(f"unknown NMI normalizer: {normalizer!r}")
    if len(a) != len(b):
        raise ValueError("label sequences must have equal length")
    n = len(a)
    if n < 1:
        raise ValueError("NMI needs at least 1 item")
    count_a = Counter(a)
    count_b = Counter(b)
    h_a = _entropy_bits(count_a, n)
    h_b = _entropy_bits(count_b, n)
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    joint = Counter(zip(a, b))
    mi = 0.0
    for u, v in sorted(joint, key=lambda uv: (_sort_key(uv[0]), _sort_key(uv[1]))):
        p_uv = joint[(u, v)] / n
        mi += p_uv * (math.log2(p_uv) - math.log2(count_a[u] / n) - math.log2(count_b[v] / n))
    if normalizer == "arithmetic":
        norm = 0.5 * (h_a + h_b)
    elif normalizer == "geometric":
        norm = math.sqrt(h_a * h_b)
    else:
        norm = max(h_a, h_b)
    return mi / norm
