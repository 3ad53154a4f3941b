"""Summary statistics and the two-tailed Mann-Whitney U comparison.

The U test uses midranks for ties.  For small tie-free samples
(n_a + n_b <= EXACT_LIMIT) the p-value comes from exhaustive enumeration of
the rank-sum distribution; otherwise from the normal approximation with tie
and continuity corrections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "SampleSummary",
    "UTestResult",
    "summarize",
    "mann_whitney_u",
    "significance_marker",
    "EXACT_LIMIT",
]

EXACT_LIMIT = 16

_MARKERS = ((0.001, "§", "***"), (0.01, "†", "**"), (0.05, "*", "*"))


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    sample_std: float
    min: float
    max: float


@dataclass(frozen=True)
class UTestResult:
    u_statistic: float
    p_two_tailed: float
    method: str  # "exact" or "normal-approximation"


def summarize(values: Sequence[float]) -> SampleSummary:
    """Count, mean, sample standard deviation (divisor n-1), min, max."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return SampleSummary(count=arr.size, mean=float(arr.mean()), sample_std=std,
                         min=float(arr.min()), max=float(arr.max()))


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _rank_sum_counts(total: int, chosen: int) -> np.ndarray:
    """counts[s] = number of size-``chosen`` subsets of ranks 1..total summing to s."""
    max_sum = chosen * total
    table = np.zeros((chosen + 1, max_sum + 1), dtype=float)
    table[0, 0] = 1.0
    for rank in range(1, total + 1):
        for k in range(min(rank, chosen), 0, -1):
            table[k, rank:] += table[k - 1, :-rank]
    return table[chosen]


def _exact_two_tailed_p(u_small: float, n_a: int, n_b: int) -> float:
    counts = _rank_sum_counts(n_a + n_b, n_a)
    u_values = np.arange(counts.size) - n_a * (n_a + 1) // 2
    valid = (u_values >= 0) & (u_values <= n_a * n_b)
    counts, u_values = counts[valid], u_values[valid]
    tail = counts[u_values <= u_small].sum() / counts.sum()
    return min(1.0, 2.0 * tail)


def _normal_two_tailed_p(u_stat: float, n_a: int, n_b: int,
                         tie_sizes: Sequence[int]) -> float:
    total = n_a + n_b
    mean_u = 0.5 * n_a * n_b
    tie_term = sum(t ** 3 - t for t in tie_sizes)
    variance = n_a * n_b / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if variance <= 0.0:
        return 1.0
    z = max(abs(u_stat - mean_u) - 0.5, 0.0) / math.sqrt(variance)
    return math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> UTestResult:
    """Two-tailed Mann-Whitney U test; u_statistic is U for the first sample."""
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    u_a = float(ranks[:n_a].sum()) - n_a * (n_a + 1) / 2.0
    u_b = n_a * n_b - u_a

    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))
    if not has_ties and n_a + n_b <= EXACT_LIMIT:
        p = _exact_two_tailed_p(min(u_a, u_b), n_a, n_b)
        method = "exact"
    else:
        p = _normal_two_tailed_p(u_a, n_a, n_b, tie_counts.tolist())
        method = "normal-approximation"
    return UTestResult(u_statistic=u_a, p_two_tailed=p, method=method)


def significance_marker(p: float, style: str = "unicode") -> str:
    """Significance marker for a p-value: section/dagger/star, or ASCII stars."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value must be in [0, 1], got {p}")
    if style not in ("unicode", "ascii"):
        raise ValueError(f"style must be 'unicode' or 'ascii', got {style!r}")
    for threshold, unicode_mark, ascii_mark in _MARKERS:
        if p < threshold:
            return unicode_mark if style == "unicode" else ascii_mark
    return ""
