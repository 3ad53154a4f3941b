"""Model complexity control: weak/strong variable splitting and subspace models.

A cheap correlation matrix (estimated from a small subsample) splits the
variables into a weakly dependent set, modeled by independent univariate
Gaussians, and a strongly dependent set, partitioned into subsets of at most
``c`` variables that each get their own multivariate Gaussian.  The product
of the pieces approximates the full joint density with a block-diagonal
covariance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import subsample_indices
from .gaussian import (
    CorrelationMatrix,
    MultivariateGaussian,
    UnivariateGaussianSet,
    cholesky_factor,
    correlation_from_data,
    eeda_scale,
    fit_multivariate,
    fit_univariate,
    sample_multivariate,
    sample_univariate,
)

__all__ = [
    "VariablePartition",
    "MccConfig",
    "CompositeModel",
    "StructureTrace",
    "identify_weak",
    "partition_random",
    "partition_greedy",
    "build_composite",
    "sample_composite",
    "record_structure",
]

BASE_MODELS = ("emna", "eeda")
PARTITION_MODES = ("random", "greedy-cluster")


@dataclass
class VariablePartition:
    """Disjoint split of {0..n-1} into weak, clustered-strong, and leftover.

    ``leftover_weak`` is only populated by greedy clustering, which demotes
    strong variables it could not cluster back to univariate modeling.
    """

    weak: list[int]
    strong_subsets: list[list[int]]
    leftover_weak: list[int]
    n: int

    def validate(self) -> None:
        seen: list[int] = list(self.weak) + list(self.leftover_weak)
        for subset in self.strong_subsets:
            seen.extend(subset)
        if len(seen) != self.n or sorted(seen) != list(range(self.n)):
            raise ValueError("partition groups must be disjoint and cover all variables")

    @property
    def strong_indices(self) -> list[int]:
        """Variables classified strongly dependent (before any demotion)."""
        merged: list[int] = list(self.leftover_weak)
        for subset in self.strong_subsets:
            merged.extend(subset)
        return sorted(merged)


@dataclass(frozen=True)
class MccConfig:
    theta: float = 0.3
    c: int = 20
    m_corr: int = 100
    base_model: str = "eeda"
    partition_mode: str = "random"
    wi_enabled: bool = True
    sm_enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")
        if self.c < 1:
            raise ValueError(f"subset capacity c must be >= 1, got {self.c}")
        if self.m_corr < 2:
            raise ValueError(f"m_corr must be >= 2, got {self.m_corr}")
        if self.base_model not in BASE_MODELS:
            raise ValueError(f"base_model must be one of {BASE_MODELS}, got {self.base_model!r}")
        if self.partition_mode not in PARTITION_MODES:
            raise ValueError(f"partition_mode must be one of {PARTITION_MODES}, got {self.partition_mode!r}")
        if self.partition_mode == "greedy-cluster" and self.c < 2:
            raise ValueError("greedy clustering requires c >= 2")


@dataclass
class CompositeModel:
    """Product density: univariate Gaussians over the weak variables times
    one multivariate Gaussian per strong subset."""

    weak_model: UnivariateGaussianSet
    weak_indices: list[int]
    subspace_models: list[tuple[list[int], MultivariateGaussian]]
    partition: VariablePartition
    n: int


def identify_weak(corr: CorrelationMatrix | np.ndarray, theta: float) -> tuple[list[int], list[int]]:
    """Split variables by the correlation threshold.

    Variable i is weak iff |corr(i, j)| <= theta for every j != i; the rest
    are strong.  Returns (weak, strong) as sorted index lists.
    """
    entries = corr.entries if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=float)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    magnitude = np.abs(entries).copy()
    np.fill_diagonal(magnitude, 0.0)
    weak_mask = magnitude.max(axis=1) <= theta
    weak = [int(i) for i in np.flatnonzero(weak_mask)]
    strong = [int(i) for i in np.flatnonzero(~weak_mask)]
    return weak, strong


def partition_random(strong: list[int], c: int, rng: np.random.Generator) -> list[list[int]]:
    """Shuffle the strong set and cut it into ceil(|S|/c) chunks of size <= c."""
    if c < 1:
        raise ValueError(f"subset capacity c must be >= 1, got {c}")
    if not strong:
        return []
    order = rng.permutation(len(strong))
    shuffled = [strong[i] for i in order]
    return [shuffled[start:start + c] for start in range(0, len(shuffled), c)]


def partition_greedy(strong: list[int], corr_entries: np.ndarray, theta: float,
                     c: int) -> tuple[list[list[int]], list[int]]:
    """Greedy correlation clustering of the strong set.

    Each cluster is seeded with the unused pair of largest |corr| above theta
    and grown, while smaller than c, by the unused variable whose best |corr|
    to any current member is largest and above theta.  Variables never
    clustered are demoted to the leftover (univariate) group.  Ties pick the
    lowest variable index.
    """
    if c < 2:
        raise ValueError(f"greedy clustering requires c >= 2, got {c}")
    magnitude = np.abs(np.asarray(corr_entries, dtype=float))
    remaining = sorted(strong)
    subsets: list[list[int]] = []
    while len(remaining) >= 2:
        block = magnitude[np.ix_(remaining, remaining)]
        rows, cols = np.triu_indices(len(remaining), k=1)
        pair_values = block[rows, cols]
        best = pair_values.max()
        if best <= theta:
            break
        hit = int(np.flatnonzero(pair_values == best)[0])  # rows/cols are lexicographic
        cluster = [remaining[rows[hit]], remaining[cols[hit]]]
        remaining = [v for v in remaining if v not in cluster]
        while len(cluster) < c and remaining:
            scores = magnitude[np.ix_(remaining, cluster)].max(axis=1)
            pick = int(np.argmax(scores))
            if scores[pick] <= theta:
                break
            cluster.append(remaining.pop(pick))
        subsets.append(cluster)
    return subsets, remaining


def build_composite(selected: np.ndarray, config: MccConfig, rng: np.random.Generator,
                    partition_rng: np.random.Generator | None = None,
                    ) -> tuple[CompositeModel, VariablePartition]:
    """Fit the composite model from the selected individuals.

    The correlation matrix is estimated from an ``m_corr``-row subsample
    drawn with ``rng``; all model parameters are then fitted from the full
    selected set.  ``partition_rng`` (defaults to ``rng``) drives the random
    subspace partition so the two choices stay on independent streams.
    """
    selected = np.asarray(selected, dtype=float)
    if selected.ndim != 2 or selected.shape[0] < 2:
        raise ValueError(f"selected individuals must form an m x n matrix with m >= 2, got {selected.shape}")
    m, n = selected.shape
    if partition_rng is None:
        partition_rng = rng

    sub_rows = selected[subsample_indices(m, config.m_corr, rng)]
    corr = correlation_from_data(sub_rows)

    if config.wi_enabled:
        weak, strong = identify_weak(corr, config.theta)
    else:
        weak, strong = [], list(range(n))

    leftover: list[int] = []
    if config.sm_enabled:
        if config.partition_mode == "random":
            subsets = partition_random(strong, config.c, partition_rng)
        else:
            subsets, leftover = partition_greedy(strong, corr.entries, config.theta, config.c)
    else:
        subsets = [list(strong)] if strong else []

    partition = VariablePartition(weak=weak, strong_subsets=subsets,
                                  leftover_weak=leftover, n=n)
    partition.validate()

    weak_indices = sorted(weak + leftover)
    if weak_indices:
        # full-cover fast path keeps theta=1 bitwise identical to a plain
        # univariate fit (column copies can change summation order)
        columns = selected if len(weak_indices) == n else selected[:, weak_indices]
        weak_model = fit_univariate(columns)
    else:
        weak_model = UnivariateGaussianSet(means=np.empty(0), std_devs=np.empty(0))

    subspace_models: list[tuple[list[int], MultivariateGaussian]] = []
    for subset in subsets:
        model = fit_multivariate(selected[:, subset])
        if config.base_model == "eeda":
            model = eeda_scale(model)
        subspace_models.append((list(subset), cholesky_factor(model)))

    composite = CompositeModel(weak_model=weak_model, weak_indices=weak_indices,
                               subspace_models=subspace_models, partition=partition, n=n)
    return composite, partition


def sample_composite(model: CompositeModel, rng: np.random.Generator,
                     lower: np.ndarray, upper: np.ndarray,
                     size: int | None = None) -> np.ndarray:
    """Sample each sub-model independently and scatter back to full vectors.

    Draw order is fixed (weak block first, then subsets in stored order) so a
    given rng stream always produces the same individuals.
    """
    k = 1 if size is None else int(size)
    out = np.empty((k, model.n))
    if model.weak_indices:
        idx = model.weak_indices
        out[:, idx] = sample_univariate(model.weak_model, rng, lower[idx], upper[idx], size=k)
    for subset, gaussian in model.subspace_models:
        out[:, subset] = sample_multivariate(gaussian, rng, lower[subset], upper[subset], size=k)
    return out[0] if size is None else out


@dataclass
class StructureTrace:
    """Accumulates which variables were classified strong, per generation.

    ``q_matrix()[i, g]`` counts how many recorded runs placed variable i in
    the strong set at generation g.
    """

    n: int
    strong_counts: list[int] = field(default_factory=list)
    _columns: list[np.ndarray] = field(default_factory=list)

    def record(self, generation: int, strong_indices: list[int]) -> None:
        while len(self._columns) <= generation:
            self._columns.append(np.zeros(self.n, dtype=int))
        if strong_indices:
            self._columns[generation][np.asarray(strong_indices, dtype=int)] += 1
        self.strong_counts.append(len(strong_indices))

    def q_matrix(self) -> np.ndarray:
        if not self._columns:
            return np.zeros((self.n, 0), dtype=int)
        return np.column_stack(self._columns)

    def merge(self, other: "StructureTrace") -> None:
        """Add another run's counts (shorter runs pad with zero columns)."""
        if other.n != self.n:
            raise ValueError("cannot merge structure traces of different dimension")
        while len(self._columns) < len(other._columns):
            self._columns.append(np.zeros(self.n, dtype=int))
        for g, col in enumerate(other._columns):
            self._columns[g] += col


def record_structure(partition: VariablePartition, generation: int,
                     trace: StructureTrace) -> None:
    """Append this generation's strong-set size and bump its Q-matrix column."""
    trace.record(generation, partition.strong_indices)
