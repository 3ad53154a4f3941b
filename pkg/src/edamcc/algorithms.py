"""Concrete model-build/sample strategies for the generational loop.

umda            independent univariate Gaussians
emna            one full-covariance ML Gaussian
eeda            emna plus minimum-eigenvalue covariance scaling
eda-mcc         weak/strong split + random subspace models (eeda base by default)
eda-mcc-gc      eda-mcc with greedy correlation clustering instead of random cuts
eda-mcc-wi-only weak/strong split, single multivariate model over the strong set
eda-mcc-sm-only subspace models over all variables, no weak/strong split
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RngStreams
from .gaussian import (
    MultivariateGaussian,
    UnivariateGaussianSet,
    cholesky_factor,
    eeda_scale,
    fit_multivariate,
    fit_univariate,
    sample_multivariate,
    sample_univariate,
)
from .mcc import CompositeModel, MccConfig, build_composite, sample_composite

__all__ = [
    "ALGORITHM_NAMES",
    "MCC_FAMILY",
    "UnivariateStrategy",
    "FullCovarianceStrategy",
    "CompositeStrategy",
    "make_strategy",
]

ALGORITHM_NAMES = (
    "umda",
    "emna",
    "eeda",
    "eda-mcc",
    "eda-mcc-gc",
    "eda-mcc-wi-only",
    "eda-mcc-sm-only",
)
MCC_FAMILY = tuple(name for name in ALGORITHM_NAMES if name.startswith("eda-mcc"))


@dataclass
class _FittedUnivariate:
    model: UnivariateGaussianSet
    strong_indices: tuple[int, ...] = ()

    def sample(self, count, rng, lower, upper):
        return sample_univariate(self.model, rng, lower, upper, size=count)


@dataclass
class _FittedFull:
    model: MultivariateGaussian

    @property
    def strong_indices(self):
        return range(self.model.dim)

    def sample(self, count, rng, lower, upper):
        return sample_multivariate(self.model, rng, lower, upper, size=count)


@dataclass
class _FittedComposite:
    model: CompositeModel

    @property
    def strong_indices(self):
        return self.model.partition.strong_indices

    def sample(self, count, rng, lower, upper):
        return sample_composite(self.model, rng, lower, upper, size=count)


class UnivariateStrategy:
    name = "umda"

    def build(self, data: np.ndarray, generation: int, streams: RngStreams) -> _FittedUnivariate:
        return _FittedUnivariate(fit_univariate(data))


class FullCovarianceStrategy:
    """EMNA-style full multivariate Gaussian, optionally EEDA-scaled."""

    def __init__(self, scale: bool = False):
        self.scale = scale
        self.name = "eeda" if scale else "emna"

    def build(self, data: np.ndarray, generation: int, streams: RngStreams) -> _FittedFull:
        model = fit_multivariate(data)
        if self.scale:
            model = eeda_scale(model)
        return _FittedFull(cholesky_factor(model))


class CompositeStrategy:
    """Weak/strong split plus subspace models, per the MccConfig switches."""

    def __init__(self, config: MccConfig, name: str = "eda-mcc"):
        self.config = config
        self.name = name

    def build(self, data: np.ndarray, generation: int, streams: RngStreams) -> _FittedComposite:
        composite, _ = build_composite(
            data, self.config,
            rng=streams.stream("subsample", generation),
            partition_rng=streams.stream("partition", generation))
        return _FittedComposite(composite)


def make_strategy(name: str, *, theta: float = 0.3, c: int = 20, m_corr: int = 100,
                  base_model: str = "eeda", n: int | None = None):
    """Build the strategy for an algorithm name, validating MCC parameters."""
    if name not in ALGORITHM_NAMES:
        raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHM_NAMES}")
    if name == "umda":
        return UnivariateStrategy()
    if name == "emna":
        return FullCovarianceStrategy(scale=False)
    if name == "eeda":
        return FullCovarianceStrategy(scale=True)
    if n is not None and c > n:
        raise ValueError(f"subset capacity c={c} exceeds problem dimension n={n}")
    config = MccConfig(
        theta=theta, c=c, m_corr=m_corr, base_model=base_model,
        partition_mode="greedy-cluster" if name == "eda-mcc-gc" else "random",
        wi_enabled=name != "eda-mcc-sm-only",
        sm_enabled=name != "eda-mcc-wi-only")
    return CompositeStrategy(config, name=name)
