"""Gaussian estimation-of-distribution optimizers with model complexity
control, the baseline EDAs they are compared against, a shifted/rotated
benchmark suite, and a reproducible experiment harness."""

from .algorithms import ALGORITHM_NAMES, MCC_FAMILY, make_strategy
from .benchmarks import FUNCTION_IDS, BenchmarkProblem, ProblemInstanceSpec, instantiate
from .core import (
    EvaluationBudget,
    Individual,
    Population,
    RngStreams,
    RunTrace,
    SelectionConfig,
    elitist_replace,
    run,
    subsample_without_replacement,
    truncation_select,
    uniform_init,
)
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
from .harness import ExperimentConfig, RunRecord, execute, parse_config, report, sweep
from .mcc import (
    CompositeModel,
    MccConfig,
    StructureTrace,
    VariablePartition,
    build_composite,
    identify_weak,
    partition_greedy,
    partition_random,
    record_structure,
    sample_composite,
)
from .stats import SampleSummary, UTestResult, mann_whitney_u, significance_marker, summarize

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_NAMES",
    "MCC_FAMILY",
    "FUNCTION_IDS",
    "BenchmarkProblem",
    "ProblemInstanceSpec",
    "instantiate",
    "EvaluationBudget",
    "Individual",
    "Population",
    "RngStreams",
    "RunTrace",
    "SelectionConfig",
    "elitist_replace",
    "run",
    "subsample_without_replacement",
    "truncation_select",
    "uniform_init",
    "CorrelationMatrix",
    "MultivariateGaussian",
    "UnivariateGaussianSet",
    "cholesky_factor",
    "correlation_from_data",
    "eeda_scale",
    "fit_multivariate",
    "fit_univariate",
    "sample_multivariate",
    "sample_univariate",
    "CompositeModel",
    "MccConfig",
    "StructureTrace",
    "VariablePartition",
    "build_composite",
    "identify_weak",
    "partition_greedy",
    "partition_random",
    "record_structure",
    "sample_composite",
    "ExperimentConfig",
    "RunRecord",
    "execute",
    "parse_config",
    "report",
    "sweep",
    "SampleSummary",
    "UTestResult",
    "mann_whitney_u",
    "significance_marker",
    "summarize",
    "make_strategy",
]
