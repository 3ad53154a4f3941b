"""Population lifecycle and the generic generational loop.

Every optimizer in this package is the same loop around a different
probabilistic model: initialize uniformly, evaluate, then repeat
{truncation-select, fit a model, sample M-1 offspring, evaluate,
single-elitist replace} until the evaluation budget is spent.  The loop is
fully deterministic given (problem, strategy, parameters, seed).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

__all__ = [
    "Individual",
    "Population",
    "SelectionConfig",
    "EvaluationBudget",
    "RunTrace",
    "RngStreams",
    "FittedModel",
    "ModelStrategy",
    "uniform_init",
    "truncation_select",
    "elitist_replace",
    "subsample_indices",
    "subsample_without_replacement",
    "run",
]

# Fixed purpose tags for named substreams.  Adding a new tag never changes
# the streams of existing tags, so instrumentation cannot perturb results.
_PURPOSE_IDS = {
    "init": 0,
    "subsample": 1,
    "partition": 2,
    "sampling": 3,
    "problem": 4,
    "run": 5,
}


class RngStreams:
    """Named, generation-indexed random streams derived from one root seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, purpose: str, generation: int = 0) -> np.random.Generator:
        key = (_PURPOSE_IDS[purpose], int(generation))
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))


def derive_seed(root_seed: int, *key: int) -> int:
    """Stable 64-bit seed for a child context (e.g. one run of a batch)."""
    seq = np.random.SeedSequence(int(root_seed), spawn_key=(_PURPOSE_IDS["run"],) + tuple(int(k) for k in key))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass
class Individual:
    coordinates: np.ndarray
    fitness: float | None = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass
class Population:
    members: list[Individual]
    generation_index: int = 0

    @property
    def size(self) -> int:
        return len(self.members)

    def coordinate_matrix(self) -> np.ndarray:
        return np.stack([ind.coordinates for ind in self.members])

    def fitness_values(self) -> np.ndarray:
        vals = [ind.fitness for ind in self.members]
        if any(v is None for v in vals):
            raise ValueError("population contains unevaluated members")
        return np.asarray(vals, dtype=float)

    def best(self) -> Individual:
        """Best (smallest-fitness) member; ties keep the lowest index."""
        vals = self.fitness_values()
        return self.members[int(np.argmin(vals))]


@dataclass(frozen=True)
class SelectionConfig:
    """Truncation selection: keep the best m = floor(tau * M) individuals."""

    tau: float
    m: int

    @classmethod
    def for_population(cls, tau: float, population_size: int) -> "SelectionConfig":
        if not 0.0 < tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {tau}")
        m = int(np.floor(tau * population_size))
        if m < 2:
            raise ValueError(f"tau={tau} with M={population_size} selects m={m} < 2 individuals")
        return cls(tau=tau, m=m)


@dataclass
class EvaluationBudget:
    max_fes: int
    used_fes: int = 0

    def __post_init__(self):
        if self.max_fes < 1:
            raise ValueError(f"max_fes must be positive, got {self.max_fes}")

    def charge(self, count: int) -> None:
        self.used_fes += int(count)

    @property
    def exhausted(self) -> bool:
        return self.used_fes >= self.max_fes


@dataclass
class RunTrace:
    """Per-generation record of one run plus phase timings and the final best.

    ``strong_sets[g]`` lists the variable indices the generation-``g`` model
    treated as strongly dependent (empty for purely univariate models).
    """

    seed: int
    generations: list[int] = field(default_factory=list)
    fes: list[int] = field(default_factory=list)
    best_fitness: list[float] = field(default_factory=list)
    n_strong: list[int] = field(default_factory=list)
    strong_sets: list[list[int]] = field(default_factory=list)
    model_build_seconds: float = 0.0
    sampling_seconds: float = 0.0
    evaluation_seconds: float = 0.0
    final_best: Individual | None = None

    def append(self, generation: int, used_fes: int, best: float, strong: Sequence[int]) -> None:
        self.generations.append(int(generation))
        self.fes.append(int(used_fes))
        self.best_fitness.append(float(best))
        self.n_strong.append(len(strong))
        self.strong_sets.append([int(i) for i in strong])


class FittedModel(Protocol):
    """A search distribution fitted for one generation."""

    strong_indices: Sequence[int]

    def sample(self, count: int, rng: np.random.Generator,
               lower: np.ndarray, upper: np.ndarray) -> np.ndarray: ...


class ModelStrategy(Protocol):
    """Builds a FittedModel from the selected individuals of one generation."""

    name: str

    def build(self, data: np.ndarray, generation: int, streams: RngStreams) -> FittedModel: ...


def uniform_init(lower: np.ndarray, upper: np.ndarray, count: int,
                 rng: np.random.Generator) -> Population:
    """Uniform random population inside the box [lower, upper]."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("lower and upper bounds must be 1-D arrays of equal length")
    if np.any(lower >= upper):
        bad = int(np.argmax(lower >= upper))
        raise ValueError(f"invalid bounds at dimension {bad}: [{lower[bad]}, {upper[bad]}]")
    if count < 2:
        raise ValueError(f"population size must be at least 2, got {count}")
    coords = rng.uniform(lower, upper, size=(count, lower.size))
    return Population(members=[Individual(coords[i]) for i in range(count)])


def truncation_select(pop: Population, m: int) -> list[Individual]:
    """The m members with smallest fitness, ties broken by original order."""
    if not 2 <= m <= pop.size:
        raise ValueError(f"selection size m={m} must satisfy 2 <= m <= {pop.size}")
    vals = pop.fitness_values()
    order = np.argsort(vals, kind="stable")
    return [pop.members[i] for i in order[:m]]


def elitist_replace(old: Population, offspring: list[Individual]) -> Population:
    """Next generation = best member of ``old`` plus M-1 evaluated offspring."""
    if len(offspring) != old.size - 1:
        raise ValueError(f"expected {old.size - 1} offspring, got {len(offspring)}")
    if any(not ind.evaluated for ind in offspring):
        raise ValueError("offspring must be evaluated before replacement")
    elite = old.best()
    return Population(members=[elite] + list(offspring),
                      generation_index=old.generation_index + 1)


def subsample_indices(total: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if not 2 <= count <= total:
        raise ValueError(f"subsample size {count} must satisfy 2 <= size <= {total}")
    return rng.choice(total, size=count, replace=False)


def subsample_without_replacement(selected: Sequence[Individual], count: int,
                                  rng: np.random.Generator) -> list[Individual]:
    """count distinct members of ``selected`` (no index repeated)."""
    idx = subsample_indices(len(selected), count, rng)
    return [selected[i] for i in idx]


def run(problem, strategy: ModelStrategy, population_size: int, tau: float,
        max_fes: int, seed: int,
        on_generation: Callable[[RunTrace], None] | None = None) -> RunTrace:
    """Execute one full optimization run and return its trace.

    Termination is checked at generation boundaries only, so the total FE
    count may overshoot ``max_fes`` by at most M-1.
    """
    if max_fes < population_size:
        raise ValueError(f"budget {max_fes} cannot evaluate the initial population of {population_size}")
    selection = SelectionConfig.for_population(tau, population_size)
    budget = EvaluationBudget(max_fes=max_fes)
    streams = RngStreams(seed)
    trace = RunTrace(seed=int(seed))

    pop = uniform_init(problem.lower, problem.upper, population_size, streams.stream("init"))
    t0 = time.perf_counter()
    fitness = problem.evaluate_many(pop.coordinate_matrix())
    trace.evaluation_seconds += time.perf_counter() - t0
    budget.charge(population_size)
    for ind, f in zip(pop.members, fitness):
        ind.fitness = float(f)

    trace.append(0, budget.used_fes, pop.best().fitness, [])
    if on_generation is not None:
        on_generation(trace)

    generation = 1
    while not budget.exhausted:
        selected = truncation_select(pop, selection.m)
        data = np.stack([ind.coordinates for ind in selected])

        t0 = time.perf_counter()
        try:
            model = strategy.build(data, generation, streams)
        except Exception as err:
            raise RuntimeError(
                f"{strategy.name}: model build failed at generation {generation}: {err}") from err
        trace.model_build_seconds += time.perf_counter() - t0

        t0 = time.perf_counter()
        batch = model.sample(population_size - 1, streams.stream("sampling", generation),
                             problem.lower, problem.upper)
        trace.sampling_seconds += time.perf_counter() - t0

        t0 = time.perf_counter()
        fitness = problem.evaluate_many(batch)
        trace.evaluation_seconds += time.perf_counter() - t0
        budget.charge(population_size - 1)

        offspring = [Individual(batch[i], float(fitness[i])) for i in range(population_size - 1)]
        pop = elitist_replace(pop, offspring)
        trace.append(generation, budget.used_fes, pop.best().fitness, model.strong_indices)
        if on_generation is not None:
            on_generation(trace)
        generation += 1

    trace.final_best = pop.best()
    return trace
