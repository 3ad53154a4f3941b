"""Experiment orchestration: configs, multi-run execution, reports, exports.

A config describes one algorithm on one problem instance.  ``execute`` runs
it over the population-size grid with per-run derived seeds, persisting each
run record as JSON as soon as it finishes.  ``report`` aggregates final
F(x) - F(x*) values into the summary table (zero rule: magnitudes below
1e-12 count as zero) with Mann-Whitney significance markers against a
baseline algorithm.
"""
from __future__ import annotations

import concurrent.futures
import csv
import json
import os
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import core
from .algorithms import ALGORITHM_NAMES, MCC_FAMILY, make_strategy
from .benchmarks import FUNCTION_IDS, BenchmarkProblem, ProblemInstanceSpec, instantiate
from .mcc import StructureTrace
from .stats import mann_whitney_u, significance_marker, summarize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "SummaryCell",
    "SummaryReport",
    "SweepCell",
    "parse_config",
    "experiment_problem",
    "execute",
    "report",
    "format_summary",
    "export_csv",
    "export_json",
    "sweep",
    "load_sweep_cells",
    "save_record",
    "load_records",
    "accumulated_q_matrix",
    "ZERO_RULE",
]

ZERO_RULE = 1e-12
DEFAULT_POPULATION_SIZES = (200, 500, 1000, 2000)
FLOAT_FORMAT = "{:.17e}"  # round-trips exactly, satisfies the >= 6 digit rule
PHASES = ("model_build", "sampling", "evaluation")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n: int
    algorithm: str
    population_sizes: tuple[int, ...] = DEFAULT_POPULATION_SIZES
    tau: float = 0.5
    theta: float = 0.3
    c: int = 20
    m_corr: int = 100
    base_model: str = "eeda"
    budget_fes: int | None = None
    runs: int = 25
    seed: int = 0
    out: str | None = None
    transforms: str | None = None
    bias: float = 0.0

    @property
    def resolved_budget(self) -> int:
        return 10000 * self.n if self.budget_fes is None else self.budget_fes

    def validate(self) -> None:
        if self.problem not in FUNCTION_IDS:
            raise ConfigError(f"problem must be one of F1..F13, got {self.problem!r}")
        if self.algorithm not in ALGORITHM_NAMES:
            raise ConfigError(f"algorithm must be one of {ALGORITHM_NAMES}, got {self.algorithm!r}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not self.population_sizes:
            raise ConfigError("population_sizes must not be empty")
        if any(m < 4 for m in self.population_sizes):
            raise ConfigError(f"population_sizes entries must be >= 4, got {self.population_sizes}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must be in [0, 1], got {self.theta}")
        smallest_m = int(np.floor(self.tau * min(self.population_sizes)))
        if smallest_m < 2:
            raise ConfigError(f"tau selects fewer than 2 individuals at M={min(self.population_sizes)}")
        if self.algorithm in MCC_FAMILY:
            if not 1 <= self.c <= self.n:
                raise ConfigError(f"c must be in [1, n={self.n}], got {self.c}")
            if self.algorithm == "eda-mcc-gc" and self.c < 2:
                raise ConfigError(f"c must be >= 2 for greedy clustering, got {self.c}")
            if self.m_corr < 2:
                raise ConfigError(f"m_corr must be >= 2, got {self.m_corr}")
            if self.m_corr > smallest_m:
                raise ConfigError(
                    f"m_corr={self.m_corr} exceeds the m={smallest_m} individuals selected "
                    f"at M={min(self.population_sizes)}")
            if self.base_model not in ("emna", "eeda"):
                raise ConfigError(f"base_model must be 'emna' or 'eeda', got {self.base_model!r}")
        if self.resolved_budget < max(self.population_sizes):
            raise ConfigError(
                f"budget_fes={self.resolved_budget} cannot evaluate an initial population "
                f"of {max(self.population_sizes)}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["population_sizes"] = list(self.population_sizes)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["population_sizes"] = tuple(data["population_sizes"])
        return cls(**data)


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int_list(key, raw):
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: expected a comma-separated integer list, got {raw!r}") from None


_KEY_PARSERS = {
    "problem": lambda k, v: v,
    "n": _parse_int,
    "algorithm": lambda k, v: v,
    "population_sizes": _parse_int_list,
    "tau": _parse_float,
    "theta": _parse_float,
    "c": _parse_int,
    "m_corr": _parse_int,
    "base_model": lambda k, v: v,
    "budget_fes": _parse_int,
    "runs": _parse_int,
    "seed": _parse_int,
    "out": lambda k, v: v,
    "transforms": lambda k, v: v,
    "bias": _parse_float,
}

_MANDATORY_KEYS = ("problem", "algorithm", "n")


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines (# comments) into a validated config."""
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _KEY_PARSERS[key](key, raw)
    for key in _MANDATORY_KEYS:
        if key not in values:
            raise ConfigError(f"missing mandatory key {key!r}")
    config = ExperimentConfig(**values)
    config.validate()
    return config


@dataclass
class RunRecord:
    """One persisted optimization run: trace, outcome, timings, config snapshot."""

    algorithm: str
    pop_size: int
    run_index: int
    seed: int
    problem_id: str
    n: int
    optimum_value: float
    final_fitness: float
    final_gap: float
    final_coordinates: list[float]
    generations: list[int]
    fes: list[int]
    best_fitness: list[float]
    n_strong: list[int]
    strong_sets: list[list[int]]
    timings: dict[str, float]
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(**data)


def _record_filename(record: RunRecord) -> str:
    return f"record_{record.algorithm}_M{record.pop_size}_r{record.run_index:03d}.json"


def save_record(record: RunRecord, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, _record_filename(record))
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(record.to_dict(), handle)
    return path


def load_records(directory: str) -> list[RunRecord]:
    records = []
    for name in sorted(os.listdir(directory)):
        if name.startswith("record_") and name.endswith(".json"):
            with open(os.path.join(directory, name), "r", encoding="utf-8") as handle:
                records.append(RunRecord.from_dict(json.load(handle)))
    records.sort(key=lambda r: (r.algorithm, r.pop_size, r.run_index))
    return records


def experiment_problem(config: ExperimentConfig) -> BenchmarkProblem:
    """The (shared, deterministic) problem instance for a config.

    Transforms depend only on (problem, n, seed, transforms), never on the
    algorithm, so different algorithms with the same seed face identical
    instances.
    """
    spec = ProblemInstanceSpec(fid=config.problem, n=config.n,
                               transform_dir=config.transforms, bias=config.bias)
    rng = core.RngStreams(config.seed).stream("problem")
    return instantiate(spec, rng)


def _run_one(config: ExperimentConfig, problem: BenchmarkProblem, pop_size: int,
             run_index: int, extra_key: tuple[int, ...] = ()) -> RunRecord:
    seed = core.derive_seed(config.seed, pop_size, run_index, *extra_key)
    strategy = make_strategy(config.algorithm, theta=config.theta, c=config.c,
                             m_corr=config.m_corr, base_model=config.base_model,
                             n=config.n)
    trace = core.run(problem, strategy, pop_size, config.tau,
                     config.resolved_budget, seed)
    final = trace.final_best
    return RunRecord(
        algorithm=config.algorithm, pop_size=pop_size, run_index=run_index,
        seed=seed, problem_id=problem.fid, n=problem.n,
        optimum_value=problem.optimum_value,
        final_fitness=float(final.fitness),
        final_gap=float(final.fitness - problem.optimum_value),
        final_coordinates=[float(v) for v in final.coordinates],
        generations=trace.generations, fes=trace.fes,
        best_fitness=trace.best_fitness, n_strong=trace.n_strong,
        strong_sets=trace.strong_sets,
        timings={"model_build": trace.model_build_seconds,
                 "sampling": trace.sampling_seconds,
                 "evaluation": trace.evaluation_seconds},
        config=config.to_dict())


def execute(config: ExperimentConfig, jobs: int = 1,
            out_dir: str | None = None) -> list[RunRecord]:
    """Run ``runs`` independent runs per population size.

    Records are persisted to ``out_dir`` as each run completes.  A failing
    run is logged to failures.json (or re-raised when nothing can be
    persisted) and the remaining runs proceed.
    """
    config.validate()
    problem = experiment_problem(config)
    tasks = [(pop, idx) for pop in config.population_sizes for idx in range(config.runs)]
    records: list[RunRecord] = []
    failures: list[dict] = []

    def _finish(record: RunRecord) -> None:
        records.append(record)
        if out_dir is not None:
            save_record(record, out_dir)

    if jobs <= 1:
        for pop, idx in tasks:
            try:
                _finish(_run_one(config, problem, pop, idx))
            except Exception as err:  # noqa: BLE001 - run isolation is the contract
                failures.append({"pop_size": pop, "run_index": idx, "error": repr(err)})
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_one, config, problem, pop, idx): (pop, idx)
                       for pop, idx in tasks}
            for future in concurrent.futures.as_completed(futures):
                pop, idx = futures[future]
                try:
                    _finish(future.result())
                except Exception as err:  # noqa: BLE001
                    failures.append({"pop_size": pop, "run_index": idx, "error": repr(err)})

    if failures:
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, "failures.json"), "w", encoding="utf-8") as handle:
                json.dump(failures, handle, indent=2)
        if not records:
            raise RuntimeError(f"all {len(failures)} run(s) failed: {failures[0]['error']}")
        warnings.warn(f"{len(failures)} of {len(tasks)} runs failed; "
                      f"first error: {failures[0]['error']}", RuntimeWarning,
                      stacklevel=2)
    records.sort(key=lambda r: (r.algorithm, r.pop_size, r.run_index))
    return records


def apply_zero_rule(value: float) -> float:
    return 0.0 if abs(value) < ZERO_RULE else float(value)


@dataclass(frozen=True)
class SummaryCell:
    algorithm: str
    pop_size: int
    count: int
    mean: float
    std: float
    min: float
    max: float
    marker: str = ""
    is_best: bool = False


@dataclass
class SummaryReport:
    cells: list[SummaryCell]
    baseline_algorithm: str
    best_pop: dict[str, int]
    timing: list[dict]  # rows: algorithm, pop_size, phase, mean_seconds


def report(records: list[RunRecord], baseline: str | None = None) -> SummaryReport:
    """Summary table over final F(x) - F(x*) values.

    Per-run values below the zero rule count as exact zeros.  The best
    population size per algorithm minimizes the mean (ties prefer smaller M).
    Non-baseline cells carry a Mann-Whitney marker against the baseline
    algorithm's sample at its best population size.
    """
    if not records:
        raise ValueError("cannot report on an empty record set")
    groups: dict[tuple[str, int], list[float]] = {}
    timing_acc: dict[tuple[str, int, str], list[float]] = {}
    for rec in records:
        groups.setdefault((rec.algorithm, rec.pop_size), []).append(apply_zero_rule(rec.final_gap))
        for phase in PHASES:
            timing_acc.setdefault((rec.algorithm, rec.pop_size, phase), []).append(
                rec.timings.get(phase, 0.0))

    algorithms = sorted({alg for alg, _ in groups})
    best_pop: dict[str, int] = {}
    for alg in algorithms:
        candidates = sorted((np.mean(vals), pop) for (a, pop), vals in groups.items() if a == alg)
        best_pop[alg] = candidates[0][1]

    if baseline is None:
        baseline = "eda-mcc" if "eda-mcc" in algorithms else algorithms[0]
    elif baseline not in algorithms:
        raise ValueError(f"baseline algorithm {baseline!r} has no records")
    baseline_sample = groups[(baseline, best_pop[baseline])]

    cells = []
    for (alg, pop) in sorted(groups):
        values = groups[(alg, pop)]
        stats = summarize(values)
        marker = ""
        if alg != baseline:
            result = mann_whitney_u(values, baseline_sample)
            marker = significance_marker(result.p_two_tailed, style="ascii")
        cells.append(SummaryCell(
            algorithm=alg, pop_size=pop, count=stats.count,
            mean=apply_zero_rule(stats.mean), std=apply_zero_rule(stats.sample_std),
            min=apply_zero_rule(stats.min), max=apply_zero_rule(stats.max),
            marker=marker, is_best=(best_pop[alg] == pop)))

    timing_rows = [
        {"algorithm": alg, "pop_size": pop, "phase": phase,
         "mean_seconds": float(np.mean(vals))}
        for (alg, pop, phase), vals in sorted(timing_acc.items())]
    return SummaryReport(cells=cells, baseline_algorithm=baseline,
                         best_pop=best_pop, timing=timing_rows)


def format_summary(rep: SummaryReport) -> str:
    lines = [f"{'algorithm':<18}{'M':>6}{'runs':>6}{'mean':>16}{'std':>16}"
             f"  {'marker':<8}best"]
    for cell in rep.cells:
        lines.append(
            f"{cell.algorithm:<18}{cell.pop_size:>6}{cell.count:>6}"
            f"{cell.mean:>16.6e}{cell.std:>16.6e}  {cell.marker:<8}"
            f"{'yes' if cell.is_best else ''}")
    lines.append(f"(markers: Mann-Whitney significance against {rep.baseline_algorithm}; "
                 f"'best' = that algorithm's best population size)")
    return "\n".join(lines)


def _summary_rows(rep: SummaryReport) -> list[dict]:
    return [{"algorithm": c.algorithm, "pop_size": c.pop_size, "runs": c.count,
             "mean": c.mean, "std": c.std, "min": c.min, "max": c.max,
             "marker": c.marker, "best": int(c.is_best)} for c in rep.cells]


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([FLOAT_FORMAT.format(v) if isinstance(v, float) else v
                             for v in row])


def accumulated_q_matrix(records: list[RunRecord]) -> np.ndarray:
    """Sum per-run strong-set indicators into an n x G count matrix."""
    dims = {rec.n for rec in records}
    if len(dims) != 1:
        raise ValueError(f"q_matrix export needs records of one problem dimension, got {sorted(dims)}")
    n = dims.pop()
    total = StructureTrace(n=n)
    for rec in records:
        one = StructureTrace(n=n)
        for gen, strong in zip(rec.generations, rec.strong_sets):
            one.record(gen, strong)
        total.merge(one)
    return total.q_matrix()


def export_csv(records: list[RunRecord], kind: str, path: str) -> str:
    """Write trace / q_matrix / timing / summary data as CSV.

    The trace export carries identifying columns only when more than one
    record is given.  The q_matrix export is a bare integer grid, one row per
    variable and one column per generation.
    """
    if not records:
        raise ValueError("no records to export")
    if kind == "trace":
        if len(records) == 1:
            rec = records[0]
            rows = [[g, f, b, s] for g, f, b, s in
                    zip(rec.generations, rec.fes, rec.best_fitness, rec.n_strong)]
            _write_csv(path, ["generation", "fes", "best_fitness", "n_strong"], rows)
        else:
            rows = [[rec.algorithm, rec.pop_size, rec.run_index, g, f, b, s]
                    for rec in records
                    for g, f, b, s in zip(rec.generations, rec.fes, rec.best_fitness, rec.n_strong)]
            _write_csv(path, ["algorithm", "pop_size", "run", "generation", "fes",
                              "best_fitness", "n_strong"], rows)
    elif kind == "q_matrix":
        matrix = accumulated_q_matrix(records)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            for row in matrix:
                writer.writerow([int(v) for v in row])
    elif kind == "timing":
        rows = [[rec.algorithm, rec.pop_size, rec.run_index, phase,
                 float(rec.timings.get(phase, 0.0))]
                for rec in records for phase in PHASES]
        _write_csv(path, ["algorithm", "pop_size", "run", "phase", "seconds"], rows)
    elif kind == "summary":
        rows = [[r["algorithm"], r["pop_size"], r["runs"], r["mean"], r["std"],
                 r["min"], r["max"], r["marker"], r["best"]]
                for r in _summary_rows(report(records))]
        _write_csv(path, ["algorithm", "pop_size", "runs", "mean", "std", "min",
                          "max", "marker", "best"], rows)
    else:
        raise ValueError(f"unknown export kind {kind!r}")
    return path


def export_json(records: list[RunRecord], kind: str, path: str) -> str:
    """JSON counterpart of export_csv for machine consumption."""
    if not records:
        raise ValueError("no records to export")
    if kind == "trace":
        payload = [{"algorithm": rec.algorithm, "pop_size": rec.pop_size,
                    "run": rec.run_index, "generation": rec.generations,
                    "fes": rec.fes, "best_fitness": rec.best_fitness,
                    "n_strong": rec.n_strong} for rec in records]
    elif kind == "q_matrix":
        payload = [[int(v) for v in row] for row in accumulated_q_matrix(records)]
    elif kind == "timing":
        payload = [{"algorithm": rec.algorithm, "pop_size": rec.pop_size,
                    "run": rec.run_index, "phase": phase,
                    "seconds": float(rec.timings.get(phase, 0.0))}
                   for rec in records for phase in PHASES]
    elif kind == "summary":
        payload = _summary_rows(report(records))
    else:
        raise ValueError(f"unknown export kind {kind!r}")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
    return path


@dataclass(frozen=True)
class SweepCell:
    theta: float
    c: int
    count: int
    mean: float
    std: float


def sweep(config: ExperimentConfig, theta_grid: list[float], c_grid: list[int],
          jobs: int = 1, out_dir: str | None = None) -> list[SweepCell]:
    """Cartesian theta x c sweep at the first configured population size."""
    config.validate()
    if config.algorithm not in MCC_FAMILY:
        raise ConfigError(f"sweep requires an MCC-family algorithm, got {config.algorithm!r}")
    for theta in theta_grid:
        if not 0.0 <= theta <= 1.0:
            raise ConfigError(f"sweep theta value {theta} outside [0, 1]")
    for c in c_grid:
        if not 1 <= c <= config.n:
            raise ConfigError(f"sweep c value {c} outside [1, n={config.n}]")
        if config.algorithm == "eda-mcc-gc" and c < 2:
            raise ConfigError(f"sweep c value {c} invalid for greedy clustering")
    pop = config.population_sizes[0]
    problem = experiment_problem(config)
    tasks = []
    for ti, theta in enumerate(theta_grid):
        for ci, c in enumerate(c_grid):
            cell_config = replace(config, theta=theta, c=c, population_sizes=(pop,))
            cell_config.validate()
            for idx in range(config.runs):
                tasks.append((ti, ci, cell_config, idx))

    finals: dict[tuple[int, int], list[tuple[int, float]]] = {}

    def _finish(ti, ci, idx, record):
        if out_dir is not None:
            save_record(record, os.path.join(out_dir, f"cell_t{ti}_c{ci}"))
        finals.setdefault((ti, ci), []).append((idx, apply_zero_rule(record.final_gap)))

    if jobs <= 1:
        for ti, ci, cell_config, idx in tasks:
            _finish(ti, ci, idx, _run_one(cell_config, problem, pop, idx, extra_key=(ti, ci)))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_one, cell_config, problem, pop, idx,
                                   (ti, ci)): (ti, ci, idx)
                       for ti, ci, cell_config, idx in tasks}
            for future in concurrent.futures.as_completed(futures):
                ti, ci, idx = futures[future]
                _finish(ti, ci, idx, future.result())

    cells = []
    for ti, theta in enumerate(theta_grid):
        for ci, c in enumerate(c_grid):
            values = [v for _, v in sorted(finals[(ti, ci)])]
            stats = summarize(values)
            cells.append(SweepCell(theta=theta, c=c, count=stats.count,
                                   mean=apply_zero_rule(stats.mean),
                                   std=apply_zero_rule(stats.sample_std)))
    if out_dir is not None:
        save_sweep_cells(cells, os.path.join(out_dir, "sweep.csv"))
    return cells


def save_sweep_cells(cells: list[SweepCell], path: str) -> str:
    _write_csv(path, ["theta", "c", "runs", "mean", "std"],
               [[cell.theta, cell.c, cell.count, cell.mean, cell.std] for cell in cells])
    return path


def load_sweep_cells(path: str) -> list[SweepCell]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        return [SweepCell(theta=float(row["theta"]), c=int(row["c"]),
                          count=int(row["runs"]), mean=float(row["mean"]),
                          std=float(row["std"])) for row in reader]


def format_sweep(cells: list[SweepCell]) -> str:
    lines = [f"{'theta':>8}{'c':>6}{'runs':>6}{'mean':>16}{'std':>16}"]
    for cell in cells:
        lines.append(f"{cell.theta:>8.3f}{cell.c:>6}{cell.count:>6}"
                     f"{cell.mean:>16.6e}{cell.std:>16.6e}")
    return "\n".join(lines)
