"""The thirteen-function benchmark suite with shift/rotation transforms.

F1  Sphere                                        [-100, 100]^n
F2  Shifted Sphere                                [-100, 100]^n
F3  Schwefel 2.21 (max |x_i|)                     [-100, 100]^n
F4  Shifted Schwefel 2.21                         [-100, 100]^n
F5  Schwefel ((x1 - xi^2)^2 + (xi - 1)^2 sum)     [-10, 10]^n
F6  Shifted Schwefel                              [-10, 10]^n
F7  Rosenbrock                                    [-100, 100]^n
F8  Shifted Rosenbrock                            [-100, 100]^n
F9  Shifted rotated high-conditioned elliptic     [-100, 100]^n
F10 Schwefel 2.6 with optimum on bounds           [-100, 100]^n
F11 Rastrigin                                     [-5, 5]^n
F12 Shifted rotated Rastrigin                     [-5, 5]^n
F13 Shifted expanded Griewank-of-Rosenbrock       [-3, 1]^n

All are minimization problems.  Shifts, rotations, and the F10 linear system
are either regenerated from a seeded stream or loaded from plain-text files.
Evaluation is pure; the harness counts function evaluations externally.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor

__all__ = [
    "FUNCTION_IDS",
    "BenchmarkProblem",
    "ProblemInstanceSpec",
    "TransformFileError",
    "TransformParseError",
    "TransformShapeError",
    "TransformOrthogonalityError",
    "instantiate",
    "generate_rotation",
    "load_transforms",
    "save_transforms",
    "transform_path",
]

FUNCTION_IDS = tuple(f"F{i}" for i in range(1, 14))

_DOMAINS = {
    "F1": (-100.0, 100.0), "F2": (-100.0, 100.0), "F3": (-100.0, 100.0),
    "F4": (-100.0, 100.0), "F5": (-10.0, 10.0), "F6": (-10.0, 10.0),
    "F7": (-100.0, 100.0), "F8": (-100.0, 100.0), "F9": (-100.0, 100.0),
    "F10": (-100.0, 100.0), "F11": (-5.0, 5.0), "F12": (-5.0, 5.0),
    "F13": (-3.0, 1.0),
}
_SHIFTED = {"F2", "F4", "F6", "F8", "F9", "F10", "F12", "F13"}
_ROTATED = {"F9", "F12"}

# Fraction of the box, centered, that generated shifts are restricted to, so
# optima stay clear of the clipping boundary (F10 is excluded on purpose).
_SHIFT_INTERIOR = 0.8

ROTATION_GEN_TOL = 1e-8
ROTATION_LOAD_TOL = 1e-6


class TransformFileError(ValueError):
    """Problem with a transform data file."""


class TransformParseError(TransformFileError):
    pass


class TransformShapeError(TransformFileError):
    pass


class TransformOrthogonalityError(TransformFileError):
    pass


@dataclass(eq=False)
class BenchmarkProblem:
    fid: str
    n: int
    lower: np.ndarray
    upper: np.ndarray
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    bias: float = 0.0
    linear_system: tuple[np.ndarray, np.ndarray] | None = None
    optimum_value: float = 0.0
    optimum_point: np.ndarray | None = None

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.evaluate_many(np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized objective values for a (k, n) batch of points."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.n:
            raise ValueError(f"{self.fid} expects points of dimension {self.n}, got shape {points.shape}")
        return _EVALUATORS[self.fid](self, points) + self.bias


def _f1(p, x):
    return np.square(x).sum(axis=1)


def _f2(p, x):
    return np.square(x - p.shift).sum(axis=1)


def _f3(p, x):
    return np.abs(x).max(axis=1)


def _f4(p, x):
    return np.abs(x - p.shift).max(axis=1)


def _schwefel_core(z):
    return (np.square(z[:, :1] - np.square(z)) + np.square(z - 1.0)).sum(axis=1)


def _f5(p, x):
    return _schwefel_core(x)


def _f6(p, x):
    return _schwefel_core(x - p.shift + 1.0)


def _rosenbrock_core(z):
    return (100.0 * np.square(z[:, 1:] - np.square(z[:, :-1]))
            + np.square(z[:, :-1] - 1.0)).sum(axis=1)


def _f7(p, x):
    return _rosenbrock_core(x)


def _f8(p, x):
    return _rosenbrock_core(x - p.shift + 1.0)


def _elliptic_weights(n):
    return np.power(1e6, np.arange(n) / (n - 1))


def _f9(p, x):
    z = (x - p.shift) @ p.rotation
    return (np.square(z) * _elliptic_weights(p.n)).sum(axis=1)


def _f10(p, x):
    a, b = p.linear_system
    return np.abs(x @ a.T - b).max(axis=1)


def _rastrigin_core(z):
    return (np.square(z) - 10.0 * np.cos(2.0 * np.pi * z) + 10.0).sum(axis=1)


def _f11(p, x):
    return _rastrigin_core(x)


def _f12(p, x):
    z = (x - p.shift) @ p.rotation
    return _rastrigin_core(z)


def _f13(p, x):
    # Expanded composition: 2-D Rosenbrock on each consecutive pair (cyclic,
    # including the (z_n, z_1) wrap) fed through 1-D Griewank.
    z = x - p.shift + 1.0
    z_next = np.roll(z, -1, axis=1)
    r = 100.0 * np.square(np.square(z) - z_next) + np.square(z - 1.0)
    return (np.square(r) / 4000.0 - np.cos(r) + 1.0).sum(axis=1)


_EVALUATORS = {
    "F1": _f1, "F2": _f2, "F3": _f3, "F4": _f4, "F5": _f5, "F6": _f6,
    "F7": _f7, "F8": _f8, "F9": _f9, "F10": _f10, "F11": _f11, "F12": _f12,
    "F13": _f13,
}


@dataclass(frozen=True)
class ProblemInstanceSpec:
    fid: str
    n: int
    seed: int | None = None
    transform_dir: str | None = None
    bias: float = 0.0

    def __post_init__(self):
        if self.fid not in FUNCTION_IDS:
            raise ValueError(f"unknown function id {self.fid!r}")
        if self.n < 2:
            raise ValueError(f"problem dimension must be >= 2, got {self.n}")


def generate_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via sign-corrected QR."""
    if n < 2:
        raise ValueError(f"rotation dimension must be >= 2, got {n}")
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _generate_shift(lower: float, upper: float, n: int, rng: np.random.Generator) -> np.ndarray:
    margin = 0.5 * (1.0 - _SHIFT_INTERIOR) * (upper - lower)
    return rng.uniform(lower + margin, upper - margin, size=n)


def _generate_f10_system(lower, upper, n, rng):
    # Integer matrix, redrawn until every LU pivot is comfortably nonzero.
    while True:
        a = rng.integers(-500, 501, size=(n, n)).astype(float)
        lu, _ = lu_factor(a)
        if np.abs(np.diag(lu)).min() > 1e-6 * np.abs(a).max():
            break
    shift = rng.uniform(lower, upper, size=n)
    quarter = math.ceil(n / 4)
    shift[:quarter] = lower
    shift[n - quarter:] = upper
    return a, shift, a @ shift


def instantiate(spec: ProblemInstanceSpec, rng: np.random.Generator | None = None) -> BenchmarkProblem:
    """Build a concrete problem instance from a seed or from transform files."""
    lo, hi = _DOMAINS[spec.fid]
    n = spec.n
    lower = np.full(n, lo)
    upper = np.full(n, hi)
    shift = rotation = linear = None

    if spec.transform_dir is not None:
        loaded = load_transforms(spec.transform_dir, spec.fid, n)
        shift = loaded.get("shift")
        rotation = loaded.get("rotation")
        if spec.fid == "F10":
            if shift is None or "A" not in loaded:
                raise TransformFileError(f"F10 requires shift and A files in {spec.transform_dir}")
            a = loaded["A"]
            b = loaded.get("B")
            linear = (a, a @ shift if b is None else b)
        elif spec.fid in _SHIFTED and shift is None:
            raise TransformFileError(f"{spec.fid} requires a shift file in {spec.transform_dir}")
        elif spec.fid in _ROTATED and rotation is None:
            raise TransformFileError(f"{spec.fid} requires a rotation file in {spec.transform_dir}")
    else:
        if rng is None:
            rng = np.random.default_rng(spec.seed)
        if spec.fid == "F10":
            a, shift, b = _generate_f10_system(lo, hi, n, rng)
            linear = (a, b)
        elif spec.fid in _SHIFTED:
            shift = _generate_shift(lo, hi, n, rng)
        if spec.fid in _ROTATED:
            rotation = generate_rotation(n, rng)

    if spec.fid in ("F1", "F3", "F11"):
        optimum = np.zeros(n)
    elif spec.fid in ("F5", "F7"):
        optimum = np.ones(n)
    else:
        optimum = shift.copy()

    for arr in (lower, upper, shift, rotation, optimum):
        if arr is not None:
            arr.setflags(write=False)
    if linear is not None:
        linear[0].setflags(write=False)
        linear[1].setflags(write=False)

    return BenchmarkProblem(
        fid=spec.fid, n=n, lower=lower, upper=upper, shift=shift,
        rotation=rotation, bias=spec.bias, linear_system=linear,
        optimum_value=spec.bias, optimum_point=optimum)


def transform_path(directory: str, fid: str, n: int, kind: str) -> str:
    return os.path.join(directory, f"{fid}_{n}D_{kind}.txt")


def _read_numbers(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as handle:
        tokens = handle.read().split()
    values = []
    for token in tokens:
        try:
            values.append(float(token))
        except ValueError:
            raise TransformParseError(f"{path}: cannot parse {token!r} as a number") from None
    return np.asarray(values)


def _load_vector(path: str, n: int) -> np.ndarray:
    values = _read_numbers(path)
    if values.size != n:
        raise TransformShapeError(f"{path}: expected {n} values, found {values.size}")
    return values


def _load_matrix(path: str, n: int, orthogonal: bool = False) -> np.ndarray:
    values = _read_numbers(path)
    if values.size != n * n:
        raise TransformShapeError(f"{path}: expected {n}x{n} values, found {values.size}")
    matrix = values.reshape(n, n)
    if orthogonal:
        defect = np.linalg.norm(matrix @ matrix.T - np.eye(n))
        if defect > ROTATION_LOAD_TOL:
            raise TransformOrthogonalityError(
                f"{path}: matrix is not orthogonal (||MM^T - I||_F = {defect:.3e})")
    return matrix


def load_transforms(directory: str, fid: str, n: int) -> dict[str, np.ndarray]:
    """Load whichever of shift/rot/A/B files exist for (fid, n)."""
    out: dict[str, np.ndarray] = {}
    path = transform_path(directory, fid, n, "shift")
    if os.path.exists(path):
        out["shift"] = _load_vector(path, n)
    path = transform_path(directory, fid, n, "rot")
    if os.path.exists(path):
        out["rotation"] = _load_matrix(path, n, orthogonal=True)
    path = transform_path(directory, fid, n, "A")
    if os.path.exists(path):
        out["A"] = _load_matrix(path, n)
    path = transform_path(directory, fid, n, "B")
    if os.path.exists(path):
        out["B"] = _load_vector(path, n)
    return out


def save_transforms(directory: str, problem: BenchmarkProblem) -> list[str]:
    """Write the problem's transforms as plain text; returns written paths."""
    os.makedirs(directory, exist_ok=True)
    written = []

    def _write(kind: str, array: np.ndarray) -> None:
        path = transform_path(directory, problem.fid, problem.n, kind)
        rows = array if array.ndim == 2 else array[None, :]
        with open(path, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(" ".join(f"{v:.17e}" for v in row) + "\n")
        written.append(path)

    if problem.shift is not None:
        _write("shift", problem.shift)
    if problem.rotation is not None:
        _write("rot", problem.rotation)
    if problem.linear_system is not None:
        _write("A", problem.linear_system[0])
        _write("B", problem.linear_system[1])
    return written
