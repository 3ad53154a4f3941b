"""Maximum-likelihood Gaussian models: fitting, factorization, sampling.

All variance and covariance estimates use the maximum-likelihood divisor m
(not m-1).  Sampling follows x = mu + H @ zeta with H lower-triangular and
zeta standard normal; out-of-bounds coordinates are repaired by clipping.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "UnivariateGaussianSet",
    "MultivariateGaussian",
    "CorrelationMatrix",
    "FactorizationError",
    "fit_univariate",
    "sample_univariate",
    "fit_multivariate",
    "cholesky_factor",
    "sample_multivariate",
    "correlation_from_data",
    "eeda_scale",
]

# Relative diagonal jitter ladder (multiples of mean diagonal) tried when a
# covariance matrix is too close to singular for a plain Cholesky.
JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)

SYMMETRY_RTOL = 1e-12
FACTOR_RTOL = 1e-10


class FactorizationError(RuntimeError):
    """Covariance factorization failed even after maximum regularization."""


@dataclass
class UnivariateGaussianSet:
    """Independent per-coordinate Gaussians (means and standard deviations)."""

    means: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.std_devs = np.asarray(self.std_devs, dtype=float)
        if self.means.shape != self.std_devs.shape or self.means.ndim != 1:
            raise ValueError("means and std_devs must be 1-D arrays of equal length")
        if np.any(self.std_devs < 0):
            raise ValueError("standard deviations must be non-negative")

    @property
    def dim(self) -> int:
        return self.means.size


@dataclass
class MultivariateGaussian:
    """Full-covariance Gaussian with an optional cached Cholesky factor.

    ``jitter_applied`` records any diagonal regularization lambda used so the
    factor identity H @ H.T == covariance + lambda*I stays checkable.
    """

    mean: np.ndarray
    covariance: np.ndarray
    factor: np.ndarray | None = None
    jitter_applied: float = 0.0
    scale_warning: bool = False

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        d = self.mean.size
        if self.covariance.shape != (d, d):
            raise ValueError(f"covariance must be {d}x{d}, got {self.covariance.shape}")

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass
class CorrelationMatrix:
    entries: np.ndarray
    source_sample_size: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _require_rows(data: np.ndarray, minimum: int) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got shape {data.shape}")
    if data.shape[0] < minimum:
        raise ValueError(f"need at least {minimum} sample rows, got {data.shape[0]}")
    return data


def _check_symmetric(sigma: np.ndarray) -> None:
    norm = np.linalg.norm(sigma)
    if np.linalg.norm(sigma - sigma.T) > SYMMETRY_RTOL * max(norm, 1.0):
        raise ValueError("covariance matrix is not symmetric")


def fit_univariate(data: np.ndarray) -> UnivariateGaussianSet:
    """Column-wise ML fit: means and sqrt of (divide-by-m) variances."""
    data = _require_rows(data, 2)
    means = data.mean(axis=0)
    variances = np.square(data - means).mean(axis=0)
    return UnivariateGaussianSet(means=means, std_devs=np.sqrt(variances))


def sample_univariate(model: UnivariateGaussianSet, rng: np.random.Generator,
                      lower: np.ndarray, upper: np.ndarray,
                      size: int | None = None) -> np.ndarray:
    """Draw x = mu + zeta * sigma per coordinate, clipped into [lower, upper].

    Returns shape (dim,) when size is None, else (size, dim).
    """
    k = 1 if size is None else int(size)
    zeta = rng.standard_normal((k, model.dim))
    out = model.means + zeta * model.std_devs
    np.clip(out, lower, upper, out=out)
    return out[0] if size is None else out


def fit_multivariate(data: np.ndarray) -> MultivariateGaussian:
    """ML mean vector and covariance matrix (divisor m), factor left unset."""
    data = _require_rows(data, 2)
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / data.shape[0]
    cov = 0.5 * (cov + cov.T)
    return MultivariateGaussian(mean=mean, covariance=cov)


def cholesky_factor(model: MultivariateGaussian) -> MultivariateGaussian:
    """Attach a lower-triangular H with H @ H.T == covariance + lambda*I.

    lambda walks the jitter ladder (multiples of the mean diagonal) until the
    factorization both succeeds and reproduces the regularized matrix to
    FACTOR_RTOL relative Frobenius error.  A zero covariance factors to zero.
    """
    sigma = model.covariance
    _check_symmetric(sigma)
    norm = np.linalg.norm(sigma)
    if norm == 0.0:
        return replace(model, factor=np.zeros_like(sigma), jitter_applied=0.0)
    d = model.dim
    base = np.trace(sigma) / d
    eye = np.eye(d)
    for multiplier in JITTER_LADDER:
        lam = multiplier * base
        regularized = sigma + lam * eye
        try:
            factor = np.linalg.cholesky(regularized)
        except np.linalg.LinAlgError:
            continue
        if np.linalg.norm(factor @ factor.T - regularized) <= FACTOR_RTOL * norm:
            return replace(model, factor=factor, jitter_applied=lam)
    raise FactorizationError(
        f"covariance of dimension {d} not factorizable "
        f"even with jitter {JITTER_LADDER[-1]:.0e} * tr/d")


def sample_multivariate(model: MultivariateGaussian, rng: np.random.Generator,
                        lower: np.ndarray, upper: np.ndarray,
                        size: int | None = None) -> np.ndarray:
    """Draw x = mu + H @ zeta, clipped into [lower, upper]."""
    if model.factor is None:
        raise ValueError("model has no Cholesky factor; call cholesky_factor first")
    k = 1 if size is None else int(size)
    zeta = rng.standard_normal((k, model.dim))
    out = model.mean + zeta @ model.factor.T
    np.clip(out, lower, upper, out=out)
    return out[0] if size is None else out


def correlation_from_data(data: np.ndarray) -> CorrelationMatrix:
    """Pearson correlation matrix from ML covariances.

    Zero-variance coordinates get off-diagonal zeros and a unit diagonal, so
    fully converged variables count as uncorrelated.
    """
    data = _require_rows(data, 2)
    m, n = data.shape
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / m
    cov = 0.5 * (cov + cov.T)
    std = np.sqrt(np.diag(cov).copy())
    degenerate = std == 0.0
    denom = np.outer(std, std)
    denom[denom == 0.0] = 1.0
    entries = cov / denom
    entries[degenerate, :] = 0.0
    entries[:, degenerate] = 0.0
    np.clip(entries, -1.0, 1.0, out=entries)
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(entries=entries, source_sample_size=m)


def eeda_scale(model: MultivariateGaussian) -> MultivariateGaussian:
    """Raise the minimum covariance eigenvalue to the maximum one.

    The eigendecomposition is recomposed with every eigenvalue numerically
    tied to the minimum replaced by the maximum; negative eigenvalues (noise
    from near-singular fits) are clamped to a tiny positive value first.  Any
    cached factor is invalidated.  A zero matrix is returned unchanged with
    ``scale_warning`` set.
    """
    sigma = model.covariance
    _check_symmetric(sigma)
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    lam_max = eigenvalues[-1]
    if lam_max <= 0.0:
        return replace(model, scale_warning=True)
    eigenvalues = np.where(eigenvalues < 0.0, 1e-12 * lam_max, eigenvalues)
    lam_min = eigenvalues.min()
    eigenvalues[eigenvalues <= lam_min + 1e-9 * lam_max] = lam_max
    scaled = (eigenvectors * eigenvalues) @ eigenvectors.T
    scaled = 0.5 * (scaled + scaled.T)
    return MultivariateGaussian(mean=model.mean, covariance=scaled)
