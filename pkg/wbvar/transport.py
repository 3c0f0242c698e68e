"""
2-Wasserstein distances and barycenters.

In one dimension the barycenter of a location-scale ensemble is the law whose
quantile function is the weighted average of the members' quantile functions,
so it stays in the family with averaged location and scale. For Gaussian
measures on R^d the barycenter covariance is the positive definite root of

    S = sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2}

which is found by fixed-point iteration.
"""
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np

from .conf import engine_setting
from .distributions import LocationScale
from .exceptions import ConvergenceError, DimensionMismatchError, DomainError, NotSPDError, SimplexError

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12
SYMMETRY_TOL = 1e-12
EIGEN_RATIO_FLOOR = 1e-13


def as_simplex(weights, size=None, name='weights'):
    """Validates a weight vector as a point of the probability simplex."""
    arr = np.asarray(weights, dtype=float).reshape(-1)
    if arr.size == 0:
        raise SimplexError(f"{name} must not be empty")
    if size is not None and arr.size != size:
        raise DimensionMismatchError(f"{name} has {arr.size} entries, expected {size}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise SimplexError(f"{name} must be finite and nonnegative, got {arr.tolist()}")
    total = math.fsum(arr)
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise SimplexError(f"{name} must sum to 1, got {total!r}")
    arr.flags.writeable = False
    return arr


def _weighted_sum(weights, values):
    # fsum keeps the result independent of member order.
    return math.fsum(w * v for w, v in zip(weights, values))


@dataclass(frozen=True)
class WeightedEnsemble:
    members: tuple
    weights: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DomainError("an ensemble needs at least one member")
        if not all(isinstance(m, LocationScale) for m in members):
            raise DomainError("ensemble members must be LocationScale measures")
        kinds = {m.kind for m in members}
        if len(kinds) != 1:
            raise DomainError(f"ensemble members must share one profile, got {sorted(k.value for k in kinds)}")
        weights = tuple(float(w) for w in as_simplex(self.weights, size=len(members)))
        object.__setattr__(self, 'members', members)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def from_moments(cls, profile, locations, scales, weights=None):
        locations = np.asarray(locations, dtype=float).reshape(-1)
        scales = np.asarray(scales, dtype=float).reshape(-1)
        if locations.size != scales.size:
            raise DimensionMismatchError(f"{locations.size} locations for {scales.size} scales")
        if weights is None:
            weights = np.full(locations.size, 1.0 / locations.size)
        members = tuple(LocationScale(profile, float(m), float(s)) for m, s in zip(locations, scales))
        return cls(members, tuple(weights))

    @property
    def profile(self):
        return self.members[0].profile

    @property
    def size(self):
        return len(self.members)

    @property
    def mean_location(self):
        return _weighted_sum(self.weights, (m.location for m in self.members))

    @property
    def mean_scale(self):
        return _weighted_sum(self.weights, (m.scale for m in self.members))


def _check_grid_size(grid_size):
    grid_size = engine_setting('W2_GRID_SIZE', grid_size)
    if int(grid_size) != grid_size or grid_size < 2:
        raise DomainError(f"grid_size must be an integer >= 2, got {grid_size!r}")
    return int(grid_size)


def quantile_grid(grid_size):
    """Midpoints of a uniform partition of (0, 1)."""
    return (np.arange(grid_size) + 0.5) / grid_size


def w2_1d(a, b, grid_size=None):
    """
    2-Wasserstein distance on the real line as the L2 distance between
    quantile functions, integrated with the midpoint rule.
    """
    grid = quantile_grid(_check_grid_size(grid_size))
    diff = a.quantile_at(grid) - b.quantile_at(grid)
    return float(np.sqrt(np.mean(diff * diff)))


def w2_location_scale(a, b):
    """Closed-form 2-Wasserstein distance between members of one location-scale family."""
    if a.kind != b.kind:
        raise DomainError("closed form needs both measures in the same family")
    return math.sqrt((a.location - b.location) ** 2 + a.profile.variance * (a.scale - b.scale) ** 2)


def barycenter_1d(ensemble):
    return LocationScale(ensemble.profile, ensemble.mean_location, ensemble.mean_scale)


def barycenter_quantile(ensemble, u):
    quantiles = [member.quantile_at(u) for member in ensemble.members]
    if np.ndim(u) == 0:
        return _weighted_sum(ensemble.weights, quantiles)
    return np.tensordot(np.asarray(ensemble.weights), np.stack(quantiles), axes=1)


# --- Multivariate Gaussian measures ---

def _as_square(matrix, name='matrix'):
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotSPDError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.T)) > SYMMETRY_TOL * scale:
        raise NotSPDError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


def _spd_eigh(matrix, name='matrix'):
    sym = _as_square(matrix, name)
    eigenvalues, eigenvectors = np.linalg.eigh(sym)
    largest = eigenvalues[-1]
    if largest <= 0.0 or eigenvalues[0] <= EIGEN_RATIO_FLOOR * largest:
        raise NotSPDError(f"{name} is not positive definite (eigenvalues {eigenvalues.tolist()})")
    return eigenvalues, eigenvectors


def _from_eigen(eigenvalues, eigenvectors):
    out = (eigenvectors * eigenvalues) @ eigenvectors.T
    return 0.5 * (out + out.T)


def check_spd(matrix, name='matrix'):
    """Returns the symmetrized matrix or raises NotSPDError."""
    _spd_eigh(matrix, name)
    return _as_square(matrix, name)


def sqrtm_spd(matrix):
    eigenvalues, eigenvectors = _spd_eigh(matrix)
    return _from_eigen(np.sqrt(eigenvalues), eigenvectors)


def _sqrtm_pair(matrix):
    eigenvalues, eigenvectors = _spd_eigh(matrix)
    root = np.sqrt(eigenvalues)
    return _from_eigen(root, eigenvectors), _from_eigen(1.0 / root, eigenvectors)


@dataclass(frozen=True)
class GaussianMeasureMV:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        covariance = check_spd(self.covariance, 'covariance').copy()
        if covariance.shape[0] != mean.size:
            raise DimensionMismatchError(
                f"mean has dimension {mean.size} but covariance is {covariance.shape}"
            )
        mean.flags.writeable = False
        covariance.flags.writeable = False
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', covariance)

    @property
    def dim(self):
        return self.mean.size


@dataclass(frozen=True)
class FixedPointReport:
    solution: np.ndarray
    residual: float
    iterations: int


class FixedPointSolver(str, Enum):
    INTERPOLATION = 'interpolation'
    SUBSTITUTION = 'substitution'


def _averaged_root(root, covariances, weights):
    """sum_i w_i (root S_i root)^{1/2}"""
    total = np.zeros_like(root)
    for weight, cov in zip(weights, covariances):
        inner = root @ cov @ root
        total += weight * sqrtm_spd(0.5 * (inner + inner.T))
    return total


def fixed_point_residual(sigma, covariances, weights):
    """Frobenius norm of sigma - sum_i w_i (sigma^{1/2} S_i sigma^{1/2})^{1/2}."""
    root = sqrtm_spd(sigma)
    return float(np.linalg.norm(sigma - _averaged_root(root, covariances, weights), 'fro'))


def barycenter_gaussian_mv(measures, weights, tol=None, max_iter=None, solver=FixedPointSolver.INTERPOLATION):
    """
    Wasserstein barycenter of Gaussian measures on R^d.

    Starts from sum_i w_i S_i. The interpolation map
    S <- S^{-1/2} (sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2})^2 S^{-1/2}
    keeps every iterate positive definite; the substitution map
    S <- sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2} is kept for cross-checks.

    Returns the barycenter and a FixedPointReport. Raises ConvergenceError
    (with the report of the last iterate) when the residual is still above
    `tol` after `max_iter` updates.
    """
    tol = engine_setting('FIXED_POINT_TOL', tol)
    max_iter = engine_setting('FIXED_POINT_MAX_ITER', max_iter)
    solver = FixedPointSolver(solver)
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if max_iter < 0:
        raise DomainError(f"max_iter must be nonnegative, got {max_iter!r}")

    measures = list(measures)
    if not measures:
        raise DomainError("at least one Gaussian measure is required")
    dim = measures[0].dim
    if any(m.dim != dim for m in measures):
        raise DimensionMismatchError("all Gaussian measures must share one dimension")
    weights = as_simplex(weights, size=len(measures))

    mean = np.tensordot(weights, np.stack([m.mean for m in measures]), axes=1)
    covariances = [m.covariance for m in measures]
    sigma = np.tensordot(weights, np.stack(covariances), axes=1)

    iterations = 0
    while True:
        root, inv_root = _sqrtm_pair(sigma)
        averaged = _averaged_root(root, covariances, weights)
        residual = float(np.linalg.norm(sigma - averaged, 'fro'))
        if residual <= tol or iterations >= max_iter:
            break
        if solver is FixedPointSolver.INTERPOLATION:
            sigma = inv_root @ averaged @ averaged @ inv_root
        else:
            sigma = averaged
        sigma = 0.5 * (sigma + sigma.T)
        iterations += 1

    report = FixedPointReport(solution=sigma, residual=residual, iterations=iterations)
    if residual > tol:
        raise ConvergenceError(
            f"{solver.value} fixed point stopped at residual {residual:.3e} > {tol:.1e} "
            f"after {iterations} iterations",
            report=report,
        )
    logger.info(f"Gaussian barycenter ({solver.value}) converged: residual={residual:.3e}, iterations={iterations}")
    return GaussianMeasureMV(mean, sigma), report
