"""
Barycenter VaR / CVaR and the classical aggregators they are compared with.

Two sign conventions are supported and never mixed silently:

* ``quantile`` returns the alpha-quantile of the return law, m + s * G^{-1}(alpha),
  and the upper-tail mean m + s * E[Z | Z > G^{-1}(alpha)].
* ``loss`` reports a positive loss threshold for a small tail level alpha,
  -m - s * G^{-1}(alpha), and the expected loss beyond it,
  -m - s * E[Z | Z < G^{-1}(alpha)].

For the general location-scale family the CVaR display
m + (g(G^{-1}(alpha)) / s) / (1 - alpha) * s^2 * var(Z) reduces to
m + s * var(Z) * g(G^{-1}(alpha)) / (1 - alpha), which is what
`StandardProfile.tail_mean` evaluates.
"""
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np

from .distributions import GAUSSIAN
from .exceptions import DimensionMismatchError, DomainError
from .transport import WeightedEnsemble, as_simplex, barycenter_1d, check_spd

logger = logging.getLogger(__name__)


class Convention(str, Enum):
    QUANTILE = 'quantile'
    LOSS = 'loss'


@dataclass(frozen=True)
class RiskQuery:
    alpha: float
    convention: Convention = Convention.LOSS

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie strictly inside (0, 1), got {self.alpha!r}")
        object.__setattr__(self, 'convention', Convention(self.convention))


@dataclass(frozen=True)
class PortfolioSpec:
    asset_weights: tuple

    def __post_init__(self):
        weights = as_simplex(self.asset_weights, name='asset_weights')
        object.__setattr__(self, 'asset_weights', tuple(float(w) for w in weights))

    @classmethod
    def equal(cls, size):
        return cls(tuple([1.0 / size] * size))

    @property
    def size(self):
        return len(self.asset_weights)

    def as_array(self):
        return np.asarray(self.asset_weights)


def location_scale_var(location, scale, query, profile=GAUSSIAN):
    quantile = location + scale * profile.quantile(query.alpha)
    if query.convention is Convention.QUANTILE:
        return quantile
    return -quantile


def location_scale_cvar(location, scale, query, profile=GAUSSIAN):
    if query.convention is Convention.QUANTILE:
        return location + scale * profile.tail_mean(query.alpha)
    return -(location + scale * profile.lower_tail_mean(query.alpha))


def wb_var(ensemble, query):
    """Barycenter VaR: the VaR of the barycenter law of the ensemble."""
    bary = barycenter_1d(ensemble)
    return location_scale_var(bary.location, bary.scale, query, bary.profile)


def wb_cvar(ensemble, query):
    bary = barycenter_1d(ensemble)
    return location_scale_cvar(bary.location, bary.scale, query, bary.profile)


def portfolio_ensemble(locations, scales, portfolio, barycenter_weights=None, profile=GAUSSIAN):
    """
    Builds the ensemble whose barycenter stands for the portfolio.

    The portfolio weights double as barycenter weights unless
    `barycenter_weights` is given.
    """
    weights = portfolio.asset_weights if barycenter_weights is None else barycenter_weights
    return WeightedEnsemble.from_moments(profile, locations, scales, weights)


def varcov_var(means, cov, portfolio, query):
    """Variance-covariance VaR of the Gaussian portfolio return w'X."""
    means = np.asarray(means, dtype=float).reshape(-1)
    cov = check_spd(cov, 'cov')
    if means.size != cov.shape[0] or portfolio.size != means.size:
        raise DimensionMismatchError(
            f"means ({means.size}), cov {cov.shape} and weights ({portfolio.size}) disagree"
        )
    weights = portfolio.as_array()
    mu = float(weights @ means)
    sigma = math.sqrt(float(weights @ cov @ weights))
    return location_scale_var(mu, sigma, query, GAUSSIAN)


def standalone_var(location, scale, query, profile=GAUSSIAN):
    """VaR of a single asset, the input to simple summation."""
    if scale <= 0.0:
        raise DomainError(f"scale must be strictly positive, got {scale!r}")
    return location_scale_var(location, scale, query, profile)


def simple_sum_var(individual_vars):
    """Unweighted sum of per-asset loss-convention VaRs."""
    individual_vars = [float(v) for v in individual_vars]
    if not individual_vars:
        raise DomainError("simple summation needs at least one per-asset VaR")
    return math.fsum(individual_vars)


@dataclass(frozen=True)
class AggregatedLevels:
    alpha: float
    convention: Convention
    wb_var: float
    wb_cvar: float
    varcov_var: float | None
    simple_sum_var: float


def aggregate_levels(locations, scales, portfolio, query, cov=None, barycenter_weights=None, profile=GAUSSIAN):
    """
    Barycenter VaR/CVaR next to the variance-covariance and simple-summation
    aggregates for the same per-asset inputs. `varcov_var` is None without a
    covariance matrix.
    """
    ensemble = portfolio_ensemble(locations, scales, portfolio, barycenter_weights, profile)
    return AggregatedLevels(
        alpha=query.alpha,
        convention=query.convention,
        wb_var=wb_var(ensemble, query),
        wb_cvar=wb_cvar(ensemble, query),
        varcov_var=None if cov is None else varcov_var(locations, cov, portfolio, query),
        simple_sum_var=simple_sum_var(standalone_var(m, s, query, profile) for m, s in zip(locations, scales)),
    )
