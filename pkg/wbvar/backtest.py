"""
Rolling next-day VaR forecasts, exception counting and the Kupiec test.

For every test day t the model is fitted on the observations before t only,
a loss-convention VaR is forecast for each tail level, and an exception is
recorded when the realized portfolio loss -w'x_t is strictly greater than
that forecast.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

import numpy as np
from scipy import special

from .conf import engine_setting
from .exceptions import DimensionMismatchError, DomainError, InsufficientDataError, MisalignedDataError, NotSPDError
from .ingest import ReturnPanel
from .risk import (
    Convention,
    PortfolioSpec,
    RiskQuery,
    portfolio_ensemble,
    simple_sum_var,
    standalone_var,
    varcov_var,
    wb_cvar,
    wb_var,
)
from .transport import as_simplex, check_spd
from .volatility import EwmaConfig, ewma_path, initial_scale

logger = logging.getLogger(__name__)

# 95% quantile of the chi-square distribution with one degree of freedom.
CHI2_1_CRITICAL_95 = 3.841458820694124
KUPIEC_SIGNIFICANCE = 0.05
# Ridge added to a singular window covariance, relative to its largest eigenvalue.
COVARIANCE_RIDGE = 1e-10


class Model(str, Enum):
    WB_NORMAL = 'wb_normal'
    WB_NORMAL_STAR = 'wb_normal_star'
    VARCOV = 'varcov'
    SIMPLE_SUM = 'simple_sum'

    @property
    def is_barycentric(self):
        return self in (Model.WB_NORMAL, Model.WB_NORMAL_STAR)


class WindowMode(str, Enum):
    ROLLING = 'rolling'
    EXPANDING = 'expanding'


@dataclass(frozen=True)
class BacktestConfig:
    window: int = field(default_factory=lambda: engine_setting('DEFAULT_WINDOW'))
    alphas: tuple = field(default_factory=lambda: tuple(engine_setting('DEFAULT_ALPHAS')))
    model: Model = Model.WB_NORMAL
    ewma: EwmaConfig = field(default_factory=EwmaConfig)
    weights: PortfolioSpec | None = None
    barycenter_weights: tuple | None = None
    window_mode: WindowMode = WindowMode.ROLLING

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 2:
            raise DomainError(f"window must be an integer >= 2, got {self.window!r}")
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise DomainError("at least one alpha is required")
        for alpha in alphas:
            if not (0.0 < alpha < 1.0):
                raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
        if self.barycenter_weights is not None:
            object.__setattr__(self, 'barycenter_weights', tuple(as_simplex(self.barycenter_weights, name='barycenter_weights')))
        object.__setattr__(self, 'window', int(self.window))
        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'model', Model(self.model))
        object.__setattr__(self, 'window_mode', WindowMode(self.window_mode))


@dataclass(frozen=True)
class KupiecResult:
    m: int
    x: int
    h: float
    p: float
    lr: float
    p_value: float
    rejected: bool


@dataclass(frozen=True)
class AlphaRecord:
    alpha: float
    var_path: np.ndarray
    exceptions: int
    kupiec: KupiecResult
    cvar_path: np.ndarray | None = None

    @property
    def expected_exceptions(self):
        return self.kupiec.m * self.alpha

    @property
    def var_level_last(self):
        return float(self.var_path[-1])

    @property
    def var_level_mean(self):
        return float(np.mean(self.var_path))

    @property
    def cvar_level_last(self):
        return None if self.cvar_path is None else float(self.cvar_path[-1])

    @property
    def cvar_level_mean(self):
        return None if self.cvar_path is None else float(np.mean(self.cvar_path))


@dataclass(frozen=True)
class BacktestReport:
    model: Model
    config: BacktestConfig
    symbols: tuple
    weights: tuple
    records: tuple
    realized_loss: np.ndarray
    test_dates: tuple | None = None
    sample_size: int = 0

    @property
    def test_size(self):
        return int(self.realized_loss.size)

    def record(self, alpha):
        for record in self.records:
            if record.alpha == alpha:
                return record
        raise KeyError(alpha)


def chi2_1_sf(lr):
    """Upper tail of chi-square(1): P(Z^2 > lr) = erfc(sqrt(lr / 2))."""
    if not lr >= 0.0:
        raise DomainError(f"lr must be nonnegative, got {lr!r}")
    return float(special.erfc(math.sqrt(lr / 2.0)))


def kupiec_test(m, x, p):
    """
    Kupiec proportion-of-failures likelihood ratio for x exceptions in m days
    against the nominal exception probability p (0 * ln 0 taken as 0).
    """
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    if int(x) != x or not (0 <= x <= m):
        raise DomainError(f"x must be an integer in [0, m], got {x!r}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie strictly inside (0, 1), got {p!r}")
    m, x = int(m), int(x)
    h = x / m

    null_loglik = special.xlogy(m - x, 1.0 - p) + special.xlogy(x, p)
    alt_loglik = special.xlogy(m - x, 1.0 - h) + special.xlogy(x, h)
    lr = max(float(-2.0 * (null_loglik - alt_loglik)), 0.0)
    p_value = chi2_1_sf(lr)
    return KupiecResult(m=m, x=x, h=h, p=p, lr=lr, p_value=p_value, rejected=p_value < KUPIEC_SIGNIFICANCE)


def _as_matrix(returns):
    if isinstance(returns, ReturnPanel):
        return returns.values, returns.symbols, returns.dates
    values = np.asarray(returns, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise MisalignedDataError(f"returns must be a (days, assets) matrix, got shape {values.shape}")
    return values, tuple(f'asset_{i + 1}' for i in range(values.shape[1])), None


class _WindowFitter:
    """Per-day model inputs: locations, scales and (for varcov) covariance."""

    def __init__(self, values, cfg):
        self.values = values
        self.cfg = cfg
        self.floor = engine_setting('SCALE_FLOOR')
        self.floored_days = 0
        self.regularized_days = 0
        self.filtered = None
        if cfg.model is Model.WB_NORMAL_STAR:
            sigma0 = initial_scale(values, cfg.ewma, window=cfg.window)
            sigma0 = np.maximum(sigma0, self.floor)
            self.filtered = ewma_path(values, cfg.ewma, sigma0)

    def window(self, t):
        start = t - self.cfg.window if self.cfg.window_mode is WindowMode.ROLLING else 0
        return self.values[start:t]

    def locations_and_scales(self, t):
        block = self.window(t)
        locations = block.mean(axis=0)
        if self.filtered is not None:
            # Filtered scale at the last in-window day.
            scales = self.filtered[t - 1]
        else:
            scales = block.std(axis=0, ddof=1)
        if np.any(scales < self.floor):
            self.floored_days += 1
            scales = np.maximum(scales, self.floor)
        return locations, scales

    def covariance(self, t):
        cov, regularized = regularized_covariance(np.cov(self.window(t), rowvar=False, ddof=1), self.floor)
        self.regularized_days += regularized
        return cov


def regularized_covariance(cov, floor=None):
    """
    Returns (cov, False) when `cov` passes the SPD check, otherwise cov plus a
    ridge of COVARIANCE_RIDGE times its largest eigenvalue (at least floor²)
    and True.
    """
    floor = engine_setting('SCALE_FLOOR', floor)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    try:
        return check_spd(cov), False
    except NotSPDError:
        largest = float(np.linalg.eigvalsh(cov)[-1])
        ridge = max(floor ** 2, COVARIANCE_RIDGE * largest)
        return cov + ridge * np.eye(cov.shape[0]), True


def rolling_backtest(returns, cfg, dates=None):
    """
    Next-day VaR backtest of `cfg.model` over every day after the first
    `cfg.window` observations.

    `returns` is a ReturnPanel or a (days, assets) matrix of log-returns.
    """
    values, symbols, panel_dates = _as_matrix(returns)
    dates = panel_dates if dates is None else tuple(dates)
    if not np.all(np.isfinite(values)):
        raise MisalignedDataError("returns contain missing or non-finite values")
    total, assets = values.shape
    if dates is not None and len(dates) != total:
        raise MisalignedDataError(f"{len(dates)} dates for {total} return rows")
    if total <= cfg.window:
        raise InsufficientDataError(f"{total} observations do not exceed the window of {cfg.window}")

    portfolio = cfg.weights or PortfolioSpec.equal(assets)
    if portfolio.size != assets:
        raise DimensionMismatchError(f"{portfolio.size} portfolio weights for {assets} assets")
    if cfg.barycenter_weights is not None and len(cfg.barycenter_weights) != assets:
        raise DimensionMismatchError(f"{len(cfg.barycenter_weights)} barycenter weights for {assets} assets")

    queries = [RiskQuery(alpha, Convention.LOSS) for alpha in cfg.alphas]
    test_days = range(cfg.window, total)
    n_test = len(test_days)
    var_paths = np.empty((len(queries), n_test))
    cvar_paths = np.empty((len(queries), n_test)) if cfg.model.is_barycentric else None
    realized_loss = -(values[cfg.window:] @ portfolio.as_array())

    logger.info(
        f"Backtesting {cfg.model.value} ({cfg.window_mode.value} window {cfg.window}) "
        f"on {assets} assets, {n_test} test days"
    )
    fitter = _WindowFitter(values, cfg)
    for i, t in enumerate(test_days):
        if cfg.model is Model.VARCOV:
            means = fitter.window(t).mean(axis=0)
            cov = fitter.covariance(t)
            for k, query in enumerate(queries):
                var_paths[k, i] = varcov_var(means, cov, portfolio, query)
            continue

        locations, scales = fitter.locations_and_scales(t)
        if cfg.model is Model.SIMPLE_SUM:
            for k, query in enumerate(queries):
                var_paths[k, i] = simple_sum_var(standalone_var(m, s, query) for m, s in zip(locations, scales))
        else:
            ensemble = portfolio_ensemble(locations, scales, portfolio, cfg.barycenter_weights)
            for k, query in enumerate(queries):
                var_paths[k, i] = wb_var(ensemble, query)
                cvar_paths[k, i] = wb_cvar(ensemble, query)

    if fitter.floored_days:
        logger.warning(f"Scale floor {fitter.floor:g} applied on {fitter.floored_days} test days")
    if fitter.regularized_days:
        logger.warning(f"Covariance regularised on {fitter.regularized_days} test days")

    records = []
    for k, alpha in enumerate(cfg.alphas):
        path = var_paths[k]
        path.flags.writeable = False
        exceptions = count_exceptions(realized_loss, path)
        kupiec = kupiec_test(n_test, exceptions, alpha)
        cvar_path = None
        if cvar_paths is not None:
            cvar_path = cvar_paths[k]
            cvar_path.flags.writeable = False
        records.append(AlphaRecord(alpha=alpha, var_path=path, exceptions=exceptions, kupiec=kupiec, cvar_path=cvar_path))
        logger.info(
            f"alpha={alpha}: {exceptions} exceptions (expected {n_test * alpha:.1f}), "
            f"p-value {kupiec.p_value:.4g}, {'rejected' if kupiec.rejected else 'not rejected'}"
        )

    realized_loss.flags.writeable = False
    return BacktestReport(
        model=cfg.model,
        config=cfg,
        symbols=symbols,
        weights=portfolio.asset_weights,
        records=tuple(records),
        realized_loss=realized_loss,
        test_dates=None if dates is None else dates[cfg.window:],
        sample_size=cfg.window,
    )


def count_exceptions(realized_loss, var_path):
    """Exceptions are losses strictly above the forecast; ties are not exceptions."""
    return int(np.count_nonzero(np.asarray(realized_loss) > np.asarray(var_path)))
