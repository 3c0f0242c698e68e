"""
EWMA volatility filter behind the filtered barycenter model.

    sigma_t = sqrt((1 - zeta) * x_t^2 + zeta * sigma_{t-1}^2)

sigma_t is the estimate available after observing x_t.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging

import numpy as np

from .conf import engine_setting
from .exceptions import DomainError, InsufficientDataError

logger = logging.getLogger(__name__)


class EwmaInit(str, Enum):
    SAMPLE_SD_OF_WINDOW = 'sample_sd_of_window'
    FIRST_ABS_RETURN = 'first_abs_return'


@dataclass(frozen=True)
class EwmaConfig:
    zeta: float = field(default_factory=lambda: engine_setting('EWMA_ZETA'))
    init: EwmaInit = EwmaInit.SAMPLE_SD_OF_WINDOW

    def __post_init__(self):
        if not (0.0 < self.zeta < 1.0):
            raise DomainError(f"zeta must lie strictly inside (0, 1), got {self.zeta!r}")
        object.__setattr__(self, 'init', EwmaInit(self.init))


def initial_scale(returns, cfg, window=None):
    """
    Starting value sigma_0 per column: the sample SD of the first `window`
    returns, or the absolute first return.
    """
    returns = np.asarray(returns, dtype=float)
    if returns.shape[0] == 0:
        raise InsufficientDataError("cannot initialise EWMA from an empty series")
    if cfg.init is EwmaInit.FIRST_ABS_RETURN:
        return np.abs(returns[0])
    head = returns if window is None else returns[:window]
    if head.shape[0] < 2:
        raise InsufficientDataError("sample SD initialisation needs at least two returns")
    return head.std(axis=0, ddof=1)


def ewma_path(returns, cfg, sigma0):
    """
    Filtered scale path with the same shape as `returns`.

    Accepts a single series or a (T, N) matrix with one sigma0 per column.
    """
    returns = np.asarray(returns, dtype=float)
    if returns.shape[0] == 0:
        raise InsufficientDataError("EWMA needs a nonempty return sequence")
    sigma0 = np.asarray(sigma0, dtype=float)
    if not np.all(np.isfinite(sigma0)) or np.any(sigma0 <= 0.0):
        raise DomainError(f"sigma0 must be strictly positive, got {sigma0.tolist()}")

    zeta = cfg.zeta
    squared = returns * returns
    variance = np.empty_like(returns)
    prev = sigma0 * sigma0
    for t in range(returns.shape[0]):
        prev = (1.0 - zeta) * squared[t] + zeta * prev
        variance[t] = prev
    return np.sqrt(variance)
