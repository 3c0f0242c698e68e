"""
Price loading, log-returns, descriptive statistics and sample/test splits.

Input files are CSV with a `date,close` header, ISO dates and a decimal point.
One file per symbol; several symbols are inner-joined on date before returns
are computed.
"""
from dataclasses import dataclass
from pathlib import Path
import datetime
import logging
import math

import numpy as np
import pandas as pd
from scipy import stats

from .conf import engine_setting
from .exceptions import (
    DataError,
    DomainError,
    DuplicateDateError,
    InsufficientDataError,
    MisalignedDataError,
    NonPositivePriceError,
    ParseError,
)

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('date', 'close')
# Data rows start on line 2, after the header.
FIRST_DATA_LINE = 2


def _readonly(values):
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


def _check_increasing(dates, symbol):
    for previous, current in zip(dates, dates[1:]):
        if current <= previous:
            raise DataError(f"{symbol}: dates must be strictly increasing ({previous} then {current})")


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    dates: tuple
    closes: np.ndarray

    def __post_init__(self):
        dates = tuple(self.dates)
        closes = _readonly(self.closes).reshape(-1)
        if len(dates) != closes.size:
            raise DataError(f"{self.symbol}: {len(dates)} dates for {closes.size} closes")
        _check_increasing(dates, self.symbol)
        if not np.all(closes > 0.0):
            raise NonPositivePriceError(f"{self.symbol}: closes must be strictly positive")
        object.__setattr__(self, 'dates', dates)
        object.__setattr__(self, 'closes', closes)

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    symbol: str
    dates: tuple
    values: np.ndarray

    def __post_init__(self):
        dates = tuple(self.dates)
        values = _readonly(self.values).reshape(-1)
        if len(dates) != values.size:
            raise DataError(f"{self.symbol}: {len(dates)} dates for {values.size} returns")
        _check_increasing(dates, self.symbol)
        object.__setattr__(self, 'dates', dates)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnPanel:
    """Date-aligned returns of several symbols, one column per symbol."""
    symbols: tuple
    dates: tuple
    values: np.ndarray

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 2 or values.shape[1] != len(self.symbols):
            raise MisalignedDataError(f"expected a (days, {len(self.symbols)}) matrix, got shape {values.shape}")
        if values.shape[0] != len(self.dates):
            raise MisalignedDataError(f"{len(self.dates)} dates for {values.shape[0]} rows")
        object.__setattr__(self, 'symbols', tuple(self.symbols))
        object.__setattr__(self, 'dates', tuple(self.dates))
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_series(cls, series):
        series = list(series)
        if not series:
            raise DataError("no return series given")
        dates = series[0].dates
        for other in series[1:]:
            if other.dates != dates:
                raise MisalignedDataError(f"{other.symbol} is not date-aligned with {series[0].symbol}")
        return cls(
            symbols=tuple(s.symbol for s in series),
            dates=dates,
            values=np.column_stack([s.values for s in series]),
        )

    def column(self, symbol):
        index = self.symbols.index(symbol)
        return ReturnSeries(symbol, self.dates, self.values[:, index])

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class DescriptiveStats:
    symbol: str
    period: str
    count: int
    mean: float
    annualized_mean: float
    sd: float
    min: float
    median: float
    max: float
    excess_kurtosis: float | None
    skewness: float | None
    start_date: datetime.date
    end_date: datetime.date


def load_prices(path, symbol=None, format='csv'):
    """
    Reads one `date,close` CSV into a validated, date-sorted PriceSeries.

    Errors name the offending file line (the header is line 1).
    """
    if format != 'csv':
        raise DataError(f"unsupported input format: {format!r}")
    path = Path(path)
    symbol = symbol or path.stem
    if not path.is_file():
        raise DataError(f"input file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True, skip_blank_lines=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: cannot parse CSV: {e}", row=None) from e

    frame.columns = frame.columns.str.lower().str.strip()
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"{path}: header must contain {', '.join(REQUIRED_COLUMNS)} (missing {missing})", row=1)

    # Row positions stay equal to file lines; only trailing blank lines are dropped.
    blank = frame[list(REQUIRED_COLUMNS)].isna().all(axis=1).to_numpy()
    filled = np.flatnonzero(~blank)
    frame = frame.iloc[:int(filled[-1]) + 1 if filled.size else 0]

    dates = pd.to_datetime(frame['date'].str.strip(), format='%Y-%m-%d', errors='coerce')
    closes = pd.to_numeric(frame['close'].str.strip(), errors='coerce')
    for position in range(len(frame)):
        line = position + FIRST_DATA_LINE
        if blank[position]:
            raise ParseError(f"{path}: line {line}: blank line", row=line)
        if pd.isna(dates.iloc[position]):
            raise ParseError(f"{path}: line {line}: invalid date {frame['date'].iloc[position]!r}", row=line)
        close = closes.iloc[position]
        if pd.isna(close) or not math.isfinite(close):
            raise ParseError(f"{path}: line {line}: invalid close {frame['close'].iloc[position]!r}", row=line)
        if close <= 0.0:
            raise NonPositivePriceError(f"{path}: line {line}: close must be positive, got {close}", row=line)

    duplicated = dates.duplicated(keep='first')
    if duplicated.any():
        position = int(np.flatnonzero(duplicated.to_numpy())[0])
        line = position + FIRST_DATA_LINE
        raise DuplicateDateError(f"{path}: line {line}: duplicate date {dates.iloc[position].date()}", row=line)

    table = pd.DataFrame({'date': dates.dt.date, 'close': closes}).sort_values('date', kind='mergesort')
    logger.info(f"Loaded {len(table)} prices for {symbol} from {path}")
    return PriceSeries(symbol=symbol, dates=tuple(table['date']), closes=table['close'].to_numpy())


def align_prices(series):
    """
    Inner-joins several price series on date. Dates missing from any series
    are dropped with a warning.
    """
    series = list(series)
    if not series:
        raise DataError("no price series given")
    frames = [pd.Series(s.closes, index=pd.Index(s.dates, name='date'), name=s.symbol) for s in series]
    joined = pd.concat(frames, axis=1, join='inner').sort_index()
    for s in series:
        dropped = len(s) - len(joined)
        if dropped:
            logger.warning(f"Dropped {dropped} unmatched dates from {s.symbol} during alignment")
    dates = tuple(joined.index)
    return [PriceSeries(s.symbol, dates, joined[s.symbol].to_numpy()) for s in series]


def log_returns(prices):
    if len(prices) < 2:
        raise InsufficientDataError(f"{prices.symbol}: need at least two prices for a return")
    closes = prices.closes
    return ReturnSeries(prices.symbol, prices.dates[1:], np.log(closes[1:] / closes[:-1]))


def load_panel(inputs):
    """
    Loads {symbol: path} into a date-aligned ReturnPanel, preserving the
    order of `inputs`.
    """
    prices = [load_prices(path, symbol=symbol) for symbol, path in inputs.items()]
    aligned = align_prices(prices) if len(prices) > 1 else prices
    return ReturnPanel.from_series(log_returns(p) for p in aligned)


def describe(returns, trading_days=None, period='full'):
    trading_days = engine_setting('TRADING_DAYS', trading_days)
    values = returns.values
    if values.size < 2:
        raise InsufficientDataError(f"{returns.symbol}: need at least two returns to describe")

    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1))
    if np.ptp(values) == 0.0:
        logger.warning(f"{returns.symbol} ({period}): constant series, skewness and kurtosis are undefined")
        skewness = kurtosis = None
    else:
        skewness = float(stats.skew(values, bias=True))
        kurtosis = float(stats.kurtosis(values, fisher=True, bias=True))

    return DescriptiveStats(
        symbol=returns.symbol,
        period=period,
        count=int(values.size),
        mean=mean,
        annualized_mean=math.expm1(mean * trading_days),
        sd=sd,
        min=float(np.min(values)),
        median=float(np.median(values)),
        max=float(np.max(values)),
        excess_kurtosis=kurtosis,
        skewness=skewness,
        start_date=returns.dates[0],
        end_date=returns.dates[-1],
    )


def split_periods(returns, window):
    """First `window` observations as the sample period, the rest as the test period."""
    if int(window) != window or window < 1:
        raise DomainError(f"window must be a positive integer, got {window!r}")
    window = int(window)
    if len(returns) <= window:
        raise InsufficientDataError(
            f"{returns.symbol}: {len(returns)} observations do not exceed the window of {window}"
        )
    sample = ReturnSeries(returns.symbol, returns.dates[:window], returns.values[:window])
    test = ReturnSeries(returns.symbol, returns.dates[window:], returns.values[window:])
    logger.info(f"{returns.symbol}: split into {len(sample)} sample and {len(test)} test observations")
    return sample, test
