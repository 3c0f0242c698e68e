# wbvar/tests/helpers.py
"""Price files and return panels shared by the test modules."""
from pathlib import Path

import numpy as np
import pandas as pd


def business_dates(count, start='2010-01-04'):
    return [d.date() for d in pd.bdate_range(start=start, periods=count)]


def write_prices(path, closes, start='2010-01-04', dates=None):
    """Writes a `date,close` CSV and returns its path."""
    path = Path(path)
    dates = dates if dates is not None else business_dates(len(closes), start)
    lines = ['date,close'] + [f'{d.isoformat()},{float(c)!r}' for d, c in zip(dates, closes)]
    path.write_text('\n'.join(lines) + '\n')
    return path


def closes_from_returns(returns, first=100.0):
    return list(first * np.exp(np.concatenate([[0.0], np.cumsum(returns)])))


def gaussian_returns(days, assets=1, sd=0.01, seed=20240101):
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, sd, size=(days, assets))
