"""
Orchestration behind the management commands: resolve options, load data,
run the library, write report files and (optionally) archive the run.
"""
from collections import OrderedDict
from pathlib import Path
import json
import logging

import numpy as np
import pandas as pd
from rest_framework.renderers import JSONRenderer

from . import ingest
from .backtest import BacktestConfig, regularized_covariance, rolling_backtest
from .conf import engine_setting
from .distributions import GAUSSIAN
from .exceptions import ConfigError, DataError, InsufficientDataError
from .models import RiskRun
from .risk import Convention, PortfolioSpec, RiskQuery, aggregate_levels
from .serializers import (
    AggregatedLevelsSerializer,
    BacktestReportSerializer,
    DescriptiveStatsSerializer,
    FixedPointReportSerializer,
    GaussianMeasureSerializer,
    LocationScaleSerializer,
    significant,
)
from .transport import GaussianMeasureMV, WeightedEnsemble, barycenter_1d, barycenter_gaussian_mv
from .volatility import EwmaConfig, ewma_path, initial_scale

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = 'wbvar_output'


def resolve_config(serializer_class, options):
    """Validates command options; returns (validated data, config echo)."""
    serializer = serializer_class(data=options)
    if not serializer.is_valid():
        raise ConfigError(f"invalid options: {json.dumps(serializer.errors, sort_keys=True)}")
    return serializer.validated_data, dict(serializer.data)


# --- Output files ---

def render_json(payload):
    return JSONRenderer().render(payload, renderer_context={'indent': 2}) + b'\n'


def write_table(path, config_echo, key, rows, fmt):
    """
    Writes `rows` as JSON ({"config": ..., key: rows}) or as CSV preceded by
    a `# config=` comment line.
    """
    path = Path(path).with_suffix(f'.{fmt}')
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'json':
        path.write_bytes(render_json(OrderedDict([('config', config_echo), (key, rows)])))
    else:
        digits = engine_setting('SIGNIFICANT_DIGITS')
        header = '# config=' + json.dumps(config_echo, separators=(',', ':')) + '\n'
        body = pd.DataFrame(rows).to_csv(index=False, float_format=f'%.{digits}g', lineterminator='\n')
        path.write_text(header + body)
    logger.info(f"Wrote {key} to {path}")
    return path


def out_dir_for(config):
    return Path(config.get('out_dir') or DEFAULT_OUT_DIR)


def archive_run(command, config, report, out_dir):
    run = RiskRun.objects.create(command=command, config=config, report=report, out_dir=str(out_dir or ''))
    logger.info(f"Archived {command} run as #{run.pk}")
    return run


# --- Commands ---

def load_inputs(config):
    if not config['inputs']:
        raise ConfigError("at least one --input SYMBOL=PATH is required")
    return ingest.load_panel(config['inputs'])


def run_stats(config, echo):
    panel = load_inputs(config)
    records = []
    for symbol in panel.symbols:
        series = panel.column(symbol)
        if config['split']:
            sample, test = ingest.split_periods(series, config['split'])
            periods = (('sample', sample), ('test', test))
        else:
            periods = (('full', series),)
        for name, part in periods:
            stats = ingest.describe(part, trading_days=config['trading_days'], period=name)
            records.append(DescriptiveStatsSerializer(stats).data)
    path = write_table(out_dir_for(config) / 'stats', echo, 'stats', records, config['format'])
    return records, path


def backtest_config(config, assets):
    weights = config['weights']
    return BacktestConfig(
        window=engine_setting('DEFAULT_WINDOW', config['window']),
        alphas=tuple(config['alphas']),
        model=config['model'],
        ewma=EwmaConfig(zeta=config['zeta'], init=config['ewma_init']),
        weights=PortfolioSpec(tuple(weights)) if weights else PortfolioSpec.equal(assets),
        barycenter_weights=config['barycenter_weights'],
        window_mode=config['window_mode'],
    )


def daily_rows(report):
    """Per-day realized loss and forecasts, the data behind a VaR chart."""
    rows = []
    for i in range(report.test_size):
        row = OrderedDict()
        row['date'] = report.test_dates[i].isoformat() if report.test_dates else i + report.sample_size
        row['realized_loss'] = significant(report.realized_loss[i])
        for record in report.records:
            row[f'var_{record.alpha:g}'] = significant(record.var_path[i])
        for record in report.records:
            if record.cvar_path is not None:
                row[f'cvar_{record.alpha:g}'] = significant(record.cvar_path[i])
        rows.append(row)
    return rows


def run_backtest(config, echo):
    panel = load_inputs(config)
    cfg = backtest_config(config, len(panel.symbols))
    report = rolling_backtest(panel, cfg)
    data = BacktestReportSerializer(report).data
    out_dir = out_dir_for(config)
    stem = f'backtest_{cfg.model.value}'
    if config['format'] == 'json':
        path = write_table(out_dir / stem, echo, 'report', data, 'json')
    else:
        path = write_table(out_dir / stem, echo, 'records', data['records'], 'csv')
    daily_path = write_table(out_dir / f'{stem}_daily', echo, 'days', daily_rows(report), config['format'])
    return report, data, (path, daily_path)


def _fit_block(panel, config, filtered):
    window = config['window']
    block = panel.values if window is None else panel.values[-window:]
    if block.shape[0] < 2:
        raise InsufficientDataError(f"need at least two observations to fit, got {block.shape[0]}")
    if window is not None and panel.values.shape[0] < window:
        raise InsufficientDataError(f"{panel.values.shape[0]} observations are fewer than the window of {window}")
    locations = block.mean(axis=0)
    floor = engine_setting('SCALE_FLOOR')
    if filtered:
        ewma = EwmaConfig(zeta=config['zeta'], init=config['ewma_init'])
        scales = ewma_path(block, ewma, np.maximum(initial_scale(block, ewma), floor))[-1]
    else:
        scales = block.std(axis=0, ddof=1)
    if np.any(scales < floor):
        logger.warning(f"Scale floor {floor:g} applied to {int(np.sum(scales < floor))} assets")
        scales = np.maximum(scales, floor)
    cov, regularized = regularized_covariance(np.cov(block, rowvar=False, ddof=1), floor)
    if regularized:
        logger.warning("Covariance of the fitted block is singular and was regularised")
    return locations, scales, cov


def _explicit_moments(means, sds, correlation):
    locations = np.asarray(means, dtype=float)
    scales = np.asarray(sds, dtype=float)
    if locations.size != scales.size:
        raise ConfigError(f"{locations.size} means for {scales.size} standard deviations")
    cov = None
    if correlation is not None:
        size = locations.size
        corr = np.asarray(correlation, dtype=float)
        if corr.size != size * size:
            raise ConfigError(f"correlation needs {size * size} entries, got {corr.size}")
        cov = np.outer(scales, scales) * corr.reshape(size, size)
    return locations, scales, cov


def run_var(config, echo):
    """Levels from --means/--sds when given, otherwise fitted to the input files."""
    if config.get('means') is not None:
        locations, scales, cov = _explicit_moments(config['means'], config['sds'], config.get('correlation'))
    else:
        locations, scales, cov = _fit_block(load_inputs(config), config, config.get('filtered', False))

    weights = config['weights']
    if weights is not None and len(weights) != locations.size:
        raise ConfigError(f"{len(weights)} weights for {locations.size} assets")
    portfolio = PortfolioSpec(tuple(weights)) if weights else PortfolioSpec.equal(locations.size)
    convention = Convention(config['convention'])
    records = []
    for alpha in config['alphas']:
        levels = aggregate_levels(
            locations, scales, portfolio, RiskQuery(alpha, convention),
            cov=cov, barycenter_weights=config['barycenter_weights'],
        )
        records.append(AggregatedLevelsSerializer(levels).data)
    path = write_table(out_dir_for(config) / 'var', echo, 'levels', records, config['format'])
    return records, path


def load_matrix(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"covariance file not found: {path}")
    try:
        return np.loadtxt(path, delimiter=',', ndmin=2)
    except ValueError as e:
        raise DataError(f"{path}: cannot parse matrix: {e}") from e


def run_barycenter(config):
    """Returns the barycenter payload; ConvergenceError propagates with its report."""
    weights = config['weights']
    if config.get('means') is not None:
        size = len(config['means'])
        weights = weights if weights is not None else [1.0 / size] * size
        ensemble = WeightedEnsemble.from_moments(GAUSSIAN, config['means'], config['sds'], weights)
        bary = barycenter_1d(ensemble)
        return OrderedDict([
            ('kind', 'univariate'),
            ('weights', [significant(w) for w in ensemble.weights]),
            ('barycenter', LocationScaleSerializer(bary).data),
        ])

    covariances = [load_matrix(path) for path in config['covariances']]
    size = len(covariances)
    vectors = config['mean_vectors'] or [np.zeros(c.shape[0]) for c in covariances]
    measures = [GaussianMeasureMV(mean, cov) for mean, cov in zip(vectors, covariances)]
    weights = weights if weights is not None else [1.0 / size] * size
    measure, report = barycenter_gaussian_mv(
        measures, weights, tol=config['tol'], max_iter=config['max_iter'], solver=config['solver'],
    )
    return OrderedDict([
        ('kind', 'multivariate'),
        ('solver', config['solver']),
        ('weights', [significant(w) for w in weights]),
        ('barycenter', GaussianMeasureSerializer(measure).data),
        ('fixed_point', FixedPointReportSerializer(report).data),
    ])


def describe_barycenter(payload):
    """Human-readable summary printed by the barycenter command."""
    bary = payload['barycenter']
    if payload['kind'] == 'univariate':
        return f"Barycenter ({bary['location']:.10g}, {bary['scale']:.10g}) [{bary['profile']}]"
    fixed_point = payload['fixed_point']
    return (
        f"Barycenter mean {bary['mean']}\n"
        f"Barycenter covariance {bary['covariance']}\n"
        f"Fixed point ({payload['solver']}): residual {fixed_point['residual']:.3e}, "
        f"{fixed_point['iterations']} iterations"
    )


def write_barycenter(payload, echo, out_dir):
    path = Path(out_dir) / 'barycenter.json'
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(render_json(OrderedDict([('config', echo), ('result', payload)])))
    logger.info(f"Wrote barycenter to {path}")
    return path
