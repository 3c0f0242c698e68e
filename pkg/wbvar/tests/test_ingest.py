import datetime
import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

import numpy as np

from wbvar.exceptions import (
    DataError,
    DomainError,
    DuplicateDateError,
    InsufficientDataError,
    MisalignedDataError,
    NonPositivePriceError,
    ParseError,
)
from wbvar.ingest import (
    PriceSeries,
    ReturnPanel,
    ReturnSeries,
    align_prices,
    describe,
    load_panel,
    load_prices,
    log_returns,
    split_periods,
)

from .helpers import business_dates, write_prices


def returns_of(values, symbol='X'):
    return ReturnSeries(symbol, business_dates(len(values)), values)


class LoadPricesTests(SimpleTestCase):
    """Reading and validating `date,close` files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = self.root / name
        path.write_text(text)
        return path

    def test_two_row_file(self):
        print("\n--- UNIT TEST: Loading a price file ---")
        path = self.write('nasdaq.csv', 'date,close\n2020-01-02,100\n2020-01-03,101\n')
        series = load_prices(path)
        self.assertEqual(series.symbol, 'nasdaq')
        self.assertEqual(series.dates, (datetime.date(2020, 1, 2), datetime.date(2020, 1, 3)))
        np.testing.assert_array_equal(series.closes, [100.0, 101.0])
        print(f"LOG: Loaded {len(series)} prices.")

    def test_unsorted_rows_are_sorted(self):
        ordered = load_prices(self.write('a.csv', 'date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,99\n'))
        shuffled = load_prices(self.write('a2.csv', 'Date , Close\n2020-01-06,99\n2020-01-02,100\n2020-01-03,101\n'), symbol='a')
        self.assertEqual(ordered.dates, shuffled.dates)
        np.testing.assert_array_equal(ordered.closes, shuffled.closes)

    def test_errors_name_the_file_line(self):
        cases = (
            ('date,close\n2020-01-02,100\n2020-01-03,0\n', NonPositivePriceError, 3),
            ('date,close\n2020-01-02,100\n2020-01-03,-5\n', NonPositivePriceError, 3),
            ('date,close\n2020-01-02,abc\n', ParseError, 2),
            ('date,close\n2020-01-02,100\n01/03/2020,100\n', ParseError, 3),
            ('date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-02,102\n', DuplicateDateError, 4),
            ('day,price\n2020-01-02,100\n', ParseError, 1),
            ('date,close\n2020-01-02,100\n\n2020-01-03,0\n', ParseError, 3),
        )
        for i, (text, error, line) in enumerate(cases):
            with self.assertRaises(error, msg=text) as ctx:
                load_prices(self.write(f'bad{i}.csv', text))
            self.assertEqual(ctx.exception.row, line)
            self.assertIn(f'bad{i}.csv', str(ctx.exception))

    def test_blank_lines_keep_line_numbers(self):
        with self.assertRaises(NonPositivePriceError) as ctx:
            load_prices(self.write('gap.csv', 'date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,0\n'))
        self.assertEqual(ctx.exception.row, 4)
        with self.assertRaises(ParseError) as ctx:
            load_prices(self.write('gap2.csv', 'date,close\n2020-01-02,100\n\n2020-01-03,0\n'))
        self.assertEqual(ctx.exception.row, 3)
        self.assertIn('line 3', str(ctx.exception))

    def test_trailing_blank_lines_are_ignored(self):
        series = load_prices(self.write('tail.csv', 'date,close\n2020-01-02,100\n2020-01-03,101\n\n\n'))
        self.assertEqual(len(series), 2)

    def test_missing_file_names_the_path(self):
        with self.assertRaises(DataError) as ctx:
            load_prices(self.root / 'absent.csv')
        self.assertIn('absent.csv', str(ctx.exception))

    def test_unsupported_format(self):
        with self.assertRaises(DataError):
            load_prices(self.write('a.csv', 'date,close\n2020-01-02,100\n'), format='parquet')

    def test_panel_aligns_on_common_dates(self):
        dates = business_dates(6)
        write_prices(self.root / 'a.csv', [100, 101, 102, 103, 104, 105], dates=dates)
        write_prices(self.root / 'b.csv', [50, 51, 52, 53, 54], dates=dates[:2] + dates[3:])
        with self.assertLogs('wbvar.ingest', level='WARNING'):
            panel = load_panel({'A': self.root / 'a.csv', 'B': self.root / 'b.csv'})
        self.assertEqual(panel.symbols, ('A', 'B'))
        self.assertEqual(len(panel), 4)
        self.assertNotIn(dates[2], panel.dates)
        self.assertAlmostEqual(panel.values[1, 0], math.log(103 / 101))


class ReturnTests(SimpleTestCase):

    def test_log_returns(self):
        dates = business_dates(2)
        self.assertEqual(log_returns(PriceSeries('X', dates, [100, 100])).values.tolist(), [0.0])
        self.assertAlmostEqual(log_returns(PriceSeries('X', dates, [100, 110])).values[0], 0.0953102, places=7)
        many = log_returns(PriceSeries('X', business_dates(2972), np.linspace(100, 200, 2972)))
        self.assertEqual(len(many), 2971)
        self.assertEqual(many.dates[0], business_dates(2)[1])
        with self.assertRaises(InsufficientDataError):
            log_returns(PriceSeries('X', business_dates(1), [100]))

    def test_cumulative_returns_rebuild_the_closes(self):
        rng = np.random.default_rng(17)
        closes = 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.02, size=500)))
        returns = log_returns(PriceSeries('X', business_dates(500), closes))
        rebuilt = closes[0] * np.exp(np.concatenate([[0.0], np.cumsum(returns.values)]))
        np.testing.assert_allclose(rebuilt, closes, rtol=1e-10)

    def test_series_validation(self):
        with self.assertRaises(NonPositivePriceError):
            PriceSeries('X', business_dates(2), [100, 0])
        with self.assertRaises(DataError):
            PriceSeries('X', list(reversed(business_dates(2))), [100, 101])
        with self.assertRaises(MisalignedDataError):
            ReturnPanel.from_series([returns_of([0.1, 0.2], 'A'), ReturnSeries('B', business_dates(2, '2011-01-03'), [0.1, 0.2])])

    def test_align_single_series_is_unchanged(self):
        series = PriceSeries('X', business_dates(3), [1.0, 2.0, 3.0])
        aligned = align_prices([series])[0]
        self.assertEqual(aligned.dates, series.dates)
        np.testing.assert_array_equal(aligned.closes, series.closes)


class DescribeTests(SimpleTestCase):
    """Descriptive statistics of a return series."""

    def test_constant_series_has_undefined_shape_moments(self):
        print("\n--- UNIT TEST: Describing a constant series ---")
        with self.assertLogs('wbvar.ingest', level='WARNING'):
            stats = describe(returns_of([0.001] * 10))
        self.assertEqual(stats.sd, 0.0)
        self.assertIsNone(stats.skewness)
        self.assertIsNone(stats.excess_kurtosis)

    def test_symmetric_series(self):
        stats = describe(returns_of([0.02, -0.02] * 5))
        self.assertAlmostEqual(stats.mean, 0.0, places=15)
        self.assertAlmostEqual(stats.skewness, 0.0, places=12)
        self.assertAlmostEqual(stats.excess_kurtosis, -2.0, places=12)
        self.assertEqual(stats.count, 10)
        self.assertEqual(stats.period, 'full')

    def test_annualized_mean(self):
        stats = describe(returns_of([0.00038, 0.00038, 0.00038]), trading_days=252)
        self.assertAlmostEqual(stats.annualized_mean, math.exp(0.00038 * 252) - 1.0, places=12)
        self.assertLess(abs(stats.annualized_mean - 0.10141), 0.0015)

    def test_order_statistics(self):
        stats = describe(returns_of([0.03, -0.01, 0.02, 0.0, -0.04]))
        self.assertEqual((stats.min, stats.median, stats.max), (-0.04, 0.0, 0.03))
        self.assertAlmostEqual(stats.sd, np.std([0.03, -0.01, 0.02, 0.0, -0.04], ddof=1))

    def test_moments_ignore_the_order_of_returns(self):
        rng = np.random.default_rng(23)
        values = rng.standard_t(4, size=300) * 0.01
        original = describe(returns_of(values))
        shuffled = describe(returns_of(rng.permutation(values)))
        for name in ('mean', 'sd', 'skewness', 'excess_kurtosis', 'min', 'median', 'max'):
            self.assertAlmostEqual(getattr(shuffled, name), getattr(original, name), places=12, msg=name)

    def test_too_short(self):
        with self.assertRaises(InsufficientDataError):
            describe(returns_of([0.01]))


class SplitTests(SimpleTestCase):

    def test_split_lengths(self):
        sample, test = split_periods(returns_of(np.zeros(2663)), 2264)
        self.assertEqual((len(sample), len(test)), (2264, 399))
        sample, test = split_periods(returns_of(np.zeros(2971)), 750)
        self.assertEqual(len(test), 2221)
        self.assertEqual(test.dates[0], returns_of(np.zeros(2971)).dates[750])
        _, test = split_periods(returns_of(np.zeros(11)), 10)
        self.assertEqual(len(test), 1)

    def test_halves_concatenate_to_the_original(self):
        series = returns_of(np.random.default_rng(29).normal(size=120))
        sample, test = split_periods(series, 45)
        self.assertEqual(sample.dates + test.dates, series.dates)
        np.testing.assert_array_equal(np.concatenate([sample.values, test.values]), series.values)

    def test_split_needs_a_test_period(self):
        with self.assertRaises(InsufficientDataError):
            split_periods(returns_of(np.zeros(10)), 10)
        with self.assertRaises(DomainError):
            split_periods(returns_of(np.zeros(10)), 0)
