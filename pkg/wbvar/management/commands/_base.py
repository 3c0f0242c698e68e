# wbvar/management/commands/_base.py
import logging

from django.core.management.base import BaseCommand, CommandError

from wbvar import services
from wbvar.backtest import Model, WindowMode
from wbvar.exceptions import RiskEngineError
from wbvar.risk import Convention
from wbvar.volatility import EwmaInit

logger = logging.getLogger('wbvar.commands')


def _choices(enum):
    return [member.value for member in enum]


class RiskCommand(BaseCommand):
    """
    Shared plumbing for the risk commands.

    Subclasses implement `run(**options)`. Any RiskEngineError raised there is
    turned into a CommandError carrying the error's exit code.
    """
    command_name = None

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except RiskEngineError as e:
            logger.error(f"{self.command_name} failed: {e}")
            raise CommandError(f"{type(e).__name__}: {e}", returncode=e.exit_code) from e

    def run(self, **options):
        raise NotImplementedError

    # --- Arguments ---

    def add_input_arguments(self, parser):
        parser.add_argument(
            '--input', action='append', dest='inputs', default=[], metavar='SYMBOL=PATH',
            help='Price file for one asset; repeat for a portfolio.',
        )

    def add_model_arguments(self, parser, forecasts=True):
        if forecasts:
            parser.add_argument('--model', choices=_choices(Model), default=Model.WB_NORMAL.value)
            parser.add_argument('--window-mode', choices=_choices(WindowMode), default=WindowMode.ROLLING.value)
        parser.add_argument('--window', type=int, default=None, help='Estimation window in trading days.')
        parser.add_argument(
            '--alpha', action='append', type=float, dest='alphas', default=None,
            help='Tail level; repeat for several. Defaults to the configured levels.',
        )
        parser.add_argument('--zeta', type=float, default=None, help='EWMA decay factor.')
        parser.add_argument('--ewma-init', choices=_choices(EwmaInit), default=EwmaInit.SAMPLE_SD_OF_WINDOW.value)
        parser.add_argument('--weights', default=None, help='Comma-separated portfolio weights.')
        parser.add_argument('--barycenter-weights', default=None, help='Comma-separated barycenter weights.')

    def add_output_arguments(self, parser, formats=True):
        parser.add_argument('--out-dir', default=None)
        if formats:
            parser.add_argument('--format', choices=['json', 'csv'], default='json')
        parser.add_argument(
            '--archive', action='store_true',
            help='Also store the configuration and report in the database.',
        )

    # --- Helpers ---

    def run_options(self, options, *names):
        """Picks the options RunConfigSerializer knows about, dropping unset ones."""
        keys = ('inputs', 'model', 'window', 'window_mode', 'alphas', 'zeta', 'ewma_init', 'weights',
                'barycenter_weights', 'convention', 'split', 'trading_days', 'out_dir', 'format') + names
        return {key: options[key] for key in keys if options.get(key) is not None}

    def archive(self, options, config_echo, report, out_dir):
        if options.get('archive'):
            run = services.archive_run(self.command_name, config_echo, report, out_dir)
            self.stdout.write(f'Archived as run #{run.pk}.')

    def report_paths(self, *paths):
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f'Wrote {path}'))


CONVENTION_CHOICES = _choices(Convention)
