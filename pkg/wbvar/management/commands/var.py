from wbvar import services
from wbvar.serializers import VarConfigSerializer

from ._base import CONVENTION_CHOICES, RiskCommand


class Command(RiskCommand):
    help = 'One-shot barycenter VaR/CVaR next to the variance-covariance and simple-sum levels'
    command_name = 'var'

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        self.add_model_arguments(parser, forecasts=False)
        parser.add_argument('--convention', choices=CONVENTION_CHOICES, default='loss')
        parser.add_argument('--means', default=None, help='Comma-separated asset means instead of --input.')
        parser.add_argument('--sds', default=None, help='Comma-separated asset standard deviations.')
        parser.add_argument(
            '--correlation', default=None,
            help='Row-major comma-separated correlation matrix for the variance-covariance level.',
        )
        parser.add_argument(
            '--filtered', action='store_true',
            help='Use the terminal EWMA scale of the fitted block instead of the sample SD.',
        )
        self.add_output_arguments(parser)

    def run(self, **options):
        options = self.run_options(options, 'means', 'sds', 'correlation', 'filtered')
        config, echo = services.resolve_config(VarConfigSerializer, options)
        records, path = services.run_var(config, echo)
        for record in records:
            varcov = 'n/a' if record['varcov_var'] is None else f"{record['varcov_var']:.6g}"
            self.stdout.write(
                f"alpha={record['alpha']:g} wb_var={record['wb_var']:.6g} wb_cvar={record['wb_cvar']:.6g} "
                f"varcov_var={varcov} simple_sum_var={record['simple_sum_var']:.6g}"
            )
        self.archive(options, echo, {'levels': records}, services.out_dir_for(config))
        self.report_paths(path)
