from django.core.management.base import CommandError

from wbvar import services
from wbvar.exceptions import ConvergenceError
from wbvar.serializers import BarycenterConfigSerializer, FixedPointReportSerializer
from wbvar.transport import FixedPointSolver

from ._base import RiskCommand, _choices


class Command(RiskCommand):
    help = 'Wasserstein barycenter of Gaussian measures, univariate or multivariate'
    command_name = 'barycenter'

    def add_arguments(self, parser):
        parser.add_argument('--means', default=None, help='Comma-separated locations of univariate members.')
        parser.add_argument('--sds', default=None, help='Comma-separated scales of univariate members.')
        parser.add_argument('--weights', default=None, help='Comma-separated barycenter weights (default equal).')
        parser.add_argument(
            '--covariance', action='append', dest='covariances', default=[], metavar='PATH',
            help='CSV file holding one covariance matrix; repeat per member.',
        )
        parser.add_argument(
            '--mean-vector', action='append', dest='mean_vectors', default=[], metavar='M1,M2,...',
            help='Mean of one multivariate member, in --covariance order.',
        )
        parser.add_argument('--solver', choices=_choices(FixedPointSolver), default=FixedPointSolver.INTERPOLATION.value)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--max-iter', type=int, default=None)
        self.add_output_arguments(parser, formats=False)

    def run(self, **options):
        keys = ('means', 'sds', 'weights', 'covariances', 'mean_vectors', 'solver', 'tol', 'max_iter', 'out_dir')
        config, echo = services.resolve_config(
            BarycenterConfigSerializer, {key: options[key] for key in keys if options.get(key) is not None},
        )
        try:
            payload = services.run_barycenter(config)
        except ConvergenceError as e:
            if e.report is not None:
                last = FixedPointReportSerializer(e.report).data
                self.stderr.write(
                    f"No convergence: residual {last['residual']:.3e} after {last['iterations']} iterations"
                )
            raise CommandError(f"ConvergenceError: {e}", returncode=e.exit_code) from e

        self.stdout.write(services.describe_barycenter(payload))
        out_dir = services.out_dir_for(config)
        path = services.write_barycenter(payload, echo, out_dir)
        self.archive(options, echo, payload, out_dir)
        self.report_paths(path)
