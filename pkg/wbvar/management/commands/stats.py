from wbvar import services
from wbvar.serializers import RunConfigSerializer

from ._base import RiskCommand


class Command(RiskCommand):
    help = 'Descriptive statistics of daily log-returns for each input series'
    command_name = 'stats'

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        parser.add_argument(
            '--split', type=int, default=None,
            help='Report the first N returns as "sample" and the rest as "test".',
        )
        parser.add_argument('--trading-days', type=int, default=None, help='Days per year for the annualized mean.')
        self.add_output_arguments(parser)

    def run(self, **options):
        config, echo = services.resolve_config(RunConfigSerializer, self.run_options(options))
        records, path = services.run_stats(config, echo)
        for record in records:
            self.stdout.write(
                f"{record['symbol']} [{record['period']}] n={record['count']} "
                f"mean={record['mean']:.6g} sd={record['sd']:.6g}"
            )
        self.archive(options, echo, {'stats': records}, services.out_dir_for(config))
        self.report_paths(path)
