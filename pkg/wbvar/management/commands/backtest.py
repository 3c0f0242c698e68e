from wbvar import services
from wbvar.serializers import RunConfigSerializer

from ._base import RiskCommand


class Command(RiskCommand):
    help = 'Rolling next-day VaR backtest with exception counts and the Kupiec test'
    command_name = 'backtest'

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        self.add_model_arguments(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        config, echo = services.resolve_config(RunConfigSerializer, self.run_options(options))
        report, data, paths = services.run_backtest(config, echo)
        self.stdout.write(
            f"{report.model.value}: {report.test_size} test days after a window of {report.sample_size}"
        )
        for record in data['records']:
            verdict = 'rejected' if record['rejected'] else 'not rejected'
            self.stdout.write(
                f"  alpha={record['alpha']:g} exceptions={record['exceptions']} "
                f"(expected {record['expected_exceptions']:.1f}) p-value={record['p_value']:.4g} {verdict}"
            )
        self.archive(options, echo, data, services.out_dir_for(config))
        self.report_paths(*paths)
