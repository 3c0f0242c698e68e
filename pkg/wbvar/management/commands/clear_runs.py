from django.core.management.base import BaseCommand

from wbvar.models import RiskRun


class Command(BaseCommand):
    help = 'Deletes archived risk runs from the database'

    def add_arguments(self, parser):
        parser.add_argument('--command', dest='run_command', default=None, help='Only delete runs of this command.')

    def handle(self, *args, **options):
        runs = RiskRun.objects.all()
        if options['run_command']:
            runs = runs.filter(command=options['run_command'])
        count, _ = runs.delete()

        self.stdout.write(self.style.SUCCESS(f'Successfully deleted {count} runs.'))
