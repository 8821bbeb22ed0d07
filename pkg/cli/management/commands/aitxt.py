import argparse
import sys

from django.core.management.base import BaseCommand, CommandError

from cli.main import main


class Command(BaseCommand):
    help = 'Parse, validate, compile and enforce ai.txt policies. Run `aitxt --help` for the subcommands.'

    def add_arguments(self, parser):
        parser.add_argument('args', nargs=argparse.REMAINDER)

    def run_from_argv(self, argv):
        # argv is [prog, 'aitxt', ...]; the subcommand parser owns the rest
        sys.exit(main(argv[2:]))

    def handle(self, *args, **options):
        code = main(list(args), stdout=self.stdout._out, stderr=self.stderr._out)
        if code:
            raise CommandError(f'aitxt exited with status {code}', returncode=code)
