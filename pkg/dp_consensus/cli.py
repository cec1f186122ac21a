# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.core.management import call_command
from django.core.management.base import CommandError
from logging import getLogger
import django
import sys
import os

logger = getLogger(__name__)

EXIT_USAGE = 2


def run_cli(argv):
    """
    Runs the dpc command with argv (subcommand first), returns the exit
    code.
    """
    try:
        call_command('dpc', *argv)
    except CommandError as ex:
        sys.stderr.write('dpc: {}\n'.format(ex))
        # argparse failures carry the default return code
        return EXIT_USAGE if ex.returncode == 1 else ex.returncode
    return 0


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dp_consensus.conf')
    django.setup()
    sys.exit(run_cli(sys.argv[1:]))
