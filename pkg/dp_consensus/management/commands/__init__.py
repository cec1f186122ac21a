# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.core.management.base import BaseCommand, CommandError
from dp_consensus.exceptions import (
    ScenarioPolicyException, PrivacyPolicyException, NumericalException)
from logging import getLogger

EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


def exit_code_for(ex):
    if isinstance(ex, ScenarioPolicyException):
        return EXIT_VALIDATION
    if isinstance(ex, PrivacyPolicyException):
        return EXIT_INFEASIBLE
    if isinstance(ex, (NumericalException, OSError)):
        return EXIT_NUMERIC
    return None


class ConsensusCommand(BaseCommand):
    """
    Runs handle_scenario and reports package exceptions as CommandError
    with the matching exit code.
    """
    def __init__(self, *args, **kwargs):
        super(ConsensusCommand, self).__init__(*args, **kwargs)
        self.log = getLogger(__name__)

    def handle_scenario(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.handle_scenario(*args, **options)
        except (ScenarioPolicyException, PrivacyPolicyException,
                NumericalException, OSError) as ex:
            returncode = exit_code_for(ex)
            self.log.error('{}: {}'.format(type(ex).__name__, ex))
            raise CommandError(str(ex), returncode=returncode)
