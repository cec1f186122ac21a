# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


class ScenarioPolicyException(Exception):
    pass


class DimensionMismatchException(ScenarioPolicyException):
    pass


class SchedulePolicyException(ScenarioPolicyException):
    pass


class TopologyPolicyException(ScenarioPolicyException):
    pass


class DisconnectedGraphException(TopologyPolicyException):
    pass


class PreconditionException(ScenarioPolicyException):
    pass


class RankDeficiencyException(ScenarioPolicyException):
    pass


class PrivacyPolicyException(Exception):
    pass


class DivergentSeriesException(PrivacyPolicyException):
    pass


class StrictIntervalException(PrivacyPolicyException):
    pass


class InfeasibleDesignException(PrivacyPolicyException):
    def __init__(self, message, margin=None):
        super(InfeasibleDesignException, self).__init__(message)
        self.margin = margin


class NumericalException(Exception):
    pass


class RateEstimationException(NumericalException):
    pass
