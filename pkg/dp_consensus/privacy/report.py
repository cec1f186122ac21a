# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.analysis import full_moduli, reduced_moduli
from dp_consensus.exceptions import PreconditionException
from dp_consensus.graphs import degrees
from dp_consensus.matops import induced_one_norm
from dp_consensus.privacy import (
    epsilon_series_full, epsilon_series_reduced, closed_form_report,
    simplified_bound_report)
from dataclasses import dataclass
from logging import getLogger

logger = getLogger(__name__)


@dataclass
class PrivacyReport:
    kind: str
    degrees: list
    moduli: list
    L_norm: float
    series: object
    closed_form: object = None
    simplified_bound: object = None

    @property
    def epsilon(self):
        return self.series.epsilon

    def to_dict(self):
        data = {'kind': self.kind, 'epsilon': self.epsilon,
                'degrees': list(self.degrees),
                'series': self.series.to_dict()}
        if self.kind == 'full':
            data['l'] = list(self.moduli)
            data['L_norm'] = self.L_norm
        else:
            data['v'] = [v for v, _ in self.moduli]
            data['w'] = [w for _, w in self.moduli]
        if self.closed_form is not None:
            data['closed_form'] = self.closed_form.to_dict()
        if self.simplified_bound is not None:
            data['simplified_bound'] = self.simplified_bound.to_dict()
        return data


def scenario_moduli(cfg):
    """
    Returns (degrees, moduli, L_norm): l_i per agent for the full-order
    observer, (v_i, w_i) pairs for the reduced-order observer.
    """
    degree_list = degrees(cfg.graph)
    if cfg.reduced:
        return degree_list, reduced_moduli(cfg.rf, cfg.K, degree_list), None
    return (degree_list, full_moduli(cfg.plant, cfg.L, cfg.K, degree_list),
            induced_one_norm(cfg.L))


def privacy_report(cfg):
    """
    Per-agent epsilon from the truncated series, with the matching closed
    form and, for full-order observers, the simplified bound alongside.
    """
    adj = cfg.adjacency
    if adj is None:
        raise PreconditionException(
            'Privacy budgets need an adjacency section')

    degree_list, moduli, L_norm = scenario_moduli(cfg)
    if cfg.reduced:
        kind = 'reduced'
        series = epsilon_series_reduced(
            moduli, adj, cfg.schedules, cfg.tol, cfg.strict_paper)
        bound = None
    else:
        kind = 'full'
        series = epsilon_series_full(
            moduli, L_norm, adj, cfg.schedules, cfg.tol, cfg.strict_paper)
        bound = simplified_bound_report(moduli, L_norm, adj, cfg.schedules)
    closed = closed_form_report(kind, moduli, L_norm, adj, cfg.schedules,
                                cfg.tol)

    report = PrivacyReport(kind, degree_list, moduli, L_norm, series,
                           closed, bound)
    logger.info('Privacy budget ({}): epsilon = {:.10g}'.format(
        kind, report.epsilon))
    return report
