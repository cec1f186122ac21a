# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.builders import Builder
from dp_consensus.csv.format import EpsilonCSV, DesignCSV, LedgerCSV
from dp_consensus.exceptions import (
    PreconditionException, InfeasibleDesignException)
from dp_consensus.privacy.design import design_g_full, design_g_reduced
from dp_consensus.privacy.ledger import privacy_ledger
from dp_consensus.privacy.report import privacy_report, scenario_moduli
from django.conf import settings
import numpy as np

EXIT_INFEASIBLE = 3


def _value(report, agent):
    return None if report is None else report.per_agent[agent]


class EpsilonBuilder(Builder):
    files = ('epsilon',)

    def _init_build(self, **kwargs):
        self.report = privacy_report(self.cfg)

    def _process(self, agent):
        report = self.report
        self.data.add(EpsilonCSV(
            agent, report.degrees[agent], report.series.per_agent[agent],
            closed_form=_value(report.closed_form, agent),
            simplified_bound=_value(report.simplified_bound, agent)))

    def _finish(self):
        self.summary['epsilon'] = self.report.to_dict()


def design_alpha(adj):
    """
    The geometric rate of the deviation profile; a single-step profile
    counts as alpha = 0.
    """
    if adj.geometric:
        return adj.alpha
    if adj.h == (1.0,):
        return 0.0
    raise PreconditionException(
        'Design needs a geometric deviation profile, got h = {}'.format(
            list(adj.h)))


class DesignBuilder(Builder):
    """
    Chooses g_i per agent for the target epsilon*; infeasible agents are
    reported with their margin and the build exits as infeasible.
    """
    files = ('design',)

    def _init_build(self, **kwargs):
        cfg = self.cfg
        self.eps_star = kwargs.get('eps_star')
        if self.eps_star is None:
            self.eps_star = cfg.eps_star
        if self.eps_star is None:
            raise PreconditionException('Design needs --eps-star')
        if cfg.adjacency is None:
            raise PreconditionException('Design needs an adjacency section')
        if cfg.adjacency.k0 > 0:
            raise PreconditionException(
                'Design quadratics take the deviation from step 0, '
                'got k0 = {}'.format(cfg.adjacency.k0))

        self.alpha = design_alpha(cfg.adjacency)
        self.degrees, self.moduli, self.L_norm = scenario_moduli(cfg)
        self.infeasible = []

    def _process(self, agent):
        cfg = self.cfg
        m = cfg.adjacency.m
        c = cfg.schedules[agent].c
        try:
            if cfg.reduced:
                v, w = self.moduli[agent]
                result = design_g_reduced(
                    self.eps_star, m, self.alpha, v, w, c,
                    strict=cfg.strict_paper)
            else:
                result = design_g_full(
                    self.eps_star, m, self.alpha, self.moduli[agent], c,
                    self.L_norm, strict=cfg.strict_paper)
            g, epsilon, margin = result.g, result.epsilon, result.margin
        except InfeasibleDesignException as ex:
            g, epsilon, margin = None, None, ex.margin
            self.infeasible.append(agent)

        self.data.add(DesignCSV(agent, self.degrees[agent], c, g, epsilon,
                                margin))

    def _finish(self):
        self.summary['design'] = {
            'eps_star': self.eps_star,
            'alpha': self.alpha,
            'agents': self.data.table('design'),
            'infeasible': self.infeasible,
        }
        if self.infeasible:
            self.fail(EXIT_INFEASIBLE,
                      'Design infeasible for agents {}'.format(
                          self.infeasible))


class AuditBuilder(Builder):
    """
    Deterministic ledger of the deviating agent against its budget.
    """
    files = ('ledger',)

    def _init_build(self, **kwargs):
        cfg = self.cfg
        if cfg.adjacency is None:
            raise PreconditionException('Audit needs an adjacency section')

        horizon = kwargs.get('horizon') or getattr(
            settings, 'DPC_LEDGER_HORIZON', 500)
        self.ledger = privacy_ledger(
            cfg.plant, cfg.K, cfg.graph, cfg.adjacency, cfg.schedules,
            horizon, L=cfg.L, rf=cfg.rf, tol=cfg.tol)
        self.items = range(len(self.ledger.terms))

    def _process(self, k):
        self.data.add(LedgerCSV(k, self.ledger.terms[k],
                                np.sum(np.abs(self.ledger.beta[k]))))

    def _finish(self):
        self.summary['ledger'] = self.ledger.to_dict()
        self.summary['ledger']['i0'] = self.cfg.adjacency.i0
        if not self.ledger.holds:
            self.fail(EXIT_INFEASIBLE,
                      'Ledger sum {:.17g} exceeds epsilon {:.17g}'.format(
                          self.ledger.S, self.ledger.eps_ref))
