# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.builders import Builder
from dp_consensus.analysis import (
    check_full_conditions, check_reduced_conditions, check_stabilization,
    check_reduced_stabilization, theoretical_ms_rate, degree_summary)
from dp_consensus.csv.format import ModuliCSV
from dp_consensus.exceptions import SchedulePolicyException
from dp_consensus.graphs import spectrum, degrees
from dp_consensus.privacy.report import scenario_moduli


class CheckBuilder(Builder):
    """
    Condition report for the scenario's observer kind, the graph spectrum
    and the theoretical mean-square rate where the rate theorem applies.
    """
    def _init_build(self, **kwargs):
        cfg = self.cfg
        spec = spectrum(cfg.graph)
        self.summary['graph'] = {
            'eigenvalues': list(spec.eigenvalues),
            'fiedler': spec.fiedler,
            'lambda_max': spec.lambda_max,
            'connected': spec.connected,
            'degrees': degree_summary(cfg.graph),
        }

        if cfg.reduced:
            report = check_reduced_conditions(
                cfg.rf, cfg.K, cfg.graph, cfg.schedules, cfg.plant)
        else:
            report = check_full_conditions(
                cfg.plant, cfg.L, cfg.K, cfg.graph, cfg.schedules)
        self.summary['conditions'] = report.to_dict()

        try:
            self.summary['theoretical_rate'] = theoretical_ms_rate(
                cfg.observer, cfg.plant, cfg.K, cfg.graph, cfg.schedules,
                L=cfg.L, rf=cfg.rf)
        except SchedulePolicyException as ex:
            self.logger.info('No theoretical rate: {}'.format(ex))
            self.summary['theoretical_rate'] = None

        if not report.passed:
            self.logger.warning('Scenario fails the consensus conditions')
        self.summary['agents'] = []
        self.degrees = degrees(cfg.graph)

    def _process(self, agent):
        cfg = self.cfg
        schedule = cfg.schedules[agent]
        data = {'agent': agent, 'degree': self.degrees[agent],
                'schedule': schedule.to_dict()}
        if cfg.reduced:
            stab = check_reduced_stabilization(cfg.rf, cfg.K, schedule)
        else:
            stab = check_stabilization(cfg.plant, cfg.L, cfg.K, schedule)
        data['stabilization'] = {
            'rho_observer': stab.rho_observer,
            'rho_closed_loop': stab.rho_closed_loop,
            'summable_noise': stab.summable_noise,
            'pass': stab.passed,
        }
        self.summary['agents'].append(data)


class ModuliBuilder(Builder):
    files = ('moduli',)

    def _init_build(self, **kwargs):
        self.degrees, self.moduli, L_norm = scenario_moduli(self.cfg)
        self.summary['moduli'] = {'kind': self.cfg.observer}
        if L_norm is not None:
            self.summary['moduli']['L_norm'] = L_norm

    def _process(self, agent):
        if self.cfg.reduced:
            v, w = self.moduli[agent]
            row = ModuliCSV(agent, self.degrees[agent], v=v, w=w)
        else:
            row = ModuliCSV(agent, self.degrees[agent], l=self.moduli[agent])
        self.data.add(row)

    def _finish(self):
        self.summary['moduli']['agents'] = self.data.table('moduli')
