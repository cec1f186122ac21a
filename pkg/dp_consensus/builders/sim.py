# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.builders import Builder
from dp_consensus.analysis import theoretical_ms_rate
from dp_consensus.csv.format import TraceCSV, NormsCSV, MsCSV, HistogramCSV
from dp_consensus.exceptions import (
    SchedulePolicyException, RateEstimationException)
from dp_consensus.plots import norms_figure, ms_figure, histogram_figure
from dp_consensus.sim import (
    simulate, monte_carlo, empirical_rate, histogram_experiment)
from django.conf import settings

EXIT_INFEASIBLE = 3


class TraceBuilder(Builder):
    """
    One simulated run: absolute states per agent and component, with
    per-step disagreement and observer error norms.
    """
    files = ('trace', 'norms')

    def _init_build(self, **kwargs):
        self.trace = simulate(self.cfg, run=kwargs.get('run', 0))
        self.x = self.trace.absolute('x')
        self.xhat = self.trace.absolute('xhat')
        self.theta = self.trace.absolute('theta')
        self.norm_delta = self.trace.norm_delta
        self.norm_e = self.trace.norm_e
        self.items = range(self.trace.steps)

    def _process(self, k):
        trace = self.trace
        width = trace.u.shape[2]
        for agent in range(self.cfg.N):
            for comp in range(self.x.shape[2]):
                self.data.add(TraceCSV(
                    k, agent, comp, self.x[k, agent, comp],
                    self.xhat[k, agent, comp], self.theta[k, agent, comp],
                    trace.eta[k, agent, comp],
                    trace.u[k, agent, comp] if comp < width else None))
        self.data.add(NormsCSV(k, self.norm_delta[k], self.norm_e[k]))

    def _finish(self):
        trace = self.trace
        first = self.norm_delta[0]
        self.summary['simulation'] = {
            'steps': trace.steps,
            'truncated': trace.truncated,
            'norm_delta_final': self.norm_delta[-1],
            'norm_e_final': self.norm_e[-1],
            'delta_ratio': self.norm_delta[-1] / first if first else None,
        }
        self.plots['norms'] = norms_figure(trace)


class MonteCarloBuilder(Builder):
    files = ('ms',)

    def _init_build(self, **kwargs):
        cfg = self.cfg
        self.ms = monte_carlo(cfg, runs=kwargs.get('runs'),
                              workers=kwargs.get('workers', 1))
        self.items = range(self.ms.horizon + 1)

        try:
            self.rate = empirical_rate(self.ms)
        except RateEstimationException as ex:
            self.logger.warning('Rate fit skipped: {}'.format(ex))
            self.rate = None

        try:
            self.theoretical = theoretical_ms_rate(
                cfg.observer, cfg.plant, cfg.K, cfg.graph, cfg.schedules,
                L=cfg.L, rf=cfg.rf)
        except SchedulePolicyException:
            self.theoretical = None

    def _process(self, k):
        ms = self.ms
        self.data.add(MsCSV(k, ms.mean_delta_sq[k], ms.ci_delta[k],
                            ms.mean_e_sq[k], ms.ci_e[k]))

    def _finish(self):
        ms = self.ms
        self.summary['montecarlo'] = {
            'runs': ms.runs,
            'horizon': ms.horizon,
            'empirical_rate': self.rate,
            'theoretical_rate': self.theoretical,
            'mean_delta_sq_final': ms.mean_delta_sq[-1],
            'mean_e_sq_final': ms.mean_e_sq[-1],
        }
        self.plots['ms'] = ms_figure(ms, self.rate)


class HistogramBuilder(Builder):
    files = ('histogram',)

    def _init_build(self, **kwargs):
        cfg = self.cfg
        runs = kwargs.get('runs') or getattr(
            settings, 'DPC_HISTOGRAM_MIN_RUNS', 1000)
        self.result = histogram_experiment(
            cfg, runs, kwargs['k_star'], component=kwargs.get('component', 0))
        self.runs = runs
        self.items = range(len(self.result.counts_nominal))

    def _process(self, index):
        result = self.result
        self.data.add(HistogramCSV(
            index, result.edges[index], result.edges[index + 1],
            result.counts_nominal[index], result.counts_adjacent[index]))

    def _finish(self):
        self.summary['histogram'] = self.result.to_dict()
        self.summary['histogram']['runs'] = self.runs
        self.plots['histogram'] = histogram_figure(self.result)
        if not self.result.holds:
            self.fail(EXIT_INFEASIBLE,
                      'Histogram ratio {:.6g} exceeds bound {:.6g}'.format(
                          self.result.max_ratio, self.result.bound))
