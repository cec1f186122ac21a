# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.test import TestCase, override_settings
from dp_consensus.sim import (
    simulate, monte_carlo, empirical_rate, default_window,
    histogram_experiment, MsEstimate)
from dp_consensus.analysis import theoretical_ms_rate
from dp_consensus.exceptions import (
    PreconditionException, RateEstimationException)
from dp_consensus.noise import NoiseSchedule
from dp_consensus.privacy.ledger import privacy_ledger
from dp_consensus.test.scenarios import example1_config, example2_config
from dataclasses import replace
import numpy as np


def silent(cfg):
    return replace(cfg, schedules=[NoiseSchedule(c=0.0, g=0.9)] * cfg.N)


class SimulateTest(TestCase):
    def test_noise_free_consensus(self):
        cfg = silent(example1_config())
        trace = simulate(cfg)
        self.assertEqual(trace.steps, 201)
        self.assertFalse(trace.truncated)
        self.assertEqual(np.count_nonzero(trace.eta), 0)
        norms = trace.norm_delta
        self.assertLess(norms[200] / norms[0], 1e-6)

        x = trace.absolute('x')
        np.testing.assert_allclose(x[0], cfg.x0, atol=1e-12)
        np.testing.assert_allclose(trace.absolute('xhat')[0], cfg.xhat0,
                                   atol=1e-12)

    def test_observer_error(self):
        cfg = example1_config(horizon=30)
        trace = simulate(cfg)
        observer = cfg.plant.A - cfg.L @ cfg.plant.C
        e0 = cfg.x0 - cfg.xhat0
        for k in (1, 10, 30):
            expected = e0 @ np.linalg.matrix_power(observer, k).T
            np.testing.assert_allclose(trace.e[k], expected, atol=1e-9)

    def test_reduced_observer_error(self):
        cfg = example2_config(horizon=30)
        trace = simulate(cfg)
        self.assertEqual(trace.e.shape, (31, 10, 1))
        self.assertEqual(trace.xhat.shape, (31, 10, 2))
        for k in (1, 10, 30):
            np.testing.assert_allclose(trace.e[k], trace.e[0] * 0.5 ** k,
                                       atol=1e-9)

        canonical = cfg.rf.to_canonical(cfg.x0)
        np.testing.assert_allclose(trace.absolute('x')[0], canonical,
                                   atol=1e-12)

    def test_messages(self):
        cfg = example1_config(horizon=5)
        trace = simulate(cfg)
        np.testing.assert_allclose(trace.theta, trace.xhat + trace.eta)
        self.assertEqual(trace.u.shape, (6, 10, 2))
        self.assertTrue(np.any(trace.eta[:, 0] != 0))

    def test_determinism(self):
        cfg = example1_config(horizon=20)
        first = simulate(cfg, run=3)
        second = simulate(cfg, run=3)
        np.testing.assert_array_equal(first.x, second.x)
        np.testing.assert_array_equal(first.eta, second.eta)
        self.assertFalse(np.array_equal(first.eta,
                                        simulate(cfg, run=4).eta))
        self.assertFalse(np.array_equal(
            first.eta, simulate(replace(cfg, seed=7), run=3).eta))

    def test_invalid(self):
        cfg = example1_config(adjacency=False)
        self.assertRaises(PreconditionException, simulate, cfg, horizon=0)
        self.assertRaises(PreconditionException, simulate, cfg,
                          counterfactual=True)

    def test_overflow(self):
        cfg = replace(silent(example1_config()),
                      K=np.array([[-5.0, 0.0], [0.0, 0.0]]), horizon=500)
        with self.assertLogs('dp_consensus.sim', level='WARNING'):
            trace = simulate(cfg)
        self.assertTrue(trace.truncated)
        self.assertLess(trace.steps, 501)


class CounterfactualTest(TestCase):
    def assert_matches_ledger(self, cfg):
        trace = simulate(cfg, counterfactual=True)
        ledger = privacy_ledger(
            cfg.plant, cfg.K, cfg.graph, cfg.adjacency, cfg.schedules,
            cfg.horizon, L=cfg.L, rf=cfg.rf, include_tail=False)
        np.testing.assert_allclose(trace.beta, ledger.beta, atol=1e-10)

    def test_full(self):
        self.assert_matches_ledger(example1_config(horizon=40))

    def test_reduced(self):
        self.assert_matches_ledger(example2_config(horizon=40))


class MonteCarloTest(TestCase):
    def test_example1(self):
        cfg = example1_config()
        ms = monte_carlo(cfg)
        self.assertEqual(ms.runs, 500)
        self.assertEqual(ms.horizon, 200)
        self.assertLess(ms.mean_delta_sq[200], 1e-3 * ms.mean_delta_sq[0])
        self.assertTrue(np.all(ms.ci_delta >= 0))

        rate = empirical_rate(ms)
        theory = theoretical_ms_rate(
            'full', cfg.plant, cfg.K, cfg.graph, cfg.schedules, L=cfg.L)
        self.assertLessEqual(rate, theory + 0.05)
        self.assertGreater(rate, 0.0)

    def test_workers(self):
        cfg = example1_config(horizon=20, runs=4)
        serial = monte_carlo(cfg)
        np.testing.assert_array_equal(
            serial.mean_delta_sq, monte_carlo(cfg, workers=2).mean_delta_sq)

    def test_runs(self):
        cfg = example1_config(horizon=5)
        self.assertRaises(PreconditionException, monte_carlo, cfg, runs=1)
        self.assertEqual(monte_carlo(cfg, runs=2).runs, 2)


class RateTest(TestCase):
    def ms(self, values):
        values = np.asarray(values, dtype=float)
        zeros = np.zeros_like(values)
        return MsEstimate(values, zeros, values, zeros, runs=None)

    def test_synthetic(self):
        ms = self.ms([0.8 ** (2 * k) for k in range(201)])
        self.assertAlmostEqual(empirical_rate(ms), 0.8, places=10)
        self.assertAlmostEqual(empirical_rate(ms, (0, 20)), 0.8, places=10)

    def test_window(self):
        self.assertEqual(default_window(200), (50, 150))
        self.assertEqual(default_window(100), (50, 100))
        self.assertEqual(default_window(20), (19, 20))
        with override_settings(DPC_FIT_WINDOW=(10, 30)):
            self.assertEqual(default_window(200), (10, 30))

        ms = self.ms([0.8 ** (2 * k) for k in range(201)])
        self.assertRaises(RateEstimationException, empirical_rate, ms,
                          (150, 250))
        self.assertRaises(RateEstimationException, empirical_rate, ms,
                          (30, 30))

        floor = self.ms([1.0] * 100 + [0.0] * 101)
        self.assertRaises(RateEstimationException, empirical_rate, floor)


class HistogramTest(TestCase):
    def test_example1(self):
        result = histogram_experiment(example1_config(), 1000, 2)
        self.assertTrue(result.holds)
        self.assertEqual(result.counts_nominal.sum(), 1000)
        self.assertEqual(result.counts_adjacent.sum(), 1000)
        self.assertEqual(len(result.edges), len(result.counts_nominal) + 1)
        self.assertGreater(result.epsilon, 0.0)
        self.assertEqual(result.to_dict()['k_star'], 2)

    def test_example2(self):
        result = histogram_experiment(example2_config(), 1000, 4)
        self.assertTrue(result.holds)

    def test_preconditions(self):
        self.assertRaises(PreconditionException, histogram_experiment,
                          example1_config(), 999, 2)
        self.assertRaises(PreconditionException, histogram_experiment,
                          example1_config(adjacency=False), 1000, 2)
        self.assertRaises(PreconditionException, histogram_experiment,
                          example1_config(), 1000, 2, component=2)
