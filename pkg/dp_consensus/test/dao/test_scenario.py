# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.test import TestCase, override_settings
from dp_consensus.dao.scenario import (
    parse_scenario, load_scenario, validate_scenario, resolve_seed,
    json_pointer, bundled_scenario_path)
from dp_consensus.analysis import check_full_conditions
from dp_consensus.exceptions import (
    ScenarioPolicyException, DimensionMismatchException,
    SchedulePolicyException, TopologyPolicyException)
from dp_consensus.test.scenarios import bundled, EXAMPLE1_L
from tempfile import NamedTemporaryFile
import numpy as np
import json
import mock


class ScenarioLoadTest(TestCase):
    def test_example1(self):
        cfg = load_scenario(bundled_scenario_path('example1.json'))
        self.assertEqual(cfg.N, 10)
        self.assertEqual(cfg.observer, 'full')
        self.assertEqual(cfg.seed, 2024)
        self.assertEqual((cfg.horizon, cfg.runs), (200, 500))
        self.assertEqual(cfg.L.tolist(), EXAMPLE1_L)
        self.assertEqual(cfg.eps_star, 10.0)
        self.assertEqual(cfg.adjacency.alpha, 0.5)
        self.assertTrue(np.all(np.abs(cfg.x0) <= 5.0))
        self.assertEqual(cfg.xhat0.shape, (10, 2))

        for s in cfg.schedules:
            self.assertTrue(1.2 <= s.c <= 1.24)
            self.assertTrue(0.9 <= s.g <= 0.95)

        report = check_full_conditions(cfg.plant, cfg.L, cfg.K, cfg.graph,
                                       cfg.schedules)
        self.assertTrue(report.passed)

    def test_example2(self):
        cfg = load_scenario(bundled_scenario_path('example2.json'))
        self.assertTrue(cfg.reduced)
        self.assertIsNone(cfg.L)
        self.assertEqual(cfg.xhat0.shape, (10, 1))
        np.testing.assert_allclose(cfg.rf.Abar, [[0.5, 0.7], [0.0, 1.2]],
                                   atol=1e-14)

    def test_published_blocks(self):
        with self.assertLogs('dp_consensus.dao.scenario', level='WARNING'):
            cfg = load_scenario(
                bundled_scenario_path('example2_published.json'))
        self.assertEqual(cfg.rf.Abar.tolist(), [[0.5, 1.0], [0.0, 1.5]])
        self.assertEqual(cfg.echo['observer']['blocks']['Abar'],
                         [[0.5, 1.0], [0.0, 1.5]])

    def test_deterministic_draws(self):
        first = parse_scenario(bundled('example1.json'))
        second = parse_scenario(bundled('example1.json'))
        np.testing.assert_array_equal(first.x0, second.x0)
        self.assertEqual(first.schedules, second.schedules)

        other = parse_scenario(bundled('example1.json'), seed=7)
        self.assertEqual(other.seed, 7)
        self.assertFalse(np.array_equal(first.x0, other.x0))

    def test_echo(self):
        cfg = parse_scenario(bundled('example1.json'))
        echo = json.loads(json.dumps(cfg.echo))
        self.assertEqual(echo['sim']['seed'], 2024)
        self.assertEqual(len(echo['noise']['agents']), 10)
        self.assertEqual(echo['name'], 'example1')

        again = parse_scenario(echo)
        np.testing.assert_array_equal(again.x0, cfg.x0)
        self.assertEqual(again.schedules, cfg.schedules)
        self.assertEqual(again.adjacency, cfg.adjacency)
        self.assertEqual(again.echo, cfg.echo)

        cfg = parse_scenario(bundled('example2.json'))
        again = parse_scenario(json.loads(json.dumps(cfg.echo)))
        np.testing.assert_array_equal(again.rf.P, cfg.rf.P)
        self.assertEqual(again.echo, cfg.echo)

    def test_invalid_json(self):
        with NamedTemporaryFile('w', suffix='.json') as f:
            f.write('{"graph": ')
            f.flush()
            self.assertRaises(ScenarioPolicyException, load_scenario,
                              f.name)


class ScenarioValidationTest(TestCase):
    def test_pointer(self):
        data = bundled('example1.json')
        data['plant']['A'][0][1] = 'x'
        with self.assertRaisesRegex(ScenarioPolicyException,
                                    '^/plant/A/0/1: '):
            validate_scenario(data)

        data = bundled('example1.json')
        del data['graph']
        with self.assertRaisesRegex(ScenarioPolicyException, '^/graph: '):
            validate_scenario(data)

        self.assertEqual(json_pointer({'non_field_errors': ['bad']}),
                         ('/', 'bad'))
        self.assertEqual(json_pointer({'noise': {'non_field_errors': [
            'two forms']}}), ('/noise', 'two forms'))

    def test_ragged_matrix(self):
        data = bundled('example1.json')
        data['plant']['A'] = [[1.2, 0.0], [0.5]]
        with self.assertRaisesRegex(ScenarioPolicyException, '^/plant/A'):
            validate_scenario(data)

    def test_non_finite(self):
        data = bundled('example1.json')
        data['gains']['K'][0][0] = float('inf')
        self.assertRaises(ScenarioPolicyException, validate_scenario, data)

    def test_dimensions(self):
        data = bundled('example1.json')
        data['plant']['A'] = [[1.2, 0.0, 0.0], [0.0, 0.5, 0.0]]
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

        data = bundled('example1.json')
        data['observer']['L'] = [[0.5, 0.45]]
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

        data = bundled('example1.json')
        data['sim']['x0'] = [[1.0, 2.0]]
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

        data = bundled('example1.json')
        data['adjacency']['i0'] = 10
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

        data = bundled('example1.json')
        data['noise'] = {'agents': [{'c': 1.0, 'g': 0.9}] * 9}
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

    def test_schedules(self):
        data = bundled('example1.json')
        data['noise'] = {'c': 1.0, 'g': 1.0}
        self.assertRaises(SchedulePolicyException, parse_scenario, data)

        data['noise'] = {'c': 1.0, 'g': 0.9}
        cfg = parse_scenario(data)
        self.assertEqual(len(set(cfg.schedules)), 1)

        data['noise'] = {'kind': 'polynomial', 'c': 1.0, 'power': 2}
        self.assertEqual(parse_scenario(data).schedules[0].power, 2)

        data['noise'] = {'c': 1.0, 'g': 0.9, 'interval': {
            'c': [1, 2], 'g': [0.5, 0.6]}}
        self.assertRaises(ScenarioPolicyException, parse_scenario, data)

        data['noise'] = {'interval': {'c': [2, 1], 'g': [0.5, 0.6]}}
        self.assertRaises(ScenarioPolicyException, parse_scenario, data)

    def test_topology(self):
        data = bundled('example1.json')
        data['graph'] = {'kind': 'circulant', 'N': 10}
        self.assertRaises(ScenarioPolicyException, parse_scenario, data)

        data['graph'] = {'kind': 'explicit', 'N': 3, 'edges': [[0, 3]]}
        self.assertRaises(TopologyPolicyException, parse_scenario, data)

    def test_adjacency(self):
        data = bundled('example1.json')
        data['adjacency'] = {'i0': 0, 'm': 0.5}
        self.assertRaises(ScenarioPolicyException, parse_scenario, data)

        data['adjacency'] = {'i0': 0, 'm': 0.5, 'h': [1, 0.5],
                             'direction': [1.0]}
        cfg = parse_scenario(data)
        self.assertEqual(cfg.adjacency.h, (1.0, 0.5))

        data['adjacency']['direction'] = [1.0, 0.0]
        self.assertRaises(DimensionMismatchException, parse_scenario, data)

        del data['adjacency']
        self.assertIsNone(parse_scenario(data).adjacency)

    def test_defaults(self):
        data = bundled('example1.json')
        del data['sim']
        del data['privacy']
        with mock.patch.dict('os.environ', {'DPC_SEED': '11'}):
            cfg = parse_scenario(data)
        self.assertEqual(cfg.seed, 11)
        self.assertEqual((cfg.horizon, cfg.runs), (200, 500))
        self.assertIsNone(cfg.eps_star)

        with override_settings(DPC_INITIAL_BOX=0.5):
            cfg = parse_scenario(data)
        self.assertTrue(np.all(np.abs(cfg.x0) <= 0.5))


class SeedTest(TestCase):
    def test_precedence(self):
        self.assertEqual(resolve_seed(3, {'seed': 4}), 3)
        self.assertEqual(resolve_seed(None, {'seed': 4}), 4)
        with mock.patch.dict('os.environ', {'DPC_SEED': '5'}):
            self.assertEqual(resolve_seed(None, {}), 5)
            self.assertEqual(resolve_seed(0, {}), 0)
        with mock.patch.dict('os.environ', clear=True):
            self.assertEqual(resolve_seed(None, {}), 0)
