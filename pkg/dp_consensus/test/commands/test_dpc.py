# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.test import TestCase
from django.core.management import call_command
from django.core.management.base import CommandError
from dp_consensus.cli import run_cli
from dp_consensus.csv.data import load_ms
from dp_consensus.dao.scenario import bundled_scenario_path
from dp_consensus.exceptions import (
    DimensionMismatchException, StrictIntervalException, NumericalException)
from dp_consensus.management.commands import exit_code_for
from dp_consensus.sim import empirical_rate
from dp_consensus.test.scenarios import bundled
from tempfile import TemporaryDirectory
from io import StringIO
import json
import mock
import os

EXAMPLE1 = bundled_scenario_path('example1.json')
EXAMPLE2 = bundled_scenario_path('example2.json')


def dpc(*args):
    out = StringIO()
    call_command('dpc', *args, stdout=out)
    return json.loads(out.getvalue())


class DpcCommandTest(TestCase):
    def test_check(self):
        summary = dpc('check', '--config', EXAMPLE1)
        self.assertTrue(summary['conditions']['pass'])
        self.assertEqual(summary['exit_code'], 0)
        self.assertEqual(summary['scenario']['name'], 'example1')

    def test_seed(self):
        first = dpc('check', '--config', EXAMPLE1, '--seed', '9')
        self.assertEqual(first['scenario']['sim']['seed'], 9)
        second = dpc('check', '--config', EXAMPLE1, '--seed', '9')
        self.assertEqual(first, second)

    def test_epsilon(self):
        summary = dpc('epsilon', '--config', EXAMPLE2)
        epsilon = summary['epsilon']
        self.assertTrue(1 <= epsilon['epsilon'] <= 20)
        self.assertAlmostEqual(
            epsilon['closed_form']['epsilon'], epsilon['epsilon'],
            delta=1e-10)

        summary = dpc('epsilon', '--config', EXAMPLE1, '--tol', '1e-6')
        self.assertEqual(summary['scenario']['privacy']['tol'], 1e-6)
        self.assertLessEqual(
            summary['epsilon']['series']['truncation_residual'], 1e-6)

    def test_strict(self):
        summary = dpc('epsilon', '--config', EXAMPLE1, '--strict-paper')
        self.assertTrue(summary['scenario']['privacy']['strict_paper'])

        self.assertRaises(CommandError, call_command, 'dpc', 'epsilon',
                          '--config', EXAMPLE2, '--strict-paper',
                          stdout=StringIO())

    def test_design(self):
        summary = dpc('design', '--config', EXAMPLE1, '--eps-star', '10')
        self.assertEqual(summary['design']['infeasible'], [])

        with self.assertRaises(CommandError) as cm:
            call_command('dpc', 'design', '--config', EXAMPLE1,
                         '--eps-star', '1', stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 3)

    def test_histogram_needs_k(self):
        with self.assertRaises(CommandError) as cm:
            call_command('dpc', 'histogram', '--config', EXAMPLE1,
                         stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 2)

    def test_montecarlo_refit(self):
        with TemporaryDirectory() as path:
            call_command('dpc', 'montecarlo', '--config', EXAMPLE1,
                         '--runs', '20', '--out', path, stdout=StringIO())
            self.assertEqual(
                sorted(os.listdir(path)),
                ['ms.csv', 'ms.svg', 'summary.json'])
            with open(os.path.join(path, 'summary.json')) as f:
                summary = json.load(f)

            ms = load_ms(os.path.join(path, 'ms.csv'))
            self.assertEqual(ms.horizon, 200)
            self.assertAlmostEqual(
                empirical_rate(ms), summary['montecarlo']['empirical_rate'],
                places=12)

    def test_audit_json(self):
        with TemporaryDirectory() as path:
            call_command('dpc', 'audit', '--config', EXAMPLE1, '--out',
                         path, '--format', 'json', stdout=StringIO())
            with open(os.path.join(path, 'ledger.json')) as f:
                rows = json.load(f)
            self.assertEqual(rows[0], {'k': 0, 'term': 0.0,
                                       'beta_norm': 0.0})


class RunCliTest(TestCase):
    def test_exit_codes(self):
        with TemporaryDirectory() as path:
            self.assertEqual(run_cli(['check', '--config', EXAMPLE1,
                                      '--out', path]), 0)
            self.assertTrue(os.path.exists(
                os.path.join(path, 'summary.json')))

            with mock.patch('sys.stderr', new_callable=StringIO) as err:
                self.assertEqual(run_cli(['design', '--config', EXAMPLE1,
                                          '--eps-star', '1', '--out',
                                          path]), 3)
            self.assertIn('infeasible', err.getvalue())

            bad = os.path.join(path, 'bad.json')
            data = bundled('example1.json')
            data['plant']['A'] = [[1.2, 0.0, 0.0], [0.0, 0.5, 0.0]]
            with open(bad, 'w') as f:
                json.dump(data, f)
            with mock.patch('sys.stderr', new_callable=StringIO):
                self.assertEqual(run_cli(['check', '--config', bad]), 2)
                self.assertEqual(run_cli(['check']), 2)
                self.assertEqual(run_cli(['mesh', '--config', bad]), 2)
                self.assertEqual(run_cli(
                    ['check', '--config', os.path.join(path, 'none.json')]),
                    4)

    @mock.patch('dp_consensus.builders.analysis.check_full_conditions')
    def test_numeric_failure(self, mock_check):
        mock_check.side_effect = NumericalException('no convergence')
        with mock.patch('sys.stderr', new_callable=StringIO) as err:
            self.assertEqual(run_cli(['check', '--config', EXAMPLE1]), 4)
        self.assertIn('no convergence', err.getvalue())

    def test_exit_code_for(self):
        self.assertEqual(exit_code_for(DimensionMismatchException('x')), 2)
        self.assertEqual(exit_code_for(StrictIntervalException('x')), 3)
        self.assertEqual(exit_code_for(OSError('x')), 4)
        self.assertIsNone(exit_code_for(ValueError('x')))
