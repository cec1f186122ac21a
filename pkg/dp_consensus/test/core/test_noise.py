# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.test import TestCase
from dp_consensus.noise import (
    NoiseSchedule, RngSpec, scale_at, is_summable, stream_generator,
    centered_uniforms, laplace_from_uniform, sample_laplace, laplace_noise,
    STATE_STREAM, PARAMETER_STREAM)
from dp_consensus.exceptions import (
    SchedulePolicyException, PreconditionException)
from scipy import stats
import numpy as np


class NoiseScheduleTest(TestCase):
    def test_exponential(self):
        schedule = NoiseSchedule(c=2.0, g=0.5)
        self.assertEqual(schedule.scales(3).tolist(), [2.0, 1.0, 0.5])
        self.assertEqual(scale_at(schedule, 2), 0.5)
        self.assertTrue(is_summable(schedule))
        self.assertFalse(schedule.silent)
        self.assertEqual(schedule.to_dict(),
                         {'kind': 'exponential', 'c': 2.0, 'g': 0.5})

    def test_polynomial(self):
        schedule = NoiseSchedule(c=1.0, kind='polynomial', power=2)
        self.assertEqual(schedule.p_at(0), 1.0)
        self.assertEqual(schedule.p_at(1), 0.25)
        self.assertTrue(is_summable(schedule))
        self.assertFalse(is_summable(
            NoiseSchedule(c=1.0, kind='polynomial', power=1)))

    def test_custom(self):
        schedule = NoiseSchedule(c=1.0, kind='custom', p=[1, 0.5, 0.25])
        self.assertEqual(schedule.p, (1.0, 0.5, 0.25))
        self.assertEqual(schedule.scales(3).tolist(), [1.0, 0.5, 0.25])
        self.assertTrue(is_summable(schedule))
        self.assertRaises(SchedulePolicyException, schedule.p_at, 3)
        self.assertRaises(SchedulePolicyException, schedule.scales, 4)

        flat = NoiseSchedule(c=1.0, kind='custom', p=[1.0] * 2000)
        self.assertFalse(is_summable(flat))

    def test_silent(self):
        schedule = NoiseSchedule(c=0.0, g=0.9)
        self.assertTrue(schedule.silent)
        self.assertEqual(schedule.scales(2).tolist(), [0.0, 0.0])

    def test_invalid(self):
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          g=1.0)
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          g=0.0)
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=-1.0,
                          g=0.5)
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          kind='polynomial', power=0)
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          kind='custom', p=[])
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          kind='custom', p=[1.0, -1.0])
        self.assertRaises(SchedulePolicyException, NoiseSchedule, c=1.0,
                          kind='gaussian')
        self.assertRaises(PreconditionException,
                          NoiseSchedule(c=1.0, g=0.5).p_at, -1)


class LaplaceSamplerTest(TestCase):
    def test_statistics(self):
        draws = laplace_noise(20240601, 0, 0, np.ones(250000), 4).ravel()
        self.assertEqual(draws.size, 1000000)
        self.assertLessEqual(abs(np.mean(draws)), 0.0042)
        self.assertLess(abs(np.var(draws) - 2.0), 0.1)
        self.assertLess(stats.kstest(draws, 'laplace').statistic, 0.002)

    def test_scaling(self):
        scales = np.array([2.0, 0.0, 0.5])
        unit = laplace_noise(7, 1, 2, np.ones(3), 2)
        scaled = laplace_noise(7, 1, 2, scales, 2)
        np.testing.assert_array_equal(scaled, unit * scales[:, None])
        self.assertEqual(scaled[1].tolist(), [0.0, 0.0])
        self.assertEqual(laplace_noise(7, 1, 2, np.zeros(3), 2).tolist(),
                         np.zeros((3, 2)).tolist())
        self.assertRaises(PreconditionException, laplace_noise, 7, 1, 2,
                          [-1.0], 2)

    def test_determinism(self):
        first = laplace_noise(11, 3, 4, np.ones(50), 3)
        np.testing.assert_array_equal(
            first, laplace_noise(11, 3, 4, np.ones(50), 3))
        self.assertFalse(np.array_equal(
            first, laplace_noise(11, 3, 5, np.ones(50), 3)))
        self.assertFalse(np.array_equal(
            first, laplace_noise(11, 4, 4, np.ones(50), 3)))
        self.assertFalse(np.array_equal(
            first, laplace_noise(12, 3, 4, np.ones(50), 3)))

    def test_counter_addressing(self):
        full = centered_uniforms(5, 0, 1, 10, 6)
        tail = centered_uniforms(5, 0, 1, 4, 6, start=6)
        np.testing.assert_array_equal(full[6:], tail)

        spec = RngSpec(master_seed=5, run=0, agent=1, step=3)
        draw = sample_laplace(spec, 1.0, 6)
        np.testing.assert_array_equal(
            draw, laplace_from_uniform(full[3], 1.0))
        self.assertRaises(PreconditionException, sample_laplace, spec, 0.0,
                          6)

    def test_open_interval(self):
        u = centered_uniforms(99, 0, 0, 10000, 5)
        self.assertTrue(np.all(np.abs(u) < 0.5))
        self.assertAlmostEqual(np.mean(u), 0.0, places=2)

        edge = (0 - 2 ** 52 + 0.5) * 2.0 ** -53
        self.assertGreater(edge, -0.5)
        self.assertTrue(np.isfinite(laplace_from_uniform(edge, 1.0)))

    def test_inverse_cdf(self):
        self.assertEqual(laplace_from_uniform(0.0, 1.0), 0.0)
        self.assertFalse(np.signbit(laplace_from_uniform(0.0, 1.0)))
        self.assertAlmostEqual(
            laplace_from_uniform(0.25, 2.0), 2.0 * np.log(2.0), places=14)
        self.assertAlmostEqual(
            laplace_from_uniform(-0.25, 2.0), -2.0 * np.log(2.0), places=14)
        self.assertRaises(PreconditionException, laplace_from_uniform, 0.5,
                          1.0)
        self.assertRaises(PreconditionException, laplace_from_uniform,
                          [0.1, -0.5], 1.0)

    def test_auxiliary_streams(self):
        a = stream_generator(3, STATE_STREAM).uniform(size=4)
        b = stream_generator(3, STATE_STREAM).uniform(size=4)
        c = stream_generator(3, PARAMETER_STREAM).uniform(size=4)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))
