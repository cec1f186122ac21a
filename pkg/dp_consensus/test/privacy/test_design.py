# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.test import TestCase
from dp_consensus.privacy import (
    epsilon_closed_exp_full, epsilon_closed_exp_reduced)
from dp_consensus.privacy.design import (
    design_g_full, design_g_reduced, quadratic_roots)
from dp_consensus.exceptions import (
    InfeasibleDesignException, PreconditionException,
    StrictIntervalException)
from itertools import product


class DesignTest(TestCase):
    def test_full(self):
        result = design_g_full(10, 0.5, 0.5, 0.83, 1.22, 0.95)
        self.assertTrue(result.feasible)
        self.assertGreater(result.g, 0.83)
        self.assertLess(result.g, 1.0)
        self.assertAlmostEqual(result.epsilon, 10, delta=1e-9)
        self.assertAlmostEqual(
            epsilon_closed_exp_full(0.83, 0.95, 0.5, 0.5, 1.22, result.g),
            10, delta=1e-9)
        self.assertAlmostEqual(result.margin, 0.475 - 1.037, places=12)

    def test_reduced(self):
        result = design_g_reduced(8, 0.5, 0.5, 0.2, 0.82, 0.52)
        self.assertGreater(result.g, 0.5)
        self.assertAlmostEqual(
            epsilon_closed_exp_reduced(0.2, 0.82, 0.5, 0.5, 0.52, result.g),
            8, delta=1e-9)
        self.assertEqual(result.to_dict()['g'], result.g)

    def test_round_trip(self):
        for eps_star, alpha, l in product((2.0, 10.0, 40.0), (0.0, 0.3),
                                          (0.1, 0.5, 0.8)):
            try:
                result = design_g_full(eps_star, 0.5, alpha, l, 1.5, 0.9)
            except InfeasibleDesignException as ex:
                self.assertGreaterEqual(ex.margin, 0)
                continue
            self.assertGreater(result.g, max(l, alpha))
            self.assertAlmostEqual(result.epsilon, eps_star,
                                   delta=1e-9 * eps_star)

            result = design_g_reduced(eps_star, 0.5, alpha, l, 0.4, 1.5)
            self.assertAlmostEqual(result.epsilon, eps_star,
                                   delta=1e-9 * eps_star)

    def test_infeasible(self):
        with self.assertRaises(InfeasibleDesignException) as cm:
            design_g_full(1, 0.5, 0.5, 0.83, 1.22, 0.95)
        self.assertAlmostEqual(cm.exception.margin, 0.3713, places=12)

        self.assertRaises(InfeasibleDesignException, design_g_reduced,
                          0.1, 0.5, 0.5, 0.2, 0.82, 0.52)

    def test_zero_deviation(self):
        result = design_g_full(10, 0.0, 0.5, 0.83, 1.22, 0.95)
        self.assertIsNone(result.g)
        self.assertEqual(result.epsilon, 0.0)

    def test_invalid(self):
        self.assertRaises(PreconditionException, design_g_full,
                          0, 0.5, 0.5, 0.83, 1.22, 0.95)
        self.assertRaises(PreconditionException, design_g_full,
                          10, 0.5, 0.5, 0.83, 0.0, 0.95)
        self.assertRaises(PreconditionException, design_g_full,
                          10, 0.5, 1.0, 0.83, 1.22, 0.95)
        self.assertRaises(PreconditionException, design_g_full,
                          10, 0.5, 0.5, 1.0, 1.22, 0.95)
        self.assertRaises(PreconditionException, design_g_reduced,
                          10, -0.5, 0.5, 0.2, 0.82, 0.52)

    def test_strict(self):
        design_g_full(10, 0.5, 0.5, 0.83, 1.22, 0.95, strict=True)
        self.assertRaises(StrictIntervalException, design_g_full,
                          10, 0.5, 0.5, 0.3, 1.22, 0.95, strict=True)
        self.assertRaises(StrictIntervalException, design_g_reduced,
                          8, 0.5, 0.5, 0.2, 0.82, 0.52, strict=True)


class QuadraticRootsTest(TestCase):
    def test_roots(self):
        self.assertEqual(quadratic_roots(1, -3, 2), [1.0, 2.0])
        self.assertEqual(quadratic_roots(0, 2, -1), [0.5])
        self.assertEqual(quadratic_roots(0, 0, 1), [])
        self.assertEqual(quadratic_roots(1, 0, 1), [])
        self.assertEqual(quadratic_roots(1, 0, 0), [0.0])

        small, large = quadratic_roots(1, -1e8, 1)
        self.assertAlmostEqual(small, 1e-8, delta=1e-20)
        self.assertAlmostEqual(large, 1e8, delta=1e-6)
