# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Choosing the noise decay rate g so the closed-form budget equals a
prescribed epsilon*.
"""

from dp_consensus.exceptions import (
    InfeasibleDesignException, NumericalException, PreconditionException,
    StrictIntervalException)
from dp_consensus.privacy import (
    epsilon_closed_exp_full, epsilon_closed_exp_reduced)
from dataclasses import dataclass
from logging import getLogger
import math

logger = getLogger(__name__)


@dataclass(frozen=True)
class DesignResult:
    g: float
    epsilon: float
    margin: float

    @property
    def feasible(self):
        return self.margin < 0

    def to_dict(self):
        return {'g': self.g, 'epsilon': self.epsilon, 'margin': self.margin}


def _validate(eps_star, m, alpha, c, modulus, name):
    if not eps_star > 0:
        raise PreconditionException(
            'Target epsilon must be positive, got {}'.format(eps_star))
    if not c > 0:
        raise PreconditionException(
            'Noise scale c must be positive, got {}'.format(c))
    if m < 0:
        raise PreconditionException(
            'Deviation magnitude must be >= 0, got {}'.format(m))
    if not 0 <= alpha < 1:
        raise PreconditionException(
            'alpha must lie in [0, 1), got {}'.format(alpha))
    if not 0 <= modulus < 1:
        raise PreconditionException(
            '{} must lie in [0, 1), got {}'.format(name, modulus))


def _strict(alpha, modulus, name):
    if not alpha < modulus:
        raise StrictIntervalException(
            'alpha = {} is not below {} = {}'.format(alpha, name, modulus))


def quadratic_roots(a, b, c):
    """
    Real roots of a x**2 + b x + c, computed without cancellation; a zero
    leading coefficient falls back to the linear equation.
    """
    if a == 0:
        return [] if b == 0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0:
        return [0.0]
    return sorted([q / a, c / q])


def _root_in(roots, lower):
    inside = [x for x in roots if lower < x < 1]
    if len(inside) != 1:
        raise NumericalException(
            'Expected one design root in ({}, 1), found {}'.format(
                lower, roots))
    return inside[0]


def design_g_full(eps_star, m, alpha, l, c, L_norm, strict=False):
    _validate(eps_star, m, alpha, c, l, 'l')
    if strict:
        _strict(alpha, l, 'l')

    margin = m * L_norm - eps_star * c * (1 - alpha) * (1 - l)
    if m == 0:
        return DesignResult(None, 0.0, margin)
    if margin >= 0:
        raise InfeasibleDesignException(
            'Infeasible design: m*|L| - eps*c(1-alpha)(1-l) = {}'.format(
                margin), margin=margin)

    ec = eps_star * c
    roots = quadratic_roots(ec, -(ec * (alpha + l) + m * L_norm),
                            ec * alpha * l)
    g = _root_in(roots, max(l, alpha))
    epsilon = epsilon_closed_exp_full(l, L_norm, m, alpha, c, g)
    logger.info('Designed g = {:.10g} for eps* = {} (l = {})'.format(
        g, eps_star, l))
    return DesignResult(g, epsilon, margin)


def design_g_reduced(eps_star, m, alpha, v, w, c, strict=False):
    _validate(eps_star, m, alpha, c, v, 'v')
    if strict:
        _strict(alpha, v, 'v')

    margin = m * (w + 1 - v) - eps_star * c * (1 - alpha) * (1 - v)
    if m == 0:
        return DesignResult(None, 0.0, margin)
    if margin >= 0:
        raise InfeasibleDesignException(
            'Infeasible design: m(w+1-v) - eps*c(1-alpha)(1-v) = {}'.format(
                margin), margin=margin)

    ec = eps_star * c
    lead = ec - m
    if abs(lead) <= 1e-14 * max(ec, m):
        lead = 0.0
    roots = quadratic_roots(lead, -(ec * (alpha + v) + m * (w - v)),
                            ec * alpha * v)
    g = _root_in(roots, max(v, alpha))
    epsilon = epsilon_closed_exp_reduced(v, w, m, alpha, c, g)
    logger.info('Designed g = {:.10g} for eps* = {} (v = {}, w = {})'.format(
        g, eps_star, v, w))
    return DesignResult(g, epsilon, margin)
