# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Privacy budgets for observer-based consensus: truncated series, closed
forms and the simplified bound.
"""

from dp_consensus.exceptions import (
    DivergentSeriesException, SchedulePolicyException, PreconditionException,
    StrictIntervalException, NumericalException)
from django.conf import settings
from dataclasses import dataclass
from logging import getLogger
import math

logger = getLogger(__name__)

MAX_SERIES_TERMS = 1000000


def default_tolerance():
    return getattr(settings, 'DPC_SERIES_TOL', 1e-10)


@dataclass(frozen=True)
class AdjacencySpec:
    """
    Adjacent output trajectories: only agent i0 deviates, by at most
    m * h(k - k0) in l1-norm from step k0 on. A zero alpha is stored as
    the single-step profile h = (1,).
    """
    i0: int
    m: float
    k0: int = 0
    alpha: float = None
    h: tuple = None
    direction: tuple = None

    def __post_init__(self):
        if self.i0 is None or self.i0 < 0:
            raise PreconditionException(
                'Deviating agent index must be >= 0, got {}'.format(self.i0))
        if self.k0 < 0:
            raise PreconditionException(
                'Deviation start must be >= 0, got {}'.format(self.k0))
        if not math.isfinite(self.m) or self.m < 0:
            raise PreconditionException(
                'Deviation magnitude must be >= 0, got {}'.format(self.m))

        if (self.alpha is None) == (self.h is None):
            raise PreconditionException(
                'Exactly one of alpha or h describes the deviation profile')
        if self.alpha is not None:
            if not 0 <= self.alpha < 1:
                raise PreconditionException(
                    'Geometric profile needs alpha in [0, 1), got {}'.format(
                        self.alpha))
            if self.alpha == 0:
                object.__setattr__(self, 'alpha', None)
                object.__setattr__(self, 'h', (1.0,))
        else:
            profile = tuple(float(v) for v in self.h)
            if any(not math.isfinite(v) or v < 0 for v in profile):
                raise PreconditionException(
                    'Deviation profile entries must be finite and >= 0')
            object.__setattr__(self, 'h', profile)

    @property
    def geometric(self):
        return self.alpha is not None

    @property
    def rate(self):
        return self.alpha if self.geometric else 0.0

    @property
    def support(self):
        return None if self.geometric else len(self.h)

    def h_at(self, j):
        if j < 0:
            return 0.0
        if self.geometric:
            return self.alpha ** j
        return self.h[j] if j < len(self.h) else 0.0

    def deviation(self, k):
        return self.m * self.h_at(k - self.k0)

    def lead(self, k):
        """
        Bound on h at step k - k0 such that h(k + j - k0) <= lead * rate**j
        for every j >= 0; None while a finite profile is still active.
        """
        j = k - self.k0
        if self.geometric:
            return self.alpha ** j
        if j >= len(self.h):
            return 0.0
        return None

    def to_dict(self):
        data = {'i0': self.i0, 'k0': self.k0, 'm': self.m}
        if self.geometric:
            data['alpha'] = self.alpha
        else:
            data['h'] = list(self.h)
        if self.direction is not None:
            data['direction'] = list(self.direction)
        return data


@dataclass
class EpsilonReport:
    per_agent: list
    method: str
    truncation_residual: float = 0.0

    @property
    def epsilon(self):
        return max(self.per_agent, default=0.0)

    def to_dict(self):
        return {
            'per_agent': list(self.per_agent),
            'epsilon': self.epsilon,
            'method': self.method,
            'truncation_residual': self.truncation_residual,
        }


def _ceiling(schedule):
    if schedule.kind == 'exponential':
        return schedule.g
    if schedule.kind == 'polynomial':
        return 1.0
    raise SchedulePolicyException(
        'Privacy budgets need exponential or polynomial scales, '
        'got {}'.format(schedule.kind))


def _scaled_sum(K, s, schedule):
    """
    Upper bound of sum_{j>=0} s**j / p(K + j).
    """
    if s == 0:
        return 1.0 / schedule.p_at(K)
    if schedule.kind == 'exponential':
        ratio = s / schedule.g
        if ratio >= 1:
            return math.inf
        return schedule.g ** -K / (1.0 - ratio)

    power = schedule.power
    ratio = s * ((K + 2.0) / (K + 1.0)) ** power
    if ratio >= 1:
        return math.inf
    return (K + 1.0) ** power / (1.0 - ratio)


def tail_bound(K, state, contraction, forcing, direct, lead, rate,
               schedule):
    """
    Bounds sum_{j>=0} (X(K+j) + direct * f(K+j)) / p(K+j) for a scalar
    majorant with X(k+1) <= contraction * X(k) + forcing * f(k), given
    X(K) = state and f(K+j) <= lead * rate**j. A lead of None means the
    forcing is not yet bounded geometrically.
    """
    if lead is None:
        return math.inf
    if lead == 0:
        s, U = contraction, state
    else:
        ceiling = _ceiling(schedule)
        if rate > contraction:
            s = rate
        else:
            s = contraction + 0.25 * (ceiling - contraction)
        U = max(state, forcing * lead / (s - contraction))
    return (U + direct * lead) * _scaled_sum(K, s, schedule)


def _check_convergence(contraction, adj, schedule, name):
    if schedule.kind == 'exponential':
        ratio = max(contraction, adj.rate) / schedule.g
        if ratio >= 1:
            raise DivergentSeriesException(
                'Series diverges: max({}, alpha) / g = {:.6g} >= 1'.format(
                    name, ratio))
    elif schedule.kind == 'polynomial':
        if contraction >= 1:
            raise DivergentSeriesException(
                'Series diverges: {} = {:.6g} >= 1 under polynomial '
                'scales'.format(name, contraction))
    else:
        _ceiling(schedule)


def _check_strict(contraction, adj, schedule, name):
    if not adj.geometric:
        return
    upper = schedule.g if schedule.kind == 'exponential' else 1.0
    if not adj.alpha < contraction < upper:
        raise StrictIntervalException(
            '{} = {:.6g} outside the interval (alpha, g) = ({}, {})'.format(
                name, contraction, adj.alpha, upper))


def agent_series(contraction, gain, direct, adj, schedule, tol=None):
    """
    Sums m / c * sum_{k>=k0} (gain * b(k) + direct * h(k - k0)) / p(k) with
    b(k+1) = contraction * b(k) + h(k - k0), b(k0) = 0. Returns the value
    and the bound on the truncated remainder.
    """
    tol = default_tolerance() if tol is None else tol
    if adj.m == 0:
        return 0.0, 0.0
    if schedule.silent:
        raise DivergentSeriesException(
            'Noise scale c = 0 gives no privacy for m > 0')

    scale = adj.m / schedule.c
    terms = []
    beta = 0.0
    for k in range(adj.k0, adj.k0 + MAX_SERIES_TERMS):
        hk = adj.h_at(k - adj.k0)
        terms.append((gain * beta + direct * hk) / schedule.p_at(k))
        beta = contraction * beta + hk

        tail = tail_bound(k + 1, gain * beta, contraction, gain, direct,
                          adj.lead(k + 1), adj.rate, schedule)
        if scale * tail <= tol:
            logger.debug('Series truncated after {} terms'.format(
                len(terms)))
            return scale * math.fsum(terms), scale * tail

    raise NumericalException(
        'Series did not reach tolerance {} in {} terms'.format(
            tol, MAX_SERIES_TERMS))


def epsilon_series_full(moduli, L_norm, adj, schedules, tol=None,
                        strict=False):
    per_agent = []
    residual = 0.0
    for i, (l, schedule) in enumerate(zip(moduli, schedules)):
        _check_convergence(l, adj, schedule, 'l_{}'.format(i))
        if strict:
            _check_strict(l, adj, schedule, 'l_{}'.format(i))
        value, tail = agent_series(l, L_norm, 0.0, adj, schedule, tol)
        per_agent.append(value)
        residual = max(residual, tail)
    return EpsilonReport(per_agent, 'series', residual)


def epsilon_series_reduced(moduli, adj, schedules, tol=None, strict=False):
    per_agent = []
    residual = 0.0
    for i, ((v, w), schedule) in enumerate(zip(moduli, schedules)):
        _check_convergence(v, adj, schedule, 'v_{}'.format(i))
        if strict:
            _check_strict(v, adj, schedule, 'v_{}'.format(i))
        value, tail = agent_series(v, w, 1.0, adj, schedule, tol)
        per_agent.append(value)
        residual = max(residual, tail)
    return EpsilonReport(per_agent, 'series', residual)


def _check_positive_scale(c):
    if not c > 0:
        raise DivergentSeriesException(
            'Noise scale c must be positive, got {}'.format(c))


def epsilon_closed_exp_full(l, L_norm, m, alpha, c, g, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if g <= max(l, alpha):
        raise DivergentSeriesException(
            'Closed form diverges: g = {} <= max(l, alpha) = {}'.format(
                g, max(l, alpha)))
    return m * g * L_norm / (c * (g - l) * (g - alpha)) * g ** -k0


def epsilon_closed_exp_reduced(v, w, m, alpha, c, g, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if g <= max(v, alpha):
        raise DivergentSeriesException(
            'Closed form diverges: g = {} <= max(v, alpha) = {}'.format(
                g, max(v, alpha)))
    return m * g * (w + g - v) / (c * (g - v) * (g - alpha)) * g ** -k0


def _profile_sum(h, g):
    """
    sum_b h(b) g**-b for a geometric rate or an explicit profile.
    """
    if isinstance(h, AdjacencySpec):
        h = h.alpha if h.geometric else h.h
    if isinstance(h, (int, float)):
        if h >= g:
            raise DivergentSeriesException(
                'Profile sum diverges: alpha = {} >= g = {}'.format(h, g))
        return 1.0 / (1.0 - h / g)
    return math.fsum(v * g ** -b for b, v in enumerate(h))


def epsilon_closed_exp_general_full(l, L_norm, m, h, c, g, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if g <= l:
        raise DivergentSeriesException(
            'Closed form diverges: g = {} <= l = {}'.format(g, l))
    return L_norm * m / (c * (g - l)) * _profile_sum(h, g) * g ** -k0


def epsilon_closed_exp_general_reduced(v, w, m, h, c, g, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if g <= v:
        raise DivergentSeriesException(
            'Closed form diverges: g = {} <= v = {}'.format(g, v))
    return (m * (w + g - v) / (c * (g - v)) * _profile_sum(h, g) *
            g ** -k0)


def quadratic_bracket(b, l):
    return (b + 2) ** 2 - (2 * b * b + 6 * b + 3) * l + (b + 1) ** 2 * l * l


def _polynomial_sums(contraction, h, tol, k0=0):
    """
    Returns (sum_b h(b) bracket(b + k0) / (1 - l)**3,
    sum_b h(b) (b + k0 + 1)**2), truncating geometric profiles once the
    remainder drops below tol.
    """
    if isinstance(h, AdjacencySpec):
        h = h.alpha if h.geometric else h.h
    cube = (1.0 - contraction) ** 3

    if not isinstance(h, (int, float)):
        first = math.fsum(
            v * quadratic_bracket(b + k0, contraction)
            for b, v in enumerate(h))
        second = math.fsum(
            v * (b + k0 + 1) ** 2 for b, v in enumerate(h))
        return first / cube, second

    alpha = float(h)
    first, second = [], []
    for b in range(MAX_SERIES_TERMS):
        weight = alpha ** b
        first.append(
            weight * quadratic_bracket(b + k0, contraction) / cube)
        second.append(weight * (b + k0 + 1) ** 2)

        # Both summands grow at most by ((b + 2) / (b + 1))**2 per step.
        B = b + 1
        ratio = alpha * ((B + 2.0) / (B + 1.0)) ** 2
        if ratio < 1:
            lead = alpha ** B
            remainder = lead * (
                quadratic_bracket(B + k0, contraction) / cube +
                (B + k0 + 1) ** 2) / (1.0 - ratio)
            if remainder <= tol:
                return math.fsum(first), math.fsum(second)

    raise NumericalException('Polynomial closed form did not converge')


def epsilon_closed_poly_full(l, L_norm, m, h, c, tol=None, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if l >= 1:
        raise DivergentSeriesException(
            'Polynomial closed form needs l < 1, got {}'.format(l))
    tol = default_tolerance() if tol is None else tol
    first, _ = _polynomial_sums(
        l, h, tol * c / (m * max(L_norm, 1.0)), k0)
    return L_norm * m / c * first


def epsilon_closed_poly_reduced(v, w, m, h, c, tol=None, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if v >= 1:
        raise DivergentSeriesException(
            'Polynomial closed form needs v < 1, got {}'.format(v))
    tol = default_tolerance() if tol is None else tol
    first, second = _polynomial_sums(
        v, h, tol * c / (m * max(w, 1.0) * 2.0), k0)
    return m * w / c * first + m / c * second


def simplified_bound_full(l, L_norm, m, c, g, k0=0):
    if m == 0:
        return 0.0
    _check_positive_scale(c)
    if l >= g:
        raise DivergentSeriesException(
            'Simplified bound needs l < g, got l = {}, g = {}'.format(l, g))
    return m * g * L_norm / (c * (g - l) ** 2) * g ** -k0


def closed_form_report(kind, moduli, L_norm, adj, schedules, tol=None):
    """
    Per-agent closed forms matching the schedule family. Exponential
    scales use the geometric forms, or the general-profile forms for a
    finite profile; quadratic polynomial scales use the polynomial forms.
    Returns None when no closed form applies.
    """
    kinds = {(s.kind, s.power) for s in schedules}
    if kinds <= {('exponential', None)}:
        method = 'closed_exp'
    elif kinds == {('polynomial', 2)}:
        method = 'closed_poly'
    else:
        return None

    profile = adj.alpha if adj.geometric else adj.h
    per_agent = []
    for modulus, s in zip(moduli, schedules):
        if method == 'closed_exp' and adj.geometric and kind == 'full':
            value = epsilon_closed_exp_full(
                modulus, L_norm, adj.m, adj.alpha, s.c, s.g, adj.k0)
        elif method == 'closed_exp' and adj.geometric:
            value = epsilon_closed_exp_reduced(
                modulus[0], modulus[1], adj.m, adj.alpha, s.c, s.g,
                adj.k0)
        elif method == 'closed_exp' and kind == 'full':
            value = epsilon_closed_exp_general_full(
                modulus, L_norm, adj.m, profile, s.c, s.g, adj.k0)
        elif method == 'closed_exp':
            value = epsilon_closed_exp_general_reduced(
                modulus[0], modulus[1], adj.m, profile, s.c, s.g,
                adj.k0)
        elif kind == 'full':
            value = epsilon_closed_poly_full(
                modulus, L_norm, adj.m, profile, s.c, tol, adj.k0)
        else:
            value = epsilon_closed_poly_reduced(
                modulus[0], modulus[1], adj.m, profile, s.c, tol,
                adj.k0)
        per_agent.append(value)
    return EpsilonReport(per_agent, method)


def simplified_bound_report(moduli, L_norm, adj, schedules):
    if any(s.kind != 'exponential' for s in schedules):
        return None
    if adj.geometric and any(l < adj.alpha for l in moduli):
        return None
    return EpsilonReport(
        [simplified_bound_full(l, L_norm, adj.m, s.c, s.g, adj.k0)
         for l, s in zip(moduli, schedules)], 'simplified_bound')
