# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Deterministic privacy ledger: propagates the worst-case observer
deviation of the deviating agent and sums its noise-scaled l1-norm.
"""

from dp_consensus.exceptions import (
    DivergentSeriesException, PreconditionException, SchedulePolicyException)
from dp_consensus.graphs import degrees
from dp_consensus.matops import induced_one_norm
from dp_consensus.privacy import (
    tail_bound, epsilon_closed_exp_full, epsilon_closed_exp_reduced,
    epsilon_series_full, epsilon_series_reduced)
from dataclasses import dataclass
from logging import getLogger
import numpy as np
import math

logger = getLogger(__name__)

RELATIVE_SLACK = 1e-9


@dataclass
class LedgerResult:
    S: float
    eps_ref: float
    tail: float
    terms: np.ndarray
    beta: np.ndarray

    @property
    def holds(self):
        return self.S <= self.eps_ref * (1 + RELATIVE_SLACK) + 1e-12

    @property
    def slack(self):
        return self.eps_ref - self.S

    def to_dict(self):
        return {'S': self.S, 'eps_ref': self.eps_ref, 'holds': self.holds,
                'tail': self.tail, 'slack': self.slack,
                'horizon': len(self.terms) - 1}


def deviation_direction(adj, q):
    """
    Unit l1-norm output direction of the deviation, e_1 by default.
    """
    if adj.direction is None:
        direction = np.zeros(q)
        direction[0] = 1.0
        return direction

    direction = np.asarray(adj.direction, dtype=float)
    if direction.shape != (q,):
        raise PreconditionException(
            'Deviation direction has {} entries for {} outputs'.format(
                direction.size, q))
    norm = np.sum(np.abs(direction))
    if norm == 0:
        raise PreconditionException('Deviation direction is zero')
    return direction / norm


def propagation_matrices(plant, K, degree, L=None, rf=None):
    """
    Returns (M, W) with beta(k+1) = M beta(k) + W dy(k).
    """
    K = np.asarray(K, dtype=float)
    if rf is None:
        L = np.asarray(L, dtype=float)
        return plant.A - L @ plant.C - degree * plant.B @ K, L

    width = K.shape[1] - rf.q
    K1, K2 = K[:, :width], K[:, width:]
    return rf.A11 - degree * rf.B1 @ K1, rf.A12 - degree * rf.B1 @ K2


def _reference_epsilon(M, W, reduced, adj, schedule, tol):
    contraction = induced_one_norm(M)
    gain = induced_one_norm(W)
    if schedule.kind == 'exponential' and adj.geometric:
        if reduced:
            return epsilon_closed_exp_reduced(
                contraction, gain, adj.m, adj.alpha, schedule.c, schedule.g,
                adj.k0)
        return epsilon_closed_exp_full(
            contraction, gain, adj.m, adj.alpha, schedule.c, schedule.g,
            adj.k0)
    if reduced:
        report = epsilon_series_reduced(
            [(contraction, gain)], adj, [schedule], tol)
    else:
        report = epsilon_series_full([contraction], gain, adj, [schedule],
                                     tol)
    return report.epsilon


def privacy_ledger(plant, K, graph, adj, schedules, horizon, L=None,
                   rf=None, include_tail=True, tol=None):
    """
    Returns the LedgerResult for agent adj.i0 over steps 0..horizon, with
    a bound on the remainder beyond the horizon added to S when
    include_tail is set.
    """
    reduced = rf is not None
    i0 = adj.i0
    if i0 >= graph.node_count:
        raise PreconditionException(
            'Deviating agent {} outside {} agents'.format(
                i0, graph.node_count))
    schedule = schedules[i0]
    q = plant.q

    if adj.m > 0 and schedule.silent:
        raise DivergentSeriesException(
            'Agent {} sends noiseless messages, so its budget is '
            'unbounded'.format(i0))

    if include_tail and schedule.kind == 'custom':
        raise SchedulePolicyException(
            'Ledger tail needs exponential or polynomial scales')

    if include_tail and not adj.geometric:
        covered = adj.k0 + len(adj.h)
        if horizon < covered:
            logger.info('Ledger horizon extended from {} to {}'.format(
                horizon, covered))
            horizon = covered

    M, W = propagation_matrices(plant, K, degrees(graph)[i0], L=L, rf=rf)
    direction = deviation_direction(adj, q)
    scales = schedule.scales(horizon + 1) if not schedule.silent else None

    state = np.zeros(M.shape[0])
    terms = np.zeros(horizon + 1)
    beta = np.zeros((horizon + 1, M.shape[0] + (q if reduced else 0)))
    for k in range(horizon + 1):
        dy = adj.deviation(k) * direction
        norm = np.sum(np.abs(state))
        if reduced:
            norm += np.sum(np.abs(dy))
            beta[k] = np.concatenate([state, dy])
        else:
            beta[k] = state
        if norm > 0:
            terms[k] = norm / scales[k]
        state = M @ state + W @ dy

    if adj.m == 0:
        return LedgerResult(0.0, 0.0, 0.0, terms, beta)

    tail = 0.0
    if include_tail:
        contraction = induced_one_norm(M)
        K_next = horizon + 1
        if schedule.kind == 'exponential' and max(
                contraction, adj.rate) >= schedule.g:
            raise DivergentSeriesException(
                'Ledger tail diverges: max(|M|, alpha) / g = {:.6g}'.format(
                    max(contraction, adj.rate) / schedule.g))
        tail = tail_bound(
            K_next, np.sum(np.abs(state)), contraction,
            adj.m * induced_one_norm(W), adj.m if reduced else 0.0,
            adj.lead(K_next), adj.rate, schedule) / schedule.c
        if not math.isfinite(tail):
            raise DivergentSeriesException(
                'Ledger tail bound is not finite at horizon {}'.format(
                    horizon))

    S = math.fsum(terms) + tail
    eps_ref = _reference_epsilon(M, W, reduced, adj, schedule, tol)
    result = LedgerResult(S, eps_ref, tail, terms, beta)
    log = logger.info if result.holds else logger.warning
    log('Ledger for agent {}: S = {:.10g}, epsilon = {:.10g}, '
        'holds {}'.format(i0, S, eps_ref, result.holds))
    return result
