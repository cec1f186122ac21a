# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Closed-loop simulation of the observer-based private consensus network,
Monte Carlo mean-square estimation, rate fitting and the paired
adjacent-trajectory histogram experiment.

Agent states are held in a consensus frame: the network mean trajectory
is propagated as a separate offset and agents carry their deviation from
it. Every update depends only on differences between agents, so the
frame is exact in exact arithmetic and keeps the disagreement and
observer errors accurate when the open-loop plant is unstable.
"""

from dp_consensus.exceptions import (
    PreconditionException, RateEstimationException)
from dp_consensus.noise import laplace_noise
from dp_consensus.plant import (
    FullObserver, full_observer_step, reduced_observer_step, network_inputs)
from dp_consensus.privacy.ledger import deviation_direction, privacy_ledger
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from django.conf import settings
from logging import getLogger
import numpy as np
import math

logger = getLogger(__name__)

OVERFLOW_LIMIT = 1e150
CI_QUANTILE = 1.96


@dataclass
class ScenarioConfig:
    graph: object
    plant: object
    K: np.ndarray
    schedules: list
    x0: np.ndarray
    xhat0: np.ndarray
    horizon: int
    runs: int
    seed: int
    observer: str = 'full'
    L: np.ndarray = None
    rf: object = None
    adjacency: object = None
    eps_star: float = None
    tol: float = None
    strict_paper: bool = False
    echo: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.graph.node_count

    @property
    def reduced(self):
        return self.observer == 'reduced'


@dataclass
class SimTrace:
    """
    States are recorded relative to offset(k), the network mean
    trajectory; absolute states are offset + recorded value. For the
    reduced observer all states are canonical coordinates, xhat stacks
    the estimate with the measured output and e is the reduced error.
    """
    offset: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    theta: np.ndarray
    eta: np.ndarray
    u: np.ndarray
    e: np.ndarray
    delta: np.ndarray
    truncated: bool = False
    beta: np.ndarray = None

    @property
    def steps(self):
        return self.x.shape[0]

    @property
    def norm_delta(self):
        return np.sqrt(np.sum(self.delta ** 2, axis=(1, 2)))

    @property
    def norm_e(self):
        return np.sqrt(np.sum(self.e ** 2, axis=(1, 2)))

    def absolute(self, name):
        return self.offset[:, None, :] + getattr(self, name)


@dataclass
class MsEstimate:
    mean_delta_sq: np.ndarray
    ci_delta: np.ndarray
    mean_e_sq: np.ndarray
    ci_e: np.ndarray
    runs: int

    @property
    def horizon(self):
        return len(self.mean_delta_sq) - 1


@dataclass
class HistogramResult:
    edges: np.ndarray
    counts_nominal: np.ndarray
    counts_adjacent: np.ndarray
    max_ratio: float
    epsilon: float
    bound: float
    k_star: int
    component: int

    @property
    def holds(self):
        return self.max_ratio <= self.bound

    def to_dict(self):
        return {'k_star': self.k_star, 'component': self.component,
                'max_ratio': self.max_ratio, 'epsilon': self.epsilon,
                'bound': self.bound, 'holds': self.holds,
                'bins': len(self.counts_nominal)}


def _noise(cfg, run, steps, dim):
    eta = np.empty((steps, cfg.N, dim))
    for i, schedule in enumerate(cfg.schedules):
        scales = np.zeros(steps) if schedule.silent else schedule.scales(
            steps)
        eta[:, i, :] = laplace_noise(cfg.seed, run, i, scales, dim)
    return eta


def _overflowed(*arrays):
    return any(not np.all(np.isfinite(a)) or np.max(np.abs(a)) >
               OVERFLOW_LIMIT for a in arrays)


def simulate(cfg, run=0, counterfactual=False, horizon=None):
    """
    Simulates one run of cfg. With counterfactual set, a shadow observer
    of agent cfg.adjacency.i0 is fed the adjacent output while receiving
    the same messages, and trace.beta holds the nominal minus shadow
    message difference.
    """
    H = cfg.horizon if horizon is None else horizon
    if H < 1:
        raise PreconditionException('Horizon must be >= 1, got {}'.format(H))
    if counterfactual and cfg.adjacency is None:
        raise PreconditionException('Counterfactual run needs an adjacency')

    if cfg.reduced:
        return _simulate_reduced(cfg, run, H, counterfactual)
    return _simulate_full(cfg, run, H, counterfactual)


def _recorder(steps, N, n, r, err_dim, beta_dim):
    return {
        'offset': np.zeros((steps, n)),
        'x': np.zeros((steps, N, n)),
        'xhat': np.zeros((steps, N, n)),
        'theta': np.zeros((steps, N, n)),
        'eta': np.zeros((steps, N, n)),
        'u': np.zeros((steps, N, r)),
        'e': np.zeros((steps, N, err_dim)),
        'delta': np.zeros((steps, N, n)),
        'beta': np.zeros((steps, beta_dim)) if beta_dim else None,
    }


def _finish(record, recorded, truncated):
    data = {}
    for name, values in record.items():
        data[name] = None if values is None else values[:recorded]
    if truncated:
        logger.warning('Simulation truncated by overflow after {} '
                       'steps'.format(recorded))
    return SimTrace(truncated=truncated, **data)


def _simulate_full(cfg, run, H, counterfactual):
    plant = cfg.plant
    A, B, C = plant.A, plant.B, plant.C
    obs = FullObserver(cfg.L)
    adjacency = cfg.graph.adjacency
    N, n = cfg.N, plant.n
    eta = _noise(cfg, run, H + 1, n)

    offset = np.mean(cfg.x0, axis=0)
    x = cfg.x0 - offset
    xhat = cfg.xhat0 - offset

    adj = cfg.adjacency if counterfactual else None
    if adj is not None:
        i0 = adj.i0
        neighbors = adjacency[i0].astype(float)
        direction = deviation_direction(adj, plant.q)
        shadow = xhat[i0].copy()

    record = _recorder(H + 1, N, n, plant.r, n, n if adj else 0)
    truncated = False
    recorded = 0
    for k in range(H + 1):
        y = x @ C.T
        theta = xhat + eta[k]
        u = network_inputs(cfg.K, adjacency, theta, xhat)

        record['offset'][k] = offset
        record['x'][k] = x
        record['xhat'][k] = xhat
        record['theta'][k] = theta
        record['eta'][k] = eta[k]
        record['u'][k] = u
        record['e'][k] = x - xhat
        record['delta'][k] = x - x.mean(axis=0)
        if adj is not None:
            record['beta'][k] = xhat[i0] - shadow
        recorded = k + 1
        if k == H:
            break

        x_next = x @ A.T + u @ B.T
        xhat_next = full_observer_step(plant, obs, xhat, u, y)
        if adj is not None:
            u_shadow = cfg.K @ (neighbors @ theta - neighbors.sum() * shadow)
            y_shadow = y[i0] - adj.deviation(k) * direction
            shadow = full_observer_step(plant, obs, shadow, u_shadow,
                                        y_shadow)

        shift = x_next.mean(axis=0)
        x = x_next - shift
        xhat = xhat_next - shift
        offset = offset @ A.T + shift
        if adj is not None:
            shadow = shadow - shift
        if _overflowed(x, xhat, offset):
            truncated = True
            break

    return _finish(record, recorded, truncated)


def _simulate_reduced(cfg, run, H, counterfactual):
    rf = cfg.rf
    adjacency = cfg.graph.adjacency
    N, n, q = cfg.N, rf.n, rf.q
    nq = n - q
    Abar, Bbar = rf.Abar, rf.Bbar
    eta = _noise(cfg, run, H + 1, n)

    xbar0 = rf.to_canonical(cfg.x0)
    offset = np.mean(xbar0, axis=0)
    x = xbar0 - offset
    xhat1 = cfg.xhat0 - offset[:nq]

    adj = cfg.adjacency if counterfactual else None
    if adj is not None:
        i0 = adj.i0
        neighbors = adjacency[i0].astype(float)
        direction = deviation_direction(adj, q)
        shadow = xhat1[i0].copy()

    record = _recorder(H + 1, N, n, Bbar.shape[1], nq, n if adj else 0)
    truncated = False
    recorded = 0
    for k in range(H + 1):
        y = x[:, nq:]
        own = np.hstack([xhat1, y])
        theta = own + eta[k]
        u = network_inputs(cfg.K, adjacency, theta, own)

        record['offset'][k] = offset
        record['x'][k] = x
        record['xhat'][k] = own
        record['theta'][k] = theta
        record['eta'][k] = eta[k]
        record['u'][k] = u
        record['e'][k] = x[:, :nq] - xhat1
        record['delta'][k] = x - x.mean(axis=0)
        if adj is not None:
            dy = adj.deviation(k) * direction
            record['beta'][k] = np.concatenate([xhat1[i0] - shadow, dy])
        recorded = k + 1
        if k == H:
            break

        x_next = x @ Abar.T + u @ Bbar.T
        y_next = x_next[:, nq:]
        xhat1_next = reduced_observer_step(rf, xhat1, u, y, y_next)
        if adj is not None:
            # The shadow shares the nominal estimation error sequence.
            ybar = y_next[i0] - y[i0] @ rf.A22.T - u[i0] @ rf.B2.T
            innovation = ybar - xhat1[i0] @ rf.A21.T
            y_shadow = y[i0] - dy
            own_shadow = np.concatenate([shadow, y_shadow])
            u_shadow = cfg.K @ (neighbors @ theta -
                                neighbors.sum() * own_shadow)
            shadow = (shadow @ rf.A11.T + y_shadow @ rf.A12.T +
                      u_shadow @ rf.B1.T + innovation @ rf.Lbar.T)

        shift = x_next.mean(axis=0)
        x = x_next - shift
        xhat1 = xhat1_next - shift[:nq]
        offset = offset @ Abar.T + shift
        if adj is not None:
            shadow = shadow - shift[:nq]
        if _overflowed(x, xhat1, offset):
            truncated = True
            break

    return _finish(record, recorded, truncated)


def _run_norms(args):
    cfg, run = args
    trace = simulate(cfg, run=run)
    steps = cfg.horizon + 1
    delta_sq = np.full(steps, np.inf)
    e_sq = np.full(steps, np.inf)
    delta_sq[:trace.steps] = trace.norm_delta ** 2
    e_sq[:trace.steps] = trace.norm_e ** 2
    return delta_sq, e_sq, trace.truncated


def _aggregate(samples):
    """
    Per-step mean and 95% normal half-width with compensated sums taken
    in run order.
    """
    R = samples.shape[0]
    means = np.empty(samples.shape[1])
    widths = np.empty(samples.shape[1])
    for k in range(samples.shape[1]):
        column = samples[:, k]
        if not np.all(np.isfinite(column)):
            means[k] = widths[k] = np.inf
            continue
        mean = math.fsum(column) / R
        var = math.fsum((column - mean) ** 2) / (R - 1)
        means[k] = mean
        widths[k] = CI_QUANTILE * math.sqrt(var / R)
    return means, widths


def monte_carlo(cfg, runs=None, workers=1):
    R = cfg.runs if runs is None else runs
    if R < 2:
        raise PreconditionException(
            'Monte Carlo needs at least 2 runs, got {}'.format(R))

    jobs = [(cfg, run) for run in range(R)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_norms, jobs))
    else:
        results = [_run_norms(job) for job in jobs]

    truncated = sum(1 for _, _, t in results if t)
    if truncated:
        logger.warning('{} of {} runs truncated by overflow'.format(
            truncated, R))

    mean_delta, ci_delta = _aggregate(np.array([d for d, _, _ in results]))
    mean_e, ci_e = _aggregate(np.array([e for _, e, _ in results]))
    logger.info('Monte Carlo over {} runs, horizon {}'.format(
        R, cfg.horizon))
    return MsEstimate(mean_delta, ci_delta, mean_e, ci_e, R)


def default_window(horizon):
    lo, hi = getattr(settings, 'DPC_FIT_WINDOW', (50, 150))
    hi = min(hi, horizon)
    lo = min(lo, max(hi - 1, 0))
    return lo, hi


def empirical_rate(ms, window=None):
    """
    exp(slope / 2) of a least-squares fit of log E|delta(k)|^2 on k.
    """
    k_lo, k_hi = default_window(ms.horizon) if window is None else window
    if not 0 <= k_lo < k_hi <= ms.horizon:
        raise RateEstimationException(
            'Fit window [{}, {}] outside horizon {}'.format(
                k_lo, k_hi, ms.horizon))

    values = np.asarray(ms.mean_delta_sq[k_lo:k_hi + 1], dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise RateEstimationException(
            'Mean-square values reach the noise floor inside [{}, {}]; '
            'try a smaller k_hi'.format(k_lo, k_hi))

    steps = np.arange(k_lo, k_hi + 1, dtype=float)
    slope = np.polyfit(steps, np.log(values), 1)[0]
    return float(np.exp(slope / 2.0))


def histogram_experiment(cfg, runs, k_star, component=0):
    """
    Paired nominal/adjacent runs sharing noise substreams; compares the
    histograms of the deviating agent's message component at k_star.
    """
    adj = cfg.adjacency
    if adj is None:
        raise PreconditionException('Histogram experiment needs adjacency')
    min_runs = getattr(settings, 'DPC_HISTOGRAM_MIN_RUNS', 1000)
    if runs < min_runs:
        raise PreconditionException(
            'Histogram experiment needs at least {} runs, got {}'.format(
                min_runs, runs))
    if not 0 <= component < cfg.plant.n:
        raise PreconditionException(
            'Component {} outside state dimension {}'.format(
                component, cfg.plant.n))

    nominal = np.empty(runs)
    adjacent = np.empty(runs)
    for run in range(runs):
        trace = simulate(cfg, run=run, counterfactual=True,
                         horizon=max(k_star, 1))
        theta = trace.offset[k_star] + trace.theta[k_star, adj.i0]
        nominal[run] = theta[component]
        adjacent[run] = (theta - trace.beta[k_star])[component]

    edges = np.histogram_bin_edges(
        np.concatenate([nominal, adjacent]), bins='fd')
    counts_nominal, _ = np.histogram(nominal, bins=edges)
    counts_adjacent, _ = np.histogram(adjacent, bins=edges)

    min_count = getattr(settings, 'DPC_HISTOGRAM_MIN_BIN', 50)
    max_ratio = 1.0
    for c1, c2 in zip(counts_nominal, counts_adjacent):
        if c1 + c2 < min_count:
            continue
        ratio = math.inf if min(c1, c2) == 0 else max(c1 / c2, c2 / c1)
        max_ratio = max(max_ratio, ratio)

    ledger = privacy_ledger(
        cfg.plant, cfg.K, cfg.graph, adj, cfg.schedules, k_star, L=cfg.L,
        rf=cfg.rf, include_tail=False)
    slack = getattr(settings, 'DPC_HISTOGRAM_SLACK', 1.2)
    bound = math.exp(ledger.S) * slack
    result = HistogramResult(
        edges, counts_nominal, counts_adjacent, max_ratio, ledger.S, bound,
        k_star, component)
    logger.info('Histogram at k = {}: max ratio {:.4g}, bound {:.4g}'.format(
        k_star, max_ratio, bound))
    return result
