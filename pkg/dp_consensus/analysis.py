# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Consensus and observer condition checks, contraction moduli, theoretical
mean-square rates and the transformed disagreement dynamics.
"""

from dp_consensus.exceptions import (
    SchedulePolicyException, NumericalException)
from dp_consensus.graphs import connected_spectrum, laplacian, degrees
from dp_consensus.matops import (
    kron, induced_one_norm, spectral_radius, is_stable)
from dp_consensus.noise import is_summable
from dataclasses import dataclass, field
from logging import getLogger
import numpy as np

logger = getLogger(__name__)


@dataclass
class ConditionReport:
    rho_observer: float
    rho_consensus: float
    summable_noise: list
    rho_consensus_canonical: float = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (is_stable(self.rho_observer) and
                       is_stable(self.rho_consensus) and
                       all(self.summable_noise))

    def to_dict(self):
        data = {
            'rho_observer': self.rho_observer,
            'rho_consensus': self.rho_consensus,
            'summable_noise': list(self.summable_noise),
            'pass': self.passed,
        }
        if self.rho_consensus_canonical is not None:
            data['rho_consensus_canonical'] = self.rho_consensus_canonical
        return data


@dataclass
class ContractionModuli:
    full: list = None
    reduced: list = None

    def to_dict(self):
        if self.full is not None:
            return {'l': list(self.full)}
        return {'v': [v for v, _ in self.reduced],
                'w': [w for _, w in self.reduced]}


@dataclass
class StabilizationReport:
    rho_observer: float
    rho_closed_loop: float
    summable_noise: bool

    @property
    def passed(self):
        return (is_stable(self.rho_observer) and
                is_stable(self.rho_closed_loop) and self.summable_noise)


@dataclass
class TransformedSystem:
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    Mtilde: np.ndarray
    Psi: np.ndarray
    Lambda: np.ndarray
    n: int

    @property
    def Phi(self):
        return self.Psi[:, 1:]

    def project(self, stacked):
        """
        Maps a stacked network vector (N*n,) or an (N, n) array of agent
        vectors onto the N-1 disagreement coordinates.
        """
        stacked = np.asarray(stacked, dtype=float)
        if stacked.ndim == 2:
            stacked = stacked.reshape(-1)
        N = self.Psi.shape[0]
        centered = stacked.reshape(N, self.n)
        centered = centered - centered.mean(axis=0)
        return (self.Phi.T @ centered).reshape(-1)

    def propagate(self, xi, psi, eta):
        """
        One step of xi(k+1) = R1 xi + R2 psi + Mtilde eta, with eta the
        stacked noise of all N agents.
        """
        eta = np.asarray(eta, dtype=float).reshape(-1)
        return self.R1 @ xi + self.R2 @ psi + self.Mtilde @ eta


def consensus_matrix(A, BK, Lambda):
    size = Lambda.shape[0]
    return kron(np.eye(size), A) - kron(Lambda, BK)


def _summability(schedules):
    return [is_summable(s) for s in schedules]


def check_full_conditions(plant, L, K, graph, schedules):
    spec = connected_spectrum(graph)
    L = np.asarray(L, dtype=float)
    K = np.asarray(K, dtype=float)

    rho_observer = spectral_radius(plant.A - L @ plant.C, 'A - LC')
    rho_consensus = spectral_radius(
        consensus_matrix(plant.A, plant.B @ K, spec.Lambda),
        'I x A - Lambda x BK')
    report = ConditionReport(
        rho_observer, rho_consensus, _summability(schedules))
    logger.info('Full-order conditions: observer {:.6g}, consensus {:.6g}, '
                'pass {}'.format(rho_observer, rho_consensus, report.passed))
    return report


def check_reduced_conditions(rf, K, graph, schedules, plant):
    spec = connected_spectrum(graph)
    K = np.asarray(K, dtype=float)

    rho_observer = spectral_radius(rf.observer_matrix, 'A11 - Lbar A21')
    rho_consensus = spectral_radius(
        consensus_matrix(plant.A, plant.B @ K, spec.Lambda),
        'I x A - Lambda x BK')
    rho_canonical = spectral_radius(
        consensus_matrix(rf.Abar, rf.Bbar @ K, spec.Lambda),
        'I x Abar - Lambda x Bbar K')

    if is_stable(rho_consensus) != is_stable(rho_canonical):
        logger.warning(
            'Consensus radius {:.6g} in plant coordinates disagrees with '
            '{:.6g} in canonical coordinates'.format(
                rho_consensus, rho_canonical))

    report = ConditionReport(
        rho_observer, rho_consensus, _summability(schedules),
        rho_consensus_canonical=rho_canonical)
    logger.info('Reduced-order conditions: observer {:.6g}, consensus '
                '{:.6g}, pass {}'.format(
                    rho_observer, rho_consensus, report.passed))
    return report


def check_stabilization(plant, L, K, schedule):
    """
    Single-agent observer-based stabilization: A - LC and A - BK stable
    with a summable noise schedule.
    """
    L = np.asarray(L, dtype=float)
    K = np.asarray(K, dtype=float)
    return StabilizationReport(
        spectral_radius(plant.A - L @ plant.C, 'A - LC'),
        spectral_radius(plant.A - plant.B @ K, 'A - BK'),
        is_summable(schedule))


def check_reduced_stabilization(rf, K, schedule):
    """
    Single-agent stabilization with a reduced-order observer: the
    estimator A11 - Lbar A21 and Abar - Bbar K stable with a summable
    noise schedule.
    """
    K = np.asarray(K, dtype=float)
    return StabilizationReport(
        spectral_radius(rf.observer_matrix, 'A11 - Lbar A21'),
        spectral_radius(rf.Abar - rf.Bbar @ K, 'Abar - Bbar K'),
        is_summable(schedule))


def full_moduli(plant, L, K, degree_list):
    L = np.asarray(L, dtype=float)
    BK = plant.B @ np.asarray(K, dtype=float)
    observer = plant.A - L @ plant.C
    return [induced_one_norm(observer - d * BK) for d in degree_list]


def reduced_moduli(rf, K, degree_list):
    K1, K2 = _split(K, rf.q)
    BK1 = rf.B1 @ K1
    BK2 = rf.B1 @ K2
    return [(induced_one_norm(rf.A11 - d * BK1),
             induced_one_norm(rf.A12 - d * BK2)) for d in degree_list]


def contraction_moduli(plant, K, degree_list, L=None, rf=None):
    if rf is not None:
        return ContractionModuli(reduced=reduced_moduli(rf, K, degree_list))
    return ContractionModuli(full=full_moduli(plant, L, K, degree_list))


def _split(K, q):
    K = np.asarray(K, dtype=float)
    width = K.shape[1] - q
    return K[:, :width], K[:, width:]


def theoretical_ms_rate(kind, plant, K, graph, schedules, L=None, rf=None):
    """
    Three-way maximum of consensus radius, observer radius and the
    largest noise decay factor. Silent schedules contribute nothing.
    """
    for s in schedules:
        if s.kind != 'exponential':
            raise SchedulePolicyException(
                'Rate theorem requires exponential scales, got {}'.format(
                    s.kind))

    if kind == 'reduced':
        report = check_reduced_conditions(rf, K, graph, schedules, plant)
    else:
        report = check_full_conditions(plant, L, K, graph, schedules)

    noise_rate = max([s.g for s in schedules if not s.silent], default=0.0)
    return max(report.rho_consensus, report.rho_observer, noise_rate)


def _orthonormal_basis(graph):
    N = graph.node_count
    try:
        values, vectors = np.linalg.eigh(laplacian(graph).astype(float))
    except np.linalg.LinAlgError as ex:
        raise NumericalException(
            'Laplacian eigenvectors did not converge: {}'.format(ex))

    Psi = np.empty((N, N))
    Psi[:, 0] = 1.0 / np.sqrt(N)
    Psi[:, 1:] = vectors[:, 1:]
    for j in range(1, N):
        nonzero = np.flatnonzero(np.abs(Psi[:, j]) > 1e-12)
        if len(nonzero) and Psi[nonzero[0], j] < 0:
            Psi[:, j] = -Psi[:, j]

    if np.max(np.abs(Psi.T @ Psi - np.eye(N))) > 1e-10:
        raise NumericalException('Laplacian eigenvectors are not orthonormal')
    return values, Psi


def build_transformed(plant, L, K, graph):
    spec = connected_spectrum(graph)
    _, Psi = _orthonormal_basis(graph)
    N = graph.node_count
    n = plant.n
    L = np.asarray(L, dtype=float)
    BK = plant.B @ np.asarray(K, dtype=float)
    Lambda = spec.Lambda

    adjacency = graph.adjacency.astype(float)
    J = np.full((N, N), 1.0 / N)
    Phi = Psi[:, 1:]
    return TransformedSystem(
        R1=consensus_matrix(plant.A, BK, Lambda),
        R2=kron(Lambda, BK),
        R3=kron(np.eye(N - 1), plant.A - L @ plant.C),
        Mtilde=kron(Phi.T @ (adjacency - J @ adjacency), BK),
        Psi=Psi, Lambda=Lambda, n=n)


def compact_step(plant, K, graph, x, e, eta):
    """
    x(k+1) = [(I x A) - (L_G x BK)] x + (L_G x BK) e + (A_G x BK) eta on
    stacked (N*n,) vectors.
    """
    N = graph.node_count
    BK = plant.B @ np.asarray(K, dtype=float)
    lap = laplacian(graph).astype(float)
    system = kron(np.eye(N), plant.A) - kron(lap, BK)
    return (system @ x + kron(lap, BK) @ e +
            kron(graph.adjacency.astype(float), BK) @ eta)


def disagreement_step(plant, K, graph, delta, rho, eta):
    """
    The compact recursion restricted to the disagreement subspace:
    delta(k+1) = [(I x A) - (L_G x BK)] delta + (L_G x BK) rho
    + ((I - J) A_G x BK) eta, projected back onto that subspace.
    """
    N = graph.node_count
    BK = plant.B @ np.asarray(K, dtype=float)
    lap = laplacian(graph).astype(float)
    adjacency = graph.adjacency.astype(float)
    centering = np.eye(N) - np.full((N, N), 1.0 / N)
    system = kron(np.eye(N), plant.A) - kron(lap, BK)
    delta_next = (system @ delta + kron(lap, BK) @ rho +
                  kron(centering @ adjacency, BK) @ eta)
    return kron(centering, np.eye(plant.n)) @ delta_next


def degree_summary(graph):
    degree_list = degrees(graph)
    return {'min': min(degree_list), 'max': max(degree_list)}
