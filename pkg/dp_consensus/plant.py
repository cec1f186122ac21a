# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Agent dynamics, full- and reduced-order observers and the distributed
controller. Step functions accept a single state vector or a stack of
agent states along the leading axis.
"""

from dp_consensus.exceptions import (
    DimensionMismatchException, RankDeficiencyException)
from dp_consensus.matops import as_matrix, matrix_rank
from dataclasses import dataclass, replace
from logging import getLogger
import numpy as np
import scipy.linalg

logger = getLogger(__name__)

CANONICAL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class LtiPlant:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, 'A')
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatchException(
                'A must be square, got {}x{}'.format(*A.shape))
        n = A.shape[0]
        B = as_matrix(self.B, 'B')
        if B.shape[0] != n:
            raise DimensionMismatchException(
                'B has {} rows but A is {}x{}'.format(B.shape[0], n, n))
        C = as_matrix(self.C, 'C', rows=1 if np.ndim(self.C) == 1 else None)
        if C.shape[1] != n:
            raise DimensionMismatchException(
                'C has {} columns but A is {}x{}'.format(C.shape[1], n, n))
        if C.shape[0] > n:
            raise DimensionMismatchException(
                'C has {} outputs for {} states'.format(C.shape[0], n))
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def r(self):
        return self.B.shape[1]

    @property
    def q(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class FullObserver:
    L: np.ndarray

    def check(self, plant):
        L = as_matrix(self.L, 'L')
        if L.shape != (plant.n, plant.q):
            raise DimensionMismatchException(
                'L is {}x{} but the plant needs {}x{}'.format(
                    L.shape[0], L.shape[1], plant.n, plant.q))
        return L


@dataclass(frozen=True)
class GainSet:
    K: np.ndarray

    def check(self, plant):
        K = as_matrix(self.K, 'K')
        if K.shape != (plant.r, plant.n):
            raise DimensionMismatchException(
                'K is {}x{} but the plant needs {}x{}'.format(
                    K.shape[0], K.shape[1], plant.r, plant.n))
        return K

    def split(self, q):
        """
        Returns (K1, K2) with K2 acting on the last q coordinates.
        """
        K = np.asarray(self.K, dtype=float)
        width = K.shape[1] - q
        if width < 0:
            raise DimensionMismatchException(
                'Cannot split a {}-column gain at q={}'.format(K.shape[1], q))
        return K[:, :width], K[:, width:]


@dataclass(frozen=True)
class ReducedForm:
    P: np.ndarray
    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    Lbar: np.ndarray = None

    @property
    def q(self):
        return self.A22.shape[0]

    @property
    def n(self):
        return self.A11.shape[0] + self.q

    @property
    def Abar(self):
        return np.block([[self.A11, self.A12], [self.A21, self.A22]])

    @property
    def Bbar(self):
        return np.vstack([self.B1, self.B2])

    @property
    def Cbar(self):
        return np.hstack([np.zeros((self.q, self.n - self.q)),
                          np.eye(self.q)])

    @property
    def observer_matrix(self):
        return self.A11 - self._gain() @ self.A21

    def with_gain(self, Lbar):
        Lbar = as_matrix(Lbar, 'Lbar', rows=self.n - self.q)
        if Lbar.shape[1] != self.q:
            raise DimensionMismatchException(
                'Lbar is {}x{} but the reduced form needs {}x{}'.format(
                    Lbar.shape[0], Lbar.shape[1], self.n - self.q, self.q))
        return replace(self, Lbar=Lbar)

    def to_canonical(self, x):
        return np.asarray(x, dtype=float) @ self.P.T

    def from_canonical(self, xbar):
        return np.linalg.solve(self.P, np.asarray(xbar, dtype=float).T).T

    def _gain(self):
        if self.Lbar is None:
            raise DimensionMismatchException('Reduced observer gain is unset')
        return self.Lbar


def _split_blocks(P, Abar, Bbar, q):
    nq = Abar.shape[0] - q
    return ReducedForm(
        P=P, A11=Abar[:nq, :nq], A12=Abar[:nq, nq:], A21=Abar[nq:, :nq],
        A22=Abar[nq:, nq:], B1=Bbar[:nq, :], B2=Bbar[nq:, :])


def _default_transform(C):
    q, n = C.shape
    _, _, pivots = scipy.linalg.qr(C, pivoting=True)
    complement = sorted(int(j) for j in pivots[q:])
    basis = np.eye(n)[complement, :]
    return np.vstack([basis, C])


def canonicalize_output(plant, P=None):
    """
    Returns the ReducedForm of the plant in coordinates where the output
    is the trailing block of the state.
    """
    q, n = plant.q, plant.n
    if matrix_rank(plant.C) != q:
        raise RankDeficiencyException(
            'C has rank {} but {} outputs'.format(matrix_rank(plant.C), q))

    if P is None:
        P = _default_transform(plant.C)
    else:
        P = as_matrix(P, 'P', rows=n, cols=n)
        if matrix_rank(P) != n:
            raise RankDeficiencyException('P is singular')

    P_inv = np.linalg.inv(P)
    target = np.hstack([np.zeros((q, n - q)), np.eye(q)])
    deviation = np.max(np.abs(plant.C @ P_inv - target))
    if deviation > CANONICAL_TOLERANCE:
        raise RankDeficiencyException(
            'C P^-1 differs from [0 I] by {:.3e}'.format(deviation))

    Abar = P @ plant.A @ P_inv
    Bbar = P @ plant.B
    return _split_blocks(P, Abar, Bbar, q)


def reduced_form_from_blocks(P, Abar, Bbar, q):
    """
    Builds a ReducedForm from externally supplied canonical blocks.
    """
    Abar = as_matrix(Abar, 'Abar')
    n = Abar.shape[0]
    P = as_matrix(P, 'P', rows=n, cols=n)
    Bbar = as_matrix(Bbar, 'Bbar', rows=n)
    if not 0 < q <= n:
        raise DimensionMismatchException(
            'Output count {} does not fit {} states'.format(q, n))
    return _split_blocks(P, Abar, Bbar, q)


def block_deviation(plant, rf):
    """
    Largest entry of |P A P^-1 - Abar| and |P B - Bbar|.
    """
    P_inv = np.linalg.inv(rf.P)
    return max(np.max(np.abs(rf.P @ plant.A @ P_inv - rf.Abar)),
               np.max(np.abs(rf.P @ plant.B - rf.Bbar)))


def full_observer_step(plant, obs, xhat, u, y):
    xhat = np.asarray(xhat, dtype=float)
    innovation = np.asarray(y, dtype=float) - xhat @ plant.C.T
    return (xhat @ plant.A.T + np.asarray(u) @ plant.B.T +
            innovation @ np.asarray(obs.L).T)


def reduced_observer_step(rf, xhat1, u, y_k, y_next):
    xhat1 = np.asarray(xhat1, dtype=float)
    u = np.asarray(u, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    ybar = np.asarray(y_next, dtype=float) - y_k @ rf.A22.T - u @ rf.B2.T
    ubar = y_k @ rf.A12.T + u @ rf.B1.T
    innovation = ybar - xhat1 @ rf.A21.T
    return xhat1 @ rf.A11.T + ubar + innovation @ rf._gain().T


def controller(K, received, own_estimate):
    K = np.asarray(getattr(K, 'K', K), dtype=float)
    if not len(received):
        return np.zeros(K.shape[0])
    own = np.asarray(own_estimate, dtype=float)
    total = np.sum([np.asarray(t, dtype=float) - own for t in received],
                   axis=0)
    return K @ total


def network_inputs(K, adjacency, theta, own):
    """
    Controller inputs of all agents at once: row i is
    K sum_j a_ij (theta_j - own_i).
    """
    K = np.asarray(getattr(K, 'K', K), dtype=float)
    adjacency = np.asarray(adjacency, dtype=float)
    deg = adjacency.sum(axis=1)
    return (adjacency @ theta - deg[:, None] * own) @ K.T
