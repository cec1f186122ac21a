# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Undirected communication topologies, their Laplacians and spectra.
"""

from dp_consensus.exceptions import (
    TopologyPolicyException, DisconnectedGraphException)
from dp_consensus.matops import sym_eigvals
from dataclasses import dataclass, field
from logging import getLogger
import numpy as np

logger = getLogger(__name__)

CONNECTIVITY_TOLERANCE = 1e-9
TOPOLOGY_KINDS = ('complete', 'ring', 'circulant', 'star', 'explicit')


@dataclass(frozen=True)
class Graph:
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise TopologyPolicyException(
                'Adjacency must be square, got shape {}'.format(adj.shape))
        if not np.all(np.isin(adj, (0, 1))):
            raise TopologyPolicyException('Adjacency entries must be 0 or 1')
        if not np.array_equal(adj, adj.T):
            raise TopologyPolicyException('Adjacency must be symmetric')
        if np.any(np.diag(adj) != 0):
            raise TopologyPolicyException('Adjacency diagonal must be zero')
        object.__setattr__(self, 'adjacency', adj.astype(int))

    @property
    def node_count(self):
        return self.adjacency.shape[0]

    def neighbors(self, i):
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def edges(self):
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return [[int(i), int(j)] for i, j in zip(rows, cols)]


@dataclass(frozen=True)
class GraphSpectrum:
    eigenvalues: np.ndarray
    fiedler: float = field(init=False)
    lambda_max: float = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, 'eigenvalues', values)
        object.__setattr__(
            self, 'fiedler', float(values[1]) if len(values) > 1 else 0.0)
        object.__setattr__(self, 'lambda_max', float(values[-1]))

    @property
    def connected(self):
        return self.fiedler > CONNECTIVITY_TOLERANCE

    @property
    def Lambda(self):
        return np.diag(self.eigenvalues[1:])

    def components(self):
        return int(np.sum(self.eigenvalues < CONNECTIVITY_TOLERANCE))


def degrees(graph):
    return [int(d) for d in graph.adjacency.sum(axis=1)]


def laplacian(graph):
    adj = graph.adjacency
    return np.diag(adj.sum(axis=1)) - adj


def spectrum(graph):
    return GraphSpectrum(sym_eigvals(laplacian(graph).astype(float)))


def connected_spectrum(graph):
    """
    Returns the spectrum, raising DisconnectedGraphException for a graph
    whose Fiedler value vanishes.
    """
    spec = spectrum(graph)
    if not spec.connected:
        raise DisconnectedGraphException(
            'Graph is not connected (lambda_2 = {:.3e})'.format(spec.fiedler))
    return spec


def make_topology(kind, N, offsets=None, edges=None, adjacency=None):
    if kind not in TOPOLOGY_KINDS:
        raise TopologyPolicyException(
            'Unknown topology kind: {}'.format(kind))
    if N is None or N < 2:
        raise TopologyPolicyException(
            'Topology needs at least 2 nodes, got {}'.format(N))

    adj = np.zeros((N, N), dtype=int)
    if kind == 'complete':
        adj[:] = 1
        np.fill_diagonal(adj, 0)

    elif kind in ('ring', 'circulant'):
        if kind == 'ring':
            offsets = [1]
        if not offsets:
            raise TopologyPolicyException('Circulant needs offsets')
        for s in offsets:
            if int(s) != s or s < 1 or s >= N / 2 + 1 or s >= N:
                raise TopologyPolicyException(
                    'Invalid circulant offset {} for N={}'.format(s, N))
        for i in range(N):
            for s in offsets:
                adj[i, (i + int(s)) % N] = 1
                adj[(i + int(s)) % N, i] = 1

    elif kind == 'star':
        adj[0, 1:] = 1
        adj[1:, 0] = 1

    else:
        adj = _explicit_adjacency(N, edges, adjacency)

    graph = Graph(adj)
    logger.debug('Built {} topology on {} nodes with {} edges'.format(
        kind, N, len(graph.edges())))
    return graph


def _explicit_adjacency(N, edges, adjacency):
    if adjacency is not None:
        adj = np.asarray(adjacency)
        if adj.shape != (N, N):
            raise TopologyPolicyException(
                'Adjacency shape {} does not match N={}'.format(
                    adj.shape, N))
        return adj

    if edges is None:
        raise TopologyPolicyException('Explicit topology needs edges')

    adj = np.zeros((N, N), dtype=int)
    for edge in edges:
        if len(edge) != 2:
            raise TopologyPolicyException(
                'Edge must be a pair of node ids: {}'.format(edge))
        i, j = int(edge[0]), int(edge[1])
        if not (0 <= i < N and 0 <= j < N) or i == j:
            raise TopologyPolicyException(
                'Invalid edge ({}, {}) for N={}'.format(i, j, N))
        adj[i, j] = 1
        adj[j, i] = 1
    return adj
