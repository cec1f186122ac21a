# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Dense real-matrix primitives used by every other module.
"""

from dp_consensus.exceptions import (
    DimensionMismatchException, PreconditionException, NumericalException)
import numpy as np

STABILITY_MARGIN = 1e-12
SYMMETRY_TOLERANCE = 1e-10


def as_matrix(data, name='M', rows=None, cols=None):
    """
    Returns the passed nested sequence as a 2-D float array, validating
    shape and finiteness.
    """
    try:
        mat = np.array(data, dtype=float)
    except (TypeError, ValueError) as ex:
        raise DimensionMismatchException(
            '{} is not a rectangular real matrix: {}'.format(name, ex))

    if mat.ndim == 1 and mat.size and rows == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2:
        raise DimensionMismatchException(
            '{} must be two-dimensional, got {} dimension(s)'.format(
                name, mat.ndim))
    if not np.all(np.isfinite(mat)):
        raise DimensionMismatchException(
            '{} has non-finite entries'.format(name))
    if rows is not None and mat.shape[0] != rows:
        raise DimensionMismatchException(
            '{} has {} rows, expected {}'.format(name, mat.shape[0], rows))
    if cols is not None and mat.shape[1] != cols:
        raise DimensionMismatchException(
            '{} has {} columns, expected {}'.format(name, mat.shape[1], cols))
    return mat


def kron(a, b):
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def induced_one_norm(mat):
    """
    Maximum absolute column sum.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(mat), axis=0)))


def spectral_radius(mat, name='M'):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchException(
            '{} must be square, got shape {}'.format(name, mat.shape))
    if mat.size == 0:
        return 0.0

    diagonal = np.diag(np.diag(mat))
    if np.array_equal(mat, diagonal):
        return float(np.max(np.abs(np.diag(mat))))

    try:
        eigenvalues = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as ex:
        raise NumericalException(
            'Eigenvalues of {} did not converge: {}'.format(name, ex))
    return float(np.max(np.abs(eigenvalues)))


def sym_eigvals(mat):
    """
    Ascending real eigenvalues of a symmetric matrix.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchException(
            'Symmetric eigenproblem needs a square matrix, got {}'.format(
                mat.shape))

    scale = np.linalg.norm(mat)
    if np.linalg.norm(mat - mat.T) > SYMMETRY_TOLERANCE * scale:
        raise PreconditionException(
            'Matrix is not symmetric within {}'.format(SYMMETRY_TOLERANCE))

    try:
        return np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as ex:
        raise NumericalException(
            'Symmetric eigensolver did not converge: {}'.format(ex))


def is_stable(rho):
    return rho < 1.0 - STABILITY_MARGIN


def matrix_rank(mat, rtol=1e-9):
    """
    Numerical rank with singular values thresholded at rtol * sigma_max.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0
    sigma = np.linalg.svd(mat, compute_uv=False)
    if sigma[0] == 0:
        return 0
    return int(np.sum(sigma > rtol * sigma[0]))
