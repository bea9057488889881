"""Dense linear algebra kernels shared by the PCA variants.

Every function here is pure: inputs are never modified and no state is kept
between calls.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackError, eigsh

from .exceptions import InsufficientSamples, InvalidInput


# Lanczos is used for a few leading pairs of a large matrix; LAPACK otherwise
LANCZOS_MIN_SIZE = 64
LANCZOS_MAX_FRACTION = 0.25


@dataclass(frozen=True)
class EigenPairs:
    """Top eigenpairs of a symmetric matrix.

    ``eigenvectors`` is stored row-wise, shape ``(k, m)``, aligned with the
    descending ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_data_matrix(X, name="X"):
    """Validate ``X`` as a finite 2-D float array with at least one row and column."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidInput(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInput(f"{name} must have at least one row and column, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return X


def mean_center(X):
    """Subtract the column means.

    Returns
    -------
    Xbar : ndarray (N, m)
    mean : ndarray (m,)
    """
    X = as_data_matrix(X)
    mean = X.mean(axis=0)
    return X - mean, mean


def covariance(Xbar):
    """Sample covariance ``Xbar.T @ Xbar / (N - 1)`` of a centered matrix."""
    Xbar = as_data_matrix(Xbar, "Xbar")
    N = Xbar.shape[0]
    if N < 2:
        raise InsufficientSamples(f"covariance needs at least 2 samples, got {N}")
    C = Xbar.T @ Xbar / (N - 1)
    # exact symmetry regardless of BLAS summation order
    return (C + C.T) / 2


def orient(vectors):
    """Flip each row so its largest-magnitude coordinate is positive.

    Ties are broken by the lowest index. Works on a single vector or on rows
    of a 2-D array.
    """
    V = np.array(vectors, dtype=float)
    single = V.ndim == 1
    V = np.atleast_2d(V)
    pivot = np.argmax(np.abs(V), axis=1)
    signs = np.sign(V[np.arange(V.shape[0]), pivot])
    signs[signs == 0] = 1.0
    V *= signs[:, None]
    return V[0] if single else V


def sym_eig(C, k=None):
    """Top-``k`` eigenpairs of a symmetric matrix, eigenvalues descending.

    Eigenvectors are returned as rows with the orientation of :func:`orient`,
    so repeated calls on the same input are bit-identical. The order among
    exactly repeated eigenvalues is whatever LAPACK returns.
    """
    C = as_data_matrix(C, "C")
    m = C.shape[0]
    if C.shape[1] != m:
        raise InvalidInput(f"C must be square, got {C.shape}")
    scale = max(1.0, float(np.max(np.abs(C))))
    if np.max(np.abs(C - C.T)) > 1e-10 * scale:
        raise InvalidInput("C is not symmetric")
    if k is None:
        k = m
    if not 1 <= k <= m:
        raise InvalidInput(f"k must be in [1, {m}], got {k}")
    return top_eigpairs(C, k, scale)


def top_eigpairs(C, k, scale=None):
    """:func:`sym_eig` without input validation, for callers that built ``C``."""
    m = C.shape[0]
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(C))))
    w = V = None
    if m >= LANCZOS_MIN_SIZE and k <= LANCZOS_MAX_FRACTION * m:
        w, V = _lanczos_top(C, k, scale)
    if w is None:
        if k < m:
            w, V = scipy.linalg.eigh(C, subset_by_index=[m - k, m - 1])
        else:
            w, V = scipy.linalg.eigh(C)
    w = w[::-1]
    V = V[:, ::-1].T
    return EigenPairs(eigenvalues=np.ascontiguousarray(w), eigenvectors=orient(V))


def _lanczos_top(C, k, scale):
    """Leading eigenpairs by ARPACK run to machine precision, or ``(None, None)``.

    The start vector is fixed so results are reproducible. Pairs whose
    residual exceeds ``1e-10 * scale`` are rejected and the caller falls back
    to LAPACK.
    """
    v0 = np.random.default_rng(0).standard_normal(C.shape[0])
    try:
        w, V = eigsh(C, k=k, which="LA", tol=0, v0=v0)
    except ArpackError:
        return None, None
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    residual = np.linalg.norm(C @ V - V * w, axis=0)
    if np.any(residual > 1e-10 * scale) or np.abs(V.T @ V - np.eye(k)).max() > 1e-10:
        return None, None
    return w, V


def svd(X):
    """Thin SVD ``X = U @ diag(s) @ Vt`` with ``s`` descending."""
    X = as_data_matrix(X)
    return np.linalg.svd(X, full_matrices=False)


def spectral_norm(X):
    """Largest singular value of ``X``.

    Taken from the same decomposition as :func:`svd` so that ``svt(X, tau)``
    with ``tau = spectral_norm(X)`` is exactly zero.
    """
    return float(svd(X)[1][0])


def soft_threshold(x, tau):
    """Entrywise shrinkage ``sign(x) * max(|x| - tau, 0)``."""
    if tau < 0:
        raise InvalidInput(f"threshold must be nonnegative, got {tau}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(X, tau):
    """Singular value thresholding: soft-threshold the spectrum of ``X``."""
    if tau < 0:
        raise InvalidInput(f"threshold must be nonnegative, got {tau}")
    U, s, Vt = svd(X)
    s = np.maximum(s - tau, 0.0)
    r = int(np.count_nonzero(s))
    return (U[:, :r] * s[:r]) @ Vt[:r]
