"""Classical PCA by eigendecomposition of the sample covariance."""
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidRank, ShapeError
from .linalg import as_data_matrix, orient, top_eigpairs


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA.

    Attributes
    ----------
    components : ndarray (d, m)
        Unit-norm principal directions as rows.
    eigenvalues : ndarray (d,)
        Explained variances, descending and clamped at zero.
    mean : ndarray (m,)
        Column means of the training data.
    """

    components: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray

    @property
    def d(self):
        return self.components.shape[0]

    @property
    def n_features(self):
        return self.components.shape[1]


def fit_pca(X, d):
    """Fit the top-``d`` principal components of ``X``.

    ``d`` must satisfy ``1 <= d <= min(N - 1, m)``. When ``m > N`` the
    eigenpairs are taken from the SVD of the centered data instead of the
    ``m x m`` covariance; both routes agree to rounding.
    """
    X = as_data_matrix(X)
    N, m = X.shape
    if not 1 <= d <= min(N - 1, m):
        raise InvalidRank(f"rank d={d} outside [1, min(N-1, m)] = [1, {min(N - 1, m)}]")
    return _fit(X, d)


def _fit(X, d):
    # X already validated and d feasible
    N, m = X.shape
    mean = X.mean(axis=0)
    Xbar = X - mean
    if m > N:
        _, s, Vt = np.linalg.svd(Xbar, full_matrices=False)
        eigenvalues = s[:d] ** 2 / (N - 1)
        components = orient(Vt[:d])
    else:
        C = Xbar.T @ Xbar / (N - 1)
        pairs = top_eigpairs((C + C.T) / 2, d)
        eigenvalues, components = pairs.eigenvalues, pairs.eigenvectors
    return PcaModel(
        components=components,
        eigenvalues=np.maximum(eigenvalues, 0.0),
        mean=mean,
    )


def project(model, X):
    """Scores ``(X - mean) @ components.T``, shape ``(N, d)``."""
    X = as_data_matrix(X)
    if X.shape[1] != model.n_features:
        raise ShapeError(f"X has {X.shape[1]} columns, model expects {model.n_features}")
    return (X - model.mean) @ model.components.T
