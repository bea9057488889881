"""Seeded Lloyd's k-means with k-means++ initialization.

Used to cluster stacked principal components, so problem sizes are small
(a few hundred points) and the full point-to-center distance matrix is
formed at every step.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateClusteringWarning, InvalidInput


@dataclass(frozen=True)
class Clustering:
    """Result of :func:`kmeans`.

    ``inertia_history`` holds the inertia after every assignment step of the
    winning restart; it is nonincreasing.
    """

    centers: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int
    inertia_history: tuple = ()
    degenerate: bool = False
    restart: int = 0

    @property
    def sizes(self):
        return np.bincount(self.assignments, minlength=self.centers.shape[0])


def _sq_distances(points, centers):
    D = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(D, 0.0)


def _assign(points, centers):
    D = _sq_distances(points, centers)
    # argmin returns the lowest index on exact ties
    labels = np.argmin(D, axis=1)
    dist = D[np.arange(points.shape[0]), labels]
    return labels, dist


def kmeans_plusplus(points, k, rng):
    """Pick ``k`` initial centers by D^2 sampling."""
    P = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(P)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(P, p=closest / total)
        else:
            idx = rng.integers(P)
        centers[j] = points[idx]
        closest = np.minimum(closest, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter, tol):
    history = []
    iterations = 0
    labels, dist = _assign(points, centers)
    history.append(float(dist.sum()))
    k = centers.shape[0]
    while iterations < max_iter:
        iterations += 1
        onehot = np.zeros((points.shape[0], k))
        onehot[np.arange(points.shape[0]), labels] = 1.0
        new = onehot.T @ points
        counts = np.bincount(labels, minlength=k)
        nonempty = counts > 0
        new[nonempty] /= counts[nonempty, None]
        if not nonempty.all():
            # reseed each empty center at the point farthest from its own center
            residual = np.sum((points - new[labels]) ** 2, axis=1)
            for j in np.flatnonzero(~nonempty):
                far = int(np.argmax(residual))
                new[j] = points[far]
                residual[far] = -1.0
        shift = np.sqrt(np.max(np.sum((new - centers) ** 2, axis=1)))
        centers = new
        labels, dist = _assign(points, centers)
        history.append(float(dist.sum()))
        if shift < tol and np.all(np.bincount(labels, minlength=k) > 0):
            break
    return centers, labels, float(dist.sum()), iterations, tuple(history)


def kmeans(points, k, seed=0, max_iter=300, tol=1e-6, n_init=10):
    """Cluster ``points`` into ``k`` groups.

    Parameters
    ----------
    points : array-like (P, m)
    k : int
        Number of clusters, ``1 <= k <= P``.
    seed : int
        Master seed; restart ``i`` draws from an independent child stream, so
        restarts could be evaluated in any order.
    max_iter, tol : int, float
        Lloyd stops after ``max_iter`` steps or when no center moves by
        ``tol`` or more (Euclidean).
    n_init : int
        Number of k-means++ restarts; the lowest inertia wins, ties going to
        the earliest restart.

    Returns
    -------
    Clustering
        If ``points`` has fewer than ``k`` distinct rows the result is
        flagged ``degenerate`` and a :class:`DegenerateClusteringWarning` is
        emitted; duplicate centers are then possible.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise InvalidInput(f"points must be 2-D, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise InvalidInput("points contain non-finite values")
    P = points.shape[0]
    if not 1 <= k <= P:
        raise InvalidInput(f"need 1 <= k <= number of points ({P}), got k={k}")
    if n_init < 1 or max_iter < 0 or tol < 0:
        raise InvalidInput("n_init >= 1, max_iter >= 0 and tol >= 0 required")

    distinct = np.unique(points, axis=0).shape[0]
    degenerate = distinct < k
    if degenerate:
        warnings.warn(
            f"only {distinct} distinct points for k={k}",
            DegenerateClusteringWarning,
            stacklevel=2,
        )

    best = None
    streams = np.random.SeedSequence(seed).spawn(n_init)
    for restart, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        init = kmeans_plusplus(points, k, rng)
        centers, labels, inertia, iterations, history = _lloyd(points, init, max_iter, tol)
        if best is None or inertia < best.inertia:
            best = Clustering(
                centers=centers,
                assignments=labels,
                inertia=inertia,
                iterations=iterations,
                inertia_history=history,
                degenerate=bool(degenerate),
                restart=restart,
            )
    return best
