"""Robust PCA by Principal Component Pursuit.

Solves ``min ||L||_* + alpha * ||S||_1`` subject to ``X = L + S`` with the
inexact augmented Lagrange multiplier method of Lin, Chen and Ma (2010).
"""
import time
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInput
from .linalg import as_data_matrix, soft_threshold, svt
from .pca import fit_pca


@dataclass(frozen=True)
class RpcaConfig:
    """Solver settings.

    ``mu0=None`` resolves to ``1.25 / sigma_1(X)``. The penalty grows by
    ``rho`` each iteration and is capped at ``mu_max_factor * mu0``.
    """

    alpha: float = 0.20
    mu0: float | None = None
    rho: float = 1.5
    tol: float = 1e-7
    max_iter: int = 1000
    timeout: float | None = 120.0
    mu_max_factor: float = 1e7

    def validate(self):
        if not self.alpha > 0:
            raise InvalidInput(f"alpha must be > 0, got {self.alpha}")
        if not self.rho > 1:
            raise InvalidInput(f"rho must be > 1, got {self.rho}")
        if not self.tol > 0:
            raise InvalidInput(f"tol must be > 0, got {self.tol}")
        if self.mu0 is not None and not self.mu0 > 0:
            raise InvalidInput(f"mu0 must be > 0, got {self.mu0}")
        if self.max_iter < 1:
            raise InvalidInput(f"max_iter must be >= 1, got {self.max_iter}")
        if self.timeout is not None and self.timeout < 0:
            raise InvalidInput(f"timeout must be >= 0, got {self.timeout}")


@dataclass(frozen=True)
class RpcaResult:
    L: np.ndarray
    S: np.ndarray
    iterations: int
    converged: bool
    residual: float
    elapsed: float
    timed_out: bool
    residual_history: tuple = ()


def standard_alpha(shape):
    """The usual ``1 / sqrt(max(N, m))`` weight for exact recovery."""
    return 1.0 / np.sqrt(max(shape))


def rpca_ialm(X, config=None, **overrides):
    """Decompose ``X`` into low-rank ``L`` plus sparse ``S``.

    Iterates until ``||X - L - S||_F / ||X||_F <= tol``, ``max_iter`` steps
    or ``timeout`` seconds of wall clock. The clock is checked between
    iterations; on timeout the latest iterates are returned with
    ``timed_out=True``.
    """
    config = config or RpcaConfig()
    if overrides:
        config = RpcaConfig(**{**config.__dict__, **overrides})
    config.validate()
    X = as_data_matrix(X)
    start = time.perf_counter()

    norm_fro = np.linalg.norm(X)
    if norm_fro == 0:
        zeros = np.zeros_like(X)
        return RpcaResult(zeros, zeros.copy(), 1, True, 0.0, time.perf_counter() - start, False, (0.0,))

    alpha = config.alpha
    sigma1 = np.linalg.norm(X, 2)
    Y = X / max(sigma1, np.max(np.abs(X)) / alpha)
    mu = config.mu0 if config.mu0 is not None else 1.25 / sigma1
    mu_max = mu * config.mu_max_factor
    S = np.zeros_like(X)
    L = np.zeros_like(X)

    history = []
    converged = timed_out = False
    iterations = 0
    while iterations < config.max_iter:
        iterations += 1
        L = svt(X - S + Y / mu, 1.0 / mu)
        S = soft_threshold(X - L + Y / mu, alpha / mu)
        Z = X - L - S
        Y = Y + mu * Z
        mu = min(mu * config.rho, mu_max)
        history.append(float(np.linalg.norm(Z) / norm_fro))
        if history[-1] <= config.tol:
            converged = True
            break
        if config.timeout is not None and time.perf_counter() - start > config.timeout:
            timed_out = True
            break

    return RpcaResult(
        L=L,
        S=S,
        iterations=iterations,
        converged=converged,
        residual=history[-1],
        elapsed=time.perf_counter() - start,
        timed_out=timed_out,
        residual_history=tuple(history),
    )


def rpca_components(result, d):
    """Principal components of the recovered low-rank part."""
    return fit_pca(result.L, d)
