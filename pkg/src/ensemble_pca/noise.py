"""Seeded corruption generators: sparse entries, white noise and row outliers."""
import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InvalidInput
from .linalg import as_data_matrix, spectral_norm

KINDS = ("sparse", "gaussian", "uniform", "outliers")

# fixed-noise settings used for the repeated-trial benchmark
FIXED_DEFAULTS = {
    "sparse": {"p": 0.01, "c": 2.0},
    "gaussian": {"f": 1000.0},
    "uniform": {"f": 1000.0},
    "outliers": {"s": 5.0, "scale": 5.0},
}


def _rng(seed):
    return np.random.default_rng(seed)


def corrupt_sparse(X, p, c, seed=0):
    """Replace each entry by ``c`` independently with probability ``p``.

    Returns the corrupted copy and the boolean mask of replaced entries.
    """
    if not 0 <= p <= 1:
        raise InvalidInput(f"p must be in [0, 1], got {p}")
    X = as_data_matrix(X)
    mask = _rng(seed).random(X.shape) < p
    out = X.copy()
    out[mask] = c
    return out, mask


def corrupt_white(X, f, distribution="gaussian", seed=0):
    """Add i.i.d. zero-mean noise of variance ``sigma_1(X) / f``."""
    if not f > 0:
        raise InvalidInput(f"variance divisor f must be > 0, got {f}")
    X = as_data_matrix(X)
    v = spectral_norm(X) / f
    rng = _rng(seed)
    if distribution == "gaussian":
        noise = rng.normal(0.0, np.sqrt(v), size=X.shape)
    elif distribution == "uniform":
        a = np.sqrt(3 * v)
        noise = rng.uniform(-a, a, size=X.shape)
    else:
        raise InvalidInput(f"unknown distribution {distribution!r}")
    return X + noise


def n_outlier_rows(N, s):
    # round first so that e.g. 5% of 100 rows is exactly 5, not 6
    return math.ceil(round(s * N / 100, 9))


def corrupt_outliers(X, s, scale, seed=0):
    """Multiply ``ceil(s% of N)`` randomly chosen rows by ``scale``.

    Returns the corrupted copy and the sorted indices of scaled rows.
    """
    if not 0 <= s <= 100:
        raise InvalidInput(f"s must be in [0, 100], got {s}")
    if not np.isfinite(scale):
        raise InvalidInput("outlier scale must be finite")
    X = as_data_matrix(X)
    N = X.shape[0]
    rows = np.sort(_rng(seed).choice(N, size=n_outlier_rows(N, s), replace=False))
    out = X.copy()
    out[rows] *= scale
    return out, rows


@dataclass(frozen=True)
class NoiseSpec:
    """A corruption model and its parameters.

    ``sparse`` uses ``p`` and ``c``; ``gaussian``/``uniform`` use ``f``;
    ``outliers`` uses ``s`` (percent of rows) and ``scale``.
    """

    kind: str
    p: float = 0.01
    c: float = 2.0
    f: float = 1000.0
    s: float = 5.0
    scale: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"noise kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 <= self.p <= 1:
            raise InvalidInput(f"p must be in [0, 1], got {self.p}")
        if not self.f > 0:
            raise InvalidInput(f"f must be > 0, got {self.f}")
        if not 0 <= self.s <= 100:
            raise InvalidInput(f"s must be in [0, 100], got {self.s}")
        if not np.isfinite(self.scale):
            raise InvalidInput("scale must be finite")

    @classmethod
    def fixed(cls, kind, seed=0):
        return cls(kind=kind, seed=seed, **FIXED_DEFAULTS[kind])

    @property
    def params(self):
        if self.kind == "sparse":
            return {"p": self.p, "c": self.c}
        if self.kind == "outliers":
            return {"s": self.s, "scale": self.scale}
        return {"f": self.f}

    def label(self):
        return ";".join(f"{k}={v:g}" for k, v in self.params.items())

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def apply(self, X):
        """Corrupt ``X``; returns ``(X_noisy, info)``.

        ``info`` is the entry mask for sparse noise, the scaled row indices
        for outliers and ``None`` for white noise.
        """
        if self.kind == "sparse":
            return corrupt_sparse(X, self.p, self.c, self.seed)
        if self.kind == "outliers":
            return corrupt_outliers(X, self.s, self.scale, self.seed)
        return corrupt_white(X, self.f, self.kind, self.seed), None
