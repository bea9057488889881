"""Scoring predicted components against ground truth, and boxplot summaries."""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInput, ShapeError


@dataclass(frozen=True)
class BoxplotStats:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple = ()
    count: int = 0

    @property
    def iqr(self):
        return self.q3 - self.q1


@dataclass(frozen=True)
class ErrorReport:
    """Percent relative error of each predicted component for one run.

    ``errors`` is NaN for every component when the method timed out.
    """

    method: str
    errors: np.ndarray
    dataset: str = ""
    noise_kind: str = "none"
    noise_params: str = ""
    trial: int = 0
    elapsed: float = 0.0
    timed_out: bool = False
    extra: dict = field(default_factory=dict)


def relative_error(t, p):
    """Percent relative error ``||t - p|| / ||t|| * 100``, sign-aligned.

    Components are defined only up to sign, so the smaller of the errors
    against ``p`` and ``-p`` is returned.
    """
    t = np.asarray(t, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    if t.shape != p.shape:
        raise ShapeError(f"length mismatch: {t.size} vs {p.size}")
    norm_t = np.linalg.norm(t)
    if norm_t == 0:
        raise InvalidInput("true component is zero")
    return float(min(np.linalg.norm(t - p), np.linalg.norm(t + p)) / norm_t * 100)


def score_method(true_model, predicted, method="", **fields):
    """Score predicted components index by index against ``true_model``.

    ``predicted`` is a ``(d, m)`` array or a sequence of ``d`` vectors. Extra
    keyword arguments populate the remaining :class:`ErrorReport` fields.
    """
    truth = np.atleast_2d(getattr(true_model, "components", true_model))
    predicted = np.atleast_2d(np.asarray(predicted, dtype=float))
    if predicted.shape != truth.shape:
        raise ShapeError(f"predicted shape {predicted.shape} != true shape {truth.shape}")
    errors = np.array([relative_error(t, p) for t, p in zip(truth, predicted)])
    return ErrorReport(method=method, errors=errors, **fields)


def boxplot_stats(samples):
    """Quartiles (linear interpolation) with 1.5 IQR whiskers.

    Whiskers sit at the most extreme samples inside the fences; everything
    beyond them is reported in ``outliers``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InvalidInput("boxplot of an empty sample")
    q1, median, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = np.sort(x[(x < lo_fence) | (x > hi_fence)])
    return BoxplotStats(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=tuple(float(v) for v in outliers),
        count=int(x.size),
    )


def trim_outliers(samples):
    """Samples within the 1.5 IQR fences."""
    x = np.asarray(samples, dtype=float).ravel()
    stats = boxplot_stats(x)
    return x[(x >= stats.whisker_low) & (x <= stats.whisker_high)]
