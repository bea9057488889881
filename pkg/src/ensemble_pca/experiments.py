"""Benchmark runners comparing PCA, EPCA and RPCA on corrupted data.

Two suites are provided. :func:`run_grid` sweeps noise levels, corrupting
every dataset ``repetitions`` times per level and running EPCA several times
per corruption. :func:`run_fixed` repeats one corruption setting per noise
kind many times and summarizes errors and runtimes as boxplot statistics.

Every unit of work (dataset, noise level, repetition) seeds its own random
streams from the master seed and the unit's key, so results do not depend on
execution order or on the number of worker processes.
"""
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .epca import EpcaConfig, default_bag_size, fit_epca
from .evaluation import ErrorReport, boxplot_stats, score_method
from .exceptions import EnsemblePCAError, InvalidInput
from .noise import FIXED_DEFAULTS, NoiseSpec
from .pca import fit_pca
from .rpca import RpcaConfig, rpca_components, rpca_ialm

log = logging.getLogger(__name__)

METHODS = ("pca", "epca", "rpca")


@dataclass(frozen=True)
class MethodSettings:
    """Shared settings for the compared methods.

    When ``epca.bag_size`` is None the bag size follows
    :func:`default_bag_size` for the noise kind under test.
    """

    rank: int = 2
    epca: EpcaConfig = field(default_factory=EpcaConfig)
    rpca: RpcaConfig = field(default_factory=RpcaConfig)


@dataclass
class FitOutcome:
    components: np.ndarray | None
    elapsed: float
    timed_out: bool = False
    error: str | None = None


def fit_method(method, X, settings, seed=0, noise_kind=None):
    """Fit one method and time the fitting call alone."""
    d = settings.rank
    if method == "pca":
        start = time.perf_counter()
        model = fit_pca(X, d)
        return FitOutcome(model.components, time.perf_counter() - start)
    if method == "epca":
        cfg = settings.epca
        n = cfg.bag_size or default_bag_size(X.shape[0], d, noise_kind)
        cfg = replace(cfg, rank=d, seed=int(seed), bag_size=n)
        start = time.perf_counter()
        model = fit_epca(X, cfg)
        return FitOutcome(model.components, time.perf_counter() - start)
    if method == "rpca":
        start = time.perf_counter()
        result = rpca_ialm(X, settings.rpca)
        if result.timed_out:
            return FitOutcome(None, time.perf_counter() - start, timed_out=True)
        components = rpca_components(result, d).components
        return FitOutcome(components, time.perf_counter() - start)
    raise InvalidInput(f"unknown method {method!r}; expected one of {METHODS}")


def _key_seeds(master, dataset, level, rep, count):
    """Independent integer seeds for one unit of work."""
    entropy = [int(master), zlib.crc32(dataset.encode()), int(level), int(rep)]
    return [int(s) for s in np.random.SeedSequence(entropy).generate_state(count)]


def _run_one(method, X, truth, settings, seed, noise, dataset, trial):
    try:
        out = fit_method(method, X, settings, seed=seed, noise_kind=noise.kind)
    except (EnsemblePCAError, np.linalg.LinAlgError) as exc:
        log.warning("%s failed on %s trial %d: %s", method, dataset, trial, exc)
        out = FitOutcome(None, 0.0, error=str(exc))
    if out.components is None:
        errors = np.full(settings.rank, np.nan)
    else:
        errors = score_method(truth, out.components).errors
    extra = {"error": out.error} if out.error else {}
    return ErrorReport(
        method=method,
        errors=errors,
        dataset=dataset,
        noise_kind=noise.kind,
        noise_params=noise.label(),
        trial=trial,
        elapsed=out.elapsed,
        timed_out=out.timed_out,
        extra=extra,
    )


# worker-process state, set once per pool
_DATA = {}


def _init_worker(data):
    _DATA.clear()
    _DATA.update(data)


def _run_unit(unit):
    """Corrupt one dataset once and run every method on it."""
    dataset, level, rep, noise, methods, settings, master, epca_runs = unit
    X, truth = _DATA[dataset]
    seeds = _key_seeds(master, dataset, level, rep, 1 + epca_runs)
    Xn, _ = noise.with_seed(seeds[0]).apply(X)
    reports = []
    for method in methods:
        if method == "epca":
            for run in range(epca_runs):
                trial = rep * epca_runs + run
                reports.append(_run_one(method, Xn, truth, settings, seeds[1 + run], noise, dataset, trial))
        else:
            reports.append(_run_one(method, Xn, truth, settings, 0, noise, dataset, rep))
    return (dataset, level, rep), reports


def _execute(units, data, jobs):
    if jobs and jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(data,)) as pool:
            results = list(pool.map(_run_unit, units))
    else:
        _init_worker(data)
        results = [_run_unit(u) for u in units]
    return results


def _prepare(datasets, rank):
    """Resolve ``{name: X}`` or ``[(name, X)]`` and fit the clean-data truth."""
    items = datasets.items() if isinstance(datasets, dict) else datasets
    data = {}
    for name, X in items:
        if hasattr(X, "load"):
            X = X.load()
        X = np.asarray(X, dtype=float)
        data[name] = (X, fit_pca(X, rank))
    return data


def _sort_reports(results, dataset_order, methods):
    mpos = {m: i for i, m in enumerate(methods)}
    dpos = {d: i for i, d in enumerate(dataset_order)}
    flat = [
        (dpos[key[0]], key[1], key[2], mpos[r.method], r.trial, r)
        for key, reports in results
        for r in reports
    ]
    flat.sort(key=lambda t: t[:5])
    return [t[-1] for t in flat]


@dataclass
class GridResult:
    reports: list
    means: list

    def mean_error(self, noise_label, method, component, kind=None):
        for row in self.means:
            if (
                row["noise_params"] == noise_label
                and row["method"] == method
                and row["component_index"] == component
                and (kind is None or row["noise_kind"] == kind)
            ):
                return row["mean_pct_rel_error"]
        raise KeyError((noise_label, method, component))


def average_errors(reports):
    """Mean error per (noise kind, noise params, method, component), NaNs dropped."""
    groups = {}
    for r in reports:
        for i, e in enumerate(r.errors):
            groups.setdefault((r.noise_kind, r.noise_params, r.method, i), []).append(e)
    rows = []
    for (kind, params, method, i), errs in groups.items():
        errs = np.asarray(errs, dtype=float)
        ok = errs[~np.isnan(errs)]
        rows.append(
            {
                "noise_kind": kind,
                "noise_params": params,
                "method": method,
                "component_index": i,
                "mean_pct_rel_error": float(ok.mean()) if ok.size else math.nan,
                "count": int(ok.size),
                "failed": int(errs.size - ok.size),
            }
        )
    return rows


def run_grid(
    datasets,
    noise_grid,
    methods=METHODS,
    repetitions=5,
    epca_runs=5,
    seed=0,
    settings=None,
    jobs=1,
):
    """Noise-level sweep.

    Parameters
    ----------
    datasets : dict or sequence of (name, matrix or DatasetSpec)
    noise_grid : sequence of NoiseSpec
        One entry per noise level; their ``seed`` fields are ignored.
    methods : sequence of str
    repetitions : int
        Random corruptions per dataset and level.
    epca_runs : int
        EPCA fits per corruption (PCA and RPCA are deterministic and run once).

    Returns
    -------
    GridResult
        ``reports`` sorted by dataset, level, repetition and method; ``means``
        averaged over datasets and repetitions per level, method and component.
    """
    settings = settings or MethodSettings()
    data = _prepare(datasets, settings.rank)
    if not noise_grid or not data or repetitions <= 0:
        return GridResult([], [])
    units = [
        (name, level, rep, noise, tuple(methods), settings, seed, epca_runs)
        for name in data
        for level, noise in enumerate(noise_grid)
        for rep in range(repetitions)
    ]
    results = _execute(units, data, jobs)
    reports = _sort_reports(results, list(data), methods)
    return GridResult(reports, average_errors(reports))


def fixed_noise_specs(kinds=None):
    """The fixed corruption settings, one NoiseSpec per kind."""
    kinds = kinds or tuple(FIXED_DEFAULTS)
    return [NoiseSpec.fixed(k) for k in kinds]


@dataclass
class FixedResult:
    """Output of :func:`run_fixed`.

    ``error_stats`` maps ``(noise_kind, method, component)`` to boxplot
    statistics pooled over datasets and trials; ``runtime_stats`` maps
    ``(noise_kind, method, dataset)`` to runtime boxplots. Method/dataset
    combinations with any timeout are listed in ``excluded`` and left out of
    both.
    """

    reports: list
    error_stats: dict
    runtime_stats: dict
    excluded: set


def run_fixed(
    datasets,
    noise_specs=None,
    methods=METHODS,
    trials=100,
    seed=0,
    settings=None,
    jobs=1,
):
    """Repeated corruption at fixed noise levels, one EPCA run per trial."""
    settings = settings or MethodSettings()
    noise_specs = noise_specs if noise_specs is not None else fixed_noise_specs()
    data = _prepare(datasets, settings.rank)
    units = [
        (name, level, trial, noise, tuple(methods), settings, seed, 1)
        for name in data
        for level, noise in enumerate(noise_specs)
        for trial in range(trials)
    ]
    results = _execute(units, data, jobs) if units else []
    reports = _sort_reports(results, list(data), methods)
    return summarize_fixed(reports)


def summarize_fixed(reports):
    excluded = {(r.noise_kind, r.method, r.dataset) for r in reports if r.timed_out}
    errors, runtimes = {}, {}
    for r in reports:
        if (r.noise_kind, r.method, r.dataset) in excluded or np.any(np.isnan(r.errors)):
            continue
        for i, e in enumerate(r.errors):
            errors.setdefault((r.noise_kind, r.method, i), []).append(e)
        runtimes.setdefault((r.noise_kind, r.method, r.dataset), []).append(r.elapsed)
    return FixedResult(
        reports=reports,
        error_stats={k: boxplot_stats(v) for k, v in sorted(errors.items())},
        runtime_stats={k: boxplot_stats(v) for k, v in sorted(runtimes.items())},
        excluded=excluded,
    )
