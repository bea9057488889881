"""Dataset loading, synthetic generators and (de)serialization."""
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .epca import EpcaDiagnostics, EpcaModel
from .evaluation import BoxplotStats
from .exceptions import DatasetIOError, InvalidInput, ParseError
from .pca import PcaModel
from .rpca import RpcaResult

# --------------------------------------------------------------------------
# CSV ingestion


def load_csv(path, delimiter=",", header=False, drop_columns=()):
    """Read a numeric CSV into an ``(N, m)`` float array.

    Parameters
    ----------
    path : str or PathLike
    delimiter : str
    header : bool
        Whether the first line holds column names.
    drop_columns : sequence of str or int
        Columns to discard, by name (requires ``header``) or 0-based index,
        e.g. a class label.

    Raises
    ------
    DatasetIOError
        The file cannot be opened.
    ParseError
        A kept cell is not a finite number; ``row``/``column`` give the
        1-based line and 0-based column of the offending cell.
    """
    try:
        with open(path, newline="") as fh:
            lines = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc

    lines = [(i + 1, row) for i, row in enumerate(lines) if row and any(c.strip() for c in row)]
    names = None
    if header:
        if not lines:
            raise ParseError(f"{path}: missing header row", row=1)
        names = [c.strip() for c in lines[0][1]]
        lines = lines[1:]

    drop = set()
    for col in drop_columns:
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if names is None or col not in names:
                raise InvalidInput(f"cannot drop unknown column {col!r}")
            drop.add(names.index(col))
        else:
            drop.add(int(col))

    values = []
    width = None
    for lineno, row in lines:
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} cells, got {len(row)}", row=lineno)
        parsed = []
        for j, cell in enumerate(row):
            if j in drop:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {j}: cannot parse {cell!r}", row=lineno, column=j
                ) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}:{lineno}: column {j}: non-finite {cell!r}", row=lineno, column=j)
            parsed.append(v)
        values.append(parsed)
    if not values or not values[0]:
        raise ParseError(f"{path}: no numeric data")
    return np.array(values, dtype=float)


def save_csv(X, path, delimiter=","):
    """Write a matrix with 17 significant digits, so it reads back exactly."""
    try:
        np.savetxt(path, np.atleast_2d(X), delimiter=delimiter, fmt="%.17g")
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


# --------------------------------------------------------------------------
# synthetic data


class WaveData(NamedTuple):
    X: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray


def wave_modes(m):
    """One- and two-period sine modes over ``m`` points, orthonormal."""
    t = np.arange(m) / m
    modes = np.vstack([np.sin(2 * np.pi * t), np.sin(4 * np.pi * t)])
    return modes / np.linalg.norm(modes, axis=1, keepdims=True)


def synth_wave(N=6000, m=200, amplitude_sd=(30.0, 15.0), noise_floor=0.5, seed=0):
    """Two-mode sinusoidal data ``X[t] = a_t u1 + b_t u2 + eps``.

    ``a_t ~ N(0, sd_a^2)``, ``b_t ~ N(0, sd_b^2)`` and ``eps`` is i.i.d.
    ``N(0, noise_floor^2)``. The returned eigenvalues are the population
    values ``(sd_a^2, sd_b^2)``.
    """
    sd_a, sd_b = amplitude_sd
    if not sd_a > sd_b > 0:
        raise InvalidInput(f"need sd_a > sd_b > 0, got {amplitude_sd}")
    if m < 3:
        raise InvalidInput(f"need m >= 3 to resolve two modes, got {m}")
    if noise_floor < 0:
        raise InvalidInput("noise floor must be nonnegative")
    rng = np.random.default_rng(seed)
    modes = wave_modes(m)
    amplitudes = rng.normal(size=(N, 2)) * np.array([sd_a, sd_b])
    X = amplitudes @ modes
    if noise_floor > 0:
        X = X + rng.normal(0.0, noise_floor, size=(N, m))
    return WaveData(X, modes, np.array([sd_a**2, sd_b**2]))


class LowRankSparse(NamedTuple):
    X: np.ndarray
    L0: np.ndarray
    S0: np.ndarray


def synth_low_rank_sparse(N, m, rank, fraction, magnitude=10.0, seed=0):
    """``X = L0 + S0`` with Gaussian rank-``rank`` ``L0`` and a ±magnitude ``S0``.

    ``S0`` has exactly ``ceil(fraction * N * m)`` nonzeros at uniformly
    random positions.
    """
    if not 0 <= fraction <= 1:
        raise InvalidInput(f"fraction must be in [0, 1], got {fraction}")
    if rank < 0:
        raise InvalidInput("rank must be nonnegative")
    rng = np.random.default_rng(seed)
    L0 = rng.normal(size=(N, rank)) @ rng.normal(size=(rank, m))
    S0 = np.zeros((N, m))
    count = math.ceil(round(fraction * N * m, 9))
    where = rng.choice(N * m, size=count, replace=False)
    S0.flat[where] = magnitude * rng.choice([-1.0, 1.0], size=count)
    return LowRankSparse(L0 + S0, L0, S0)


# --------------------------------------------------------------------------
# dataset specs

SYNTHETIC = {"wave", "lowrank"}


@dataclass(frozen=True)
class DatasetSpec:
    """Where a dataset comes from.

    ``source`` is a CSV path or one of ``"wave"``/``"lowrank"``; ``params``
    go to the generator (or ``load_csv`` options for files).
    """

    name: str
    source: str
    params: dict = field(default_factory=dict)
    drop_columns: tuple = ()

    def load(self):
        if self.source == "wave":
            params = dict(self.params)
            if "amplitude_sd" in params:
                params["amplitude_sd"] = tuple(params["amplitude_sd"])
            return synth_wave(**params).X
        if self.source == "lowrank":
            return synth_low_rank_sparse(**self.params).X
        opts = {k: v for k, v in self.params.items() if k in ("delimiter", "header")}
        X = load_csv(self.source, drop_columns=self.drop_columns, **opts)
        if X.shape[0] < 2:
            raise InvalidInput(f"dataset {self.name} has fewer than 2 rows")
        return X


def _coerce(value):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def parse_dataset(text):
    """Parse a dataset argument.

    ``"wave"`` or ``"wave:N=1000,m=100,seed=3"`` select a generator; a
    ``name=path`` prefix names a CSV, otherwise the file stem is used.
    Amplitude pairs are written ``amplitude_sd=3/1``.
    """
    kind, _, rest = text.partition(":")
    if kind in SYNTHETIC:
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, value = item.partition("=")
            if key == "amplitude_sd":
                params[key] = tuple(float(v) for v in value.split("/"))
            else:
                params[key] = _coerce(value)
        return DatasetSpec(name=text if not rest else f"{kind}[{rest}]", source=kind, params=params)
    name, sep, path = text.partition("=")
    if not sep or os.path.exists(text):
        name, path = os.path.splitext(os.path.basename(text))[0], text
    return DatasetSpec(name=name, source=path)


# --------------------------------------------------------------------------
# serialization


def _arr(x):
    return None if x is None else np.asarray(x).tolist()


def model_to_record(model):
    """Plain JSON-serializable dict with a ``type`` tag."""
    if isinstance(model, PcaModel):
        return {
            "type": "pca",
            "components": _arr(model.components),
            "eigenvalues": _arr(model.eigenvalues),
            "mean": _arr(model.mean),
        }
    if isinstance(model, EpcaModel):
        diag = model.diagnostics
        return {
            "type": "epca",
            "components": _arr(model.components),
            "eigenvalue_samples": [_arr(s) for s in model.eigenvalue_samples],
            "eigenvalue_mean": _arr(model.eigenvalue_mean),
            "eigenvalue_variance": _arr(model.eigenvalue_variance),
            "ci_lower": _arr(model.ci_lower),
            "ci_upper": _arr(model.ci_upper),
            "component_variance": _arr(model.component_variance),
            "confidence": model.confidence,
            "mean": _arr(model.mean),
            "diagnostics": {
                "cluster_sizes": _arr(diag.cluster_sizes),
                "pairs": [list(p) for p in diag.pairs],
                "pair_dots": _arr(diag.pair_dots),
                "selected_clusters": list(diag.selected_clusters),
                "inertia": diag.inertia,
                "degenerate": diag.degenerate,
                "warnings": list(diag.warnings),
            },
        }
    if isinstance(model, RpcaResult):
        return {
            "type": "rpca",
            "L": _arr(model.L),
            "S": _arr(model.S),
            "iterations": model.iterations,
            "converged": model.converged,
            "residual": model.residual,
            "elapsed": model.elapsed,
            "timed_out": model.timed_out,
            "residual_history": list(model.residual_history),
        }
    raise InvalidInput(f"cannot serialize {type(model).__name__}")


def model_from_record(rec):
    kind = rec.get("type")
    if kind == "pca":
        return PcaModel(
            components=np.array(rec["components"]),
            eigenvalues=np.array(rec["eigenvalues"]),
            mean=np.array(rec["mean"]),
        )
    if kind == "epca":
        diag = rec["diagnostics"]
        return EpcaModel(
            components=np.array(rec["components"]),
            eigenvalue_samples=tuple(np.array(s) for s in rec["eigenvalue_samples"]),
            eigenvalue_mean=np.array(rec["eigenvalue_mean"]),
            eigenvalue_variance=np.array(rec["eigenvalue_variance"]),
            ci_lower=np.array(rec["ci_lower"]),
            ci_upper=np.array(rec["ci_upper"]),
            component_variance=np.array(rec["component_variance"]),
            confidence=rec["confidence"],
            mean=None if rec["mean"] is None else np.array(rec["mean"]),
            diagnostics=EpcaDiagnostics(
                cluster_sizes=np.array(diag["cluster_sizes"], dtype=int),
                pairs=tuple(tuple(p) for p in diag["pairs"]),
                pair_dots=np.array(diag["pair_dots"]),
                selected_clusters=tuple(diag["selected_clusters"]),
                inertia=diag["inertia"],
                degenerate=diag["degenerate"],
                warnings=tuple(diag["warnings"]),
            ),
        )
    if kind == "rpca":
        return RpcaResult(
            L=np.array(rec["L"]),
            S=np.array(rec["S"]),
            iterations=rec["iterations"],
            converged=rec["converged"],
            residual=rec["residual"],
            elapsed=rec["elapsed"],
            timed_out=rec["timed_out"],
            residual_history=tuple(rec["residual_history"]),
        )
    raise ParseError(f"unknown model type {kind!r}")


def _write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


def save_model(model, path):
    """Write a model as one JSON record (floats round-trip exactly)."""
    _write_text(path, json.dumps(model_to_record(model), indent=1) + "\n")


def load_model(path):
    try:
        with open(path) as fh:
            rec = json.load(fh)
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc
    return model_from_record(rec)


REPORT_COLUMNS = (
    "method",
    "dataset",
    "noise_kind",
    "noise_params",
    "trial",
    "component_index",
    "pct_rel_error",
    "timed_out",
)
TIMING_COLUMNS = ("method", "dataset", "noise_kind", "noise_params", "trial", "elapsed_s", "timed_out")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def report_rows(reports):
    """One row per (report, component), in the order given."""
    rows = []
    for r in reports:
        for i, e in enumerate(np.atleast_1d(r.errors)):
            rows.append(
                {
                    "method": r.method,
                    "dataset": r.dataset,
                    "noise_kind": r.noise_kind,
                    "noise_params": r.noise_params,
                    "trial": r.trial,
                    "component_index": i,
                    "pct_rel_error": float(e),
                    "timed_out": bool(r.timed_out),
                }
            )
    return rows


def timing_rows(reports):
    return [
        {
            "method": r.method,
            "dataset": r.dataset,
            "noise_kind": r.noise_kind,
            "noise_params": r.noise_params,
            "trial": r.trial,
            "elapsed_s": float(r.elapsed),
            "timed_out": bool(r.timed_out),
        }
        for r in reports
    ]


def write_table(rows, columns, path, delimiter=","):
    """CSV with a header row; cells containing the delimiter are quoted."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_fmt(row[c]) for c in columns] for row in rows)
    _write_text(path, buf.getvalue())


def read_table(path, delimiter=","):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh, delimiter=delimiter)
            return [dict(row) for row in reader]
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc


def save_report(reports, path, format="table"):
    """Write trial-level error records.

    ``format="table"`` gives a CSV with :data:`REPORT_COLUMNS` (one row per
    method, dataset, trial and component); ``format="record"`` gives a JSON
    list with the elapsed time included.
    """
    if format == "table":
        write_table(report_rows(reports), REPORT_COLUMNS, path)
    elif format == "record":
        recs = [
            {
                "method": r.method,
                "dataset": r.dataset,
                "noise_kind": r.noise_kind,
                "noise_params": r.noise_params,
                "trial": r.trial,
                "errors": [float(e) for e in np.atleast_1d(r.errors)],
                "elapsed_s": float(r.elapsed),
                "timed_out": bool(r.timed_out),
            }
            for r in reports
        ]
        _write_text(path, json.dumps(recs, indent=1) + "\n")
    else:
        raise InvalidInput(f"unknown report format {format!r}")


def load_report(path):
    """Read a report written by :func:`save_report` back into ErrorReports."""
    from .evaluation import ErrorReport

    if str(path).endswith(".json"):
        try:
            with open(path) as fh:
                recs = json.load(fh)
        except OSError as exc:
            raise DatasetIOError(f"cannot read {path}: {exc}") from exc
        return [
            ErrorReport(
                method=r["method"],
                errors=np.array(r["errors"], dtype=float),
                dataset=r["dataset"],
                noise_kind=r["noise_kind"],
                noise_params=r["noise_params"],
                trial=int(r["trial"]),
                elapsed=r["elapsed_s"],
                timed_out=r["timed_out"],
            )
            for r in recs
        ]
    grouped = {}
    for row in read_table(path):
        key = (row["method"], row["dataset"], row["noise_kind"], row["noise_params"], int(row["trial"]))
        grouped.setdefault(key, []).append(
            (int(row["component_index"]), float(row["pct_rel_error"]), row["timed_out"] == "true")
        )
    out = []
    for (method, dataset, kind, params, trial), comps in grouped.items():
        comps.sort()
        out.append(
            ErrorReport(
                method=method,
                errors=np.array([e for _, e, _ in comps]),
                dataset=dataset,
                noise_kind=kind,
                noise_params=params,
                trial=trial,
                timed_out=comps[0][2],
            )
        )
    return out


def boxplot_record(stats):
    return {
        "median": stats.median,
        "q1": stats.q1,
        "q3": stats.q3,
        "whisker_low": stats.whisker_low,
        "whisker_high": stats.whisker_high,
        "outliers": list(stats.outliers),
        "count": stats.count,
    }


def boxplot_from_record(rec):
    return BoxplotStats(
        median=rec["median"],
        q1=rec["q1"],
        q3=rec["q3"],
        whisker_low=rec["whisker_low"],
        whisker_high=rec["whisker_high"],
        outliers=tuple(rec["outliers"]),
        count=rec["count"],
    )
