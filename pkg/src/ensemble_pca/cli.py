"""Command line interface: ``ensemble-pca {corrupt,fit,experiment}``.

Data goes to files and standard output, logs go to standard error. A JSON
config file given with ``--config`` may set any flag (same name, dashes
written as underscores); flags on the command line take precedence. The
fully resolved configuration of every run is written next to its output.

Exit codes: 0 success, 2 invalid input, 3 I/O error, 4 RPCA timeout.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import dataio
from .epca import EpcaConfig, fit_epca
from .exceptions import DatasetIOError, EnsemblePCAError, InvalidInput, ParseError
from .experiments import METHODS, MethodSettings, run_fixed, run_grid
from .noise import FIXED_DEFAULTS, KINDS, NoiseSpec
from .pca import fit_pca
from .rpca import RpcaConfig, rpca_components, rpca_ialm

log = logging.getLogger("ensemble_pca")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_TIMEOUT = 4

DEFAULTS = {
    "method": None,
    "bags": 100,
    "bag_size": None,
    "rank": 2,
    "alpha": 0.20,
    "timeout": 120.0,
    "seed": 0,
    "jobs": 1,
    "noise": None,
    "noise_params": None,
    "trials": None,
    "epca_runs": 5,
    "confidence": 0.95,
    "output": None,
    "delimiter": ",",
    "header": False,
    "drop": None,
}

# default sweeps for the grid suite, bracketing the fixed-noise settings
GRID_DEFAULTS = {
    "sparse": {"p": [0.01, 0.05, 0.10], "c": [2.0]},
    "gaussian": {"f": [100.0, 1000.0, 10000.0]},
    "uniform": {"f": [100.0, 1000.0, 10000.0]},
    "outliers": {"s": [5.0, 10.0, 15.0, 20.0, 25.0], "scale": [5.0]},
}

PARAM_ALIASES = {"S": "scale", "scale": "scale", "p": "p", "c": "c", "f": "f", "s": "s"}


def parse_noise_params(text):
    """Parse ``"p=0.01,0.05;c=2"`` into ``{"p": [0.01, 0.05], "c": [2.0]}``.

    Items are separated by ``;`` or ``,``; an item without ``=`` adds another
    value to the preceding key. ``S`` is accepted for the outlier scale.
    """
    params = {}
    key = None
    for item in filter(None, (i.strip() for i in text.replace(";", ",").split(","))):
        if "=" in item:
            name, _, value = item.partition("=")
            name = name.strip()
            if name not in PARAM_ALIASES:
                raise InvalidInput(f"unknown noise parameter {name!r}")
            key = PARAM_ALIASES[name]
            params[key] = []
        elif key is None:
            raise InvalidInput(f"noise parameter value {item!r} has no name")
        else:
            value = item
        try:
            params[key].append(float(value))
        except ValueError:
            raise InvalidInput(f"noise parameter {key}: {value!r} is not a number") from None
    return params


def noise_grid(kind, params):
    """Cartesian product of parameter lists as NoiseSpecs."""
    keys = sorted(params)
    specs = [{}]
    for k in keys:
        specs = [{**s, k: v} for s in specs for v in params[k]]
    return [NoiseSpec(kind=kind, **s) for s in specs]


def build_parser():
    parser = argparse.ArgumentParser(prog="ensemble-pca", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # defaults stay None so that config-file values can fill them in
        p.add_argument("--config", help="JSON file with flag values")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--output", help="output file (corrupt, fit) or directory (experiment)")
        p.add_argument("--delimiter", help="CSV delimiter")
        p.add_argument("--header", action="store_true", default=None, help="CSV has a header row")
        p.add_argument("--drop", action="append", help="CSV column to drop (name or index)")

    c = sub.add_parser("corrupt", help="add noise to a dataset")
    c.add_argument("dataset", nargs="?")
    c.add_argument("--noise", choices=KINDS)
    c.add_argument("--noise-params")
    common(c)

    f = sub.add_parser("fit", help="fit PCA, EPCA or RPCA and save the model")
    f.add_argument("dataset", nargs="?")
    f.add_argument("--method", choices=METHODS)
    f.add_argument("--rank", type=int)
    f.add_argument("--bags", type=int)
    f.add_argument("--bag-size", type=int)
    f.add_argument("--confidence", type=float)
    f.add_argument("--alpha", type=float)
    f.add_argument("--timeout", type=float)
    common(f)

    e = sub.add_parser("experiment", help="run the grid or fixed-noise benchmark")
    e.add_argument("suite", choices=("grid", "fixed"), nargs="?")
    e.add_argument("datasets", nargs="*")
    e.add_argument("--method", action="append", choices=METHODS)
    e.add_argument("--noise", action="append", choices=KINDS)
    e.add_argument("--noise-params", action="append")
    e.add_argument("--trials", type=int, help="repetitions per level (grid) or trials (fixed)")
    e.add_argument("--epca-runs", type=int, help="EPCA fits per corruption in the grid suite")
    e.add_argument("--rank", type=int)
    e.add_argument("--bags", type=int)
    e.add_argument("--bag-size", type=int)
    e.add_argument("--alpha", type=float)
    e.add_argument("--timeout", type=float)
    common(e)
    return parser


def resolve(args):
    """Merge defaults, config file and command-line flags."""
    resolved = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise DatasetIOError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {args.config} is not valid JSON: {exc}") from exc
        unknown = set(cfg) - set(vars(args)) - set(DEFAULTS)
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        resolved.update(cfg)
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "verbose"):
            resolved[key] = value
    resolved["command"] = args.command
    return resolved


def _load(spec_text, cfg):
    spec = dataio.parse_dataset(spec_text)
    if spec.source not in dataio.SYNTHETIC:
        spec = replace(
            spec,
            params={"delimiter": cfg["delimiter"], "header": bool(cfg["header"])},
            drop_columns=tuple(cfg["drop"] or ()),
        )
    return spec.name, spec.load()


def _echo_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) in (None, [], "")]
    if missing:
        raise InvalidInput(f"missing required option(s): {', '.join(missing)}")


def _single_noise(cfg):
    kind = cfg["noise"]
    if isinstance(kind, list):
        kind = kind[0]
    values = dict(FIXED_DEFAULTS[kind])
    text = cfg.get("noise_params")
    if isinstance(text, list):
        text = text[0]
    if text:
        for key, vals in parse_noise_params(text).items():
            if len(vals) != 1:
                raise InvalidInput(f"corrupt takes one value per parameter, got {key}={vals}")
            values[key] = vals[0]
    return NoiseSpec(kind=kind, seed=cfg["seed"], **values)


def cmd_corrupt(cfg):
    _require(cfg, "dataset", "noise", "output")
    _, X = _load(cfg["dataset"], cfg)
    spec = _single_noise(cfg)
    Xn, info = spec.apply(X)
    out = cfg["output"]
    dataio.save_csv(Xn, out)
    sidecar = {"noise_kind": spec.kind, "params": spec.params, "seed": spec.seed}
    if spec.kind == "sparse":
        sidecar["corrupted_entries"] = np.argwhere(info).tolist()
    elif spec.kind == "outliers":
        sidecar["corrupted_rows"] = info.tolist()
    with open(out + ".noise.json", "w") as fh:
        json.dump(sidecar, fh)
        fh.write("\n")
    _echo_config(cfg, out + ".config.json")
    log.info("wrote %s", out)
    return EXIT_OK


def _summary(method, model):
    if method == "rpca":
        return {
            "method": method,
            "iterations": model.iterations,
            "converged": model.converged,
            "timed_out": model.timed_out,
            "residual": model.residual,
            "elapsed_s": model.elapsed,
        }
    out = {
        "method": method,
        "components": model.components.tolist(),
    }
    if method == "pca":
        out["eigenvalues"] = model.eigenvalues.tolist()
        return out
    out.update(
        {
            "eigenvalue_mean": model.eigenvalue_mean.tolist(),
            "eigenvalue_variance": model.eigenvalue_variance.tolist(),
            "confidence": model.confidence,
            "ci_lower": model.ci_lower.tolist(),
            "ci_upper": model.ci_upper.tolist(),
            "eigenvalue_boxplots": [dataio.boxplot_record(b) for b in model.eigenvalue_boxplots()],
            "warnings": list(model.diagnostics.warnings),
        }
    )
    return out


def cmd_fit(cfg):
    _require(cfg, "dataset", "method", "output")
    _, X = _load(cfg["dataset"], cfg)
    method, d = cfg["method"], cfg["rank"]
    code = EXIT_OK
    if method == "pca":
        model = fit_pca(X, d)
    elif method == "epca":
        config = EpcaConfig(
            n_bags=cfg["bags"],
            bag_size=cfg["bag_size"],
            rank=d,
            seed=cfg["seed"],
            confidence=cfg["confidence"],
            n_jobs=cfg["jobs"],
        )
        model = fit_epca(X, config)
    else:
        model = rpca_ialm(X, RpcaConfig(alpha=cfg["alpha"], timeout=cfg["timeout"]))
        if model.timed_out:
            log.error("rpca timed out after %d iterations (%.3fs)", model.iterations, model.elapsed)
            code = EXIT_TIMEOUT
    dataio.save_model(model, cfg["output"])
    _echo_config(cfg, cfg["output"] + ".config.json")
    summary = _summary(method, model)
    if method == "rpca" and not model.timed_out:
        summary["components"] = rpca_components(model, d).components.tolist()
    json.dump(summary, sys.stdout)
    sys.stdout.write("\n")
    return code


def _experiment_noise(cfg, suite):
    kinds = cfg["noise"] or list(KINDS)
    if isinstance(kinds, str):
        kinds = [kinds]
    texts = cfg["noise_params"] or []
    if isinstance(texts, str):
        texts = [texts]
    if texts and len(texts) != len(kinds):
        raise InvalidInput("give one --noise-params per --noise, or none")
    specs = []
    for i, kind in enumerate(kinds):
        override = parse_noise_params(texts[i]) if texts else {}
        if suite == "grid":
            params = {**GRID_DEFAULTS[kind], **override}
            specs.extend(noise_grid(kind, params))
        else:
            values = dict(FIXED_DEFAULTS[kind])
            for key, vals in override.items():
                if len(vals) != 1:
                    raise InvalidInput(f"fixed suite takes one value per parameter, got {key}={vals}")
                values[key] = vals[0]
            specs.append(NoiseSpec(kind=kind, **values))
    return specs


def cmd_experiment(cfg):
    _require(cfg, "suite", "datasets", "output")
    suite = cfg["suite"]
    outdir = cfg["output"]
    os.makedirs(outdir, exist_ok=True)
    datasets = [_load(text, cfg) for text in cfg["datasets"]]
    methods = cfg["method"] or list(METHODS)
    if isinstance(methods, str):
        methods = [methods]
    settings = MethodSettings(
        rank=cfg["rank"],
        epca=EpcaConfig(n_bags=cfg["bags"], bag_size=cfg["bag_size"], rank=cfg["rank"]),
        rpca=RpcaConfig(alpha=cfg["alpha"], timeout=cfg["timeout"]),
    )
    specs = _experiment_noise(cfg, suite)
    if suite == "grid":
        trials = 5 if cfg["trials"] is None else cfg["trials"]
        result = run_grid(
            datasets, specs, methods, repetitions=trials, epca_runs=cfg["epca_runs"],
            seed=cfg["seed"], settings=settings, jobs=cfg["jobs"],
        )
        reports = result.reports
        summary_cols = ("noise_kind", "noise_params", "method", "component_index",
                        "mean_pct_rel_error", "count", "failed")
        summary_rows = result.means
        flags = sorted({(r.noise_kind, r.noise_params, r.method, r.dataset) for r in reports if r.timed_out})
    else:
        trials = 100 if cfg["trials"] is None else cfg["trials"]
        result = run_fixed(
            datasets, specs, methods, trials=trials, seed=cfg["seed"],
            settings=settings, jobs=cfg["jobs"],
        )
        reports = result.reports
        label = {s.kind: s.label() for s in specs}
        summary_cols = ("noise_kind", "noise_params", "method", "component_index", "median", "q1",
                        "q3", "whisker_low", "whisker_high", "n_outliers", "count")
        summary_rows = [
            {
                "noise_kind": kind, "noise_params": label[kind], "method": method,
                "component_index": comp, "median": s.median, "q1": s.q1, "q3": s.q3,
                "whisker_low": s.whisker_low, "whisker_high": s.whisker_high,
                "n_outliers": len(s.outliers), "count": s.count,
            }
            for (kind, method, comp), s in result.error_stats.items()
        ]
        runtime_rows = [
            {
                "noise_kind": kind, "method": method, "dataset": ds, "median_s": s.median,
                "q1_s": s.q1, "q3_s": s.q3, "count": s.count,
            }
            for (kind, method, ds), s in result.runtime_stats.items()
        ]
        dataio.write_table(runtime_rows, ("noise_kind", "method", "dataset", "median_s", "q1_s", "q3_s",
                                          "count"), os.path.join(outdir, "runtime.csv"))
        flags = sorted((k, label[k], m, d) for k, m, d in result.excluded)

    dataio.write_table(dataio.report_rows(reports), dataio.REPORT_COLUMNS, os.path.join(outdir, "trials.csv"))
    dataio.write_table(dataio.timing_rows(reports), dataio.TIMING_COLUMNS, os.path.join(outdir, "timings.csv"))
    dataio.write_table(summary_rows, summary_cols, os.path.join(outdir, "summary.csv"))
    flag_rows = [
        {"noise_kind": k, "noise_params": p, "method": m, "dataset": d, "flag": "timeout"} for k, p, m, d in flags
    ]
    dataio.write_table(flag_rows, ("noise_kind", "noise_params", "method", "dataset", "flag"),
                       os.path.join(outdir, "flags.csv"))
    _echo_config(cfg, os.path.join(outdir, "config.json"))
    for row in flag_rows:
        log.warning("%s timed out on %s (%s %s); excluded from its stats",
                    row["method"], row["dataset"], row["noise_kind"], row["noise_params"])
    json.dump({"suite": suite, "output": outdir, "reports": len(reports), "flags": len(flag_rows)}, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


COMMANDS = {"corrupt": cmd_corrupt, "fit": cmd_fit, "experiment": cmd_experiment}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers = [handler]
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except DatasetIOError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (EnsemblePCAError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
