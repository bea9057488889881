"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the pytest terminal
summary. Run this file directly (``python3 tests/test_acceptance.py``) to
execute only these checks.
"""
import json
import math
import os
import sys
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_pca.cli import main
from ensemble_pca.dataio import load_model, read_table, synth_low_rank_sparse, synth_wave
from ensemble_pca.epca import EpcaConfig, draw_bags, fit_bags, fit_epca, stack_with_reflections
from ensemble_pca.experiments import MethodSettings, fit_method, run_fixed
from ensemble_pca.linalg import mean_center
from ensemble_pca.noise import NoiseSpec, corrupt_outliers
from ensemble_pca.pca import fit_pca
from ensemble_pca.rpca import RpcaConfig, rpca_ialm, standard_alpha

from conftest import ACCEPTANCE_LINES, angle


def record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def fmt(values):
    return "[" + ", ".join(f"{v:.3f}" for v in values) + "]"


# --------------------------------------------------------------------------
# 1. PCA against power iteration with deflation


def brute_force_pca(X, d, tol=1e-14, max_iter=500_000):
    N, m = X.shape
    mean = [sum(X[i, j] for i in range(N)) / N for j in range(m)]
    C = np.zeros((m, m))
    for i in range(N):
        r = X[i] - mean
        C += np.outer(r, r)
    C /= N - 1
    scale = max(1.0, np.abs(C).max())
    rng = np.random.default_rng(12345)
    values, vectors = [], []
    for _ in range(d):
        v = rng.normal(size=m)
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = C @ v
            lam = v @ w
            if np.linalg.norm(w - lam * v) <= tol * scale:
                break
            norm = np.linalg.norm(w)
            if norm == 0:
                break
            v = w / norm
        lam = v @ C @ v
        values.append(lam)
        vectors.append(v)
        C = C - lam * np.outer(v, v)
    return np.array(values), np.array(vectors)


def test_criterion_1_pca_oracle():
    rng = np.random.default_rng(2026)
    worst_angle = worst_rel = 0.0
    elapsed = 0.0
    for _ in range(100):
        N, m = int(rng.integers(2, 51)), int(rng.integers(1, 9))
        X = rng.normal(size=(N, m)) * rng.uniform(0.1, 5, size=m) + rng.normal(size=m)
        d = min(N - 1, m)
        start = time.perf_counter()
        model = fit_pca(X, d)
        elapsed += time.perf_counter() - start
        lam, V = brute_force_pca(X, d)
        for k in range(d):
            worst_angle = max(worst_angle, angle(V[k], model.components[k]))
            worst_rel = max(worst_rel, abs(model.eigenvalues[k] - lam[k]) / abs(lam[k]))
    ok = worst_angle < 1e-6 and worst_rel < 1e-8 and elapsed < 5
    record(1, ok, f"max angle {worst_angle:.2e} rad, max eigenvalue rel. diff {worst_rel:.2e}, fit time {elapsed:.3f}s")
    assert ok


# --------------------------------------------------------------------------
# 2. RPCA exact recovery


def test_criterion_2_rpca_exact_recovery():
    data = synth_low_rank_sparse(200, 100, 2, 0.01, magnitude=10, seed=0)
    result = rpca_ialm(data.X, RpcaConfig(alpha=standard_alpha(data.X.shape), timeout=None))
    err = np.linalg.norm(result.L - data.L0) / np.linalg.norm(data.L0)
    ok = err < 1e-4 and result.iterations <= 1000 and result.elapsed < 30
    record(2, ok, f"rel. error {err:.2e} after {result.iterations} iterations in {result.elapsed:.2f}s")
    assert ok


# --------------------------------------------------------------------------
# 3-5. fixed-noise comparisons on a 1000 x 100 wave


@pytest.fixture(scope="module")
def wave_1000():
    return synth_wave(N=1000, m=100, seed=0).X


def medians(result, kind):
    return {
        method: [result.error_stats[(kind, method, c)].median for c in (0, 1)]
        for method in ("pca", "epca", "rpca")
    }


def test_criterion_3_epca_outlier_advantage(wave_1000):
    # bag size defaults to ~10% of the rows for outlier noise
    start = time.perf_counter()
    result = run_fixed({"wave": wave_1000}, [NoiseSpec.fixed("outliers")], trials=20, seed=0)
    elapsed = time.perf_counter() - start
    med = medians(result, "outliers")
    ok = all(med["epca"][c] < min(med["pca"][c], med["rpca"][c]) for c in (0, 1)) and elapsed < 300
    record(
        3,
        ok,
        f"median % error PC1/PC2: PCA {fmt(med['pca'])}, EPCA {fmt(med['epca'])}, "
        f"RPCA {fmt(med['rpca'])}; {elapsed:.1f}s",
    )
    assert ok


@pytest.fixture(scope="module")
def dense_noise_result(wave_1000):
    specs = [NoiseSpec.fixed(k) for k in ("sparse", "gaussian", "uniform")]
    return run_fixed({"wave": wave_1000}, specs, trials=20, seed=0)


def test_criterion_4_rpca_sparse_advantage(dense_noise_result):
    med = medians(dense_noise_result, "sparse")
    pca, epca, rpca = med["pca"][0], med["epca"][0], med["rpca"][0]
    ok = rpca < epca < pca + 1
    record(4, ok, f"PC1 median % error: RPCA {rpca:.3f} < EPCA {epca:.3f} < PCA+1 {pca + 1:.3f}")
    assert ok


def test_criterion_5_pca_white_noise_advantage(dense_noise_result):
    parts, ok = [], True
    for kind in ("gaussian", "uniform"):
        med = medians(dense_noise_result, kind)
        pca, epca, rpca = med["pca"][0], med["epca"][0], med["rpca"][0]
        chain = pca <= epca <= rpca
        small = max(med["pca"] + med["epca"]) < 5
        ok = ok and chain and small
        parts.append(
            f"{kind}: PCA {pca:.4f} <= EPCA {epca:.4f} <= RPCA {rpca:.4f} {'holds' if chain else 'violated'}, "
            f"max PCA/EPCA median {max(med['pca'] + med['epca']):.3f}%"
        )
    record(5, ok, "; ".join(parts))
    assert ok


# --------------------------------------------------------------------------
# 6. runtime ordering on the 6000 x 200 wave


@pytest.fixture(scope="module")
def wave_6000_sparse():
    X = synth_wave(N=6000, m=200, seed=0).X
    return NoiseSpec.fixed("sparse", seed=0).apply(X)[0]


def median_time(method, X, settings, runs, noise_kind="sparse"):
    return float(np.median([fit_method(method, X, settings, seed=s, noise_kind=noise_kind).elapsed for s in range(runs)]))


def test_criterion_6_runtime_ordering(wave_6000_sparse):
    X = wave_6000_sparse
    N = X.shape[0]
    small_bags = MethodSettings(epca=EpcaConfig(bag_size=math.ceil(0.1 * N)))
    t_pca = median_time("pca", X, small_bags, 7)
    t_epca = median_time("epca", X, small_bags, 5)
    t_rpca = median_time("rpca", X, small_bags, 3)
    t_epca_full = median_time("epca", X, MethodSettings(), 1)
    ok = t_pca < t_epca and t_rpca >= 10 * t_epca and t_epca <= 50 * t_pca
    record(
        6,
        ok,
        f"median wall time PCA {t_pca:.3f}s, EPCA (n={math.ceil(0.1 * N)}) {t_epca:.3f}s "
        f"({t_epca / t_pca:.1f}x PCA), RPCA {t_rpca:.2f}s ({t_rpca / t_epca:.1f}x EPCA); "
        f"for reference EPCA with n=N takes {t_epca_full:.2f}s ({t_epca_full / t_pca:.0f}x PCA)",
    )
    assert ok


# --------------------------------------------------------------------------
# 7. timeouts


def test_criterion_7_timeout(tmp_path, capsys):
    X = synth_wave(N=6000, m=200, seed=0).X
    result = rpca_ialm(X, RpcaConfig(timeout=0.01))
    lib_ok = result.timed_out and result.iterations >= 1 and np.all(np.isfinite(result.L))

    model_path = tmp_path / "rpca.json"
    code = main(["fit", "wave", "--method", "rpca", "--timeout", "0.01", "--output", str(model_path)])
    partial = load_model(str(model_path)) if model_path.exists() else None
    cli_ok = code != 0 and partial is not None and partial.timed_out and partial.L.shape == (6000, 200)

    out = tmp_path / "suite"
    suite_code = main([
        "experiment", "fixed", "wave", "--method", "pca", "--method", "rpca", "--noise", "sparse",
        "--trials", "1", "--timeout", "0.01", "--output", str(out),
    ])
    capsys.readouterr()
    flags = read_table(str(out / "flags.csv")) if (out / "flags.csv").exists() else []
    suite_ok = suite_code == 0 and [(f["method"], f["flag"]) for f in flags] == [("rpca", "timeout")]

    ok = lib_ok and cli_ok and suite_ok
    record(
        7,
        ok,
        f"library timed_out={result.timed_out} after {result.iterations} iteration(s); "
        f"CLI exit {code}, partial file saved={partial is not None}; "
        f"suite exit {suite_code}, flags={[(f['method'], f['flag']) for f in flags]}",
    )
    assert ok


# --------------------------------------------------------------------------
# 8. confidence band coverage and width


def test_criterion_8_ci_coverage(wave_1000):
    X = wave_1000
    truth = fit_pca(X, 2).components
    modes = synth_wave(N=1000, m=100, seed=0).components
    coverage, mode_coverage, clean_width, noisy_width = [], [], [], []
    for seed in range(10):
        model = fit_epca(X, rank=2, seed=seed, confidence=0.95)
        for k in range(2):
            for ref, store in ((truth[k], coverage), (modes[k], mode_coverage)):
                t = ref if ref @ model.components[k] > 0 else -ref
                store.append(np.mean((t >= model.ci_lower[k]) & (t <= model.ci_upper[k])))
        clean_width.append(model.ci_width.mean())
        noisy, _ = corrupt_outliers(X, 5.0, 10.0, seed=100 + seed)
        noisy_width.append(fit_epca(noisy, rank=2, seed=seed, confidence=0.95).ci_width.mean())
    ok = min(coverage) >= 0.9 and np.mean(clean_width) < np.mean(noisy_width)
    record(
        8,
        ok,
        f"min coverage of clean-data PCA components {min(coverage):.2f} "
        f"(generator modes: {min(mode_coverage):.2f}); mean band width clean {np.mean(clean_width):.4f} "
        f"< outliers {np.mean(noisy_width):.4f}",
    )
    assert ok


# --------------------------------------------------------------------------
# 9. stacking invariants and antipodal pairing

_stack_failures = []


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(2, 30),
    st.integers(1, 3),
    st.integers(10, 80),
)
def _check_stacking(seed, B, d, N):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(N, 6)) * np.array([5, 3, 2, 1, 0.5, 0.1])
    Xbar, _ = mean_center(X)
    s = stack_with_reflections(fit_bags(Xbar, draw_bags(N, B, N, seed=seed), d))
    half = B * d
    exact = np.array_equal(s.components[half:], -s.components[:half]) and np.array_equal(
        s.eigenvalues[half:], s.eigenvalues[:half]
    )
    if not exact or s.components.shape[0] != 2 * half:
        _stack_failures.append((seed, B, d, N))
    assert exact


def test_criterion_9_reflection_invariants():
    _stack_failures.clear()
    try:
        _check_stacking()
        stacking_ok = True
    except AssertionError:
        stacking_ok = False
    worst_dot = -1.0
    for seed in range(5):
        clean = synth_wave(N=500, m=50, noise_floor=0.0, seed=seed).X
        worst_dot = max(worst_dot, float(fit_epca(clean, rank=2, seed=seed).diagnostics.pair_dots.max()))
    ok = stacking_ok and worst_dot < -0.9
    record(
        9,
        ok,
        f"reflection/duplication exact on 40 random runs: {stacking_ok}; "
        f"max pair dot product on clean rank-2 data {worst_dot:.6f}",
    )
    assert ok


# --------------------------------------------------------------------------
# 10. determinism across reruns and job counts

CLI_DATA = "wave:N=300,m=30,seed=4"


def cli_outputs(root, jobs):
    """Run every subcommand once and collect the bytes of its data outputs."""
    root.mkdir()
    common = ["--seed", "7", "--jobs", str(jobs)]
    runs = {
        "corrupt": ["corrupt", CLI_DATA, "--noise", "outliers", "--output", str(root / "noisy.csv")],
        "fit-pca": ["fit", CLI_DATA, "--method", "pca", "--output", str(root / "pca.json")],
        "fit-epca": ["fit", CLI_DATA, "--method", "epca", "--bags", "30", "--output", str(root / "epca.json")],
        "fit-rpca": ["fit", CLI_DATA, "--method", "rpca", "--output", str(root / "rpca.json")],
        "grid": ["experiment", "grid", CLI_DATA, "--noise", "sparse", "--noise", "outliers", "--trials", "2",
                 "--epca-runs", "2", "--bags", "10", "--output", str(root / "grid")],
        "fixed": ["experiment", "fixed", CLI_DATA, "--trials", "3", "--bags", "10", "--output", str(root / "fixed")],
    }
    codes = {name: main(argv + common) for name, argv in runs.items()}
    files = {}
    for name in ("noisy.csv", "noisy.csv.noise.json", "pca.json", "epca.json"):
        files[name] = (root / name).read_bytes()
    rec = json.loads((root / "rpca.json").read_text())
    rec.pop("elapsed")
    files["rpca.json (without elapsed)"] = json.dumps(rec).encode()
    for suite in ("grid", "fixed"):
        for table in ("trials.csv", "summary.csv", "flags.csv"):
            files[f"{suite}/{table}"] = (root / suite / table).read_bytes()
    return codes, files


def test_criterion_10_determinism(tmp_path, capsys):
    runs = [cli_outputs(tmp_path / name, jobs) for name, jobs in (("a", 1), ("b", 1), ("c", 4))]
    capsys.readouterr()
    codes_ok = all(code == 0 for codes, _ in runs for code in codes.values())
    reference = runs[0][1]
    mismatched = sorted({k for _, files in runs[1:] for k in reference if files[k] != reference[k]})
    ok = codes_ok and not mismatched
    record(
        10,
        ok,
        f"{len(reference)} outputs compared over reruns with --jobs 1 and 4; "
        f"mismatches: {mismatched or 'none'}",
    )
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([os.path.abspath(__file__), "-q"]))
