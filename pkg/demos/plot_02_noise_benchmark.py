"""
Comparing PCA, EPCA and RPCA under four kinds of corruption
===========================================================

Repeat a corruption a few times for each noise model and summarize the
percent relative error of each method against PCA of the clean data.
"""

from ensemble_pca import run_fixed, synth_wave
from ensemble_pca.experiments import fixed_noise_specs

# %%
# Sparse entries, Gaussian and uniform white noise, and scaled outlier
# rows, each at its fixed benchmark setting.
specs = fixed_noise_specs()
for spec in specs:
    print(spec.kind, spec.label())

# %%
# Ten trials per setting keeps this under a minute. EPCA uses small bags
# automatically when the noise kind is "outliers".
wave = synth_wave(N=1000, m=100, seed=0).X
result = run_fixed({"wave": wave}, specs, trials=10, seed=0)

print(f"{'noise':<10}{'method':<7}{'PC1 median':>12}{'PC2 median':>12}")
for spec in specs:
    for method in ("pca", "epca", "rpca"):
        pc1 = result.error_stats[(spec.kind, method, 0)].median
        pc2 = result.error_stats[(spec.kind, method, 1)].median
        print(f"{spec.kind:<10}{method:<7}{pc1:>12.3f}{pc2:>12.3f}")

# %%
# Runtime boxplots come with the same result.
for (kind, method, _), stats in result.runtime_stats.items():
    if kind == "sparse":
        print(f"{method}: median fit time {stats.median * 1e3:.1f} ms")
