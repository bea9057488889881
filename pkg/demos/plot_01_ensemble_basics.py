"""
Ensemble PCA on a synthetic wave
================================

Fit classical PCA and Ensemble PCA to the same two-mode wave data and look
at what the ensemble adds: averaged components, eigenvalue samples and
coordinate-wise confidence bands.
"""

import numpy as np

from ensemble_pca import fit_epca, fit_pca, relative_error, synth_wave

# %%
# The wave has two sinusoidal modes with amplitude standard deviations 30
# and 15 plus a small isotropic noise floor.
wave = synth_wave(N=1000, m=100, seed=0)
print("data", wave.X.shape, "population eigenvalues", wave.eigenvalues)

# %%
# Classical PCA gives one estimate per component.
pca = fit_pca(wave.X, 2)
print("PCA eigenvalues", np.round(pca.eigenvalues, 2))

# %%
# EPCA fits PCA on 100 bootstrap bags, stacks every component with its
# reflection and clusters the stack into 2d groups.
epca = fit_epca(wave.X, rank=2, n_bags=100, seed=0)
print("EPCA mean eigenvalues", np.round(epca.eigenvalue_mean, 2))
print("cluster sizes", epca.diagnostics.cluster_sizes, "pair dots", epca.diagnostics.pair_dots)

for k in range(2):
    err = relative_error(pca.components[k], epca.components[k])
    print(f"PC{k + 1}: EPCA vs PCA {err:.3f}% relative difference")

# %%
# Each component carries a 95% band per coordinate. On clean data the
# bands are narrow and contain the PCA estimate.
width = epca.ci_width
for k in range(2):
    t = pca.components[k] * np.sign(pca.components[k] @ epca.components[k])
    inside = np.mean((t >= epca.ci_lower[k]) & (t <= epca.ci_upper[k]))
    print(f"PC{k + 1}: mean band width {width[k].mean():.4f}, PCA inside band at {inside:.0%} of coordinates")

# %%
# The eigenvalue samples of each kept cluster summarize the spread of the
# explained variance.
for k, box in enumerate(epca.eigenvalue_boxplots()):
    print(f"PC{k + 1} eigenvalue: median {box.median:.1f}, IQR [{box.q1:.1f}, {box.q3:.1f}], "
          f"{len(box.outliers)} samples beyond the whiskers")
