"""
Exact recovery with Robust PCA
==============================

Principal Component Pursuit splits a matrix into a low-rank part and a
sparse part. With a few large corruptions and the standard weight
1/sqrt(max(N, m)) the low-rank part comes back to solver precision.
"""

import numpy as np

from ensemble_pca import rpca_ialm, synth_low_rank_sparse
from ensemble_pca.rpca import standard_alpha

data = synth_low_rank_sparse(N=200, m=100, rank=2, fraction=0.01, magnitude=10, seed=0)
result = rpca_ialm(data.X, alpha=standard_alpha(data.X.shape))

err_L = np.linalg.norm(result.L - data.L0) / np.linalg.norm(data.L0)
print(f"converged={result.converged} after {result.iterations} iterations ({result.elapsed:.2f}s)")
print(f"relative error in L: {err_L:.2e}")
print(f"support of S recovered: {np.array_equal(np.abs(result.S) > 1, data.S0 != 0)}")

# %%
# The residual history shows the penalty schedule at work.
for i, r in enumerate(result.residual_history[:8]):
    print(f"iteration {i + 1}: ||X - L - S|| / ||X|| = {r:.2e}")

# %%
# A timeout turns a long solve into a reportable outcome.
partial = rpca_ialm(data.X, timeout=0.0)
print("timed out:", partial.timed_out, "iterations:", partial.iterations)
