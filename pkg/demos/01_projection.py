# %% [markdown]
# # Block-rotation projection
#
# A 32-byte seed expands into one angle per pair of feature components and
# a translation vector. The projection rotates each pair and shifts the
# result, so pairwise distances survive but the template itself changes
# completely when the seed changes.

# %%
import numpy as np

from rofc import derive_params, new_seed, project
from rofc.diagnostics import materialize_matrix

rng = np.random.default_rng(0)
seed = new_seed()
params = derive_params(seed, 200)
print("first angles:", np.round(params.angles[:4], 4))
print("first offsets:", np.round(params.translation[:4], 4))

# %% The dense matrix is only built here, for inspection
a = materialize_matrix(params)
print("max |A^T A - I| =", np.abs(a.T @ a - np.eye(200)).max())
print("top-left block:\n", np.round(a[:4, :4], 3))

# %% Distances between two feature vectors are preserved
x1, x2 = rng.random(200), rng.random(200)
before = np.linalg.norm(x1 - x2)
after = np.linalg.norm(project(x1, params) - project(x2, params))
print(f"distance before {before:.12f}, after {after:.12f}")

# %% Revocation: a fresh seed gives an unrelated template of the same feature
other = derive_params(new_seed(), 200)
y_old, y_new = project(x1, params), project(x1, other)
print("correlation old/new template:", np.corrcoef(y_old, y_new)[0, 1].round(3))
