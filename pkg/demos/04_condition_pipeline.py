# %% [markdown]
# # The condition pipeline and the identity chain
#
# A candidate subspace S is scored on seven conditions a..g. Unextendibility
# conditions use seesaw search, symmetry conditions use residuals and the
# positivity conditions use a PSD certificate. Every verdict ships with a
# witness that can be re-checked independently.

# %%
import json

import numpy as np

from zeq.sampler import admissible_indices, sample_constrained
from zeq.subspace import conjugate
from zeq.superactivation import (
    SearchConfig,
    check_conditions,
    identity_chain,
    joint_orthogonality,
    search,
    second_support,
    verify_report,
)

# %% [markdown]
# ## One candidate

# %%
idx = admissible_indices(4, 6, positivity_seed=True)[0]
s = sample_constrained(4, 6, idx, seed=5, positivity_seed=True)
report = check_conditions(s, kmax=1, restarts=20, iters=200)
for name, entry in report.conditions.items():
    print(name, entry.verdict, entry.residual)

# %% [markdown]
# Random samples generically fail (a): the sampled subspace is too small
# to exclude product vectors from its complement. The failing witness is
# a product vector, and `verify_report` recomputes its residual.

# %%
obj = json.loads(json.dumps(report.to_json()))
print("re-verified:", verify_report(obj) is not None)

# %% [markdown]
# ## The identity chain
#
# For states supported on S and on the conjugate of the second support,
# the product-channel overlap equals four times the block trace, and both
# vanish when the joint orthogonality holds.

# %%
rng = np.random.default_rng(1)
sig = []
for sub in (s, conjugate(second_support(s))):
    m = rng.standard_normal((sub.dim, sub.dim)) + 1j * rng.standard_normal((sub.dim, sub.dim))
    rho = sub.basis @ (m @ m.conj().T) @ sub.basis.conj().T
    sig.append(rho * 4 / np.trace(rho).real)
print(identity_chain(sig[0], sig[1], 4))
print("joint orthogonality:", joint_orthogonality(s)["quantum_ok"])

# %% [markdown]
# ## A small seeded search

# %%
cfg = SearchConfig(d_a=4, d_values=(6, 8), trials=3, seed=0, positivity_seed=True,
                   restarts=10, iters=100)
for trial in search(cfg):
    print(trial.to_json()["index"], "passed:", trial.report.passed)
