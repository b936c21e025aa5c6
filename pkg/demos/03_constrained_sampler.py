# %% [markdown]
# # Sampling subspaces with the required symmetries
#
# The sampler draws random subspaces of C^d_a (x) C^d_a that are closed
# under the flip, closed under the flip conjugated by I (x) X, and whose
# projector commutes with P+ (x) P-. A structure index fixes how the
# dimension splits between the two invariant blocks.

# %%
from zeq.sampler import (
    admissible_indices,
    dimension_window,
    headline_dimensions,
    measure_structure,
    sample_constrained,
    verify_symmetries,
)
from zeq.subspace import complement

# %% [markdown]
# ## Dimension bookkeeping

# %%
print("smallest construction:", headline_dimensions(48))
print("window at d_A=46:", dimension_window(46), " at d_A=48:", dimension_window(48))

# %% [markdown]
# ## Admissible structure indices

# %%
for idx in admissible_indices(4, 6):
    print(idx.to_json())

# %% [markdown]
# ## Draw, verify and measure

# %%
idx = admissible_indices(4, 6)[1]
s = sample_constrained(4, 6, idx, seed=11)
print("symmetries:", verify_symmetries(s).to_json())
print("complement symmetries pass:", verify_symmetries(complement(s)).passed)
print("measured structure:", measure_structure(s))

# %% [markdown]
# ## Positivity seeding
#
# Seeding places the maximally entangled vector inside the subspace and
# keeps its I (x) X image out, which makes both positivity conditions hold.

# %%
seeded = sample_constrained(4, 6, admissible_indices(4, 6, positivity_seed=True)[0], 3,
                            positivity_seed=True)
print("seeded sample metadata:", seeded.metadata)
