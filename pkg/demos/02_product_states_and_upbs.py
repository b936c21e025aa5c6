# %% [markdown]
# # Product states, unextendible product bases and Plucker coordinates
#
# A subspace of C^3 (x) C^3 with dimension 5 or more always contains a
# product vector. One with dimension 4 generically does not. The
# complement of the Tiles basis is a 4-dimensional space that provably
# contains none.

# %%
import numpy as np

from zeq.numerics import haar_basis, make_rng
from zeq.subspace import (
    BipartiteSubspace,
    complement,
    find_product_state,
    k_unextendible,
    plucker,
)
from zeq.upb import product_upb, symmetrize, tiles_upb, upb_span


def haar_subspace(d_a, d_b, dim, seed):
    return BipartiteSubspace(d_a, d_b, haar_basis(d_a * d_b, dim, make_rng(seed)), "random")


# %% [markdown]
# ## Seesaw search

# %%
for dim in (5, 4):
    r = find_product_state(haar_subspace(3, 3, dim, 7), "inside", restarts=200, seed=0)
    print(f"dim {dim}:", type(r).__name__, getattr(r, "residual", None) or r.best_residual)

tiles = upb_span(tiles_upb())
r = find_product_state(complement(tiles), "inside", restarts=1000, seed=0)
print("Tiles complement:", type(r).__name__, "best residual", r.best_residual)

# %% [markdown]
# ## Tensor products of UPBs stay unextendible

# %%
big = upb_span(product_upb(tiles_upb(), tiles_upb()))
v = k_unextendible(big, 1, restarts=50, use_certificate=False)
print("Tiles (x) Tiles:", big.dim, "states in 9 (x) 9, verdict", v.verdict)

# %% [markdown]
# ## Symmetrization into an even local dimension

# %%
from zeq.upb import complete_product_basis  # noqa: E402

even = upb_span(product_upb(tiles_upb(), complete_product_basis(2, 2)))
sym = symmetrize(even)
print("embedded UPB span:", even.dim, "-> symmetrized:", sym.dim, "of", sym.ambient)

# %% [markdown]
# ## Plucker coordinates do not depend on the basis

# %%
s = haar_subspace(2, 2, 2, 3)
u = haar_basis(2, 2, make_rng(4))
p, q = plucker(s), plucker(s.with_basis(s.basis @ u))
print("max coordinate difference:", np.abs(p.coords - q.coords).max())
print("quadratic relation:", abs(p[(0, 1)] * p[(2, 3)] - p[(0, 2)] * p[(1, 3)] + p[(0, 3)] * p[(1, 2)]))
