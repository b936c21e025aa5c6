# %% [markdown]
# # Channels, Choi matrices and zero-error recovery
#
# A channel is stored by its Kraus operators. We build one that hides a
# qubit inside a larger output space, check that it passes the zero-error
# test, then undo it with the explicit recovery map.

# %%
import numpy as np

from zeq.channel import (
    adjoint,
    channel_from_choi,
    choi,
    compose,
    correctable_channel,
    pauli_mixture_fit,
    q0_witness,
    random_channel,
    recovery_map,
)

# %% [markdown]
# ## Choi matrix round trip
#
# The Choi matrix is unnormalized and ordered input then output.

# %%
ch = random_channel(2, 3, 2, seed=1)
c = choi(ch)
print("Choi shape:", c.matrix.shape, " trace:", np.trace(c.matrix).real)
back = channel_from_choi(c)
print("round-trip error:", np.linalg.norm(choi(back).matrix - c.matrix))

# %% [markdown]
# ## The adjoint is the Hilbert-Schmidt dual

# %%
rng = np.random.default_rng(0)
x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
lhs = np.trace(y.conj().T @ ch(x))
rhs = np.trace(adjoint(ch)(y).conj().T @ x)
print("duality gap:", abs(lhs - rhs))

# %% [markdown]
# ## A correctable channel and its recovery

# %%
k0, k1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
enc = correctable_channel(6, 2, 3, seed=4)
w = q0_witness(enc, k0, k1)
print("zero-error witness:", w["holds"], " overlaps:", w["overlap_01"], w["overlap_pm"])

rec = compose(recovery_map(enc, k0, k1), enc)
plus = (k0 + k1) / np.sqrt(2)
rho = np.outer(plus, plus.conj())
print("recovered |+><+| error:", np.abs(rec(rho) - rho).max())
print("Pauli mixture of R.E:", pauli_mixture_fit(rec))
