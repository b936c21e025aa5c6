"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; vectors are
1-d arrays. Bipartite vectors are indexed ``i * d_b + j`` for the product
basis element ``|i>|j>``, so ``psi.reshape(d_a, d_b)`` is the matrix view.
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_MAX_AMBIENT = 4096
SEED_LIMIT = 2**64


class AmbientDimensionError(RuntimeError):
    """A computation would exceed the configured maximum ambient dimension."""


def max_ambient():
    """Largest complex dimension a dense object may have.

    Reads ``ZEQ_MAX_AMBIENT`` on every call so tests and the CLI can
    override the guard without reloading the module.
    """
    value = os.environ.get("ZEQ_MAX_AMBIENT")
    if value is None:
        return DEFAULT_MAX_AMBIENT
    return int(value)


def check_ambient(n, what="object"):
    limit = max_ambient()
    if n > limit:
        raise AmbientDimensionError(
            f"{what} has ambient dimension {n} > limit {limit} "
            "(set ZEQ_MAX_AMBIENT or pass --unsafe to override)"
        )


# --------------------------------------------------------------------------- #
#                              Seeds and sampling                             #
# --------------------------------------------------------------------------- #


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed):
    """Return a fresh PCG64 generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def derive_seed(seed, *keys):
    """Child seed for the stream labelled by ``keys`` under ``seed``.

    Children with different keys are statistically independent, and the
    mapping is a pure function of its arguments.
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def haar_basis(ambient, rank, rng, real=False):
    """Orthonormal ``ambient x rank`` basis of a Haar-random subspace.

    QR of a standard Gaussian matrix with the diagonal of R made positive,
    which gives the Haar measure on the (complex or real) Stiefel manifold.
    """
    if not 0 <= rank <= ambient:
        raise ValueError(f"rank {rank} out of range for ambient dimension {ambient}")
    dtype = float if real else complex
    if rank == 0:
        return np.zeros((ambient, 0), dtype=dtype)
    g = rng.standard_normal((ambient, rank))
    if not real:
        g = g + 1j * rng.standard_normal((ambient, rank))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases.conj()


def haar_projector(ambient, rank, seed):
    """Projector onto a Haar-random ``rank``-dimensional subspace of C^ambient."""
    if not 0 <= rank <= ambient:
        raise ValueError(f"rank {rank} out of range for ambient dimension {ambient}")
    check_ambient(ambient, "haar_projector")
    if rank == ambient:
        return np.eye(ambient, dtype=complex)
    b = haar_basis(ambient, rank, make_rng(seed))
    return b @ b.conj().T


def random_state(n, rng):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_density(n, rng, rank=None):
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


# --------------------------------------------------------------------------- #
#                                Linear algebra                               #
# --------------------------------------------------------------------------- #


def tensor_product(a, b):
    """Kronecker product with the ambient-dimension guard applied."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        check_ambient(a.size * b.size, "tensor product")
        return np.kron(a, b)
    a2, b2 = np.atleast_2d(a), np.atleast_2d(b)
    check_ambient(max(a2.shape[0] * b2.shape[0], a2.shape[1] * b2.shape[1]), "tensor product")
    return np.kron(a2, b2)


def partial_trace(m, dims, subsystem):
    """Trace out ``subsystem`` ("A" or "B") of an operator on C^d_a (x) C^d_b."""
    d_a, d_b = dims
    m = np.asarray(m)
    if m.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(f"matrix of shape {m.shape} does not factor as {d_a}x{d_b}")
    t = m.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "A":
        return np.einsum("ijik->jk", t)
    if subsystem == "B":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def is_hermitian(m, tol=1e-10):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(np.linalg.norm(m), 1.0)
    return np.linalg.norm(m - m.conj().T) <= tol * scale


def pinv_sqrt(m, tol=1e-9):
    """Square root of the Moore-Penrose pseudo-inverse of a PSD matrix.

    Eigenvalues below ``tol`` times the largest eigenvalue count as zero.

    Returns
    -------
    inv_sqrt : ndarray
        ``m^{-1/2}`` on the support of ``m``, zero on its kernel.
    kernel_projector : ndarray
        Projector onto the kernel, ``I - inv_sqrt @ m @ inv_sqrt``.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, 1e-10):
        raise ValueError("pinv_sqrt requires a Hermitian matrix")
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    scale = max(abs(evals).max(initial=0.0), np.finfo(float).tiny)
    cutoff = tol * scale
    if evals.min(initial=0.0) < -cutoff:
        raise ValueError(f"matrix has eigenvalue {evals.min():.3e} below -tol")
    support = evals > cutoff
    vs, vk = evecs[:, support], evecs[:, ~support]
    inv_sqrt = (vs / np.sqrt(evals[support])) @ vs.conj().T
    kernel = vk @ vk.conj().T
    return inv_sqrt, kernel


def orthonormalize(vectors, tol=1e-10):
    """Orthonormal basis (columns) for the column span of ``vectors``.

    Singular values below ``tol`` relative to the largest are dropped.
    """
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] == 0:
        return np.zeros((v.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((v.shape[0], 0), dtype=complex)
    return u[:, s > tol * s[0]]


def null_space(m, tol=1e-10):
    """Orthonormal basis of the kernel of ``m`` (relative singular cutoff)."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > tol * s[0]))
    return vh[rank:].conj().T


def projector(basis):
    basis = np.asarray(basis)
    return basis @ basis.conj().T


def antidiagonal(d):
    """The d x d permutation with ones down the anti-diagonal."""
    return np.fliplr(np.eye(d)).astype(complex)


def plus_minus_projectors(d):
    x = antidiagonal(d)
    eye = np.eye(d, dtype=complex)
    return (eye + x) / 2, (eye - x) / 2


def omega(d):
    """Unnormalised maximally entangled vector sum_i |i>|i>."""
    return np.eye(d, dtype=complex).reshape(-1)


# --------------------------------------------------------------------------- #
#                                 JSON schema                                 #
# --------------------------------------------------------------------------- #


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m[:, None]
    rows, cols = m.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_json(obj, where="matrix"):
    """Parse ``{"rows", "cols", "data": [[re, im], ...]}`` into an array."""
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object with rows/cols/data")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{where}: missing or invalid rows/cols/data ({exc})") from None
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise ValueError(f"{where}: data has {len(data)} entries, expected {rows}x{cols}")
    return np.array([_complex(z, f"{where}.data[{k}]") for k, z in enumerate(data)],
                    dtype=complex).reshape(rows, cols)


def vector_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def vector_from_json(data, where="vector"):
    if not isinstance(data, list):
        raise ValueError(f"{where}: expected a list of [re, im] pairs")
    return np.array([_complex(z, f"{where}[{k}]") for k, z in enumerate(data)], dtype=complex)


def _complex(pair, where):
    try:
        re, im = pair
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise ValueError(f"{where}: expected [re, im], got {pair!r}") from None
