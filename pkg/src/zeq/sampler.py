"""Random subspaces obeying the flip, flip-X and P+ (x) P- constraints.

A complex subspace ``S`` of ``C^d_a (x) C^d_a`` is viewed as a real subspace
of ``R^2 (x) R^d_a (x) R^d_a`` (vector ``v`` becomes ``(Re v, Im v)``), in
which multiplication by ``i``, the flip ``F``, ``X (x) X`` and
``P+ (x) P-`` are all real-linear. ``S`` satisfies the constraints exactly
when its real projector commutes with all four. Such a projector splits
into a *pair* part inside ``supp(P+(x)P- + P-(x)P+)`` and a *W* part in its
complement, each further split by the sign of ``X (x) X``.

Two facts the block structure has to respect, both checked at runtime:

* ``X (x) X`` is -1 on the whole pair support and +1 on the whole W
  support, so two of the four blocks have zero capacity.
* The pair part of ``S`` is ``U + F(U)`` for a complex subspace ``U`` of
  ``supp(P+ (x) P-)``; its ``F = +1`` real form is the graph
  ``{u + F u}`` and always has even rank. A generic real subspace of
  the ``F = +1`` pair block does *not* commute with ``P+ (x) P-``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .numerics import (
    antidiagonal,
    check_ambient,
    haar_basis,
    make_rng,
    omega,
    orthonormalize,
    plus_minus_projectors,
)
from .subspace import BipartiteSubspace, flip, local_x

HEADLINE_D_A = 48


# --------------------------------------------------------------------------- #
#                           Dimension arithmetic                              #
# --------------------------------------------------------------------------- #


def headline_dimensions(d_a=HEADLINE_D_A):
    """Input, environment and output dimensions of the headline channels."""
    d_e = 12 * (2 * d_a - 1)
    return {"d_a": d_a, "d_e": d_e, "d_b": d_a * d_e}


def dimension_window(d_a):
    """Subspace dimensions ``12(2d_a-1) <= d <= d_a^2 - 12(2d_a-1)``.

    Returns ``(lo, hi)`` or ``None`` when the window is empty.
    """
    lo = 12 * (2 * d_a - 1)
    hi = d_a * d_a - lo
    return (lo, hi) if lo <= hi else None


def positivity_dimensions_ok(d_a, d):
    """Hypothesis ``floor(d/2) <= d_a^2/2 - 2`` (with ``d_a`` even)."""
    return d_a % 2 == 0 and d // 2 <= d_a * d_a // 2 - 2


def r_range(d_a, d):
    """Bounds ``max(0, d - d_a^2/2) <= r <= min(d, d_a^2/2)``."""
    half = d_a * d_a // 2
    return max(0, d - half), min(d, half)


# --------------------------------------------------------------------------- #
#                              Real embedding                                 #
# --------------------------------------------------------------------------- #


def to_real(v):
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag], axis=0)


def from_real(w):
    w = np.asarray(w)
    n = w.shape[0] // 2
    return w[:n] + 1j * w[n:]


def real_linear(a):
    """Real 2n x 2n matrix of a complex-linear map."""
    a = np.asarray(a, dtype=complex)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def swap_matrix(d):
    n = d * d
    perm = np.arange(n).reshape(d, d).T.reshape(-1)
    return np.eye(n)[perm]


@dataclass(frozen=True, eq=False)
class RealEmbedding:
    """Real avatars of ``i``, ``F``, ``X (x) X``, ``P+(x)P-`` and ``P-(x)P+``.

    ``blocks`` maps ``(part, xx_sign)`` with ``part`` in ``{"pair", "w"}``
    to an orthonormal real basis of the ``F = +1`` joint eigenspace.
    ``pair_complex`` maps ``xx_sign`` to an orthonormal complex basis of
    ``supp(P+ (x) P-)`` restricted to that ``X (x) X`` sign.
    """

    d_a: int
    i: np.ndarray
    flip: np.ndarray
    xx: np.ndarray
    p_pm: np.ndarray
    p_mp: np.ndarray
    blocks: dict
    pair_complex: dict

    def capacity(self, part, sign):
        return self.blocks[(part, sign)].shape[1]

    def projector(self, s):
        """Real projector of the complex subspace ``s`` (rank ``2 dim``)."""
        basis = np.concatenate([to_real(s.basis), to_real(1j * s.basis)], axis=1)
        return basis @ basis.T


def _eigenbasis(p, tol=1e-8):
    evals, evecs = np.linalg.eigh((p + p.conj().T) / 2)
    return evecs[:, evals > 1 - tol]


def real_embedding(d_a):
    """Operators and block bases for local dimension ``d_a`` (cached).

    The guard is checked on every call, cached or not.
    """
    if d_a % 2:
        raise ValueError(f"the constrained sampler needs even d_a, got {d_a}")
    check_ambient(2 * d_a * d_a, "real embedding")
    return _build_embedding(d_a)


@functools.lru_cache(maxsize=None)
def _build_embedding(d_a):
    n = d_a * d_a
    x = antidiagonal(d_a)
    p_plus, p_minus = plus_minus_projectors(d_a)
    sw = swap_matrix(d_a)
    i_op = real_linear(1j * np.eye(n))
    f_op = np.block([[sw, np.zeros((n, n))], [np.zeros((n, n)), -sw]])
    xx_c = np.kron(x, x)
    pm_c = np.kron(p_plus, p_minus)
    xx = real_linear(xx_c)
    p_pm = real_linear(pm_c)
    p_mp = real_linear(np.kron(p_minus, p_plus))
    eye = np.eye(2 * n)
    f_plus = (eye + f_op) / 2
    pair = p_pm + p_mp
    blocks = {}
    for sign in (1, -1):
        xs = (eye + sign * xx) / 2
        blocks[("pair", sign)] = _eigenbasis(f_plus @ pair @ xs)
        blocks[("w", sign)] = _eigenbasis(f_plus @ (eye - pair) @ xs)
    pair_complex = {}
    eye_c = np.eye(n)
    for sign in (1, -1):
        pair_complex[sign] = _eigenbasis(pm_c @ (eye_c + sign * xx_c) / 2)
    emb = RealEmbedding(d_a, i_op, f_op, xx, p_pm, p_mp, blocks, pair_complex)
    for m in (emb.i, emb.flip, emb.xx, emb.p_pm, emb.p_mp):
        m.setflags(write=False)
    return emb


# --------------------------------------------------------------------------- #
#                             Structure indices                               #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class StructureIndex:
    """Component label ``(r, k1, k2)`` of a constrained subspace.

    ``r`` is the complex dimension of the pair part, ``k1`` the part of it
    with ``X (x) X = +1``, ``k2`` the part of the W component with
    ``X (x) X = +1``.
    """

    d_a: int
    d: int
    r: int
    k1: int
    k2: int

    def __post_init__(self):
        lo, hi = r_range(self.d_a, self.d)
        if not lo <= self.r <= hi:
            raise ValueError(f"r={self.r} outside [{lo}, {hi}] for d_a={self.d_a}, d={self.d}")
        if not 0 <= self.k1 <= self.r:
            raise ValueError(f"k1={self.k1} must lie in [0, r={self.r}]")
        if not 0 <= self.k2 <= self.d - self.r:
            raise ValueError(f"k2={self.k2} must lie in [0, d-r={self.d - self.r}]")

    @property
    def block_ranks(self):
        """Ranks of the four ``F = +1`` blocks, keyed like ``RealEmbedding.blocks``."""
        return {
            ("pair", 1): self.k1,
            ("pair", -1): self.r - self.k1,
            ("w", 1): self.k2,
            ("w", -1): self.d - self.r - self.k2,
        }

    def to_json(self):
        return {"d_a": self.d_a, "d": self.d, "r": self.r, "k1": self.k1, "k2": self.k2}


def index_problems(idx, positivity_seed=False):
    """Reasons why ``idx`` cannot be sampled (empty list when admissible)."""
    emb = real_embedding(idx.d_a)
    problems = []
    for key, rank in idx.block_ranks.items():
        cap = emb.capacity(*key)
        if rank > cap:
            problems.append(f"block {key} needs rank {rank} but has capacity {cap}")
        if key[0] == "pair" and rank % 2:
            problems.append(f"pair block {key} needs even rank (it is a graph u + F u), got {rank}")
    if positivity_seed:
        if idx.k2 < 1:
            problems.append("positivity seeding needs k2 >= 1")
        elif idx.k2 > emb.capacity("w", 1) - 1:
            problems.append("positivity seeding needs room to exclude (I(x)X)|omega>")
    return problems


def admissible_indices(d_a, d, positivity_seed=False):
    """Every ``(r, k1, k2)`` that can be realised, in lexicographic order."""
    if d_a % 2:
        raise ValueError(f"d_a must be even, got {d_a}")
    if not 1 <= d <= d_a * d_a:
        raise ValueError(f"d must lie in [1, {d_a * d_a}], got {d}")
    lo, hi = r_range(d_a, d)
    out = []
    for r in range(lo, hi + 1):
        for k1 in range(r + 1):
            for k2 in range(d - r + 1):
                idx = StructureIndex(d_a, d, r, k1, k2)
                if not index_problems(idx, positivity_seed):
                    out.append(idx)
    return out


# --------------------------------------------------------------------------- #
#                                 Sampling                                    #
# --------------------------------------------------------------------------- #


def _flip_vec(u, d_a):
    return u.reshape(d_a, d_a).T.conj().reshape(-1)


def sample_constrained(d_a, d, idx, seed, positivity_seed=False):
    """Sample a constrained ``d``-dimensional subspace in component ``idx``.

    Pair blocks: a Haar complex subspace ``U`` of ``supp(P+(x)P-)`` with the
    block's ``X (x) X`` sign, contributing ``U + F(U)``. W blocks: a Haar
    real subspace of the block's ``F = +1`` real form, contributing its
    complex span. With ``positivity_seed`` the ``(w, +1)`` block always
    contains ``|omega>`` and is orthogonal to ``(I (x) X)|omega>``.
    """
    if (idx.d_a, idx.d) != (d_a, d):
        raise ValueError("structure index does not match (d_a, d)")
    problems = index_problems(idx, positivity_seed)
    if problems:
        raise ValueError("inadmissible structure index: " + "; ".join(problems))
    emb = real_embedding(d_a)
    rng = make_rng(seed)
    ranks = idx.block_ranks
    vectors = []
    for sign in (1, -1):
        m = ranks[("pair", sign)] // 2
        cplx = emb.pair_complex[sign]
        u = cplx @ haar_basis(cplx.shape[1], m, rng)
        for j in range(m):
            vectors += [u[:, j], _flip_vec(u[:, j], d_a)]
    for sign in (1, -1):
        block = emb.blocks[("w", sign)]
        rank = ranks[("w", sign)]
        if sign == 1 and positivity_seed:
            w = omega(d_a).real / np.sqrt(d_a)
            wx = np.kron(np.eye(d_a), antidiagonal(d_a).real) @ w
            seeds = np.stack([to_real(w), to_real(wx)], axis=1)
            coords = block.T @ seeds
            rest = _orth_complement_real(coords)
            picked = block @ rest @ haar_basis(rest.shape[1], rank - 1, rng, real=True)
            vectors.append(w.astype(complex))
            vectors += [from_real(picked[:, j]) for j in range(rank - 1)]
        else:
            picked = block @ haar_basis(block.shape[1], rank, rng, real=True)
            vectors += [from_real(picked[:, j]) for j in range(rank)]
    basis = orthonormalize(np.stack(vectors, axis=1)) if vectors else np.zeros((d_a * d_a, 0))
    if basis.shape[1] != d:
        raise ArithmeticError(f"sampled span has dimension {basis.shape[1]}, expected {d}")
    meta = {"structure": idx.to_json(), "seed": int(seed), "positivity_seed": bool(positivity_seed)}
    return BipartiteSubspace(d_a, d_a, basis, "sampled", metadata=meta)


def _orth_complement_real(coords):
    """Orthonormal basis of the complement of the columns of ``coords``."""
    q, _ = np.linalg.qr(coords, mode="complete")
    return q[:, coords.shape[1]:]


# --------------------------------------------------------------------------- #
#                              Verification                                   #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class SymmetryReport:
    flip_residual: float
    flip_x_residual: float
    ortho_residual: float
    commutant_residual: float
    tol: float

    @property
    def passed(self):
        return max(self.flip_residual, self.flip_x_residual,
                   self.ortho_residual, self.commutant_residual) <= self.tol

    def to_json(self):
        return {
            "flip_residual": self.flip_residual,
            "flip_x_residual": self.flip_x_residual,
            "ortho_residual": self.ortho_residual,
            "commutant_residual": self.commutant_residual,
            "pass": self.passed,
        }


def ortho_residual(s):
    """``|| P_S ((I+X) (x) (I-X)) P_{S^perp} ||_F``."""
    d = s.d_a
    x = antidiagonal(d)
    eye = np.eye(d)
    op = np.kron(eye + x, eye - x)
    p = s.projector
    return float(np.linalg.norm(p @ op @ (np.eye(s.ambient) - p)))


def verify_symmetries(s, tol=1e-10):
    """Residuals of ``F(S)=S``, ``F(XS)=XS``, ``S perp (I+X)(x)(I-X) S^perp``
    and ``[P_S, P+ (x) P-] = 0``, each a Frobenius norm."""
    if s.d_a != s.d_b:
        raise ValueError("verify_symmetries needs d_a == d_b")
    p = s.projector
    lx = local_x(s)
    p_plus, p_minus = plus_minus_projectors(s.d_a)
    pm = np.kron(p_plus, p_minus)
    return SymmetryReport(
        flip_residual=float(np.linalg.norm(flip(s).projector - p)),
        flip_x_residual=float(np.linalg.norm(flip(lx).projector - lx.projector)),
        ortho_residual=ortho_residual(s),
        commutant_residual=float(np.linalg.norm(p @ pm - pm @ p)),
        tol=tol,
    )


def embedded_residuals(s):
    """Commutator norms of the real projector with ``i``, ``F``, ``X(x)X``, ``P+(x)P-``."""
    emb = real_embedding(s.d_a)
    pr = emb.projector(s)
    return {
        "i": float(np.linalg.norm(emb.i @ pr @ emb.i.T - pr)),
        "flip": float(np.linalg.norm(emb.flip @ pr @ emb.flip.T - pr)),
        "xx": float(np.linalg.norm(emb.xx @ pr @ emb.xx.T - pr)),
        "p_pm": float(np.linalg.norm(pr @ emb.p_pm - emb.p_pm @ pr)),
        "rank": int(np.linalg.matrix_rank(pr, tol=1e-8)),
    }


def measure_structure(s, tol=1e-8):
    """Recover ``(r, k1, k2)`` and real ranks from a constrained subspace."""
    d = s.d_a
    x = antidiagonal(d)
    p_plus, p_minus = plus_minus_projectors(d)
    q = np.kron(p_plus, p_minus) + np.kron(p_minus, p_plus)
    xx_plus = (np.eye(d * d) + np.kron(x, x)) / 2
    p = s.projector
    rank = lambda m: int(np.linalg.matrix_rank(m, tol=tol))
    emb = real_embedding(d)
    pr = emb.projector(s)
    qr = emb.p_pm + emb.p_mp
    return {
        "d": s.dim,
        "r": rank(p @ q),
        "k1": rank(p @ q @ xx_plus),
        "k2": rank(p @ (np.eye(d * d) - q) @ xx_plus),
        "real_rank": rank(pr),
        "real_pair_rank": rank(pr @ qr),
        "real_w_rank": rank(pr @ (np.eye(2 * d * d) - qr)),
    }
