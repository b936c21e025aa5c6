"""Bipartite subspaces, their symmetry operations and product-state search.

A subspace of ``C^d_a (x) C^d_b`` is stored as an orthonormal basis (one
column per vector). The matrix view ``M(psi)`` of a vector is
``psi.reshape(d_a, d_b)``; in that view

* ``flip`` is Hermitian conjugation ``M -> M^dagger``,
* ``local_x`` is right multiplication by the anti-diagonal ``X``,
* ``conjugate`` is entrywise conjugation and ``transpose_view`` is ``M -> M^T``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    AmbientDimensionError,
    antidiagonal,
    check_ambient,
    derive_seed,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    null_space,
    orthonormalize,
    vector_to_json,
)

PROVENANCES = ("random", "upb-span", "symmetrized", "sampled", "derived")
PLUCKER_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class BipartiteSubspace:
    d_a: int
    d_b: int
    basis: np.ndarray = field(repr=False)
    provenance: str = "derived"
    certified: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        n = self.d_a * self.d_b
        if b.ndim != 2 or b.shape[0] != n:
            raise ValueError(f"basis has shape {b.shape}, expected ({n}, dim)")
        if b.shape[1] > n:
            raise ValueError("more basis vectors than the ambient dimension")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        gram_defect = np.linalg.norm(b.conj().T @ b - np.eye(b.shape[1])) if b.shape[1] else 0.0
        if gram_defect > 1e-10:
            raise ValueError(f"basis is not orthonormal (defect {gram_defect:.3e})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_vectors(cls, d_a, d_b, vectors, provenance="derived", tol=1e-10, **kwargs):
        """Orthonormalise an arbitrary spanning family (columns of ``vectors``)."""
        return cls(d_a, d_b, orthonormalize(vectors, tol), provenance, **kwargs)

    @classmethod
    def full(cls, d_a, d_b, provenance="derived"):
        return cls(d_a, d_b, np.eye(d_a * d_b), provenance)

    @property
    def ambient(self):
        return self.d_a * self.d_b

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def is_degenerate(self):
        """True for the zero space and for the whole space."""
        return self.dim == 0 or self.dim == self.ambient

    @property
    def projector(self):
        return self.basis @ self.basis.conj().T

    def matrices(self):
        return [self.basis[:, k].reshape(self.d_a, self.d_b) for k in range(self.dim)]

    def distance(self, other):
        """Frobenius distance between the two orthogonal projectors."""
        return float(np.linalg.norm(self.projector - other.projector))

    def with_basis(self, basis, provenance=None, **changes):
        return BipartiteSubspace(
            changes.pop("d_a", self.d_a),
            changes.pop("d_b", self.d_b),
            basis,
            provenance or self.provenance,
            changes.pop("certified", False),
            changes.pop("metadata", {}),
        )

    def to_json(self):
        out = {
            "d_a": self.d_a,
            "d_b": self.d_b,
            "basis": matrix_to_json(self.basis),
            "provenance": self.provenance,
            "certified": self.certified,
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_json(cls, obj, where="subspace"):
        try:
            d_a, d_b = int(obj["d_a"]), int(obj["d_b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{where}: missing or invalid d_a/d_b ({exc})") from None
        basis = matrix_from_json(obj.get("basis"), f"{where}.basis")
        try:
            return cls(d_a, d_b, basis, obj.get("provenance", "derived"),
                       bool(obj.get("certified", False)), dict(obj.get("metadata", {})))
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None


# --------------------------------------------------------------------------- #
#                            Symmetry operations                              #
# --------------------------------------------------------------------------- #


def complement(s):
    """Orthogonal complement; the zero space when ``s`` is everything."""
    if s.dim == 0:
        basis = np.eye(s.ambient, dtype=complex)
    else:
        basis = null_space(s.basis.conj().T)
    return BipartiteSubspace(s.d_a, s.d_b, basis, "derived")


def _require_square(s, what):
    if s.d_a != s.d_b:
        raise ValueError(f"{what} needs d_a == d_b, got {s.d_a} and {s.d_b}")


def _swap_rows(basis, d_a, d_b):
    dim = basis.shape[1]
    return basis.reshape(d_a, d_b, dim).transpose(1, 0, 2).reshape(d_a * d_b, dim)


def flip(s):
    """Swap the two factors and complex conjugate: ``M(S) -> M(S)^dagger``."""
    _require_square(s, "flip")
    return s.with_basis(_swap_rows(s.basis.conj(), s.d_a, s.d_b), "derived")


def local_x(s):
    """Apply ``I (x) X`` to every vector."""
    x = antidiagonal(s.d_b)
    return s.with_basis(np.kron(np.eye(s.d_a), x) @ s.basis, "derived")


def conjugate(s):
    return s.with_basis(s.basis.conj(), "derived")


def transpose_view(s):
    """``M(S) -> M(S)^T``; equal to ``flip(conjugate(s))``."""
    _require_square(s, "transpose_view")
    return s.with_basis(_swap_rows(s.basis, s.d_a, s.d_b), "derived")


def apply_operator(s, op):
    """Image ``op . S`` orthonormalised (``op`` acts on the full space)."""
    return s.with_basis(orthonormalize(np.asarray(op) @ s.basis), "derived")


def tensor_power(s, k):
    """``S^{(x)k}`` regrouped onto the bipartition ``A^k : B^k``.

    Rows of the raw Kronecker product are ordered ``a1 b1 a2 b2 ...``; they
    are permuted to ``a1 a2 ... b1 b2 ...`` so that the result is a
    subspace of ``C^{d_a^k} (x) C^{d_b^k}``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = s.ambient**k
    check_ambient(n, f"tensor power k={k}")
    check_ambient(s.dim**k, f"tensor power k={k} basis")
    basis = s.basis
    for _ in range(k - 1):
        basis = np.kron(basis, s.basis)
    return BipartiteSubspace(
        s.d_a**k, s.d_b**k, regroup(basis, s.d_a, s.d_b, k), s.provenance, s.certified
    )


def regroup(rows, d_a, d_b, k):
    """Permute rows from ``(a1 b1 ... ak bk)`` order to ``(a1..ak b1..bk)``."""
    rows = np.asarray(rows)
    cols = rows.shape[1:]
    t = rows.reshape((d_a, d_b) * k + cols)
    perm = [2 * j for j in range(k)] + [2 * j + 1 for j in range(k)]
    perm += list(range(2 * k, t.ndim))
    return t.transpose(perm).reshape((rows.shape[0],) + cols)


# --------------------------------------------------------------------------- #
#                              Product states                                 #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class ProductStateWitness:
    """Unit product state ``a (x) b`` with its residual.

    ``mode="inside"``: residual is ``1 - ||P_S (a(x)b)||^2``.
    ``mode="orthogonal_to"``: residual is ``||P_S (a(x)b)||``.
    """

    a: np.ndarray
    b: np.ndarray
    residual: float
    mode: str = "inside"
    restart: int = 0

    @property
    def vector(self):
        return np.kron(self.a, self.b)

    def to_json(self):
        return {"a": vector_to_json(self.a), "b": vector_to_json(self.b),
                "residual": self.residual, "mode": self.mode}


@dataclass(frozen=True, eq=False)
class NotFound:
    """Heuristic negative verdict from the product-state search.

    Not a certificate: the search may have missed a product state.
    """

    best: ProductStateWitness
    restarts: int
    iters: int

    @property
    def best_residual(self):
        return self.best.residual


def product_residual(s, a, b, mode):
    """Re-evaluate a product state's residual against ``s`` from scratch."""
    v = np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
    overlap = s.basis.conj().T @ v
    if mode == "inside":
        return float(max(0.0, np.linalg.norm(v - s.basis @ overlap) ** 2))
    if mode == "orthogonal_to":
        return float(np.linalg.norm(overlap))
    raise ValueError(f"mode must be 'inside' or 'orthogonal_to', got {mode!r}")


def _top_or_bottom(h, maximize):
    _, vecs = np.linalg.eigh(h)
    return vecs[..., -1] if maximize else vecs[..., 0]


def seesaw(s, a0, iters, maximize=True, stall=1e-6):
    """Alternating optimisation of ``||P_S (a(x)b)||^2`` for a batch of starts.

    ``a0`` has shape ``(R, d_a)``. Each half-step replaces one factor by the
    extremal eigenvector of the operator obtained by contracting the other
    factor into ``P_S``, so the objective is monotone within every restart.

    Stops early once every restart has stalled: its objective moved by at
    most ``stall`` times its distance from the target value (1 when
    maximising, 0 when minimising), plus a round-off floor. Returns
    ``(a, b, history)`` with ``history`` of shape ``(sweeps, R)`` holding
    the objective after each full sweep.
    """
    q = s.basis.reshape(s.d_a, s.d_b, s.dim).conj()
    a = np.asarray(a0, dtype=complex)
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    history = np.empty((iters, a.shape[0]))
    b = None
    for t in range(iters):
        g = np.einsum("ijk,ri->rjk", q, a)
        b = _top_or_bottom(np.einsum("rjk,rlk->rjl", g.conj(), g), maximize)
        g = np.einsum("ijk,rj->rik", q, b)
        a = _top_or_bottom(np.einsum("rik,rlk->ril", g.conj(), g), maximize)
        overlap = np.einsum("rik,ri->rk", g, a)
        history[t] = np.sum(np.abs(overlap) ** 2, axis=1)
        gap = 1 - history[t] if maximize else history[t]
        floor = 1e-14 if maximize else 1e-32
        if t and np.all(np.abs(history[t] - history[t - 1]) <= floor + stall * np.abs(gap)):
            return a, b, history[:t + 1]
    return a, b, history


def _starts(seed, restarts, d_a):
    starts = np.empty((restarts, d_a), dtype=complex)
    for r in range(restarts):
        rng = make_rng(derive_seed(seed, r))
        starts[r] = rng.standard_normal(d_a) + 1j * rng.standard_normal(d_a)
    return starts


def find_product_state(s, mode="inside", restarts=100, iters=500, tol=1e-8, seed=0):
    """Search for a unit product state inside, or orthogonal to, ``s``.

    Runs a batch of independent seesaw restarts, each started from a
    Gaussian ``a`` drawn from ``derive_seed(seed, restart)``. Returns a
    :class:`ProductStateWitness` for the best restart (lowest index on ties)
    when its residual is at most ``tol``, otherwise :class:`NotFound`
    carrying that best candidate.
    """
    if mode not in ("inside", "orthogonal_to"):
        raise ValueError(f"mode must be 'inside' or 'orthogonal_to', got {mode!r}")
    if mode == "inside" and s.dim == 0:
        a = np.eye(s.d_a, dtype=complex)[0]
        b = np.eye(s.d_b, dtype=complex)[0]
        return NotFound(ProductStateWitness(a, b, 1.0, mode), restarts, 0)
    if mode == "orthogonal_to" and s.dim == 0:
        a = np.eye(s.d_a, dtype=complex)[0]
        b = np.eye(s.d_b, dtype=complex)[0]
        return ProductStateWitness(a, b, 0.0, mode)
    a, b, _ = seesaw(s, _starts(seed, restarts, s.d_a), iters, maximize=mode == "inside")
    residuals = np.array([product_residual(s, a[r], b[r], mode) for r in range(restarts)])
    best = int(np.argmin(residuals))
    witness = ProductStateWitness(a[best], b[best], float(residuals[best]), mode, best)
    if witness.residual <= tol:
        return witness
    return NotFound(witness, restarts, iters)


@dataclass(frozen=True, eq=False)
class UnextendibilityVerdict:
    """Outcome of a k-unextendibility check.

    ``verdict`` is ``"certified"`` (proof available), ``"holds_up_to_k"``
    (search found nothing up to ``k``) or ``"fails"`` (witness at
    ``failed_at``).
    """

    verdict: str
    k: int
    witness: ProductStateWitness | None = None
    failed_at: int | None = None
    best_residual: float | None = None
    note: str = ""
    best_candidate: ProductStateWitness | None = None
    best_at: int | None = None

    @property
    def ok(self):
        return self.verdict != "fails"

    def to_json(self):
        out = {"verdict": self.verdict, "k": self.k, "best_residual": self.best_residual}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["failed_at"] = self.failed_at
        elif self.best_candidate is not None:
            out["best_candidate"] = self.best_candidate.to_json()
            out["best_at"] = self.best_at
        if self.note:
            out["note"] = self.note
        return out


def k_unextendible(s, k, restarts=100, iters=500, tol=1e-8, seed=0, use_certificate=False):
    """Check that ``(S^{(x)j})^perp`` has no product state for ``j = 1..k``.

    The search runs on ``S^{(x)j}`` regrouped to ``A^j : B^j`` (see
    :func:`regroup`). A ``certified`` subspace (spanned by a certified UPB,
    or containing one) is reported as ``"certified"``; with
    ``use_certificate`` the search is skipped for it entirely.
    """
    check_ambient(s.ambient**k, f"k-unextendibility at k={k}")
    if s.dim == s.ambient:
        return UnextendibilityVerdict("certified", k, best_residual=None,
                                      note="orthogonal complement is zero")
    if s.certified and use_certificate:
        return UnextendibilityVerdict("certified", k, note="UPB certificate")
    best, best_at, candidate = None, None, None
    for j in range(1, k + 1):
        power = s if j == 1 else tensor_power(s, j)
        found = find_product_state(power, "orthogonal_to", restarts, iters, tol,
                                   derive_seed(seed, j))
        if isinstance(found, ProductStateWitness):
            if s.certified:
                raise ArithmeticError(
                    f"product state found orthogonal to a certified subspace at k={j} "
                    f"(residual {found.residual:.3e})"
                )
            return UnextendibilityVerdict("fails", k, found, j, found.residual)
        if best is None or found.best_residual < best:
            best, best_at, candidate = found.best_residual, j, found.best
    verdict = "certified" if s.certified else "holds_up_to_k"
    note = "UPB certificate; search agrees" if s.certified else "heuristic search"
    return UnextendibilityVerdict(verdict, k, best_residual=best, note=note,
                                  best_candidate=candidate, best_at=best_at)


# --------------------------------------------------------------------------- #
#                             Plucker coordinates                             #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class PluckerCoordinates:
    dim: int
    ambient: int
    coords: np.ndarray

    def subsets(self):
        return list(itertools.combinations(range(self.ambient), self.dim))

    def __getitem__(self, subset):
        """Coordinate for a 0-based sorted index tuple."""
        return self.coords[self.subsets().index(tuple(subset))]


def plucker(s, limit=PLUCKER_LIMIT):
    """Normalised Plucker coordinates: all ``dim x dim`` minors of the basis.

    Row subsets are taken in lexicographic order; the first coordinate whose
    modulus exceeds ``1e-12`` of the largest is scaled to exactly 1.
    """
    n, d = s.ambient, s.dim
    if d == 0:
        raise ValueError("the zero space has no Plucker coordinates")
    count = math.comb(n, d)
    if count > limit:
        raise AmbientDimensionError(f"{count} Plucker coordinates exceed the limit {limit}")
    subsets = np.array(list(itertools.combinations(range(n), d)))
    minors = np.linalg.det(s.basis[subsets])
    lead = np.flatnonzero(np.abs(minors) > 1e-12 * np.abs(minors).max())[0]
    return PluckerCoordinates(d, n, minors / minors[lead])
