"""Unextendible product bases and the symmetrisation used to embed them.

Only families whose unextendibility is known are marked ``certified``:
the Tiles basis of C^3 (x) C^3, complete product bases, tensor products
of certified bases and direct-sum paddings of certified bases into larger
local dimensions. User-supplied bases load uncertified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    check_ambient,
    max_ambient,
    orthonormalize,
    plus_minus_projectors,
    antidiagonal,
    vector_from_json,
    vector_to_json,
)
from .subspace import BipartiteSubspace


@dataclass(frozen=True, eq=False)
class UPB:
    d_a: int
    d_b: int
    states: tuple = field(repr=False)
    certified: bool = False

    def __post_init__(self):
        states = []
        for k, (a, b) in enumerate(self.states):
            a = np.asarray(a, dtype=complex).reshape(-1)
            b = np.asarray(b, dtype=complex).reshape(-1)
            if a.size != self.d_a or b.size != self.d_b:
                raise ValueError(f"state {k}: factor sizes {a.size}, {b.size} do not match "
                                 f"({self.d_a}, {self.d_b})")
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            if na == 0 or nb == 0:
                raise ValueError(f"state {k} has a zero factor")
            states.append((a / na, b / nb))
        object.__setattr__(self, "states", tuple(states))

    def __len__(self):
        return len(self.states)

    def vectors(self):
        """Product vectors as columns of a ``(d_a*d_b) x len`` array."""
        return np.stack([np.kron(a, b) for a, b in self.states], axis=1)

    def to_json(self):
        return {
            "d_a": self.d_a,
            "d_b": self.d_b,
            "states": [{"a": vector_to_json(a), "b": vector_to_json(b)} for a, b in self.states],
            "certified": self.certified,
        }

    @classmethod
    def from_json(cls, obj, where="upb", trust_certificate=False):
        """Parse UPB JSON; the certified flag is dropped unless trusted."""
        try:
            d_a, d_b, raw = int(obj["d_a"]), int(obj["d_b"]), obj["states"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{where}: missing or invalid d_a/d_b/states ({exc})") from None
        states = []
        for k, st in enumerate(raw):
            if not isinstance(st, dict) or "a" not in st or "b" not in st:
                raise ValueError(f"{where}.states[{k}]: expected an object with 'a' and 'b'")
            states.append((vector_from_json(st["a"], f"{where}.states[{k}].a"),
                           vector_from_json(st["b"], f"{where}.states[{k}].b")))
        certified = bool(obj.get("certified", False)) and trust_certificate
        try:
            u = cls(d_a, d_b, states, certified)
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
        if not certified and recognize_certified(u):
            u = cls(d_a, d_b, u.states, True)
        return u


def _e(d, *entries):
    v = np.zeros(d, dtype=complex)
    for i, c in entries:
        v[i] = c
    return v


def tiles_upb():
    """The five-state Tiles UPB of C^3 (x) C^3 (DiVincenzo et al.)."""
    states = [
        (_e(3, (0, 1)), _e(3, (0, 1), (1, -1))),
        (_e(3, (2, 1)), _e(3, (1, 1), (2, -1))),
        (_e(3, (0, 1), (1, -1)), _e(3, (2, 1))),
        (_e(3, (1, 1), (2, -1)), _e(3, (0, 1))),
        (np.ones(3), np.ones(3)),
    ]
    return UPB(3, 3, states, certified=True)


def complete_product_basis(d_a, d_b):
    """All ``|i>|j>``; unextendible because the complement is zero."""
    eye_a, eye_b = np.eye(d_a), np.eye(d_b)
    return UPB(d_a, d_b, [(eye_a[i], eye_b[j]) for i in range(d_a) for j in range(d_b)], True)


def product_upb(u1, u2):
    """All pairwise products, regrouped onto ``A1 A2 : B1 B2``."""
    if not len(u1) or not len(u2):
        raise ValueError("both UPBs must be nonempty")
    check_ambient(u1.d_a * u2.d_a * u1.d_b * u2.d_b, "product UPB")
    states = [(np.kron(a1, a2), np.kron(b1, b2)) for a1, b1 in u1.states for a2, b2 in u2.states]
    return UPB(u1.d_a * u2.d_a, u1.d_b * u2.d_b, states, u1.certified and u2.certified)


def pad_upb(u, d_a, d_b):
    """Embed ``u`` into ``C^d_a (x) C^d_b`` and complete it to a UPB there.

    The original states sit on the leading coordinates. The added product
    states ``|i>|j>`` (``i >= u.d_a``, any ``j``) and ``|i>|j>`` (``i < u.d_a``,
    ``j >= u.d_b``) force any orthogonal product state back into the
    original block, where none exists when ``u`` is unextendible.
    """
    if d_a < u.d_a or d_b < u.d_b:
        raise ValueError("padding cannot shrink the local dimensions")
    eye_a, eye_b = np.eye(d_a), np.eye(d_b)
    states = [(np.pad(a, (0, d_a - u.d_a)), np.pad(b, (0, d_b - u.d_b))) for a, b in u.states]
    states += [(eye_a[i], eye_b[j]) for i in range(u.d_a, d_a) for j in range(d_b)]
    states += [(eye_a[i], eye_b[j]) for i in range(u.d_a) for j in range(u.d_b, d_b)]
    return UPB(d_a, d_b, states, u.certified)


def known_families(d_a, d_b):
    """Certified built-in families that fit in ``C^d_a (x) C^d_b``."""
    tiles = tiles_upb()
    bases = [tiles, product_upb(tiles, complete_product_basis(2, 2)), product_upb(tiles, tiles)]
    out = [complete_product_basis(d_a, d_b)]
    for u in bases:
        if u.d_a <= d_a and u.d_b <= d_b and u.d_a * u.d_b <= max_ambient():
            out.append(u if (u.d_a, u.d_b) == (d_a, d_b) else pad_upb(u, d_a, d_b))
    return out


def recognize_certified(u, tol=1e-9):
    """True when the span of ``u`` equals the span of a built-in certified UPB.

    Unextendibility only depends on the span, so such a family inherits the
    certificate whatever its individual states.
    """
    if u.d_a * u.d_b > max_ambient():
        return False
    p = upb_span(u).projector
    return any(np.linalg.norm(upb_span(k).projector - p) <= tol
               for k in known_families(u.d_a, u.d_b))


def upb_span(u):
    return BipartiteSubspace.from_vectors(
        u.d_a, u.d_b, u.vectors(), "upb-span", certified=u.certified
    )


def symmetrize(s):
    """Close ``M(S)`` under the twelve maps generated by ``M -> M^dagger``,
    ``M -> XMX`` and the compressions ``P+ . P-``, ``P- . P+``.

    The result contains ``S``, is invariant under ``flip`` and under
    ``flip`` conjugated by ``local_x``, and its projector commutes with
    ``P+ (x) P-``. Containing ``S``, it inherits the certificate of a
    UPB span: a superspace of a strongly unextendible subspace is strongly
    unextendible.
    """
    if s.d_a != s.d_b:
        raise ValueError("symmetrize needs d_a == d_b")
    d = s.d_a
    if d % 2:
        raise ValueError(f"symmetrize needs an even local dimension, got {d}")
    x = antidiagonal(d)
    p_plus, p_minus = plus_minus_projectors(d)
    terms = []
    for m in s.matrices():
        core = [m, x @ m @ x, m.conj().T, x @ m.conj().T @ x]
        terms += core
        terms += [p_plus @ c @ p_minus for c in core]
        terms += [p_minus @ c @ p_plus for c in core]
    vectors = np.stack([t.reshape(-1) for t in terms], axis=1) if terms else np.zeros((d * d, 0))
    basis = orthonormalize(vectors, 1e-10)
    return BipartiteSubspace(d, d, basis, "symmetrized", certified=s.certified)
