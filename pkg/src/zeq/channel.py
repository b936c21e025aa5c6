"""Quantum channels in Kraus form, Choi matrices and zero-error recovery.

The Choi matrix uses the unnormalised convention
``sigma = sum_ij |i><j| (x) E(|i><j|)`` on ``C^d_in (x) C^d_out``, so a
trace-preserving map has ``tr sigma = d_in``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    is_hermitian,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    pinv_sqrt,
)

TP_TOL = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Completely positive map ``rho -> sum_k A_k rho A_k^dagger``."""

    d_in: int
    d_out: int
    kraus: tuple = field(repr=False)

    def __post_init__(self):
        kraus = tuple(np.array(a, dtype=complex) for a in self.kraus)
        if not kraus:
            raise ValueError("a Kraus family must be nonempty")
        for k, a in enumerate(kraus):
            if a.shape != (self.d_out, self.d_in):
                raise ValueError(
                    f"Kraus operator {k} has shape {a.shape}, expected "
                    f"({self.d_out}, {self.d_in})"
                )
            a.setflags(write=False)
        object.__setattr__(self, "kraus", kraus)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return sum(a @ rho @ a.conj().T for a in self.kraus)

    def tp_defect(self):
        """Frobenius distance of ``sum_k A_k^dagger A_k`` from the identity."""
        s = sum(a.conj().T @ a for a in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.d_in)))

    @property
    def is_trace_preserving(self):
        return self.tp_defect() <= TP_TOL

    def to_json(self):
        return {
            "d_in": self.d_in,
            "d_out": self.d_out,
            "kraus": [matrix_to_json(a) for a in self.kraus],
        }

    @classmethod
    def from_json(cls, obj, where="channel"):
        try:
            d_in, d_out, kraus = int(obj["d_in"]), int(obj["d_out"]), obj["kraus"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{where}: missing or invalid d_in/d_out/kraus ({exc})") from None
        mats = [matrix_from_json(m, f"{where}.kraus[{k}]") for k, m in enumerate(kraus)]
        return cls(d_in, d_out, mats)


class Channel(LinearMap):
    """A completely positive trace-preserving map."""

    def __post_init__(self):
        super().__post_init__()
        defect = self.tp_defect()
        if defect > TP_TOL:
            raise ValueError(f"Kraus family is not trace preserving (defect {defect:.3e})")


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    d_in: int
    d_out: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.d_in * self.d_out
        if m.shape != (n, n):
            raise ValueError(f"Choi matrix has shape {m.shape}, expected ({n}, {n})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def to_json(self):
        return {"d_in": self.d_in, "d_out": self.d_out, "matrix": matrix_to_json(self.matrix)}

    @classmethod
    def from_json(cls, obj, where="choi"):
        try:
            d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{where}: missing or invalid d_in/d_out ({exc})") from None
        return cls(d_in, d_out, matrix_from_json(obj.get("matrix"), f"{where}.matrix"))


def as_map(d_in, d_out, kraus, tol=TP_TOL):
    """Build a :class:`Channel` when trace preserving, else a :class:`LinearMap`."""
    m = LinearMap(d_in, d_out, kraus)
    if m.tp_defect() <= tol:
        return Channel(d_in, d_out, m.kraus)
    return m


# --------------------------------------------------------------------------- #
#                                Constructions                                #
# --------------------------------------------------------------------------- #


def identity_channel(d):
    return Channel(d, d, [np.eye(d)])


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return Channel(u.shape[1], u.shape[0], [u])


def depolarizing_channel(d):
    """Fully depolarizing map ``rho -> tr(rho) I / d``."""
    kraus = []
    for i in range(d):
        for j in range(d):
            a = np.zeros((d, d), dtype=complex)
            a[i, j] = 1 / np.sqrt(d)
            kraus.append(a)
    return Channel(d, d, kraus)


def dephasing_channel(d):
    """Complete dephasing in the computational basis."""
    kraus = []
    for i in range(d):
        a = np.zeros((d, d), dtype=complex)
        a[i, i] = 1
        kraus.append(a)
    return Channel(d, d, kraus)


def pauli_channel(p_i, p_x, p_y, p_z):
    probs = dict(I=p_i, X=p_x, Y=p_y, Z=p_z)
    kraus = [np.sqrt(p) * PAULIS[k] for k, p in probs.items() if p > 0]
    return Channel(2, 2, kraus)


def random_channel(d_in, d_out, n_kraus, seed):
    """Channel whose Stinespring isometry is Haar random."""
    if n_kraus * d_out < d_in:
        raise ValueError(f"an isometry C^{d_in} -> C^{n_kraus * d_out} does not exist")
    rng = make_rng(seed)
    g = rng.standard_normal((n_kraus * d_out, d_in)) + 1j * rng.standard_normal((n_kraus * d_out, d_in))
    v, _ = np.linalg.qr(g)
    return Channel(d_in, d_out, [v[k * d_out:(k + 1) * d_out] for k in range(n_kraus)])


def correctable_channel(d_out, n_branches, n_kraus, seed, d_in=2):
    """Channel on ``C^d_in`` whose whole input space is perfectly recoverable.

    The input is copied by ``n_branches`` isometries with mutually orthogonal
    ranges, weighted at random, then the branches are mixed by a random
    ``n_kraus x n_branches`` isometry. Every ``A_j^dagger A_k`` is then a
    multiple of the identity, so both orthogonality premises of the
    zero-error witness hold for any pair of orthonormal inputs.
    """
    if n_branches * d_in > d_out:
        raise ValueError("orthogonal branches do not fit in the output space")
    if n_kraus < n_branches:
        raise ValueError("need at least as many Kraus operators as branches")
    rng = make_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((d_out, d_out)) + 1j * rng.standard_normal((d_out, d_out)))
    branches = [u[:, b * d_in:(b + 1) * d_in] for b in range(n_branches)]
    weights = rng.dirichlet(np.ones(n_branches))
    g = rng.standard_normal((n_kraus, n_branches)) + 1j * rng.standard_normal((n_kraus, n_branches))
    mix, _ = np.linalg.qr(g)
    kraus = [sum(mix[k, b] * np.sqrt(weights[b]) * branches[b] for b in range(n_branches))
             for k in range(n_kraus)]
    return Channel(d_in, d_out, kraus)


def compose(outer, inner):
    """The map ``outer o inner`` (apply ``inner`` first)."""
    if outer.d_in != inner.d_out:
        raise ValueError("dimension mismatch in composition")
    kraus = [a @ b for a in outer.kraus for b in inner.kraus]
    return as_map(inner.d_in, outer.d_out, kraus)


def tensor(first, second):
    kraus = [np.kron(a, b) for a in first.kraus for b in second.kraus]
    return as_map(first.d_in * second.d_in, first.d_out * second.d_out, kraus)


# --------------------------------------------------------------------------- #
#                                 Choi calculus                               #
# --------------------------------------------------------------------------- #


def choi(ch):
    """Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` of a Kraus map."""
    vecs = np.stack([a.T.reshape(-1) for a in ch.kraus], axis=1)
    return ChoiMatrix(ch.d_in, ch.d_out, vecs @ vecs.conj().T)


def apply_via_choi(c, rho):
    """Evaluate the map from its Choi matrix: ``tr_A[sigma (rho^T (x) I)]``."""
    rho = np.asarray(rho, dtype=complex)
    op = c.matrix @ np.kron(rho.T, np.eye(c.d_out))
    return partial_trace(op, (c.d_in, c.d_out), "A")


def channel_from_choi(c, tol=1e-10):
    """Kraus operators from the spectral decomposition of a Choi matrix.

    One Kraus operator per eigenvalue above ``tol`` (relative to the
    largest), in descending eigenvalue order. Each eigenvector is fixed by
    making its first non-negligible component real and positive.
    """
    m = c.matrix
    if not is_hermitian(m, max(tol, 1e-12)):
        raise ValueError("Choi matrix is not Hermitian")
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    scale = max(abs(evals).max(initial=0.0), np.finfo(float).tiny)
    if evals.min(initial=0.0) < -tol * scale:
        raise ValueError(f"Choi matrix is not PSD (eigenvalue {evals.min():.3e})")
    order = np.argsort(-evals, kind="stable")
    kraus = []
    for k in order:
        lam = evals[k]
        if lam <= tol * scale:
            break
        v = _fix_phase(evecs[:, k])
        kraus.append(np.sqrt(lam) * v.reshape(c.d_in, c.d_out).T)
    if not kraus:
        kraus = [np.zeros((c.d_out, c.d_in), dtype=complex)]
    return as_map(c.d_in, c.d_out, kraus)


def _fix_phase(v, tol=1e-12):
    idx = np.flatnonzero(np.abs(v) > tol * np.abs(v).max())
    z = v[idx[0]]
    return v * (abs(z) / z)


def adjoint(ch):
    """Hilbert-Schmidt dual: Kraus operators ``A_k^dagger``."""
    return as_map(ch.d_out, ch.d_in, [a.conj().T for a in ch.kraus])


def compose_self_adjoint(ch):
    """``N = E* o E`` with Kraus family ``{A_j^dagger A_k}``."""
    kraus = [aj.conj().T @ ak for aj in ch.kraus for ak in ch.kraus]
    return as_map(ch.d_in, ch.d_in, kraus)


# --------------------------------------------------------------------------- #
#                            Zero-error recovery map                          #
# --------------------------------------------------------------------------- #


def _check_signal_pair(s0, s1, d_in, tol):
    s0 = np.asarray(s0, dtype=complex).reshape(-1)
    s1 = np.asarray(s1, dtype=complex).reshape(-1)
    if s0.size != d_in or s1.size != d_in:
        raise ValueError(f"signal states must live in C^{d_in}")
    gram = np.array([[np.vdot(s0, s0), np.vdot(s0, s1)], [np.vdot(s1, s0), np.vdot(s1, s1)]])
    if np.abs(gram - np.eye(2)).max() > max(tol, 1e-12):
        raise ValueError("signal states are not orthonormal")
    return s0, s1


def recovery_map(ch, s0, s1, tol=1e-9):
    """Recovery channel ``R`` with ``R o E`` the identity on span(s0, s1).

    Kraus operators are ``sqrt(phi) A_k^dagger E(phi)^{-1/2}`` with
    ``phi = (|s0><s0| + |s1><s1|) / 2``, plus ``|s0><e_i|`` for an
    orthonormal basis ``e_i`` of the kernel of ``E(phi)``; the latter send
    the kernel to a fixed state so that ``R`` is trace preserving even when
    the input and output dimensions differ.
    """
    s0, s1 = _check_signal_pair(s0, s1, ch.d_in, tol)
    phi = (np.outer(s0, s0.conj()) + np.outer(s1, s1.conj())) / 2
    sqrt_phi = phi * np.sqrt(2)  # phi is half a projector
    inv_sqrt, kernel = pinv_sqrt(ch(phi), tol)
    kraus = [sqrt_phi @ a.conj().T @ inv_sqrt for a in ch.kraus]
    evals, evecs = np.linalg.eigh(kernel)
    for k in np.flatnonzero(evals > 0.5):
        kraus.append(np.outer(s0, evecs[:, k].conj()))
    return Channel(ch.d_out, ch.d_in, kraus)


def q0_witness(ch, s0, s1, tol=1e-9):
    """Check the two orthogonality premises for a one-qubit zero-error code.

    Returns a dict with ``holds``, the two overlap traces and, when the
    premises hold, the largest deviation of ``R o E`` from the identity on
    the four states ``s0, s1, (s0 +- s1)/sqrt2``.
    """
    s0, s1 = _check_signal_pair(s0, s1, ch.d_in, tol)
    plus, minus = (s0 + s1) / np.sqrt(2), (s0 - s1) / np.sqrt(2)
    states = [s0, s1, plus, minus]
    outs = [ch(np.outer(s, s.conj())) for s in states]
    overlap_01 = float(np.trace(outs[0] @ outs[1]).real)
    overlap_pm = float(np.trace(outs[2] @ outs[3]).real)
    result = {
        "holds": overlap_01 <= tol and overlap_pm <= tol,
        "overlap_01": overlap_01,
        "overlap_pm": overlap_pm,
        "recovery_deviation": None,
    }
    if result["holds"]:
        rec = recovery_map(ch, s0, s1, tol)
        result["recovery_deviation"] = max(
            float(np.linalg.norm(rec(out) - np.outer(s, s.conj())))
            for s, out in zip(states, outs)
        )
    return result


def pauli_mixture_fit(m, tol=1e-8):
    """Least-squares Pauli-mixture coefficients of a unital qubit map.

    The Choi matrices of the four Pauli conjugations are orthogonal
    rank-one operators ``|Phi_P><Phi_P|`` with ``<Phi_P|Phi_P> = 2``, so
    the least-squares coefficient of ``P . P`` is ``<Phi_P|C|Phi_P> / 4``.
    """
    if m.d_in != 2 or m.d_out != 2:
        raise ValueError("pauli_mixture_fit needs a qubit-to-qubit map")
    defect = np.linalg.norm(m(PAULI_I) - PAULI_I)
    if defect > tol:
        raise ValueError(f"map is not unital (defect {defect:.3e})")
    c = choi(m).matrix
    coeffs = {}
    for name, p in PAULIS.items():
        v = p.T.reshape(-1)
        coeffs["p_" + name] = float(np.vdot(v, c @ v).real / 4)
    return coeffs
