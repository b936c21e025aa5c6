"""Slow, loop-based reference implementations used as test oracles.

Nothing here imports the package; every routine is written from the
definitions with explicit index loops.
"""

import itertools

import numpy as np


def kron(a, b):
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    (ra, ca), (rb, cb) = a.shape, b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def partial_trace(m, d_a, d_b, subsystem):
    if subsystem == "B":
        out = np.zeros((d_a, d_a), dtype=complex)
        for i in range(d_a):
            for k in range(d_a):
                for j in range(d_b):
                    out[i, k] += m[i * d_b + j, k * d_b + j]
        return out
    out = np.zeros((d_b, d_b), dtype=complex)
    for j in range(d_b):
        for l in range(d_b):
            for i in range(d_a):
                out[j, l] += m[i * d_b + j, i * d_b + l]
    return out


def apply_kraus(kraus, rho):
    out = 0
    for a in kraus:
        out = out + a @ rho @ a.conj().T
    return out


def unit(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1
    return e


def choi(kraus, d_in):
    """sum_ij |i><j| (x) E(|i><j|), built term by term."""
    d_out = kraus[0].shape[0]
    out = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            eij = np.outer(unit(d_in, i), unit(d_in, j))
            out += kron(eij, apply_kraus(kraus, eij))
    return out


def apply_choi(c, d_in, d_out, rho):
    """E(rho) = sum_ij rho_ij E(|i><j|) with E(|i><j|) the (i, j) block."""
    out = np.zeros((d_out, d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            out += rho[i, j] * c[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out]
    return out


def self_adjoint_composition(kraus):
    return [aj.conj().T @ ak for aj in kraus for ak in kraus]


def determinant(m):
    """Leibniz formula."""
    n = m.shape[0]
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = (-1) ** inversions
        for i in range(n):
            term = term * m[perm[i], i]
        total += term
    return total


def plucker(basis):
    """All maximal minors over lexicographic row subsets, first nonzero set to 1."""
    n, d = basis.shape
    coords = [determinant(basis[list(rows), :]) for rows in itertools.combinations(range(n), d)]
    coords = np.array(coords, dtype=complex)
    lead = next(c for c in coords if abs(c) > 1e-12)
    return coords / lead


def flip_vector(v, d):
    """|i>|j> coefficient c_ij goes to conj(c_ji)."""
    out = np.zeros(d * d, dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d + j] = np.conj(v[j * d + i])
    return out


def antidiagonal(d):
    x = np.zeros((d, d), dtype=complex)
    for i in range(d):
        x[i, d - 1 - i] = 1
    return x


def omega(d):
    return sum(kron(unit(d, i)[:, None], unit(d, i)[:, None]) for i in range(d)).reshape(-1)


def product_channel_output(k1, k2, psi):
    """(E1 (x) E2)(|psi><psi|) from explicit Kraus products."""
    rho = np.outer(psi, psi.conj())
    out = 0
    for a in k1:
        for b in k2:
            ab = kron(a, b)
            out = out + ab @ rho @ ab.conj().T
    return out


def projector(vectors):
    q, _ = np.linalg.qr(vectors)
    return q @ q.conj().T
