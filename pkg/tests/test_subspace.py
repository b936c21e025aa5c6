import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

import oracles
from conftest import dec
from zeq.numerics import AmbientDimensionError, haar_basis, make_rng, omega
from zeq.subspace import (
    BipartiteSubspace,
    NotFound,
    ProductStateWitness,
    complement,
    conjugate,
    find_product_state,
    flip,
    k_unextendible,
    local_x,
    plucker,
    product_residual,
    regroup,
    seesaw,
    tensor_power,
    transpose_view,
)


def haar_subspace(d_a, d_b, dim, seed):
    return BipartiteSubspace(d_a, d_b, haar_basis(d_a * d_b, dim, make_rng(seed)), "random")


def span(d_a, d_b, *vectors):
    return BipartiteSubspace.from_vectors(d_a, d_b, np.stack(vectors, axis=1))


def ket(d, *idx):
    v = np.zeros(d**len(idx) if len(idx) > 1 else d, dtype=complex)
    pos = 0
    for i in idx:
        pos = pos * d + i
    v[pos] = 1
    return v


def test_basis_must_be_orthonormal():
    with pytest.raises(ValueError):
        BipartiteSubspace(2, 2, np.ones((4, 1)))
    with pytest.raises(ValueError):
        BipartiteSubspace(2, 2, np.eye(3))
    with pytest.raises(ValueError):
        BipartiteSubspace(2, 2, np.eye(4), provenance="magic")


def test_complement_examples():
    s = span(2, 2, ket(2, 0, 0))
    c = complement(s)
    assert c.dim == 3
    for v in (ket(2, 0, 1), ket(2, 1, 0), ket(2, 1, 1)):
        assert np.linalg.norm(c.projector @ v - v) < 1e-12
    r = haar_subspace(3, 3, 4, 0)
    assert_allclose(r.basis.conj().T @ complement(r).basis, 0, atol=1e-12)
    assert r.distance(complement(complement(r))) < 1e-10
    assert_allclose(r.projector + complement(r).projector, np.eye(9), atol=1e-10)


def test_complement_of_full_space_is_degenerate():
    z = complement(BipartiteSubspace.full(2, 3))
    assert z.dim == 0 and z.is_degenerate
    assert complement(z).dim == 6


def test_flip_examples():
    w = span(3, 3, omega(3))
    assert flip(w).distance(w) < 1e-12
    v = np.outer([1, 0], [0, 1]).reshape(-1)
    assert_allclose(np.abs(flip(span(2, 2, v)).basis[:, 0]), np.outer([0, 1], [1, 0]).reshape(-1))
    r = haar_subspace(3, 3, 4, 1)
    assert flip(flip(r)).distance(r) < 1e-12
    with pytest.raises(ValueError):
        flip(haar_subspace(2, 3, 1, 0))


def test_flip_matches_loop_oracle(frozen):
    v = dec(frozen["flip"]["v"])
    s = span(3, 3, v)
    expected = span(3, 3, dec(frozen["flip"]["flipped"]))
    assert flip(s).distance(expected) < 1e-12


def test_flip_is_hermitian_conjugation():
    r = haar_subspace(3, 3, 2, 5)
    mats = flip(r).matrices()
    for m in r.matrices():
        coeffs = [np.vdot(f, m.conj().T) for f in mats]
        assert np.linalg.norm(m.conj().T - sum(c * f for c, f in zip(coeffs, mats))) < 1e-12


def test_local_x():
    w = span(2, 2, omega(2))
    lx = local_x(w)
    assert_allclose(np.abs(lx.basis[:, 0].reshape(2, 2)), np.array([[0, 1], [1, 0]]) / np.sqrt(2))
    r = haar_subspace(3, 4, 3, 2)
    assert local_x(local_x(r)).distance(r) < 1e-12
    assert_allclose(local_x(r).basis.conj().T @ local_x(complement(r)).basis, 0, atol=1e-12)


def test_conjugate_and_transpose_view():
    w = span(3, 3, omega(3))
    assert conjugate(w).distance(w) < 1e-12
    assert transpose_view(w).distance(w) < 1e-12
    v = np.outer([1, 0], [0, 1j]).reshape(-1)
    t = transpose_view(span(2, 2, v))
    assert_allclose(t.basis[:, 0].reshape(2, 2), np.outer([0, 1j], [1, 0]))
    r = haar_subspace(3, 3, 4, 3)
    assert transpose_view(r).distance(flip(conjugate(r))) < 1e-12


def test_second_support_roundtrip():
    r = haar_subspace(4, 4, 5, 4)
    s2 = transpose_view(local_x(complement(r)))
    assert local_x(transpose_view(s2)).distance(complement(r)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operations_preserve_dimension(seed):
    r = haar_subspace(3, 3, 4, seed)
    for op in (flip, local_x, conjugate, transpose_view, complement):
        out = op(r)
        assert out.dim == (5 if op is complement else 4)
        assert_allclose(out.basis.conj().T @ out.basis, np.eye(out.dim), atol=1e-10)


def test_regroup_convention():
    g = make_rng(0)
    a1, b1, a2, b2 = (g.standard_normal(n) for n in (2, 3, 2, 3))
    raw = np.kron(np.kron(a1, b1), np.kron(a2, b2))[:, None]
    assert_allclose(regroup(raw, 2, 3, 2)[:, 0], np.kron(np.kron(a1, a2), np.kron(b1, b2)))


def test_tensor_power_contains_products():
    r = haar_subspace(2, 2, 2, 7)
    t = tensor_power(r, 2)
    assert (t.d_a, t.d_b, t.dim) == (4, 4, 4)
    u, v = r.basis[:, 0], r.basis[:, 1]
    raw = np.kron(u, v)[:, None]
    w = regroup(raw, 2, 2, 2)[:, 0]
    assert np.linalg.norm(t.projector @ w - w) < 1e-12


def test_tensor_power_guard(small_guard):
    with pytest.raises(AmbientDimensionError):
        tensor_power(haar_subspace(3, 3, 2, 0), 2)


def test_find_product_state_inside_trivial():
    s = span(2, 2, ket(2, 0, 0))
    w = find_product_state(s, "inside", restarts=5, seed=1)
    assert isinstance(w, ProductStateWitness)
    assert w.residual <= 1e-12
    assert abs(abs(w.a[0]) - 1) < 1e-9 and abs(abs(w.b[0]) - 1) < 1e-9


def test_find_product_state_reevaluates():
    s = haar_subspace(3, 3, 5, 11)
    w = find_product_state(s, "inside", restarts=100, seed=0)
    assert isinstance(w, ProductStateWitness)
    assert w.residual <= 1e-8
    assert product_residual(s, w.a, w.b, "inside") <= 1e-8
    x = np.kron(w.a, w.b)
    assert 1 - np.linalg.norm(s.projector @ x) ** 2 <= 1e-8
    assert_allclose([np.linalg.norm(w.a), np.linalg.norm(w.b)], [1, 1], atol=1e-12)


def test_find_product_state_orthogonal_mode():
    s = complement(span(2, 2, ket(2, 0, 0)))
    w = find_product_state(s, "orthogonal_to", restarts=5, seed=0)
    assert isinstance(w, ProductStateWitness)
    assert np.linalg.norm(s.basis.conj().T @ np.kron(w.a, w.b)) <= 1e-8


def test_generic_four_dim_not_found():
    res = find_product_state(haar_subspace(3, 3, 4, 21), "inside", restarts=200, seed=0)
    assert isinstance(res, NotFound)
    assert res.best_residual > 1e-8


def test_find_product_state_is_deterministic():
    s = haar_subspace(3, 3, 4, 2)
    r1 = find_product_state(s, restarts=10, seed=4)
    r2 = find_product_state(s, restarts=10, seed=4)
    assert_allclose(r1.best.a, r2.best.a, rtol=0, atol=0)


def test_seesaw_monotone():
    s = haar_subspace(3, 3, 4, 9)
    a0 = make_rng(0).standard_normal((20, 3)) + 0j
    _, _, hist = seesaw(s, a0, 200, maximize=True, stall=0)
    assert np.all(np.diff(hist, axis=0) >= -1e-12)
    _, _, hist = seesaw(s, a0, 200, maximize=False, stall=0)
    assert np.all(np.diff(hist, axis=0) <= 1e-12)


def test_k_unextendible_examples():
    full = BipartiteSubspace.full(2, 2)
    assert k_unextendible(full, 2).verdict == "certified"
    s = complement(span(2, 2, ket(2, 0, 0)))
    v = k_unextendible(s, 1, restarts=10)
    assert v.verdict == "fails" and v.failed_at == 1
    assert v.witness.residual <= 1e-8
    assert k_unextendible(haar_subspace(2, 2, 1, 0), 1, restarts=20).verdict == "fails"
    assert k_unextendible(haar_subspace(2, 2, 3, 0), 1, restarts=20).verdict == "holds_up_to_k"


def test_k_unextendible_guard(small_guard):
    with pytest.raises(AmbientDimensionError):
        k_unextendible(haar_subspace(3, 3, 8, 0), 2)


def test_plucker_frozen(frozen):
    for key in ("plucker", "plucker3"):
        raw = dec(frozen[key]["basis"])
        s = BipartiteSubspace.from_vectors(raw.shape[0], 1, raw)
        assert_allclose(plucker(s).coords, dec(frozen[key]["coords"]), atol=1e-10)


def test_plucker_examples():
    v = make_rng(3).standard_normal(4) + 0j
    s = span(4, 1, v)
    assert_allclose(plucker(s).coords, v / v[0], atol=1e-12)
    assert_allclose(plucker(BipartiteSubspace.full(2, 2)).coords, [1.0])
    p = plucker(haar_subspace(4, 1, 2, 1))
    assert p[(0, 1)] == pytest.approx(1)
    assert len(p.subsets()) == 6
    with pytest.raises(AmbientDimensionError):
        plucker(haar_subspace(8, 2, 8, 0), limit=1000)
    with pytest.raises(ValueError):
        plucker(complement(BipartiteSubspace.full(2, 2)))


def test_subspace_json_roundtrip():
    r = haar_subspace(2, 3, 2, 4)
    back = BipartiteSubspace.from_json(r.to_json())
    assert_allclose(back.basis, r.basis, rtol=0, atol=0)
    assert back.provenance == "random"
    with pytest.raises(ValueError, match="subspace"):
        BipartiteSubspace.from_json({"d_a": 2})
