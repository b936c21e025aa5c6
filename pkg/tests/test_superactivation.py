import copy
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import dec
from zeq.channel import Channel, choi, compose_self_adjoint, random_channel
from zeq.numerics import haar_basis, make_rng, omega
from zeq.sampler import admissible_indices, sample_constrained
from zeq.subspace import BipartiteSubspace, complement, conjugate, local_x
from zeq.superactivation import (
    CHAIN_FACTOR,
    SearchConfig,
    chain_rhs,
    check_conditions,
    choi_pair_from_subspace,
    classical_overlap,
    identity_chain,
    joint_orthogonality,
    plan_trials,
    psd_span_certificate,
    search,
    second_support,
    signal_states,
    verify_report,
)
from zeq.upb import complete_product_basis, product_upb, symmetrize, tiles_upb, upb_span


def psd_on(sub, g):
    m = g.standard_normal((sub.dim, sub.dim)) + 1j * g.standard_normal((sub.dim, sub.dim))
    sigma = sub.basis @ (m @ m.conj().T) @ sub.basis.conj().T
    return sigma * sub.d_a / np.trace(sigma).real


def test_signal_states():
    st = signal_states(2)
    assert_allclose(st["phi0"], np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert_allclose(st["phi1"], np.array([0, 1, 1, 0]) / np.sqrt(2))
    st4 = signal_states(4)
    assert abs(np.vdot(st4["phi0"], st4["phi1"])) < 1e-12
    assert abs(np.vdot(st4["phi_plus"], st4["phi_minus"])) < 1e-12
    for v in st4.values():
        assert np.linalg.norm(v) == pytest.approx(1)
    with pytest.raises(ValueError, match="odd"):
        signal_states(3)


def test_identity_chain_with_real_channels(frozen):
    case = frozen["chain"]
    k1 = Channel(2, 3, [dec(a) for a in case["k1"]])
    k2 = Channel(2, 3, [dec(a) for a in case["k2"]])
    s1 = choi(compose_self_adjoint(k1)).matrix
    s2 = choi(compose_self_adjoint(k2)).matrix
    res = identity_chain(s1, s2, 2)
    assert_allclose(res["direct"], dec(case["direct"])[0], atol=1e-12)
    assert_allclose(res["rhs"], dec(case["rhs"])[0], atol=1e-12)
    assert res["residual"] <= 1e-12
    assert_allclose(classical_overlap(s1, s2, 2), dec(case["classical"])[0], atol=1e-12)


def test_identity_chain_random_channels_d4():
    for seed in range(3):
        e1, e2 = random_channel(4, 3, 3, seed), random_channel(4, 5, 2, seed + 10)
        s1 = choi(compose_self_adjoint(e1)).matrix
        s2 = choi(compose_self_adjoint(e2)).matrix
        res = identity_chain(s1, s2, 4)
        assert res["residual"] <= 1e-10
        assert abs(res["direct"]) > 1e-3


def test_chain_vanishes_on_constrained_supports():
    g = make_rng(7)
    for idx in admissible_indices(4, 6):
        s = sample_constrained(4, 6, idx, 1)
        sup2 = conjugate(second_support(s))
        assert joint_orthogonality(s)["quantum_ok"]
        for _ in range(3):
            s1, s2 = psd_on(s, g), psd_on(sup2, g)
            res = identity_chain(s1, s2, 4)
            assert abs(res["direct"]) <= 1e-9 and abs(res["rhs"]) <= 1e-9
            assert abs(classical_overlap(s1, s2, 4)) <= 1e-9


def test_chain_nonzero_without_constraints():
    g = make_rng(3)
    for seed in range(10):
        s = BipartiteSubspace(4, 4, haar_basis(16, 6, make_rng(seed)), "random")
        assert not joint_orthogonality(s)["quantum_ok"]
        s1, s2 = psd_on(s, g), psd_on(conjugate(second_support(s)), g)
        res = identity_chain(s1, s2, 4)
        assert res["residual"] <= 1e-9
        assert abs(res["rhs"]) > 1e-6


def test_choi_pair_from_subspace():
    s = sample_constrained(4, 6, admissible_indices(4, 6)[0], 2)
    s1, s2 = choi_pair_from_subspace(s)
    assert np.trace(s1).real == pytest.approx(4)
    assert np.trace(s2).real == pytest.approx(4)
    assert abs(chain_rhs(s1, s2, 4)) < 1e-12
    assert CHAIN_FACTOR == 4


def test_joint_orthogonality_examples():
    full = joint_orthogonality(BipartiteSubspace.full(4, 4))
    assert full["classical_ok"] and full["quantum_ok"] and full["degenerate"]
    for seed in range(100):
        s = BipartiteSubspace(4, 4, haar_basis(16, 6, make_rng(seed)), "random")
        res = joint_orthogonality(s)
        assert res["classical_ok"]
        assert res["residuals"]["quantum"] > 1e-3
    with pytest.raises(ValueError):
        joint_orthogonality(upb_span(tiles_upb()))


def test_psd_certificate_examples():
    diag = BipartiteSubspace.from_vectors(2, 2, np.array([[1, 0, 0, 0], [0, 0, 0, 1]]).T)
    c = psd_span_certificate(diag)
    assert_allclose(c.witness, np.eye(2) / 2, atol=1e-12)
    assert c.min_eig == pytest.approx(0.5)
    x = BipartiteSubspace.from_vectors(2, 2, np.array([[0, 1, 1, 0]]).T)
    c = psd_span_certificate(x, steps=100, restarts=3)
    assert c.witness is None
    assert c.min_eig == pytest.approx(-1 / np.sqrt(2), abs=1e-6)
    not_closed = BipartiteSubspace.from_vectors(2, 2, np.array([[0, 1, 0, 0]]).T)
    with pytest.raises(ValueError, match="Hermitian"):
        psd_span_certificate(not_closed)


def test_psd_certificate_needs_ascent():
    # The projection of I is diag(1.02, 0.41, -0.19) up to scale, which is
    # indefinite, yet diag(1, .01, .01) lies in the span.
    a = np.diag([1, 0.01, 0.01]).reshape(-1)
    b = np.diag([0, 1, -0.5]).reshape(-1)
    s = BipartiteSubspace.from_vectors(3, 3, np.stack([a, b], axis=1))
    c = psd_span_certificate(s)
    assert c.found and c.min_eig > 1e-3
    assert c.span_residual < 1e-10
    assert np.trace(c.witness).real == pytest.approx(1)
    assert np.linalg.eigvalsh(c.witness)[0] == pytest.approx(c.min_eig)


def test_psd_certificate_seeded_sampler():
    for d_a, d in ((4, 6), (6, 18)):
        for idx in admissible_indices(d_a, d, positivity_seed=True):
            s = sample_constrained(d_a, d, idx, 0, positivity_seed=True)
            for sub in (s, local_x(complement(s))):
                c = psd_span_certificate(sub)
                assert c.found and c.min_eig > 0.1
                assert_allclose(c.witness, np.eye(d_a) / d_a, atol=1e-10)


def test_check_conditions_seeded():
    idx = admissible_indices(4, 6, positivity_seed=True)[1]
    s = sample_constrained(4, 6, idx, 4, positivity_seed=True)
    rep = check_conditions(s, kmax=1, restarts=20, iters=200)
    for c in "cdg":
        assert rep.conditions[c].verdict == "holds"
        assert rep.conditions[c].residual <= 1e-10
    for c in "ef":
        assert rep.conditions[c].verdict == "holds"
    assert rep.conditions["a"].verdict in ("holds_up_to_k", "fails")
    assert rep.conditions["a"].verdict != "holds"


def test_check_conditions_full_space_degenerate():
    rep = check_conditions(BipartiteSubspace.full(4, 4), restarts=5)
    assert rep.degenerate and not rep.passed
    assert rep.conditions["a"].verdict == "certified"
    assert rep.conditions["b"].verdict == "fails"
    assert "degenerate" in rep.conditions["g"].note


def test_check_conditions_symmetrized_upb():
    s = symmetrize(upb_span(product_upb(tiles_upb(), complete_product_basis(2, 2))))
    rep = check_conditions(s, kmax=2, restarts=10, iters=100)
    assert rep.conditions["a"].verdict == "certified"
    for c in "cdg":
        assert rep.conditions[c].verdict == "holds"


def test_check_conditions_monotone_in_k():
    s = sample_constrained(4, 6, admissible_indices(4, 6)[0], 9)
    r1 = check_conditions(s, kmax=1, restarts=20, iters=200)
    r2 = check_conditions(s, kmax=2, restarts=20, iters=200)
    for c in "ab":
        if r1.conditions[c].verdict == "fails":
            assert r2.conditions[c].verdict == "fails"


def test_report_json_and_verification():
    s = sample_constrained(4, 6, admissible_indices(4, 6, True)[0], 1, True)
    rep = check_conditions(s, restarts=10, iters=100)
    obj = json.loads(json.dumps(rep.to_json()))
    assert "wall_time" not in obj
    assert "wall_time" in rep.to_json(timing=True)
    res = verify_report(obj)
    assert res["ok"], res
    bad = copy.deepcopy(obj)
    bad["conditions"]["g"]["residual"] = 0.5
    assert not verify_report(bad)["ok"]
    bad = copy.deepcopy(obj)
    bad["conditions"]["e"]["witness"]["matrix"]["data"][0] = [5.0, 0.0]
    assert not verify_report(bad)["ok"]
    with pytest.raises(ValueError, match="conditions"):
        verify_report({"subspace": obj["subspace"], "conditions": {}, "kmax": 1, "tol": 1e-10})
    with pytest.raises(ValueError, match="missing"):
        verify_report({"kmax": 1})


def test_search_contract():
    cfg = SearchConfig(d_a=4, d_values=(6,), trials=10, seed=3, restarts=10, iters=100)
    results = list(search(cfg))
    assert len(results) == 10
    assert [r.trial for r in results] == list(range(10))
    for r in results:
        for c in "cdg":
            assert r.report.conditions[c].residual <= 1e-10
    again = [json.dumps(r.to_json()) for r in search(cfg)]
    assert again == [json.dumps(r.to_json()) for r in results]


def test_search_positivity_and_threads():
    cfg = SearchConfig(d_a=4, d_values=(6, 8), trials=6, seed=1, positivity_seed=True,
                       restarts=10, iters=100)
    serial = [json.dumps(r.to_json()) for r in search(cfg)]
    threaded = [json.dumps(r.to_json()) for r in search(
        SearchConfig(**{**cfg.__dict__, "workers": 3}))]
    assert serial == threaded
    for line in serial:
        conds = json.loads(line)["report"]["conditions"]
        assert "witness" in conds["e"] and "witness" in conds["f"]


def test_search_rejects_inadmissible():
    with pytest.raises(ValueError):
        plan_trials(SearchConfig(d_a=4, d_values=(6,), trials=1, index=(3, 1, 2)))
    with pytest.raises(ValueError):
        plan_trials(SearchConfig(d_a=4, d_values=(), trials=1))
    plan = plan_trials(SearchConfig(d_a=4, d_values=(6,), trials=5))
    assert [p[2].r for p in plan] == [0, 2, 4, 6, 0]
