"""Conditions (a)-(g) on a subspace and the superactivation pipeline.

For a subspace ``S`` of ``C^d_a (x) C^d_a`` (``d_a`` even) the conditions are

* (a) ``S`` strongly unextendible, (b) ``S^perp`` strongly unextendible;
* (c) ``flip(S) = S``, (d) ``flip(local_x S) = local_x S``;
* (e) ``M(S)`` and (f) ``M(local_x S^perp)`` spanned by PSD matrices;
* (g) ``S`` orthogonal to ``((I+X) (x) (I-X)) S^perp``.

(a) and (b) are only ever checked up to a finite ``k`` by product-state
search, unless a UPB certificate applies.

The two channels are described at the level of their ``E* . E`` Choi
matrices: ``sigma1`` supported on ``S`` and ``sigma2`` supported on the
complex conjugate of ``S2 = local_x(S^perp)``, i.e. on the support of
``P_{S2}^T``.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    antidiagonal,
    derive_seed,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    omega,
    plus_minus_projectors,
    vector_from_json,
)
from .sampler import (
    admissible_indices,
    measure_structure,
    ortho_residual,
    sample_constrained,
    StructureIndex,
    verify_symmetries,
)
from .subspace import (
    BipartiteSubspace,
    complement,
    conjugate,
    flip,
    k_unextendible,
    local_x,
    product_residual,
    tensor_power,
)

CONDITIONS = ("a", "b", "c", "d", "e", "f", "g")
CHAIN_FACTOR = 4


# --------------------------------------------------------------------------- #
#                              Signal states                                  #
# --------------------------------------------------------------------------- #


def signal_states(d_a, normalized=True):
    """``phi0 = omega``, ``phi1 = (I (x) X) omega`` and ``phi+-``.

    Returns a dict of 1-d arrays. With ``normalized=False`` ``phi0`` and
    ``phi1`` keep the squared norm ``d_a`` of ``omega``.
    """
    if d_a % 2:
        raise ValueError(f"<omega|(I(x)X)|omega> = tr X = 1 for odd d_a={d_a}; need even d_a")
    w = omega(d_a)
    wx = np.kron(np.eye(d_a), antidiagonal(d_a)) @ w
    if normalized:
        w, wx = w / np.sqrt(d_a), wx / np.sqrt(d_a)
    return {
        "phi0": w,
        "phi1": wx,
        "phi_plus": (w + wx) / np.sqrt(2),
        "phi_minus": (w - wx) / np.sqrt(2),
    }


# --------------------------------------------------------------------------- #
#                       Choi-level identity chain                             #
# --------------------------------------------------------------------------- #


def product_choi_apply(c1, c2, psi, d):
    """``(N1 (x) N2)(|psi><psi|)`` for maps on ``C^d`` given by Choi matrices.

    ``c1``, ``c2`` are ``d^2 x d^2`` Choi matrices on ``in (x) out``; ``psi``
    lives on ``C^d (x) C^d`` with ``N1`` acting on the first factor.
    """
    coef = np.asarray(psi).reshape(d, d)
    t1 = np.asarray(c1).reshape(d, d, d, d)
    t2 = np.asarray(c2).reshape(d, d, d, d)
    out = np.einsum("ij,kl,iakb,jcle->acbe", coef, coef.conj(), t1, t2, optimize=True)
    return out.reshape(d * d, d * d)


def chain_rhs(sigma1, sigma2, d_a):
    """``tr[((P+ (x) P-) sigma2 (P+ (x) P-))^T sigma1]``."""
    p_plus, p_minus = plus_minus_projectors(d_a)
    q = np.kron(p_plus, p_minus)
    return complex(np.trace((q @ sigma2 @ q).T @ sigma1))


def identity_chain(sigma1, sigma2, d_a):
    """Evaluate both ends of the trace identity for the quantum signal.

    ``direct`` is ``tr[(N1 (x) N2)(phi+) phi-]`` with the unnormalised
    ``phi+- = (omega +- (I(x)X) omega)/sqrt 2``; for ``N = E* . E`` this
    equals ``tr[(E1(x)E2)(phi+) (E1(x)E2)(phi-)]``. ``rhs`` is
    :func:`chain_rhs`. They agree as ``direct = 4 * rhs``.
    """
    st = signal_states(d_a, normalized=False)
    out = product_choi_apply(sigma1, sigma2, st["phi_plus"], d_a)
    direct = complex(st["phi_minus"].conj() @ out @ st["phi_minus"])
    rhs = chain_rhs(sigma1, sigma2, d_a)
    return {"direct": direct, "rhs": rhs, "factor": CHAIN_FACTOR,
            "residual": abs(direct - CHAIN_FACTOR * rhs)}


def classical_overlap(sigma1, sigma2, d_a):
    """``tr[(N1 (x) N2)(phi0) phi1]`` with unnormalised signal states."""
    st = signal_states(d_a, normalized=False)
    out = product_choi_apply(sigma1, sigma2, st["phi0"], d_a)
    return complex(st["phi1"].conj() @ out @ st["phi1"])


def second_support(s):
    """``S2 = local_x(S^perp)``; ``sigma2`` lives on ``conjugate(S2)``."""
    return local_x(complement(s))


def choi_pair_from_subspace(s):
    """Choi matrices ``sigma1 ~ P_S`` and ``sigma2 ~ P_{S2}^T``.

    Each is scaled to trace ``d_a``, the trace of the Choi matrix of a
    trace-preserving map on ``C^d_a``. A zero subspace gives a zero matrix.
    """
    s2 = conjugate(second_support(s))
    out = []
    for sub in (s, s2):
        p = sub.projector
        out.append(p * (s.d_a / sub.dim) if sub.dim else p)
    return out[0], out[1]


def joint_orthogonality(s, tol=1e-10):
    """Orthogonality of the joint outputs for the classical and quantum signals.

    ``classical`` is the Gram block between ``conj(S)`` and
    ``(I (x) X) conj(S2)``, which vanishes by construction. ``quantum`` is
    ``|| P_S ((I+X)(x)(I-X)) P_{S^perp} ||_F``.
    """
    if s.d_a != s.d_b or s.d_a % 2:
        raise ValueError("joint_orthogonality needs d_a == d_b and even")
    s2 = second_support(s)
    shifted = local_x(conjugate(s2))
    classical = float(np.linalg.norm(conjugate(s).basis.conj().T @ shifted.basis))
    quantum = ortho_residual(s)
    return {
        "classical_ok": classical <= tol,
        "quantum_ok": quantum <= tol,
        "residuals": {"classical": classical, "quantum": quantum},
        "degenerate": s.is_degenerate,
    }


# --------------------------------------------------------------------------- #
#                         Positive-definite witnesses                         #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class PsdCertificate:
    """``witness`` is a unit-trace positive-definite element of ``M(S)``.

    Without a witness, ``min_eig`` is the best ``lambda_min`` found on the
    unit Frobenius sphere of the Hermitian part (``None`` for a zero space).
    """

    witness: np.ndarray | None
    min_eig: float | None
    span_residual: float | None = None

    @property
    def found(self):
        return self.witness is not None


def hermitian_basis(s, tol=1e-10):
    """Real-orthonormal Hermitian basis (Frobenius) of a flip-closed ``M(S)``."""
    mats = s.matrices()
    herm = [(m + m.conj().T) / 2 for m in mats] + [(m - m.conj().T) / 2j for m in mats]
    if not herm:
        return []
    flat = np.stack([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm], axis=1)
    u, sv, _ = np.linalg.svd(flat, full_matrices=False)
    keep = sv > tol * sv[0] if sv.size and sv[0] > 0 else np.zeros(0, bool)
    n = s.d_a * s.d_b
    out = []
    for col in u[:, keep].T:
        h = (col[:n] + 1j * col[n:]).reshape(s.d_a, s.d_b)
        out.append((h + h.conj().T) / 2)
    return out


def _min_eig(h):
    evals, evecs = np.linalg.eigh(h)
    return evals[0], evecs[:, 0]


def psd_span_certificate(s, tol=1e-9, seed=0, steps=500, restarts=10):
    """Look for a positive-definite element of ``M(S)``.

    ``M(S)`` must be closed under ``M -> M^dagger`` (``flip(S) = S``); then
    any positive-definite element ``W`` certifies a PSD spanning set, since
    ``W + eps H`` stays positive for every Hermitian basis element ``H``
    and small ``eps``.

    The projection of ``I`` onto the Hermitian part is tried first. If its
    ``lambda_min`` is not above ``tol`` (after unit-trace normalisation), a
    projected subgradient ascent of ``lambda_min`` runs on the unit
    Frobenius sphere from the projection of ``I`` and from random starts.
    """
    if s.d_a != s.d_b:
        raise ValueError("psd_span_certificate needs a square matrix view")
    if s.dim and np.linalg.norm(flip(s).projector - s.projector) > 1e-8:
        raise ValueError("M(S) is not closed under Hermitian conjugation")
    basis = hermitian_basis(s)
    if not basis:
        return PsdCertificate(None, None)
    stack = np.stack(basis)
    coeffs0 = np.array([np.trace(h).real for h in basis])

    def element(c):
        return np.tensordot(c, stack, axes=1)

    def accept(w):
        tr = np.trace(w).real
        if tr <= 0:
            return None
        w = w / tr
        lam = _min_eig(w)[0]
        return (w, float(lam)) if lam > tol else None

    if np.linalg.norm(coeffs0) > 0:
        hit = accept(element(coeffs0))
        if hit:
            return PsdCertificate(hit[0], hit[1], span_residual(s, hit[0]))
    best_val, best_c = -np.inf, None
    for r in range(restarts):
        if r == 0 and np.linalg.norm(coeffs0) > 0:
            c = coeffs0.copy()
        else:
            c = make_rng(derive_seed(seed, r)).standard_normal(len(basis))
        c /= np.linalg.norm(c)
        for t in range(steps):
            lam, v = _min_eig(element(c))
            if lam > best_val:
                best_val, best_c = float(lam), c.copy()
            grad = np.array([(v.conj() @ h @ v).real for h in basis])
            grad -= (grad @ c) * c
            c = c + 0.1 / np.sqrt(t + 1) * grad
            c /= np.linalg.norm(c)
        if best_val > 0:
            hit = accept(element(best_c))
            if hit:
                return PsdCertificate(hit[0], hit[1], span_residual(s, hit[0]))
    return PsdCertificate(None, best_val)


def span_residual(s, m):
    """Distance of the matrix ``m`` from ``M(S)`` (Frobenius)."""
    v = np.asarray(m).reshape(-1)
    return float(np.linalg.norm(v - s.basis @ (s.basis.conj().T @ v)))


# --------------------------------------------------------------------------- #
#                            Condition reports                                #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class ConditionEntry:
    verdict: str
    residual: float | None
    witness: dict | None = None
    note: str = ""

    @property
    def ok(self):
        return self.verdict in ("holds", "holds_up_to_k", "certified")

    def to_json(self):
        out = {"verdict": self.verdict, "residual": self.residual}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True, eq=False)
class ConditionReport:
    subspace: BipartiteSubspace
    conditions: dict
    kmax: int
    tol: float
    wall_time: float = field(default=0.0, compare=False)

    @property
    def degenerate(self):
        return self.subspace.is_degenerate

    @property
    def passed(self):
        return not self.degenerate and all(self.conditions[c].ok for c in CONDITIONS)

    def to_json(self, timing=False):
        out = {
            "kmax": self.kmax,
            "tol": self.tol,
            "degenerate": self.degenerate,
            "pass": self.passed,
            "conditions": {c: self.conditions[c].to_json() for c in CONDITIONS},
            "subspace": self.subspace.to_json(),
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _unext_entry(v):
    """Map an :class:`UnextendibilityVerdict` to a condition entry."""
    if v.verdict == "fails":
        w = dict(v.witness.to_json(), k=v.failed_at)
        return ConditionEntry("fails", v.witness.residual, w, f"product state at k={v.failed_at}")
    witness = None
    if v.best_candidate is not None:
        witness = dict(v.best_candidate.to_json(), k=v.best_at)
    return ConditionEntry(v.verdict, v.best_residual, witness, v.note)


def _psd_entry(s, tol, seed, what):
    if s.dim == 0:
        return ConditionEntry("fails", None, note=f"{what} is the zero space")
    try:
        cert = psd_span_certificate(s, tol=tol, seed=seed)
    except ValueError as exc:
        return ConditionEntry("fails", None, note=str(exc))
    if cert.found:
        w = {"matrix": matrix_to_json(cert.witness), "span_residual": cert.span_residual}
        return ConditionEntry("holds", cert.min_eig, w, "positive-definite element")
    return ConditionEntry("fails", cert.min_eig, note="no positive-definite element found")


def check_conditions(s, kmax=1, tol=1e-10, seed=0, search_tol=1e-8, restarts=100,
                     iters=500, psd_tol=1e-9):
    """Evaluate conditions (a)-(g) on ``s``.

    Residuals: (a)/(b) the smallest product-state residual seen by the
    search (or the failing witness's); (c), (d), (g) the Frobenius norms
    from :func:`verify_symmetries`; (e)/(f) the minimum eigenvalue of the
    unit-trace witness. Odd ``d_a`` is accepted (every condition is still
    defined) but such a subspace cannot feed the signal states.
    """
    if s.d_a != s.d_b:
        raise ValueError(f"check_conditions needs d_a == d_b, got {s.d_a}, {s.d_b}")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    t0 = time.perf_counter()
    perp = complement(s)
    conds = {}
    for name, sub, key in (("a", s, 0), ("b", perp, 1)):
        v = k_unextendible(sub, kmax, restarts, iters, search_tol,
                           derive_seed(seed, key), use_certificate=True)
        conds[name] = _unext_entry(v)
    sym = verify_symmetries(s, tol)
    for name, res in (("c", sym.flip_residual), ("d", sym.flip_x_residual),
                      ("g", sym.ortho_residual)):
        conds[name] = ConditionEntry("holds" if res <= tol else "fails", res)
    conds["e"] = _psd_entry(s, psd_tol, derive_seed(seed, 2), "S")
    conds["f"] = _psd_entry(local_x(perp), psd_tol, derive_seed(seed, 3), "local_x(S^perp)")
    if s.is_degenerate:
        for c in CONDITIONS:
            e = conds[c]
            conds[c] = ConditionEntry(e.verdict, e.residual, e.witness,
                                      (e.note + "; " if e.note else "") + "degenerate subspace")
    return ConditionReport(s, conds, kmax, tol, time.perf_counter() - t0)


# --------------------------------------------------------------------------- #
#                           Report verification                               #
# --------------------------------------------------------------------------- #


def _product_witness_residual(sub, w, kmax):
    k = int(w.get("k", 1))
    if not 1 <= k <= kmax:
        raise ValueError(f"witness power k={k} outside [1, {kmax}]")
    power = sub if k == 1 else tensor_power(sub, k)
    a = vector_from_json(w["a"], "witness.a")
    b = vector_from_json(w["b"], "witness.b")
    return product_residual(power, a, b, "orthogonal_to")


def verify_report(obj, atol=1e-9):
    """Recompute every stored residual of a report from its witnesses.

    Returns ``{"ok": bool, "checks": {condition: {stored, recomputed, ok}}}``.
    Raises ``ValueError`` on malformed input.
    """
    if not isinstance(obj, dict):
        raise ValueError("report: expected a JSON object")
    for key in ("subspace", "conditions", "kmax", "tol"):
        if key not in obj:
            raise ValueError(f"report: missing field {key!r}")
    s = BipartiteSubspace.from_json(obj["subspace"], "report.subspace")
    conds = obj["conditions"]
    if not isinstance(conds, dict) or set(conds) != set(CONDITIONS):
        raise ValueError(f"report.conditions: expected keys {list(CONDITIONS)}")
    kmax = int(obj["kmax"])
    perp = complement(s)
    sym = verify_symmetries(s, float(obj["tol"]))
    recomputed = {"c": sym.flip_residual, "d": sym.flip_x_residual, "g": sym.ortho_residual}
    checks = {}
    for name in CONDITIONS:
        entry = conds[name]
        where = f"report.conditions.{name}"
        if not isinstance(entry, dict) or "residual" not in entry:
            raise ValueError(f"{where}: expected an object with a residual")
        stored = entry["residual"]
        witness = entry.get("witness")
        if name in recomputed:
            value = recomputed[name]
        elif name in ("a", "b") and witness is not None:
            try:
                value = _product_witness_residual(s if name == "a" else perp, witness, kmax)
            except (KeyError, TypeError) as exc:
                raise ValueError(f"{where}.witness: malformed ({exc})") from None
        elif name in ("e", "f") and witness is not None:
            sub = s if name == "e" else local_x(perp)
            m = matrix_from_json(witness.get("matrix"), f"{where}.witness.matrix")
            value = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
            span = span_residual(sub, m)
            checks[name + ".span"] = {"stored": witness.get("span_residual"),
                                      "recomputed": span, "ok": span <= atol}
        else:
            checks[name] = {"stored": stored, "recomputed": None, "ok": True,
                            "note": "no witness to re-evaluate"}
            continue
        ok = stored is not None and abs(value - float(stored)) <= atol
        checks[name] = {"stored": stored, "recomputed": value, "ok": ok}
    return {"ok": all(c["ok"] for c in checks.values()), "checks": checks}


# --------------------------------------------------------------------------- #
#                                 Search                                      #
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class SearchConfig:
    d_a: int
    d_values: tuple
    trials: int
    seed: int = 0
    kmax: int = 1
    positivity_seed: bool = False
    index: tuple | None = None
    workers: int = 1
    restarts: int = 100
    iters: int = 500
    tol: float = 1e-10

    def to_json(self):
        return {
            "d_a": self.d_a, "d_values": list(self.d_values), "trials": self.trials,
            "seed": self.seed, "kmax": self.kmax, "positivity_seed": self.positivity_seed,
            "index": None if self.index is None else list(self.index),
            "restarts": self.restarts, "iters": self.iters, "tol": self.tol,
        }


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial: int
    index: StructureIndex
    seed: int
    report: ConditionReport

    def to_json(self):
        out = {"trial": self.trial, "index": self.index.to_json(), "seed": self.seed}
        out["structure_measured"] = measure_structure(self.report.subspace)
        out["report"] = self.report.to_json()
        return out


def plan_trials(config):
    """``(trial, d, StructureIndex, seed)`` for every trial, in order.

    ``d`` cycles through ``d_values``; for each ``d`` the admissible
    indices are visited round-robin unless ``config.index`` fixes one.
    """
    if not config.d_values:
        raise ValueError("d_values must be nonempty")
    cache = {}
    plan = []
    for t in range(config.trials):
        d = config.d_values[t % len(config.d_values)]
        if d not in cache:
            if config.index is not None:
                r, k1, k2 = config.index
                idx = StructureIndex(config.d_a, d, r, k1, k2)
                cache[d] = [i for i in admissible_indices(config.d_a, d, config.positivity_seed)
                            if i == idx]
                if not cache[d]:
                    raise ValueError(f"index (r={r}, k1={k1}, k2={k2}) is not admissible for d={d}")
            else:
                cache[d] = admissible_indices(config.d_a, d, config.positivity_seed)
                if not cache[d]:
                    raise ValueError(f"no admissible structure index for d_a={config.d_a}, d={d}")
        options = cache[d]
        idx = options[(t // len(config.d_values)) % len(options)]
        plan.append((t, d, idx, derive_seed(config.seed, t)))
    return plan


def run_trial(config, trial, d, idx, seed):
    s = sample_constrained(config.d_a, d, idx, derive_seed(seed, 0), config.positivity_seed)
    report = check_conditions(s, config.kmax, config.tol, derive_seed(seed, 1),
                              restarts=config.restarts, iters=config.iters)
    return TrialResult(trial, idx, seed, report)


def search(config):
    """Yield a :class:`TrialResult` per trial, in trial order.

    The stream is a pure function of ``config``; ``workers > 1`` runs
    trials on a thread pool without changing the output.
    """
    plan = plan_trials(config)
    if config.workers <= 1:
        for item in plan:
            yield run_trial(config, *item)
        return
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        yield from pool.map(lambda item: run_trial(config, *item), plan)
