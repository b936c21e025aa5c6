"""Command-line front end over the JSON artifacts.

Exit codes: 0 success, 1 domain failure (a check did not pass),
2 invalid input, 3 dimension guard tripped.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from . import channel as ch
from . import sampler, superactivation, upb
from .numerics import AmbientDimensionError, vector_from_json
from .subspace import BipartiteSubspace, NotFound, find_product_state

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class InputError(ValueError):
    """Bad user input; reported with exit code 2."""


# --------------------------------------------------------------------------- #
#                                   I/O                                       #
# --------------------------------------------------------------------------- #


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_ndjson(path):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{n}:{exc.colno}: {exc.msg}") from None
    return out


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def emit(args, text, summary):
    """Write ``text`` to ``args.output`` (or stdout) and a summary line."""
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(summary)
    else:
        sys.stdout.write(text)
        if not args.quiet:
            print(summary, file=sys.stderr)


def parse(loader, obj, where):
    try:
        return loader(obj, where)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_subspace(path):
    """Subspace JSON, or a UPB JSON turned into its span."""
    obj = load_json(path)
    if isinstance(obj, dict) and "states" in obj:
        return upb.upb_span(parse(upb.UPB.from_json, obj, path))
    return parse(BipartiteSubspace.from_json, obj, path)


def load_signal_states(path, d_in):
    if path is None:
        eye = np.eye(d_in, dtype=complex)
        return eye[0], eye[1]
    obj = load_json(path)
    if not isinstance(obj, dict) or "s0" not in obj or "s1" not in obj:
        raise InputError(f"{path}: expected an object with 's0' and 's1'")
    return (parse(vector_from_json, obj["s0"], f"{path}.s0"),
            parse(vector_from_json, obj["s1"], f"{path}.s1"))


@contextlib.contextmanager
def guard_override(unsafe):
    if not unsafe:
        yield
        return
    old = os.environ.get("ZEQ_MAX_AMBIENT")
    os.environ["ZEQ_MAX_AMBIENT"] = str(2**62)
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("ZEQ_MAX_AMBIENT", None)
        else:
            os.environ["ZEQ_MAX_AMBIENT"] = old


# --------------------------------------------------------------------------- #
#                               Subcommands                                   #
# --------------------------------------------------------------------------- #


def cmd_channel_choi(args):
    obj = load_json(args.input)
    if args.inverse:
        c = parse(ch.ChoiMatrix.from_json, obj, args.input)
        m = ch.channel_from_choi(c)
        emit(args, dumps(m.to_json()), f"{len(m.kraus)} Kraus operators")
    else:
        m = parse(ch.LinearMap.from_json, obj, args.input)
        emit(args, dumps(ch.choi(m).to_json()), f"Choi matrix {m.d_in * m.d_out}x{m.d_in * m.d_out}")
    return EXIT_OK


def cmd_channel_adjoint(args):
    m = parse(ch.LinearMap.from_json, load_json(args.input), args.input)
    out = ch.compose_self_adjoint(m) if args.self_compose else ch.adjoint(m)
    emit(args, dumps(out.to_json()), f"map {out.d_in} -> {out.d_out}")
    return EXIT_OK


def _load_channel(path):
    m = parse(ch.LinearMap.from_json, load_json(path), path)
    if not m.is_trace_preserving:
        raise InputError(f"{path}: Kraus family is not trace preserving "
                         f"(defect {m.tp_defect():.3e})")
    return ch.Channel(m.d_in, m.d_out, m.kraus)


def cmd_channel_recover(args):
    m = _load_channel(args.input)
    s0, s1 = load_signal_states(args.states, m.d_in)
    try:
        rec = ch.recovery_map(m, s0, s1, args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(args, dumps(rec.to_json()), f"recovery map {rec.d_in} -> {rec.d_out}")
    return EXIT_OK


def cmd_q0_witness(args):
    m = _load_channel(args.input)
    s0, s1 = load_signal_states(args.states, m.d_in)
    try:
        res = ch.q0_witness(m, s0, s1, args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(args, dumps(res), f"q0 witness holds: {res['holds']}")
    return EXIT_OK if res["holds"] else EXIT_DOMAIN


def cmd_subspace_check(args):
    s = load_subspace(args.input)
    if s.d_a != s.d_b:
        raise InputError(f"{args.input}: subspace-check needs d_a == d_b")
    rep = superactivation.check_conditions(
        s, args.kmax, args.tol, args.seed, restarts=args.restarts, iters=args.iters
    )
    verdicts = " ".join(f"{c}={rep.conditions[c].verdict}" for c in superactivation.CONDITIONS)
    emit(args, dumps(rep.to_json()), f"pass={rep.passed} {verdicts}")
    return EXIT_OK if rep.passed else EXIT_DOMAIN


def cmd_subspace_product_state(args):
    s = load_subspace(args.input)
    res = find_product_state(s, args.mode, args.restarts, args.iters, args.tol, args.seed)
    found = not isinstance(res, NotFound)
    witness = res if found else res.best
    out = {"found": found, "mode": args.mode, "tol": args.tol, "restarts": args.restarts,
           "iters": args.iters, "seed": args.seed, "witness": witness.to_json()}
    emit(args, dumps(out), f"found={found} residual={witness.residual:.3e}")
    return EXIT_OK


def build_upb(name, d_a=None, d_b=None):
    if name == "tiles":
        return upb.tiles_upb()
    if name == "tiles-squared":
        return upb.product_upb(upb.tiles_upb(), upb.tiles_upb())
    if name == "tiles-even":
        return upb.product_upb(upb.tiles_upb(), upb.complete_product_basis(2, 2))
    if name == "complete":
        if not d_a or not d_b:
            raise InputError("complete needs --da and --db")
        return upb.complete_product_basis(d_a, d_b)
    raise InputError(f"unknown UPB family {name!r}")


def cmd_upb_build(args):
    u = build_upb(args.family, args.da, args.db)
    if args.pad:
        u = upb.pad_upb(u, *args.pad)
    emit(args, dumps(u.to_json()), f"{len(u)} product states in C^{u.d_a} (x) C^{u.d_b}")
    return EXIT_OK


def cmd_upb_symmetrize(args):
    s = load_subspace(args.input)
    try:
        out = upb.symmetrize(s)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(args, dumps(out.to_json()), f"dim {s.dim} -> {out.dim}")
    return EXIT_OK


def check_only_report(d_a, d=None):
    """Integer-only dimension checks; allocates nothing dimension-sized."""
    window = sampler.dimension_window(d_a)
    out = dict(sampler.headline_dimensions(d_a))
    out["window"] = None if window is None else list(window)
    out["window_nonempty"] = window is not None
    if d is not None:
        out["d"] = d
        out["d_in_window"] = window is not None and window[0] <= d <= window[1]
        out["positivity_dimensions_ok"] = sampler.positivity_dimensions_ok(d_a, d)
        out["r_range"] = list(sampler.r_range(d_a, d))
    return out


def cmd_sample(args):
    if args.check_only:
        out = check_only_report(args.da, args.d)
        emit(args, dumps(out), f"window nonempty: {out['window_nonempty']}")
        return EXIT_OK
    if args.d is None:
        raise InputError("sample needs --d (or --check-only)")
    if args.da % 2:
        raise InputError(f"--da must be even, got {args.da}")
    if not 1 <= args.d <= args.da**2:
        raise InputError(f"--d must lie in [1, {args.da**2}]")
    indices = sampler.admissible_indices(args.da, args.d, args.positivity_seed)
    if args.list_indices:
        out = [i.to_json() for i in indices]
        emit(args, dumps(out), f"{len(out)} admissible indices")
        return EXIT_OK
    wanted = {"r": args.r, "k1": args.k1, "k2": args.k2}
    matches = [i for i in indices
               if all(v is None or getattr(i, k) == v for k, v in wanted.items())]
    if not matches:
        listing = ", ".join(f"(r={i.r}, k1={i.k1}, k2={i.k2})" for i in indices) or "none"
        reason = ""
        if None not in wanted.values():
            try:
                idx = sampler.StructureIndex(args.da, args.d, args.r, args.k1, args.k2)
                reason = "; ".join(sampler.index_problems(idx, args.positivity_seed))
            except ValueError as exc:
                reason = str(exc)
        raise InputError(f"structure index {wanted} is not admissible"
                         + (f" ({reason})" if reason else "") + f"; admissible: {listing}")
    s = sampler.sample_constrained(args.da, args.d, matches[0], args.seed, args.positivity_seed)
    idx = matches[0]
    emit(args, dumps(s.to_json()), f"sampled d={s.dim} (r={idx.r}, k1={idx.k1}, k2={idx.k2})")
    return EXIT_OK


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_search(args):
    index = None
    if args.r is not None:
        index = (args.r, args.k1 or 0, args.k2 if args.k2 is not None else None)
        if index[2] is None:
            raise InputError("--r needs --k2 as well")
    config = superactivation.SearchConfig(
        d_a=args.da, d_values=args.d, trials=args.trials, seed=args.seed, kmax=args.kmax,
        positivity_seed=args.positivity_seed, index=index, workers=args.workers,
        restarts=args.restarts, iters=args.iters, tol=args.tol,
    )
    if args.da % 2:
        raise InputError(f"--da must be even, got {args.da}")
    try:
        plan_check = superactivation.plan_trials(config)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    lines, passed = [], 0
    for res in superactivation.search(config):
        passed += res.report.passed
        lines.append(json.dumps(res.to_json()))
    text = "".join(line + "\n" for line in lines)
    emit(args, text, f"{len(plan_check)} trials, {passed} passed all conditions")
    return EXIT_OK


def load_reports(path):
    """A report, a JSON list of reports, or NDJSON search output."""
    try:
        obj = load_json(path)
    except InputError as first:
        try:
            return load_ndjson(path)
        except InputError:
            raise first from None
    return obj if isinstance(obj, list) else [obj]


def cmd_verify_report(args):
    docs = load_reports(args.input)
    results = []
    for n, doc in enumerate(docs):
        rep = doc["report"] if isinstance(doc, dict) and "report" in doc else doc
        try:
            results.append(superactivation.verify_report(rep, args.atol))
        except ValueError as exc:
            raise InputError(f"{args.input}[{n}]: {exc}") from None
    ok = all(r["ok"] for r in results)
    out = {"ok": ok, "reports": results}
    emit(args, dumps(out), f"{len(results)} report(s) verified: {ok}")
    return EXIT_OK if ok else EXIT_DOMAIN


# --------------------------------------------------------------------------- #
#                                 Parser                                      #
# --------------------------------------------------------------------------- #


def build_parser():
    p = argparse.ArgumentParser(prog="zeq", description=__doc__.splitlines()[0])
    p.add_argument("--unsafe", action="store_true",
                   help="lift the ambient dimension guard (ZEQ_MAX_AMBIENT)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, inputs=True):
        sp = sub.add_parser(name, help=help_text)
        if inputs:
            sp.add_argument("input", help="input JSON file")
        sp.add_argument("-o", "--output", help="output file (default: stdout)")
        sp.add_argument("-q", "--quiet", action="store_true", help="suppress the summary line")
        sp.add_argument("--unsafe", action="store_true", default=argparse.SUPPRESS,
                        help="lift the ambient dimension guard")
        sp.set_defaults(func=func)
        return sp

    sp = add("channel-choi", cmd_channel_choi, "Choi matrix of a channel (or the inverse)")
    sp.add_argument("--inverse", action="store_true", help="read a Choi matrix, write Kraus form")

    sp = add("channel-adjoint", cmd_channel_adjoint, "adjoint map E*")
    sp.add_argument("--self-compose", action="store_true", help="write E* o E instead")

    for name, func, text in (("channel-recover", cmd_channel_recover, "zero-error recovery map"),
                             ("q0-witness", cmd_q0_witness, "check the one-qubit code premises")):
        sp = add(name, func, text)
        sp.add_argument("--states", help="JSON with s0, s1 vectors (default |0>, |1>)")
        sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("subspace-check", cmd_subspace_check, "evaluate conditions (a)-(g)")
    sp.add_argument("--kmax", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=100)
    sp.add_argument("--iters", type=int, default=500)

    sp = add("subspace-product-state", cmd_subspace_product_state, "seesaw product-state search")
    sp.add_argument("--mode", choices=("inside", "orthogonal_to"), default="inside")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=100)
    sp.add_argument("--iters", type=int, default=500)

    sp = add("upb-build", cmd_upb_build, "build a known UPB family", inputs=False)
    sp.add_argument("family", choices=("tiles", "tiles-squared", "tiles-even", "complete"))
    sp.add_argument("--da", type=int)
    sp.add_argument("--db", type=int)
    sp.add_argument("--pad", type=int, nargs=2, metavar=("DA", "DB"),
                    help="embed into C^DA (x) C^DB and complete")

    add("upb-symmetrize", cmd_upb_symmetrize, "twelve-term symmetrisation of a span")

    sp = add("sample", cmd_sample, "sample a constrained subspace", inputs=False)
    sp.add_argument("--da", type=int, required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--k1", type=int)
    sp.add_argument("--k2", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--positivity-seed", action="store_true")
    sp.add_argument("--check-only", action="store_true",
                    help="integer dimension arithmetic only, no allocation")
    sp.add_argument("--list-indices", action="store_true")

    sp = add("search", cmd_search, "sample and check many subspaces (NDJSON)", inputs=False)
    sp.add_argument("--da", type=int, required=True)
    sp.add_argument("--d", type=_int_list, required=True, help="comma-separated dimensions")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--kmax", type=int, default=1)
    sp.add_argument("--positivity-seed", action="store_true")
    sp.add_argument("--r", type=int)
    sp.add_argument("--k1", type=int)
    sp.add_argument("--k2", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--restarts", type=int, default=100)
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("verify-report", cmd_verify_report, "re-evaluate a stored report")
    sp.add_argument("--atol", type=float, default=1e-9)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        with guard_override(args.unsafe):
            return args.func(args)
    except AmbientDimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
