"""Command-line front end.  Every subcommand prints one JSON document.

Exit status: 0 on success, 1 when a result is Unknown or an iteration did not
converge, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

from .algebra import OPS, SEMIRINGS, get_op, parse_value, registry_lookup, to_json_value
from .bp import decode, integral_decomposition, marginal_variable, run_loopy, run_tree
from .decimation import decimate, satisfies
from .errors import DivisionByAnnihilator, InferenceError, NotInvertible
from .factor_graph import evaluate, is_tree
from .fileio import dumps_factor_graph, load_dimacs, load_factor_graph
from .oracle import GRAMMAR, classify, evaluate_query, parse_query
from .sp import (
    build_message_grid,
    enumerate_bp_fixed_points,
    run_sp,
    sp_integral,
    sp_marginal_over_marginals,
)


class InputError(Exception):
    pass


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _vec(v):
    return [to_json_value(x) for x in v]


def _load_graph(path: str, backend: str = "rational"):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return load_factor_graph(p, backend), _digest(p.read_bytes())


def _semiring_name(arg: str | None, file_semiring: str | None) -> str:
    name = arg or file_semiring
    if name is None:
        raise InputError("no semiring given (-s) and none declared in the file")
    return registry_lookup(name).name


def _base(command: str, digest: str, semiring, backend: str) -> dict:
    return {
        "command": command,
        "input_digest": digest,
        "semiring": semiring,
        "backend": backend,
        "estimates_flagged": [],
    }


def cmd_eval(args) -> tuple[dict, int]:
    fgf, digest = _load_graph(args.graph)
    if args.semiring in OPS:
        op, label = get_op(args.semiring), args.semiring
    else:
        label = _semiring_name(args.semiring, fgf.semiring)
        op = registry_lookup(label)
    try:
        z = [int(t) for t in args.assignment.split(",")] if args.assignment.strip() else []
    except ValueError:
        raise InputError(f"assignment must be comma-separated integers: {args.assignment!r}") from None
    out = _base("eval", digest, label, fgf.graph.backend)
    out["assignment"] = z
    out["value"] = to_json_value(evaluate(fgf.graph, op, z))
    return out, 0


def _classification(q) -> dict:
    try:
        c = classify(q)
    except InferenceError as exc:
        return {"family": None, "complexity": None, "classification_error": str(exc)}
    return {
        "family": c.family,
        "sum_set": sorted(c.sum_set),
        "poly_set": sorted(c.poly_set),
        "complexity": str(c.complexity),
    }


def cmd_query(args) -> tuple[dict, int]:
    fgf, digest = _load_graph(args.graph)
    q = parse_query(args.query, fgf.graph.n_vars)
    out = _base("query", digest, None, fgf.graph.backend)
    out.update({"query_echo": q.text(), "M": q.M})
    out.update(_classification(q))
    t = evaluate_query(fgf.graph, q)
    if t.scope:
        out["table"] = {"scope": list(t.scope), "values": _vec(t.values)}
    else:
        out["value"] = to_json_value(t.scalar)
    return out, 0


def cmd_classify(args) -> tuple[dict, int]:
    q = parse_query(args.query, args.n_vars)
    out = _base("classify", _digest(args.query.encode()), None, None)
    out.update({"query_echo": q.text(), "M": q.M})
    cls = _classification(q)
    if cls.get("classification_error"):
        raise InputError(cls["classification_error"])
    out.update(cls)
    return out, 0


def cmd_bp(args) -> tuple[dict, int]:
    backend = "rational" if args.exact or args.rational else "float64"
    fgf, digest = _load_graph(args.graph, backend)
    fg = fgf.graph
    name = _semiring_name(args.semiring, fgf.semiring)
    s = registry_lookup(name)
    out = _base("bp", digest, name, backend)
    tree = is_tree(fg)
    if args.exact:
        if not tree:
            raise InputError("--exact needs a tree-structured factor graph")
        state, marginals = run_tree(fg, s)
        report = {"converged": True, "iterations": 2, "schedule": "two-pass"}
        code = 0
    else:
        state, rep = run_loopy(
            fg, s, max_iter=args.max_iter, tol=args.tol, damping=args.damping,
            schedule=args.schedule, seed=args.seed, init=args.init,
        )
        marginals = [marginal_variable(state, i) for i in range(fg.n_vars)]
        report = {
            "converged": rep.converged,
            "iterations": rep.iterations,
            "max_residual": rep.max_residual,
            "schedule": args.schedule,
        }
        code = 0 if rep.converged else 1
        if not tree:
            out["estimates_flagged"].append("marginals")
    out["report"] = report
    out["marginals"] = {str(i): _vec(m) for i, m in enumerate(marginals)}
    if s.expand_invertible:
        try:
            out["integral"] = to_json_value(integral_decomposition(state))
        except (DivisionByAnnihilator, NotInvertible) as exc:
            out["integral"] = None
            out["integral_error"] = str(exc)
        if not tree:
            out["estimates_flagged"].append("integral")
    if s.marg.is_choice and tree:
        out["decoded"] = list(decode(state))
    return out, code


def _parse_grid(path: str, backend: str):
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        return {int(k): [[parse_value(str(x), backend) for x in v] for v in vs] for k, vs in data.items()}
    return [[parse_value(str(x), backend) for x in v] for v in data]


def cmd_sp(args) -> tuple[dict, int]:
    fgf, digest = _load_graph(args.graph)
    fg = fgf.graph
    name = _semiring_name(args.bp_semiring, fgf.semiring)
    bp = registry_lookup(name)
    grid = None
    if args.grid:
        grid = build_message_grid(fg, bp, "explicit", _parse_grid(args.grid, fg.backend))
    state, rep = run_sp(
        fg, bp, mode=args.mode, grid=grid, max_iter=args.max_iter, tol=args.tol,
        damping=args.damping, seed=args.seed,
    )
    out = _base("sp", digest, name, fg.backend)
    out["mode"] = args.mode
    out["report"] = {
        "converged": rep.converged,
        "iterations": rep.iterations,
        "max_residual": rep.max_residual,
        "closed_form_clauses": rep.compressed,
    }
    integral = sp_integral(state)
    out["sp_integral"] = to_json_value(integral.value)
    if integral.estimate:
        out["estimates_flagged"].append("sp_integral")
    if not args.no_marginals:
        out["sp_marginals"] = {
            str(i): [{"marginal": _vec(m), "weight": to_json_value(w)} for m, w in sp_marginal_over_marginals(state, i).items()]
            for i in range(fg.n_vars)
        }
    return out, 0 if rep.converged else 1


def cmd_fixed_points(args) -> tuple[dict, int]:
    fgf, digest = _load_graph(args.graph)
    name = _semiring_name(args.semiring, fgf.semiring)
    states = enumerate_bp_fixed_points(fgf.graph, name, cap=args.cap)
    out = _base("fixed-points", digest, name, fgf.graph.backend)
    out["count"] = len(states)
    out["fixed_points"] = [
        {
            "v2f": {f"{i}->{a}": _vec(v) for (i, a), v in sorted(st.v2f.items())},
            "f2v": {f"{a}->{i}": _vec(v) for (a, i), v in sorted(st.f2v.items())},
        }
        for st in states[: args.show]
    ]
    return out, 0


def cmd_solve_sat(args) -> tuple[dict, int]:
    p = Path(args.cnf)
    if not p.is_file():
        raise InputError(f"no such file: {args.cnf}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cnf = load_dimacs(p)
    res = decimate(
        cnf.clauses, cnf.n_vars, tol=args.tol, max_iter=args.max_iter,
        bias_threshold=args.bias_threshold, restarts=args.restarts, seed=args.seed,
        threads=args.threads,
    )
    out = _base("solve-sat", _digest(p.read_bytes()), "or-and", "float64")
    out["warnings"] = [str(w.message) for w in caught]
    out["status"] = res.status
    if res.assignment is not None:
        out["assignment"] = [(v + 1) if x else -(v + 1) for v, x in enumerate(res.assignment)]
        out["verified"] = satisfies(cnf.clauses, res.assignment)
    else:
        out["reason"] = res.reason
        if res.certificate is not None:
            out["certificate"] = [(l.var + 1) if l.positive else -(l.var + 1) for l in res.certificate]
    out["stats"] = res.stats
    return out, 0 if res.status == "SAT" else 1


def cmd_fmt(args) -> tuple[str, int]:
    fgf, _ = _load_graph(args.graph)
    return dumps_factor_graph(fgf.graph, fgf.semiring), 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semiring-gm", description=__doc__.splitlines()[0])
    p.add_argument("--pretty", action="store_true", help="indent JSON output")
    p.add_argument("--threads", type=int, default=1, help="worker cap for engines that parallelize")
    sub = p.add_subparsers(dest="command", required=True)
    semis = ", ".join(sorted(SEMIRINGS))

    e = sub.add_parser("eval", help="expanded form at one assignment")
    e.add_argument("-g", "--graph", required=True)
    e.add_argument("-s", "--semiring", help=f"semiring ({semis}) or expansion op ({', '.join(OPS)})")
    e.add_argument("-a", "--assignment", required=True, help="comma-separated states, e.g. 0,1,0")
    e.set_defaults(func=cmd_eval)

    q = sub.add_parser("query", help="exact multi-operation marginalization", epilog=GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    q.add_argument("-g", "--graph", required=True)
    q.add_argument("-q", "--query", required=True)
    q.set_defaults(func=cmd_query)

    c = sub.add_parser("classify", help="hierarchy class of a query", epilog=GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    c.add_argument("-q", "--query", required=True)
    c.add_argument("-n", "--n-vars", type=int, required=True)
    c.set_defaults(func=cmd_classify)

    b = sub.add_parser("bp", help="belief propagation")
    b.add_argument("-g", "--graph", required=True)
    b.add_argument("-s", "--semiring")
    b.add_argument("--max-iter", type=int, default=200)
    b.add_argument("--tol", type=float, default=1e-9)
    b.add_argument("--damping", type=float, default=0.0)
    b.add_argument("--schedule", choices=["synchronous", "sequential"], default="synchronous")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--init", choices=["uniform", "random"], default="uniform")
    b.add_argument("--exact", action="store_true", help="two-pass schedule on a tree, rational arithmetic")
    b.add_argument("--rational", action="store_true", help="iterate with exact rationals")
    b.set_defaults(func=cmd_bp)

    s = sub.add_parser("sp", help="survey propagation")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--bp-semiring")
    s.add_argument("--mode", choices=["counting", "weighted"], default="counting")
    s.add_argument("--grid", help="JSON file with explicit candidate messages")
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--damping", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-marginals", action="store_true")
    s.set_defaults(func=cmd_sp)

    f = sub.add_parser("fixed-points", help="enumerate BP fixed points on the message grid")
    f.add_argument("-g", "--graph", required=True)
    f.add_argument("-s", "--semiring")
    f.add_argument("--cap", type=int, default=10**6)
    f.add_argument("--show", type=int, default=20, help="number of fixed points to list")
    f.set_defaults(func=cmd_fixed_points)

    t = sub.add_parser("solve-sat", help="survey-guided decimation on a DIMACS file")
    t.add_argument("-c", "--cnf", required=True)
    t.add_argument("--restarts", type=int, default=3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--bias-threshold", type=float, default=0.05)
    t.add_argument("--tol", type=float, default=1e-3)
    t.add_argument("--max-iter", type=int, default=200)
    t.set_defaults(func=cmd_solve_sat)

    m = sub.add_parser("fmt", help="rewrite a factor-graph file in canonical form")
    m.add_argument("-g", "--graph", required=True)
    m.set_defaults(func=cmd_fmt)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result, code = args.func(args)
    except (InputError, InferenceError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, str):
        sys.stdout.write(result)
    else:
        text = json.dumps(result, indent=2 if args.pretty else None, sort_keys=True)
        sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
