"""Command-line front end.

Exit codes: 0 when every requested verdict is Proved or Completed, 1 when
something is unproved within the bound or an evaluation ran out of budget,
2 for input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import build_dep_graph
from .engine import Budget, call_graph_sample, lg_evaluate
from .syntax import ParseError, parse_goal, parse_program, render, render_atom
from .termprove import (Certificate, FingerprintMismatch, check_certificate,
                        prove_lg, prove_quasi)
from .termprove.certificate import fingerprint
from .transform import NameCollision, a_transform

SCHEMA = 1
EXIT_OK, EXIT_UNPROVED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _color(text: str, code: str) -> str:
    env = os.environ.get("TABTERM_COLOR")
    on = sys.stderr.isatty() if env is None else env == "1"
    return f"\033[{code}m{text}\033[0m" if on else text


def _say(label: str, value: str, good: bool):
    print(f"{label}: " + _color(value, "32" if good else "31"), file=sys.stderr)


def _load(path: str, default_mode):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_program(text, default_mode=default_mode)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _budget(args) -> Budget:
    try:
        return Budget(args.max_steps, args.max_depth, args.max_tables, args.max_answers)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _goals(args, program):
    if getattr(args, "query", None):
        try:
            return [parse_goal(q, program) for q in args.query]
        except ParseError as exc:
            raise InputError(f"bad query: {exc}") from exc
    if not program.queries:
        raise InputError("no query given and the program declares none")
    return list(program.queries)


def _run_doc(program, goal, budget, occurs_check, args=None) -> dict:
    keep = bool(args and (args.trace or args.forest_dot))
    forest, outcome = lg_evaluate(program, goal, budget, occurs_check, keep_nodes=keep)
    if args is not None:
        if args.trace:
            with open(args.trace, "a", encoding="utf-8") as fh:
                for rec in trace_records(forest, goal):
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        if args.forest_dot:
            _write(forest.to_dot(), args.forest_dot)
        if args.call_graph_dot:
            _write(call_graph_sample(program, goal, budget, occurs_check).to_dot(), args.call_graph_dot)
    return {
        "query": render_atom(goal),
        **outcome.to_dict(),
        "trees": sorted(str(t.root) for t in forest.all_trees),
        "answers": sorted(render_atom(a) for a in forest.top.answers),
    }


def trace_records(forest, goal):
    """One record per forest node, then one per answer (see docs/trace.md)."""
    q = render_atom(goal)
    for t in forest.all_trees:
        for n in t.nodes:
            yield {"event": "node", "query": q, "tree": str(t.root), "node": n.id,
                   "parent": n.parent, "kind": n.kind, "depth": n.depth,
                   "goal": [render_atom(a) for a in n.goal]}
        for i, a in enumerate(t.answers):
            yield {"event": "answer", "query": q, "tree": str(t.root), "index": i,
                   "answer": render_atom(a)}


def _program_doc(path, p) -> dict:
    return {
        "file": path,
        "fingerprint": fingerprint(p),
        "clauses": len(p.clauses),
        "predicates": [str(q) for q in sorted(p.predicates)],
        "functors": [str(f) for f in sorted(p.functors)],
        "queries": [render_atom(q) for q in p.queries],
        "warnings": list(p.warnings),
    }


def _verdict_doc(rep) -> dict:
    d = rep.to_dict()
    for key in ("modes", "well_chosen", "cross_check"):
        d.pop(key)
    return d


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    p = _load(args.file, args.default_mode)
    goals = _goals(args, p)
    budget = _budget(args)
    timing = {"parse": time.perf_counter() - t0}
    quasi = prove_quasi(p, goals, args.k, budget=None)
    lg = prove_lg(p, goals, args.k, budget=None)
    timing["quasi"], timing["lg"] = quasi.seconds, lg.seconds
    t1 = time.perf_counter()
    runs = [_run_doc(p, g, budget, not args.no_occurs_check) for g in goals]
    timing["runs"] = time.perf_counter() - t1
    doc = {
        "schema": SCHEMA,
        "program": _program_doc(args.file, p),
        "tabling": [str(q) for q in sorted(p.tabling)],
        "modes": quasi.modes,
        "well_chosen": quasi.well_chosen,
        "quasi": _verdict_doc(quasi),
        "lg": _verdict_doc(lg),
        "runs": runs,
        "timing": {k: round(v, 6) for k, v in timing.items()},
    }
    _emit(doc, args.output)
    _say("quasi-termination", quasi.verdict, quasi.proved)
    _say("LG-termination", lg.verdict, lg.proved)
    for r in runs:
        _say(f"run {r['query']}", r["status"], r["status"] == "Completed")
    wanted = {"quasi": [quasi], "lg": [lg], "all": [quasi, lg]}[args.require]
    return EXIT_OK if all(r.proved for r in wanted) else EXIT_UNPROVED


def cmd_run(args) -> int:
    p = _load(args.file, args.default_mode)
    goals = _goals(args, p)
    budget = _budget(args)
    if args.trace:
        Path(args.trace).write_text("", encoding="utf-8")
    runs = [_run_doc(p, g, budget, not args.no_occurs_check, args) for g in goals]
    _emit({"schema": SCHEMA, "program": _program_doc(args.file, p), "runs": runs}, args.output)
    for r in runs:
        _say(f"run {r['query']}", r["status"], r["status"] == "Completed")
    return EXIT_OK if all(r["status"] == "Completed" for r in runs) else EXIT_UNPROVED


def cmd_transform(args) -> int:
    p = _load(args.file, args.default_mode)
    try:
        pa, _ = a_transform(p)
    except NameCollision as exc:
        raise InputError(str(exc)) from exc
    _write(render(pa), args.output)
    return EXIT_OK


def cmd_graph(args) -> int:
    p = _load(args.file, args.default_mode)
    if args.call_graph or args.forest:
        goals = _goals(args, p)
        budget = _budget(args)
        if args.forest:
            forest, _ = lg_evaluate(p, goals[0], budget, not args.no_occurs_check)
            _write(forest.to_dot(), args.output)
        else:
            _write(call_graph_sample(p, goals[0], budget, not args.no_occurs_check).to_dot(), args.output)
    else:
        _write(build_dep_graph(p).to_dot(p.tabling), args.output)
    return EXIT_OK


def cmd_certify(args) -> int:
    p = _load(args.file, args.default_mode)
    try:
        cert = Certificate.loads(Path(args.cert).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {args.cert}: {exc.strerror}") from exc
    except (ValueError, KeyError) as exc:
        raise InputError(f"{args.cert}: malformed certificate ({exc})") from exc
    try:
        statuses = check_certificate(p, cert)
    except FingerprintMismatch as exc:
        raise InputError(str(exc)) from exc
    ok = all(s.ok for s in statuses)
    _emit({"schema": SCHEMA, "program": _program_doc(args.file, p), "role": cert.role,
           "ok": ok, "constraints": [s.to_dict() for s in statuses]}, args.output)
    _say("certificate", "valid" if ok else "rejected", ok)
    return EXIT_OK if ok else EXIT_UNPROVED


def _write(text: str, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(doc: dict, output):
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", output)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tabterm", description="Tabled program evaluation and termination proofs.")
    ap.add_argument("--version", action="version", version=f"tabterm {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="program in .tlp format")
    common.add_argument("--default-mode", choices=("all-in", "all-out"),
                        help="mode for predicates without a declaration")
    common.add_argument("--no-occurs-check", action="store_true", help="unify without the occurs check")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    budget = argparse.ArgumentParser(add_help=False)
    d = Budget()
    budget.add_argument("--max-steps", type=int, default=d.max_steps)
    budget.add_argument("--max-depth", type=int, default=d.max_depth)
    budget.add_argument("--max-tables", type=int, default=d.max_tables)
    budget.add_argument("--max-answers", type=int, default=d.max_answers_per_table)
    budget.add_argument("--query", action="append", help="goal to evaluate (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common, budget], help="full pipeline, JSON report")
    c.add_argument("-k", type=int, default=2, help="coefficient bound for the solver")
    c.add_argument("--require", choices=("all", "quasi", "lg"), default="all",
                   help="verdicts that decide the exit code")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", parents=[common, budget], help="run the tabled engine")
    r.add_argument("--trace", help="write a JSON-lines evaluation trace to this file")
    r.add_argument("--forest-dot", help="write the LG-forest as DOT to this file")
    r.add_argument("--call-graph-dot", help="write the sampled call graph as DOT to this file")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("transform", parents=[common], help="print the answer-transformed program")
    t.set_defaults(func=cmd_transform)

    g = sub.add_parser("graph", parents=[common, budget], help="DOT output")
    g.add_argument("--call-graph", action="store_true", help="sampled call graph of the query")
    g.add_argument("--forest", action="store_true", help="LG-forest of the query")
    g.set_defaults(func=cmd_graph)

    v = sub.add_parser("certify", parents=[common], help="check a certificate")
    v.add_argument("cert", help="certificate JSON")
    v.set_defaults(func=cmd_certify)
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "k", 1) < 0:
        print("tabterm: -k must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"tabterm: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
