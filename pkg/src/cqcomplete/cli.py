"""Command line front end (``cqc``)."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import oracle
from .completeness import IncompleteDatabase, apply_tc, dependency_graph, is_complete, satisfies
from .errors import CQError, CyclicTCS, ParseError
from .generalization import mcg
from .query import contained, equivalent, evaluate, minimize
from .specialization import Budget, k_mcs, mcs_size_bound
from .syntax import (
    Document,
    format_instance,
    format_queries,
    format_query,
    format_statement,
    parse,
    query_tree,
    statement_tree,
)

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class Output:
    def __init__(self, args, command: str):
        self.json = args.json
        self.timing = not args.no_timing
        self.command = command
        self.record: dict = {"command": command, "budget_exhausted": False}
        self.lines: list[str] = []
        self.start = time.perf_counter()
        self.color = sys.stdout.isatty() and os.environ.get("CQC_COLOR", "1") != "0"

    def say(self, text: str = "") -> None:
        self.lines.append(text)

    def verdict(self, value: str) -> None:
        self.record["verdict"] = value
        if self.color:
            code = "32" if value in ("complete", "contained", "satisfied", "acyclic") else "31"
            self.lines.append(f"\x1b[{code}m{value}\x1b[0m")
        else:
            self.lines.append(value)

    def emit(self) -> None:
        if self.json:
            elapsed = (time.perf_counter() - self.start) * 1000
            self.record["elapsed_ms"] = round(elapsed, 3) if self.timing else None
            sys.stdout.write(json.dumps(self.record, indent=2, ensure_ascii=False) + "\n")
        else:
            for line in self.lines:
                sys.stdout.write(line + "\n")


def _read(path: str | None, use_stdin: bool, allow_unsafe: bool = False) -> Document:
    if use_stdin or path in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse(text, allow_unsafe=allow_unsafe)


def _doc(args) -> Document:
    return _read(args.file, args.stdin, getattr(args, "allow_unsafe", False))


def cmd_check(args, out: Output) -> int:
    doc = _doc(args)
    q = doc.query(args.query)
    ok = is_complete(q, doc.statements)
    out.record["queries"] = [query_tree(q)]
    out.verdict("complete" if ok else "incomplete")
    return EXIT_YES if ok else EXIT_NO


def cmd_generalize(args, out: Output) -> int:
    doc = _doc(args)
    q = doc.query(args.query)
    result, trace = mcg(q, doc.statements)
    if args.trace:
        out.record["trace"] = []
        for st in trace.steps:
            out.record["trace"].append(
                {"step": st.index, "query": query_tree(st.query), "removed": [str(a) for a in st.removed]}
            )
            removed = ", ".join(str(a) for a in st.removed) or "nothing"
            out.say(f"% step {st.index}: removed {removed}")
            out.say(f"%   {format_query(st.query)}")
    if result is None:
        out.record["queries"] = []
        out.record["verdict"] = "none"
        out.say("none")
        return EXIT_NO
    if args.minimize_output:
        result = minimize(result)
    out.record["queries"] = [query_tree(result, args.name)]
    out.record["verdict"] = "mcg"
    out.say(format_query(result, args.name))
    return EXIT_YES


def cmd_specialize(args, out: Output) -> int:
    doc = _doc(args)
    q = doc.query(args.query)
    budget = Budget(args.max_extensions, args.max_unifiers, args.time_limit)
    res = k_mcs(q, doc.statements, args.k, budget)
    trees = []
    for spec in res.found:
        tree = query_tree(spec.query, args.name)
        if args.explain:
            tree["extension_size"] = spec.extension_size
            tree["matching"] = spec.provenance(doc.statements)
        trees.append(tree)
    out.record["queries"] = trees
    out.record["pruned"] = res.pruned_count
    out.record["budget_exhausted"] = res.budget_exhausted
    out.say(format_queries(res.queries, args.name))
    if args.explain:
        for spec in res.found:
            out.say(f"% {format_query(spec.query, args.name)}")
            out.say(f"%   found in an extension with {spec.extension_size} fresh atom(s)")
            for row in spec.provenance(doc.statements):
                targets = ", ".join(row["condition_targets"]) or "-"
                out.say(f"%   {row['atom']} <- {row['statement']} (condition on {targets})")
    if res.budget_exhausted:
        out.say("% budget exhausted: result is partial")
        print("budget exhausted: result is partial", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_YES


def cmd_contains(args, out: Output) -> int:
    doc = _doc(args)
    a, b = doc.query(args.query), doc.query(args.other)
    ok = contained(a, b)
    out.record["queries"] = [query_tree(a), query_tree(b)]
    out.verdict("contained" if ok else "not contained")
    return EXIT_YES if ok else EXIT_NO


def cmd_minimize(args, out: Output) -> int:
    doc = _doc(args)
    m = minimize(doc.query(args.query))
    out.record["queries"] = [query_tree(m, args.name)]
    out.say(format_query(m, args.name))
    return EXIT_YES


def cmd_eval(args, out: Output) -> int:
    doc = _doc(args)
    q = doc.query(args.query)
    data = _read(args.data, False).facts
    answers = sorted(evaluate(q, data), key=lambda t: [str(x) for x in t])
    out.record["answers"] = [[str(x) for x in t] for t in answers]
    for t in answers:
        out.say("(" + ",".join(str(x) for x in t) + ")")
    if not answers:
        out.say("none")
    return EXIT_YES


def cmd_satisfies(args, out: Output) -> int:
    doc = _doc(args)
    idb = IncompleteDatabase(_read(args.ideal, False).facts, _read(args.available, False).facts)
    rows = []
    all_ok = True
    for c in doc.statements:
        ok = satisfies(idb, c)
        all_ok &= ok
        row = {"statement": statement_tree(c), "satisfied": ok}
        if not ok:
            row["missing"] = format_instance(apply_tc(c, idb.ideal) - idb.available)
        rows.append(row)
        out.say(f"{c.label}: {'satisfied' if ok else 'violated'}  {format_statement(c)}")
        for m in row.get("missing", []):
            out.say(f"    missing {m}")
    out.record["statements"] = rows
    out.verdict("satisfied" if all_ok else "violated")
    return EXIT_YES if all_ok else EXIT_NO


def cmd_bound(args, out: Output) -> int:
    doc = _doc(args)
    q = doc.query(args.query)
    graph = dependency_graph(doc.statements)
    out.record["dependency_graph"] = {r: sorted(es) for r, es in graph.items()}
    for r, es in graph.items():
        out.say(f"% {r} -> {', '.join(sorted(es)) or '(none)'}")
    try:
        b = mcs_size_bound(q, doc.statements)
    except CyclicTCS:
        out.verdict("cyclic")
        out.say("refused: the statements are cyclic, so no size bound holds; pass an explicit --k")
        return EXIT_NO
    out.verdict("acyclic")
    out.record.update(bound=b.bound, suggested_k=b.suggested_k, relations=b.relations, total_atoms=b.total_atoms)
    out.say(f"bound {b.bound}")
    out.say(f"suggested k {b.suggested_k if b.suggested_k is not None else 'none'}")
    return EXIT_YES


def cmd_verify(args, out: Output) -> int:
    doc = _doc(args)
    cs = doc.statements
    names = [args.query] if args.query else list(doc.queries)
    checks = []

    def record(what: str, engine, ref, note: str = "", agree: bool | None = None) -> None:
        if agree is None and ref is not None:
            agree = engine == ref
        checks.append({"check": what, "engine": engine, "oracle": ref, "agree": agree, "note": note})
        tag = "skip" if agree is None else ("ok" if agree else "MISMATCH")
        out.say(f"{tag:8} {what}: engine={engine} oracle={ref}{'  ' + note if note else ''}")

    for name in names:
        q = doc.query(name)
        bounds = oracle.EnumerationBounds.for_inputs([q], cs, extra=max(args.extra_constants, len(q.variables())))
        try:
            ref = oracle.oracle_entails_complete(q, cs, bounds).holds
        except CQError as e:
            ref, note = None, str(e)
        else:
            note = ""
        record(f"complete({name})", is_complete(q, cs), ref, note)
        for other in names:
            q2 = doc.query(other)
            if other == name or q2.arity != q.arity:
                continue
            b2 = oracle.EnumerationBounds.for_inputs([q, q2], (), extra=max(args.extra_constants, len(q.variables())))
            try:
                ref = oracle.oracle_containment(q, q2, b2).holds
                note = ""
            except CQError as e:
                ref, note = None, str(e)
            record(f"contained({name}, {other})", contained(q, q2), ref, note)
        if args.k is not None:
            n = len(minimize(q))
            got = k_mcs(q, cs, args.k).queries
            sb = oracle.EnumerationBounds.for_specializations(q, cs)
            try:
                ref_set = oracle.oracle_specializations(q, cs, n + args.k, sb)
            except CQError as e:
                record(f"k_mcs({name}, k={args.k})", len(got), None, str(e))
            else:
                same = _same_up_to_equivalence(got, ref_set)
                record(f"k_mcs({name}, k={args.k})", len(got), len(ref_set), "query counts", agree=same)
    mismatches = sum(1 for c in checks if c["agree"] is False)
    out.record["checks"] = checks
    out.verdict("agree" if not mismatches else "disagree")
    return EXIT_YES if not mismatches else EXIT_NO


def _same_up_to_equivalence(a, b) -> bool:
    if len(a) != len(b):
        return False
    return all(any(x.arity == y.arity and equivalent(x, y) for y in b) for x in a)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--file", "-f", help="document to read (default: standard input)")
    src.add_argument("--stdin", action="store_true", help="read the document from standard input")
    common.add_argument("--json", action="store_true", help="structured output")
    common.add_argument("--no-timing", action="store_true", help="omit elapsed_ms from structured output")
    common.add_argument("--allow-unsafe", action="store_true", help="accept unsafe queries for inspection")

    p = argparse.ArgumentParser(prog="cqc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="is the query complete?")
    s.add_argument("-q", "--query", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("generalize", parents=[common], help="minimal complete generalization")
    s.add_argument("-q", "--query", required=True)
    s.add_argument("--trace", action="store_true")
    s.add_argument("--as", dest="name", default="q", help="head name for the printed result (default: q)")
    s.add_argument("--minimize-output", action="store_true")
    s.set_defaults(func=cmd_generalize)

    s = sub.add_parser("specialize", parents=[common], help="maximal complete specializations with k extra atoms")
    s.add_argument("-q", "--query", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--max-extensions", type=int)
    s.add_argument("--max-unifiers", type=int)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--explain", action="store_true")
    s.add_argument("--as", dest="name", default="q", help="head name for printed results (default: q)")
    s.set_defaults(func=cmd_specialize)

    s = sub.add_parser("contains", parents=[common], help="is query A contained in query B?")
    s.add_argument("-q", "--query", required=True)
    s.add_argument("-Q", "--other", required=True)
    s.set_defaults(func=cmd_contains)

    s = sub.add_parser("minimize", parents=[common])
    s.add_argument("-q", "--query", required=True)
    s.add_argument("--as", dest="name", default="q", help="head name for the printed result (default: q)")
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("eval", parents=[common])
    s.add_argument("-q", "--query", required=True)
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("satisfies", parents=[common], help="check statements against an incomplete database")
    s.add_argument("--ideal", required=True)
    s.add_argument("--available", required=True)
    s.set_defaults(func=cmd_satisfies)

    s = sub.add_parser("bound", parents=[common], help="acyclicity report and MCS size bound")
    s.add_argument("-q", "--query", required=True)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("verify", parents=[common], help="cross-check the engine against brute force")
    s.add_argument("-q", "--query")
    s.add_argument("--k", type=int)
    s.add_argument("--extra-constants", type=int, default=2)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args, args.command)
    try:
        code = args.func(args, out)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (KeyError, OSError, ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except CQError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out.emit()
    return code


if __name__ == "__main__":
    raise SystemExit(main())
