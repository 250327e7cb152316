"""``fpcheck`` command line.

Exit codes: 0 when everything checked holds, 1 when an assertion (or the
laws manifest comparison) fails, 2 on input, parse or budget errors.
Non-totality warnings are printed but never change the exit code.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
from pathlib import Path

from . import algebra as A
from . import engine, laws
from .dsl import (
    Assertion,
    Document,
    SourceError,
    factors,
    format_expr,
    parse,
    parse_expression,
    strip_parens,
)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

MANIFEST_PATH = Path(__file__).with_name("laws_manifest.txt")


def format_process(p: A.FuzzyProcess) -> str:
    def m(vals):
        return ", ".join(f"{l}={v}" for l, v in zip(p.universe.labels, vals) if v)

    return f"delta {{{m(p.dvals)}}} gamma {{{m(p.gvals)}}}"


def chain_steps(doc: Document, exprs) -> list[engine.ChainStep]:
    """Turn ``t0 => t1 => ...`` into componentwise obligations.

    If ``t_i`` and ``t_{i+1}`` have the same number of top-level ``*``
    factors they are paired position by position, each right-hand factor
    being a (possibly parenthesized) group of parts.  Otherwise every
    factor of ``t_i`` must refine the whole of ``t_{i+1}``.
    """
    steps = []
    for i in range(len(exprs) - 1):
        left, right = factors(exprs[i]), factors(exprs[i + 1])
        if len(left) == len(right):
            groups = [factors(strip_parens(b)) for b in right]
        else:
            groups = [right] * len(left)
        comps = [
            engine.Component(
                doc.evaluate(a),
                [doc.evaluate(b) for b in group],
                format_expr(a),
                [format_expr(b) for b in group],
            )
            for a, group in zip(left, groups)
        ]
        steps.append(engine.ChainStep(i, comps))
    return steps


def run_document(doc: Document) -> list[dict]:
    """Evaluate every assertion and query of ``doc`` in source order."""
    results = []
    for st in doc.statements:
        texts = [format_expr(a) for a in st.args]
        procs = [doc.evaluate(a) for a in st.args]
        entry = {"line": st.line, "type": "assert" if isinstance(st, Assertion) else "query", "kind": st.kind}
        entry["args"] = texts
        if isinstance(st, Assertion):
            entry["verdict"] = engine.check_assertion(st.kind, procs, texts).to_json()
        elif st.kind == "solve":
            r_min, verdict = engine.solve_design_inequality(*procs, names=texts)
            entry["r_min"] = A.process_to_json(r_min)
            entry["verdict"] = verdict.to_json()
        elif st.kind == "factor":
            entry["report"] = engine.factorize(procs[0], texts[0]).to_json()
        else:
            entry["name"] = st.name
            entry["verdict"] = engine.check_chain(chain_steps(doc, st.args)).to_json()
        results.append(entry)
    return results


def _witness_text(w: dict | None) -> str:
    if not w:
        return ""
    return " witness " + " ".join(
        f"{k}={json.dumps(v, sort_keys=True) if isinstance(v, dict) else v}" for k, v in w.items()
    )


def _factor_lines(rep: dict, universe) -> list[str]:
    robust = A.process_from_json(rep["robust"], universe)
    chaotic = A.process_from_json(rep["chaotic"], universe)
    lines = [
        f"  robust:  {format_process(robust)} (robust: {'yes' if rep['robust_ok'] else 'no'})",
        f"  chaotic: {format_process(chaotic)} (chaotic: {'yes' if rep['chaotic_ok'] else 'no'})",
    ]
    recon = rep["reconstruction"]
    if rep["differing"]:
        recon += " at " + ", ".join(rep["differing"])
    lines.append(f"  reconstruction: {recon}")
    lines += [f"  warning: {w}" for w in rep["warnings"]]
    return lines


def render_results(results: list[dict], doc: Document) -> str:
    out = []
    for r in results:
        head = f"line {r['line']}: {r['type']} {r['kind']}"
        if r.get("name"):
            head += f" {r['name']}:"
        head += " " + (" => " if r["kind"] == "chain" else " ").join(r["args"])
        if "verdict" in r:
            v = r["verdict"]
            status = "holds" if v["holds"] else "FAILS"
            out.append(f"{head}: {status} [{v['level']}]{_witness_text(v['witness'])}")
            if r["kind"] == "solve":
                out.append("  r_min: " + format_process(A.process_from_json(r["r_min"], doc.universe)))
            out += [f"  warning: {w}" for w in v["warnings"]]
        else:
            out.append(f"{head}:")
            out += _factor_lines(r["report"], doc.universe)
    asserts = [r for r in results if r["type"] == "assert"]
    failed = sum(not r["verdict"]["holds"] for r in asserts)
    out.append(f"{len(asserts)} assertion(s), {failed} failed")
    return "\n".join(out) + "\n"


def _load(path: str) -> Document:
    text = Path(path).read_text(encoding="utf-8")
    return parse(text)


def _report_source_error(path: str, exc: SourceError, as_json: bool) -> int:
    if as_json:
        print(json.dumps({"file": path, "error": exc.to_json()}, sort_keys=True))
    print(f"{path}:{exc.line}:{exc.column}: error: {exc.message}", file=sys.stderr)
    return EXIT_ERROR


def cmd_check(args) -> int:
    try:
        doc = _load(args.file)
        results = run_document(doc)
    except OSError as exc:
        print(f"fpcheck: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except SourceError as exc:
        return _report_source_error(args.file, exc, args.json)
    except (A.AlgebraError, laws.BudgetExceeded) as exc:
        print(f"fpcheck: {exc}", file=sys.stderr)
        return EXIT_ERROR
    failed = any(r["type"] == "assert" and not r["verdict"]["holds"] for r in results)
    if args.json:
        payload = {"file": args.file, "results": results, "ok": not failed}
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        sys.stdout.write(render_results(results, doc))
    return EXIT_FAIL if failed else EXIT_OK


def _operands(args, names):
    doc = _load(args.file)
    return doc, [(text, doc.evaluate(parse_expression(text, doc))) for text in names]


def cmd_solve(args) -> int:
    try:
        doc, [(pn, p), (qn, q)] = _operands(args, [args.p, args.q])
    except OSError as exc:
        print(f"fpcheck: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except SourceError as exc:
        return _report_source_error(args.file, exc, args.json)
    r_min, verdict = engine.solve_design_inequality(p, q, names=(pn, qn))
    if args.json:
        print(json.dumps({"r_min": A.process_to_json(r_min), "verdict": verdict.to_json()},
                         sort_keys=True, indent=2))
    else:
        print(f"r_min: {format_process(r_min)}")
        status = "holds" if verdict.holds else "FAILS"
        print(f"verification ({pn} refines {qn} * r_min): {status} [{verdict.level}]"
              f"{_witness_text(verdict.witness)}")
        for w in verdict.warnings:
            print(f"  warning: {w}")
    return EXIT_OK if verdict.holds else EXIT_FAIL


def cmd_factor(args) -> int:
    try:
        doc, [(pn, p)] = _operands(args, [args.p])
    except OSError as exc:
        print(f"fpcheck: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except SourceError as exc:
        return _report_source_error(args.file, exc, args.json)
    rep = engine.factorize(p, pn).to_json()
    if args.json:
        print(json.dumps(rep, sort_keys=True, indent=2))
    else:
        print(f"factor {pn}:")
        print("\n".join(_factor_lines(rep, doc.universe)))
    return EXIT_OK


def cmd_laws(args) -> int:
    envelope = laws.Envelope(args.max_universe, args.grid, args.total_only)
    try:
        budget = laws.budget_from_env()
        reports = laws.run_envelope(envelope, budget)
    except (laws.BudgetExceeded, ValueError) as exc:
        print(f"fpcheck: {exc}", file=sys.stderr)
        return EXIT_ERROR
    manifest = laws.render_manifest(reports, envelope)

    if args.json:
        print(json.dumps([r.to_json() for r in reports], sort_keys=True, indent=2))
    else:
        for rep in reports:
            law = laws.REGISTRY[rep.law_id]
            line = f"{law.id:<20} {law.level:<10} {rep.precondition_class:<22} {rep.tuples_checked} tuples"
            if rep.counterexamples:
                line += "  e.g. " + " ; ".join(format_process(p) for p in rep.counterexamples[0])
            print(line)

    path = Path(args.manifest) if args.manifest else MANIFEST_PATH
    if args.write:
        path.write_text(manifest, encoding="utf-8")
        print(f"wrote {path}", file=sys.stderr)
        return EXIT_OK
    if args.manifest is None and envelope != laws.DEFAULT_ENVELOPE:
        # the shipped manifest pins the default envelope only
        print("non-default envelope: manifest comparison skipped", file=sys.stderr)
        return EXIT_OK
    try:
        expected = path.read_text(encoding="utf-8")
    except OSError:
        print(f"fpcheck: no manifest at {path}; run with --write", file=sys.stderr)
        return EXIT_FAIL
    if expected == manifest:
        print(f"manifest matches {path}", file=sys.stderr)
        return EXIT_OK
    diff = difflib.unified_diff(
        expected.splitlines(True), manifest.splitlines(True), str(path), "regenerated"
    )
    sys.stderr.writelines(diff)
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpcheck", description="Fuzzy process refinement checker.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate the assertions and queries of a .fps file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("laws", help="run the exhaustive law harness")
    p.add_argument("--max-universe", type=int, default=laws.DEFAULT_ENVELOPE.max_universe)
    p.add_argument("--grid", type=int, default=laws.DEFAULT_ENVELOPE.grid_k)
    p.add_argument("--total-only", action="store_true")
    p.add_argument("--write", action="store_true", help="write the manifest instead of comparing")
    p.add_argument("--manifest", help=f"manifest path (default: {MANIFEST_PATH.name} in the package)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("solve", help="minimal solution of p ⊑ q ⊗ r")
    p.add_argument("file")
    p.add_argument("--p", required=True, help="name or expression")
    p.add_argument("--q", required=True, help="name or expression")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("factor", help="robust x chaotic factorization of p")
    p.add_argument("file")
    p.add_argument("--p", required=True, help="name or expression")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_factor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if getattr(args, "max_universe", 1) < 1 or getattr(args, "grid", 1) < 1:
        print("fpcheck: --max-universe and --grid must be positive", file=sys.stderr)
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
