"""Command-line driver: qtype [flags] file.q [file2.q ...]"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import diagnostics as dg
from . import syntax as sx
from .engine import MAX_EXTENSION_DEPTH, UnknownBuiltin, generate_constraints, propagate
from .labeling import BudgetExceeded, Inconsistent, LabelConfig, label, needs_labeling
from .signatures import SignatureError, load_signatures

EXIT_CLEAN, EXIT_ERRORS, EXIT_WARNINGS, EXIT_SYNTAX, EXIT_USAGE = 0, 1, 2, 3, 4
# errors outrank warnings even though their code is smaller
_EXIT_RANK = {EXIT_CLEAN: 0, EXIT_WARNINGS: 1, EXIT_ERRORS: 2, EXIT_SYNTAX: 3, EXIT_USAGE: 4}


def worst(codes) -> int:
    return max(codes, key=_EXIT_RANK.__getitem__, default=EXIT_CLEAN)


@dataclass
class Config:
    paths: list
    signatures: Optional[str] = None
    format: str = "text"
    types: bool = False
    trace: bool = False
    trace_json: bool = False
    label: bool = True
    max_splits: int = 10_000
    max_solutions: int = 64
    step_budget: int = 100_000
    warnings_ok: bool = False


@dataclass
class FileResult:
    file: str
    diagnostics: list = field(default_factory=list)
    report: Optional[dg.TypeReport] = None
    trace: list = field(default_factory=list)
    store: object = None
    exit: int = EXIT_CLEAN

    def render(self, config: Config) -> str:
        out = dg.render(self.diagnostics, self.report if config.types else None,
                        config.format, self.file)
        if config.trace:
            out += "".join(ev.text() + "\n" for ev in self.trace)
        if config.trace_json:
            out += "".join(ev.json() + "\n" for ev in self.trace)
        return out


def _syntax_diag(e: sx.QSyntaxError) -> dg.Diagnostic:
    return dg.Diagnostic("error", e.kind, e.span, None, e.message, [{"phase": e.kind}])


def _node_span(store, root, key):
    ids = sorted(k for k in store.class_of(key) if isinstance(k, int))
    for i in ids:
        if i in store.nodes and i != 0:
            return i, store.nodes[i].span
    return None, root.span


def analyze_source(source: str, file: str, sigs, config: Optional[Config] = None) -> FileResult:
    config = config or Config([])
    res = FileResult(file)
    errors = []
    try:
        root, annots = sx.parse_source(source, file, errors)
    except sx.QSyntaxError as e:
        res.diagnostics = [_syntax_diag(e)]
        res.exit = EXIT_SYNTAX
        return res
    res.diagnostics.extend(_syntax_diag(e) for e in errors)
    try:
        store = generate_constraints(root, annots, sigs, config.step_budget)
    except UnknownBuiltin as e:
        res.diagnostics.append(dg.Diagnostic(
            "error", "unknown-builtin", e.span, None,
            f"no signature for built-in {e.name!r}", [{"builtin": e.name}]))
        res.exit = EXIT_USAGE
        return res
    res.store = store
    status = propagate(store)
    diags = res.diagnostics
    if status == "budget-exceeded":
        diags.append(dg.Diagnostic(
            "warning", "internal", root.span, None,
            f"propagation stopped after {store.step_budget} steps; results are partial",
            [{"budget": store.step_budget}]))

    states = None
    if config.label and status == "quiescent" and needs_labeling(store):
        out = label(store, LabelConfig(config.max_splits, config.max_solutions))
        if isinstance(out, Inconsistent):
            nid, span = (None, root.span)
            if out.conflicts:
                nid, span = _node_span(store, root, out.conflicts[-1].node)
            diags.append(dg.Diagnostic(
                "error", "labeling-inconsistent", span, nid,
                "no consistent typing exists; the location is imprecise",
                [dg._justify(r) for r in out.conflicts] or [{"labeling": "no solution"}]))
        elif isinstance(out, BudgetExceeded):
            states = out.states or None
            diags.append(dg.Diagnostic(
                "warning", "internal", root.span, None,
                f"labeling stopped after {out.splits} splits; results are partial",
                [{"splits": out.splits}]))
        else:
            states = out.states
            if out.truncated:
                diags.append(dg.Diagnostic(
                    "info", "internal", root.span, None,
                    f"labeling stopped after {len(out.states)} solutions",
                    [{"solutions": len(out.states)}]))

    if store.depth_capped:
        diags.append(dg.Diagnostic(
            "info", "internal", root.span, None,
            f"item-wise extension stopped at nesting depth {MAX_EXTENSION_DEPTH}; "
            "some types are left unresolved", [{"depth": MAX_EXTENSION_DEPTH}]))
    diags.extend(dg.localize_errors(store, root))
    report = dg.build_report(store, root, states)
    vd = dg.union_var_domains(store, states)
    diags.extend(dg.check_interrogatives(store, annots, report if states else None, vd))
    res.report = report
    res.trace = list(store.trace)
    res.diagnostics = dg.sort_diagnostics(diags)

    if errors:
        res.exit = EXIT_SYNTAX
    else:
        sev = dg.max_severity(res.diagnostics)
        if sev == "error":
            res.exit = EXIT_ERRORS
        elif sev == "warning" and not config.warnings_ok:
            res.exit = EXIT_WARNINGS
    return res


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qtype", description="Static type analysis for Q programs.")
    p.add_argument("paths", nargs="+", metavar="file.q")
    p.add_argument("--signatures", metavar="PATH",
                   help="built-in signature file (default: $QTYPE_SIGNATURES or the shipped table)")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--types", action="store_true", help="list the inferred type of every expression")
    p.add_argument("--trace", action="store_true", help="dump the propagation trace")
    p.add_argument("--trace-json", action="store_true", help="dump the trace as JSON lines")
    p.add_argument("--label", dest="label", action="store_true", default=True)
    p.add_argument("--no-label", dest="label", action="store_false")
    p.add_argument("--max-splits", type=int, default=10_000, metavar="N")
    p.add_argument("--max-solutions", type=int, default=64, metavar="N")
    p.add_argument("--step-budget", type=int, default=100_000, metavar="N")
    p.add_argument("--warnings-ok", action="store_true", help="exit 0 when only warnings are found")
    return p


def parse_args(argv) -> Config:
    ns = build_parser().parse_args(argv)
    for name in ("max_splits", "max_solutions", "step_budget"):
        if getattr(ns, name) < 1:
            raise _UsageError(f"--{name.replace('_', '-')} must be positive")
    return Config(**vars(ns))


def run(config: Config, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        sigs = load_signatures(config.signatures)
    except SignatureError as e:
        print(f"qtype: {e}", file=err)
        return EXIT_USAGE
    codes = []
    for path in config.paths:
        try:
            with open(path, encoding="utf-8") as fh:
                source = fh.read()
        except (OSError, UnicodeDecodeError) as e:
            print(f"qtype: cannot read {path}: {getattr(e, 'strerror', None) or e}", file=err)
            codes.append(EXIT_USAGE)
            continue
        res = analyze_source(source, path, sigs, config)
        out.write(res.render(config))
        codes.append(res.exit)
    return worst(codes)


def main(argv=None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except _UsageError as e:
        print(f"qtype: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
