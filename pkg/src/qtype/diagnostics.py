"""Turning finished stores into diagnostics and type listings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import syntax as sx
from . import typelang as tl
from .engine import DomC, Store, propagate

SEVERITY_RANK = {"info": 0, "warning": 1, "error": 2}
MACHINE_FIELDS = ("file", "line", "col", "end_line", "end_col", "severity", "kind",
                  "node_id", "message", "justification")


@dataclass
class Diagnostic:
    severity: str
    kind: str
    span: Optional[sx.SourceSpan]
    node: Optional[int]
    message: str
    justification: list = field(default_factory=list)

    def sort_key(self):
        sp = self.span.sort_key() if self.span else ("", 0, 0, 0, 0)
        return (sp[0], sp[1], sp[2], self.kind, self.node if self.node is not None else -1,
                self.message)

    def to_dict(self, file: Optional[str] = None) -> dict:
        sp = self.span
        return {
            "file": file if file is not None else (sp.file if sp else ""),
            "line": sp.start_line if sp else 0,
            "col": sp.start_col if sp else 0,
            "end_line": sp.end_line if sp else 0,
            "end_col": sp.end_col if sp else 0,
            "severity": self.severity,
            "kind": self.kind,
            "node_id": self.node,
            "message": self.message,
            "justification": list(self.justification),
        }


@dataclass
class TypeReport:
    """Final domain of every constrained expression node."""
    domains: dict  # node id -> tuple of TypeExpr
    spans: dict  # node id -> SourceSpan
    labels: dict  # node id -> short description of the expression
    truncated: bool = False

    def lines(self) -> list:
        out = []
        for nid in sorted(self.domains, key=lambda i: (self.spans[i].sort_key(), i)):
            out.append((nid, tl.show_domain(self.domains[nid])))
        return out


def describe(node: sx.Node) -> str:
    if isinstance(node, sx.Literal):
        return f"literal {node.lexeme}"
    if isinstance(node, sx.Var):
        return f"variable {node.name}"
    if isinstance(node, sx.VectorLit):
        return "vector literal"
    if isinstance(node, sx.App):
        fn = node.fn
        if isinstance(fn, sx.Var):
            return f"application of {fn.name}"
        return "application"
    names = {
        sx.Assign: "assignment", sx.IndexAssign: "indexed assignment", sx.Cond: "conditional",
        sx.DoLoop: "do loop", sx.ListLit: "list", sx.DictLit: "dictionary",
        sx.Lambda: "function", sx.Seq: "program",
    }
    return names.get(type(node), type(node).__name__)


def _justify(rec) -> dict:
    a, b = rec.emptied_by
    return {
        "node": str(rec.node),
        "domains": [tl.show_domain(a) if a else "[]", tl.show_domain(b) if b else "[]"],
        "constraints": [str(c) for c in rec.constraints],
    }


def _conflicts_for(store: Store, nid: int) -> list:
    r = store.find(nid)
    return [c for c in store.conflicts if store.find(c.node) == r]


def localize_errors(store: Store, root: sx.Node) -> list:
    """One error per empty node that has no empty node below it."""
    empty = {}

    def visit(n) -> bool:
        below = False
        for c in n.children():
            below = visit(c) or below
        is_empty = n is not root and store.dom(n.id) == ()
        if is_empty and not below:
            empty[n.id] = n
        return below or is_empty

    visit(root)
    diags = []
    for nid, n in empty.items():
        recs = _conflicts_for(store, nid)
        if recs:
            a, b = recs[0].emptied_by
            detail = f"{_fmt(a)} is incompatible with {_fmt(b)}"
        else:
            # emptiness arrived from elsewhere: cite where it started
            detail = "no type satisfies its constraints"
            recs = store.conflicts[:1]
        diags.append(Diagnostic(
            "error", "inferred-conflict", n.span, nid,
            f"type error in {describe(n)}: {detail}",
            [_justify(r) for r in recs]))
    return diags


def _fmt(d) -> str:
    return tl.show_domain(d) if d else "nothing"


def _hypothetical(store: Store, target: int, declared: tl.Func):
    """Instantiate a function at its declared argument type and re-infer it."""
    mark = store.mark()
    base = len(store.conflicts)
    try:
        arg = store.instantiate((declared.arg,))[0]
        store.post(DomC(target, (tl.Func(arg, store.fresh()),), "check"))
        status = propagate(store)
        if status == "budget-exceeded":
            return None
        if len(store.conflicts) > base:
            return tl.DISJOINT
        inferred = store.node_domain(target)
        return tl.relation(inferred, (declared,), store.var_domains())
    finally:
        store.undo(mark)


def check_interrogatives(store: Store, annots, report: Optional[TypeReport] = None,
                         var_domains: Optional[dict] = None) -> list:
    """Tri-state check of each //$: declaration against the inferred domain."""
    diags = []
    for a in annots:
        if a.kind != "interrogative" or a.target is None:
            continue
        if report is not None and a.target in report.domains:
            inferred = report.domains[a.target]
        else:
            inferred = store.node_domain(a.target)
        if inferred == ():
            continue  # already reported as an inferred conflict
        if inferred is None:
            inferred = (tl.Var(-10_000),)  # unconstrained: any type
        declared = a.decl
        vd = var_domains if var_domains is not None else store.var_domains()
        rel = tl.relation(inferred, declared, vd)
        if (rel == tl.OVERLAP and len(declared) == 1 and isinstance(declared[0], tl.Func)
                and any(isinstance(t, tl.Func) and not tl.is_ground(t) for t in inferred)):
            hyp = _hypothetical(store, a.target, declared[0])
            if hyp is not None:
                rel = hyp
        shown = tl.show_domain(inferred)
        if rel == tl.DISJOINT:
            diags.append(Diagnostic(
                "error", "declaration-disjoint", a.span, a.target,
                f"declared type {a.text} cannot hold: inferred {shown}",
                [{"declared": a.text, "inferred": shown, "relation": rel}]))
        elif rel == tl.OVERLAP:
            diags.append(Diagnostic(
                "warning", "declaration-overlap", a.span, a.target,
                f"declared type {a.text} is not guaranteed: inferred {shown}",
                [{"declared": a.text, "inferred": shown, "relation": rel}]))
    return diags


def build_report(store: Store, root: sx.Node, states=None) -> TypeReport:
    """Per-node domains; with labeling solutions, the union over solutions."""
    from .labeling import state_store

    views = [store] if not states else [state_store(s) for s in states]
    domains, spans, labels = {}, {}, {}
    for n in root.walk():
        if n is root:
            continue
        doms = [v.node_domain(n.id) for v in views]
        if any(d is None for d in doms):
            continue
        merged = tl.dedup(t for d in doms for t in d)
        domains[n.id] = merged
        spans[n.id] = n.span
        labels[n.id] = describe(n)
    return TypeReport(domains, spans, labels)


def union_var_domains(store: Store, states) -> dict:
    from .labeling import state_store

    if not states:
        return store.var_domains()
    out = {}
    for s in states:
        for vid, d in state_store(s).var_domains().items():
            out[vid] = tl.dedup(out.get(vid, ()) + tuple(d))
    return out


def sort_diagnostics(diags) -> list:
    return sorted(diags, key=Diagnostic.sort_key)


def render(diags, report: Optional[TypeReport] = None, fmt: str = "text",
           file: Optional[str] = None) -> str:
    out = []
    for d in sort_diagnostics(diags):
        if fmt == "machine":
            out.append(json.dumps(d.to_dict(file), ensure_ascii=False))
        else:
            dd = d.to_dict(file)
            out.append(f"{dd['file']}:{dd['line']}:{dd['col']}: {d.severity}: {d.kind}: {d.message}")
    if report is not None:
        for nid, shown in report.lines():
            sp = report.spans[nid]
            fname = file if file is not None else sp.file
            if fmt == "machine":
                out.append(json.dumps({
                    "file": fname, "line": sp.start_line, "col": sp.start_col,
                    "end_line": sp.end_line, "end_col": sp.end_col, "kind": "type",
                    "node_id": nid, "expr": report.labels[nid], "types": shown,
                }, ensure_ascii=False))
            else:
                out.append(f"{fname}:{sp.start_line}:{sp.start_col}: type: "
                           f"#{nid} {report.labels[nid]} :: {shown}")
    return "".join(line + "\n" for line in out)


def parse_machine(text: str) -> list:
    """Inverse of the machine rendering for diagnostic records."""
    out = []
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            if obj.get("kind") != "type":
                out.append(obj)
    return out


def max_severity(diags) -> Optional[str]:
    if not diags:
        return None
    return max((d.severity for d in diags), key=SEVERITY_RANK.__getitem__)
