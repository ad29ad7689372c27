import pytest
from hypothesis import given, settings, strategies as st

from qtype import diagnostics as dg
from qtype import syntax as sx
from qtype import typelang as tl
from qtype.cli import Config

from conftest import FIXTURES, check, node_by_form
from strategies import programs

DECLS = ["int", "float", "list(int)", "int | symbol", "tuple(int, int)", "any",
         "int -> int", "list(X) -> X"]


def conflicts(res):
    return [d for d in res.diagnostics if d.kind == "inferred-conflict"]


def ancestors(root):
    up = {}
    for n in root.walk():
        for c in n.children():
            up[c.id] = n.id
    return up


def parse(src):
    return sx.parse_source(src, "t.q")[0]


# -- localization -------------------------------------------------------------

def test_width_mismatch_is_reported_on_the_sum(sigs):
    src = (FIXTURES / "localize.q").read_text()
    res = check(src, sigs)
    root = parse(src)
    app = node_by_form(root, "App(Var +, ListLit(Var a, Var b))")
    assert app.id in {d.node for d in conflicts(res)}
    assert res.exit == 1


def test_consistent_program_has_no_diagnostics(sigs):
    res = check("a: 1+2\nb: a*2.5", sigs)
    assert res.diagnostics == [] and res.exit == 0


def test_only_the_innermost_empty_node_is_reported(sigs):
    src = (FIXTURES / "localize.q").read_text()
    res = check(src, sigs)
    root = parse(src)
    stmt = root.items[2]
    app = node_by_form(root, "App(Var +, ListLit(Var a, Var b))")
    assert res.store.dom(stmt.id) == () and res.store.dom(app.id) == ()
    assert [d.node for d in conflicts(res)] == [app.id]


def test_symbol_operand_is_reported_at_the_literal(sigs):
    src = "a: neg 1+`s"
    res = check(src, sigs)
    lit = node_by_form(parse(src), "symbol `s")
    assert [d.node for d in conflicts(res)] == [lit.id]


@settings(max_examples=50)
@given(programs())
def test_reported_nodes_are_narrowest(sigs, src):
    res = check(src, sigs)
    root = parse(src)
    up = ancestors(root)
    nodes = {n.id: n for n in root.walk()}
    reported = {d.node for d in conflicts(res)}
    for nid in reported:
        a = up.get(nid)
        while a is not None:
            assert a not in reported
            a = up.get(a)
        for c in nodes[nid].children():
            assert res.store.dom(c.id) != ()


@settings(max_examples=50)
@given(programs())
def test_every_conflict_is_justified(sigs, src):
    res = check(src, sigs)
    for d in res.diagnostics:
        if d.severity == "error":
            assert d.justification
    for d in conflicts(res):
        for j in d.justification:
            assert len(j["domains"]) == 2 and j["constraints"]
        for rec in dg._conflicts_for(res.store, d.node):
            assert tl.narrow(*rec.emptied_by, res.store.subst)[0] == ()


# -- interrogative declarations ------------------------------------------------

@pytest.mark.parametrize("name, kinds, code", [
    ("decl_subset", [], 0),
    ("decl_overlap", ["declaration-overlap"], 2),
    ("decl_disjoint", ["declaration-disjoint"], 1),
])
def test_tri_state(sigs, name, kinds, code):
    res = check((FIXTURES / f"{name}.q").read_text(), sigs)
    assert [d.kind for d in res.diagnostics] == kinds
    assert res.exit == code


def test_overlap_is_ok_with_warnings_allowed(sigs):
    res = check("a: y //$: list(int)", sigs, warnings_ok=True)
    assert [d.severity for d in res.diagnostics] == ["warning"]
    assert res.exit == 0


def test_function_declared_at_argument_type(sigs):
    assert check("f: {x>1} //$: int -> boolean", sigs).diagnostics == []
    res = check("f: {x>1} //$: symbol -> boolean", sigs)
    assert [d.kind for d in res.diagnostics] == ["declaration-disjoint"]


def test_atom_declared_as_function_is_disjoint(sigs):
    res = check((FIXTURES / "decl_atom_func.q").read_text(), sigs)
    assert [d.kind for d in res.diagnostics] == ["declaration-disjoint"]


@settings(max_examples=40)
@given(programs(max_lines=2), st.sampled_from(DECLS))
def test_at_most_one_diagnostic_per_declaration(sigs, src, decl):
    src = src.rstrip("\n") + f" //$: {decl}\n"
    res = check(src, sigs)
    decl_diags = [d for d in res.diagnostics if d.kind.startswith("declaration-")]
    assert len(decl_diags) <= 1


# -- rendering -----------------------------------------------------------------

def diag(line, col, kind="inferred-conflict", severity="error", node=1):
    span = sx.SourceSpan("t.q", line, col, line, col + 1)
    return dg.Diagnostic(severity, kind, span, node, f"m{line}{col}", [{"x": 1}])


def test_render_empty():
    assert dg.render([]) == ""


def test_render_one_error_line():
    out = dg.render([diag(2, 3)])
    assert out == "t.q:2:3: error: inferred-conflict: m23\n"


def test_render_sorts_by_position_then_kind():
    ds = [diag(3, 1), diag(1, 5, "declaration-overlap", "warning"), diag(1, 5), diag(1, 2)]
    lines = dg.render(ds).splitlines()
    assert [ln.split(": ")[0] for ln in lines] == ["t.q:1:2", "t.q:1:5", "t.q:1:5", "t.q:3:1"]
    assert "declaration-overlap" in lines[1] and "inferred-conflict" in lines[2]


@given(st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9),
                          st.sampled_from(["inferred-conflict", "declaration-overlap"])),
                max_size=6))
def test_machine_format_round_trips(items):
    ds = [diag(line, col, kind) for line, col, kind in items]
    text = dg.render(ds, fmt="machine")
    back = dg.parse_machine(text)
    assert back == [d.to_dict() for d in dg.sort_diagnostics(ds)]
    for obj in back:
        assert tuple(obj) == dg.MACHINE_FIELDS


def test_type_listing_covers_constrained_nodes(sigs):
    src = "r: ((1;2);(3;4)) + (0.1;0.2)"
    res = check(src, sigs, types=True)
    root = parse(src)
    constrained = {n.id for n in root.walk() if res.store.dom(n.id) is not None}
    assert set(res.report.domains) == constrained - {root.id}
    text = res.render(Config([], types=True))
    assert "#2 variable r :: tuple(tuple(float, float), tuple(float, float))" in text


def test_labeling_unions_solution_domains(sigs):
    src = (FIXTURES / "labeling.q").read_text()
    root = parse(src)
    pair = node_by_form(root, "ListLit(Var a, Var b)").id
    labeled = check(src, sigs).report.domains[pair]
    unlabeled = check(src, sigs, label=False).report.domains[pair]
    assert len(unlabeled) == 1 and len(labeled) == 3
    assert all(isinstance(t, tl.Tuple) for t in labeled)


def test_max_severity():
    assert dg.max_severity([]) is None
    assert dg.max_severity([diag(1, 1, severity="warning"), diag(1, 1)]) == "error"
