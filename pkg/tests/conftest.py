import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from qtype import engine as en
from qtype import syntax as sx
from qtype import typelang as tl
from qtype.cli import Config, analyze_source
from qtype.oracle import Universe
from qtype.signatures import load_signatures

FIXTURES = Path(__file__).parent / "fixtures"

EXPECTED_EXIT = {
    "builtins": 0, "cond": 2, "decl_atom_func": 1, "decl_bad": 3, "decl_disjoint": 1,
    "decl_overlap": 2, "decl_subset": 0, "dict": 0, "do_float": 1, "do_int": 0,
    "implicit_params": 0, "implicit_scope": 3, "index_assign": 0, "itemwise": 0,
    "labeling": 0, "lambda": 0, "localize": 1, "string": 0, "sum_ok": 0,
    "sum_symbol": 1, "unbalanced": 3,
}

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sigs():
    return load_signatures()


@pytest.fixture(scope="session")
def universe():
    return Universe(("int", "float", "symbol"), ("a", "b"), depth=2, width=2)


def infer(source, sigs, file="<test>"):
    """Parse, generate and propagate; returns (root, annots, store, status)."""
    root, annots = sx.parse_source(source, file)
    store = en.generate_constraints(root, annots, sigs)
    status = en.propagate(store)
    return root, annots, store, status


def check(source, sigs, **kw):
    return analyze_source(source, "t.q", sigs, Config([], **kw))


def node_by_form(root, text):
    for n in root.walk():
        if sx.form(n) == text:
            return n
    raise KeyError(text)


def final_domains(source, sigs, seed=None):
    """Final per-node domains, up to renaming, after an optional shuffle."""
    root, annots = sx.parse_source(source)
    store = en.generate_constraints(root, annots, sigs)
    if seed is not None:
        items = list(store.pending)
        random.Random(seed).shuffle(items)
        store.pending.clear()
        store.pending.extend(items)
    status = en.propagate(store)
    out = {}
    for n in root.walk():
        d = store.node_domain(n.id)
        out[n.id] = None if d is None else frozenset(tl.alpha_key(t) for t in d)
    return status, out


def consistent_fixtures():
    """Fixtures whose constraints propagate without conflict."""
    sigs = load_signatures()
    out = []
    for p in sorted(FIXTURES.glob("*.q")):
        try:
            status, _ = final_domains(p.read_text(), sigs)
        except sx.QSyntaxError:
            continue
        if status == "quiescent":
            out.append(p)
    return out
