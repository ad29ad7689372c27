"""Hypothesis strategies for type expressions and small Q programs."""
from hypothesis import strategies as st

from qtype import typelang as tl

BASIS = ("int", "float", "symbol")
NAMES = ("a", "b")


def atoms(basis=BASIS):
    return st.sampled_from([tl.atom(a) for a in basis])


def _extend(children):
    return st.one_of(
        st.builds(tl.List, children),
        st.lists(children, max_size=2).map(lambda xs: tl.Tuple(tuple(xs))),
        st.lists(st.sampled_from(NAMES), min_size=1, max_size=2).map(
            lambda ns: tl.STuple(tuple(ns))),
        st.builds(tl.Dict, children, children),
        st.builds(tl.Func, children, children),
        st.just(tl.HLIST),
    )


def ground_types(max_depth=2):
    """Ground types whose nesting stays within the oracle universe."""
    level = atoms()
    for _ in range(max_depth):
        level = st.one_of(atoms(), _extend(level))
    return level


def poly_types(max_depth=2, nvars=3):
    leaf = st.one_of(atoms(), st.integers(1, nvars).map(tl.Var))
    level = leaf
    for _ in range(max_depth):
        level = st.one_of(leaf, _extend(level))
    return level


def ground_domains(max_depth=2):
    return st.lists(ground_types(max_depth), min_size=1, max_size=3).map(tl.dedup)


# -- programs ----------------------------------------------------------------

_LITERALS = ["1", "2", "3i", "2.5", "1b", "7j", "`s", "`a`b", "1 2 3", '"ab"', "0.1 0.2"]
_NUMERIC = ["1", "2", "3i", "2.5", "7j", "1 2 3", "0.1 0.2"]
_VARS = ["a", "b", "c"]


@st.composite
def expressions(draw, depth=3, numeric=False):
    """Random expressions; ``numeric`` keeps to arithmetic on numbers, which
    mostly yields consistent programs."""
    lits = _NUMERIC if numeric else _LITERALS
    if depth <= 0:
        return draw(st.sampled_from(lits + _VARS))
    kinds = ["lit", "var", "op", "op", "paren", "list", "neg"]
    if not numeric:
        kinds += ["cond", "index", "lambda"]
    kind = draw(st.sampled_from(kinds))
    sub = lambda: draw(expressions(depth=depth - 1, numeric=numeric))
    if kind == "lit":
        return draw(st.sampled_from(lits))
    if kind == "var":
        return draw(st.sampled_from(_VARS))
    if kind == "op":
        ops = ["+", "-", "*", "&"] if numeric else ["+", "-", "*", "%", "<", "=", "&"]
        op = draw(st.sampled_from(ops))
        return f"({sub()}){op}{sub()}"
    if kind == "paren":
        return f"({sub()})"
    if kind == "list":
        return "(" + ";".join(sub() for _ in range(draw(st.integers(2, 3)))) + ")"
    if kind == "cond":
        return f"$[{sub()};{sub()};{sub()}]"
    if kind == "neg":
        return f"neg {sub()}"
    if kind == "index":
        return f"({sub()})[{sub()}]"
    return "{[x] x+" + sub() + "}"


@st.composite
def programs(draw, max_lines=4, numeric=False):
    lines = []
    for _ in range(draw(st.integers(1, max_lines))):
        target = draw(st.sampled_from(_VARS))
        lines.append(f"{target}: {draw(expressions(numeric=numeric))}")
    return "\n".join(lines) + "\n"
