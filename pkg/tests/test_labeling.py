import itertools

from hypothesis import given, settings, strategies as st

from qtype import engine as en
from qtype import labeling as lb
from qtype import typelang as tl
from qtype.relations import get_relation

POOL = ("boolean", "int", "long", "float", "symbol")
RELS = ("sum", "cmp", "minmax")


@st.composite
def small_problems(draw):
    """Up to four keys with atomic domains of size at most three, plus
    relation and equality constraints among them."""
    n = draw(st.integers(2, 4))
    domains = [draw(st.lists(st.sampled_from(POOL), min_size=1, max_size=3, unique=True))
               for _ in range(n)]
    idx = st.integers(0, n - 1)
    cons = draw(st.lists(st.one_of(
        st.tuples(st.just("rel"), st.sampled_from(RELS), st.tuples(idx, idx, idx)),
        st.tuples(st.just("eq"), idx, idx),
    ), min_size=1, max_size=3))
    return domains, cons


def build(domains, cons):
    store = en.Store()
    keys = [store.fresh() for _ in domains]
    for k, d in zip(keys, domains):
        store.post(en.DomC(k, tuple(tl.atom(a) for a in d), "stimulus"))
    for c in cons:
        if c[0] == "rel":
            store.post(en.RelC(c[1], tuple(keys[i] for i in c[2])))
        else:
            store.post(en.EqC(keys[c[1]], keys[c[2]]))
    return store, keys


def brute_force(domains, cons):
    out = set()
    for combo in itertools.product(*domains):
        ok = True
        for c in cons:
            if c[0] == "rel":
                x, y, z = (combo[i] for i in c[2])
                ok = get_relation(c[1]).results(x, y) == z
            else:
                ok = combo[c[1]] == combo[c[2]]
            if not ok:
                break
        if ok:
            out.add(tuple(tl.atom(a) for a in combo))
    return out


def labeled(store, keys, config=None):
    result = lb.label(store, config)
    got = set()
    for state in getattr(result, "states", []):
        got |= lb.assignments(lb.state_store(state), keys)
    return result, got


@settings(max_examples=300)
@given(small_problems())
def test_solutions_match_brute_force(problem):
    domains, cons = problem
    store, keys = build(domains, cons)
    expected = brute_force(domains, cons)
    if en.propagate(store) == "conflicted":
        assert expected == set()
        return
    result, got = labeled(store, keys)
    assert got == expected
    if not expected:
        assert isinstance(result, lb.Inconsistent)


@settings(max_examples=150)
@given(small_problems())
def test_labeling_restores_the_store(problem):
    store, _ = build(*problem)
    en.propagate(store)
    before = store.state()
    trace_len = len(store.trace)
    lb.label(store)
    assert store.state() == before
    assert len(store.trace) == trace_len


@settings(max_examples=100)
@given(small_problems())
def test_solutions_are_fully_labeled(problem):
    store, _ = build(*problem)
    if en.propagate(store) == "conflicted":
        return
    result = lb.label(store)
    for state in getattr(result, "states", []):
        s = lb.state_store(state)
        assert not s.is_conflicted()
        assert lb.choose_split(s) is None


def test_split_budget_is_enforced():
    domains = [["int", "long", "float"]] * 3
    store, keys = build(domains, [("rel", "sum", (0, 1, 2))])
    en.propagate(store)
    assert lb.needs_labeling(store)
    result = lb.label(store, lb.LabelConfig(max_splits=1))
    assert isinstance(result, lb.BudgetExceeded)


def test_solution_cap_truncates():
    domains = [["int", "long", "float"]] * 3
    store, keys = build(domains, [("rel", "sum", (0, 1, 2))])
    en.propagate(store)
    result = lb.label(store, lb.LabelConfig(max_solutions=2))
    assert isinstance(result, lb.Solutions) and result.truncated
    assert len(result.states) == 2


def test_already_solved_store_has_one_solution():
    store, keys = build([["int"], ["float"], ["float"]], [("rel", "sum", (0, 1, 2))])
    en.propagate(store)
    assert not lb.needs_labeling(store)
    result, got = labeled(store, keys)
    assert len(result.states) == 1
    assert got == {(tl.atom("int"), tl.atom("float"), tl.atom("float"))}
