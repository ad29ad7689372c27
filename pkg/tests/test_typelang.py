from hypothesis import assume, given, strategies as st

from qtype import typelang as tl
from qtype.syntax import parse_type_decl

from strategies import ground_domains, ground_types, poly_types

INT, FLOAT, SYM, BOOL = (tl.atom(n) for n in ("int", "float", "symbol", "boolean"))
X, Y = tl.Var(1), tl.Var(2)


def den(universe, domain):
    return universe.domain_denotation(domain)


def test_meet_list_with_tuple_binds_both_variables():
    t, s = tl.meet(tl.List(X), tl.Tuple((INT, Y)))
    assert t == tl.Tuple((INT, INT))
    assert s == {1: INT, 2: INT}


def test_meet_stuple_with_symbol_list():
    t, _ = tl.meet(tl.STuple(("a", "b")), tl.List(SYM))
    assert t == tl.STuple(("a", "b"))
    assert tl.meet(tl.STuple(("a",)), tl.List(INT)) is None


def test_meet_of_distinct_atoms_is_empty():
    assert tl.meet(INT, FLOAT) is None
    assert tl.meet(INT, tl.List(INT)) is None


def test_meet_tuples_of_different_width_is_empty():
    assert tl.meet(tl.Tuple((INT, INT)), tl.Tuple((X, Y, X))) is None


def test_occurs_check_fails_meet():
    assert tl.meet(X, tl.List(X)) is None


def test_narrow_reports_bindings_only_for_singletons():
    d, delta = tl.narrow([X], [INT, FLOAT])
    assert set(d) == {INT, FLOAT} and delta == {}
    d, delta = tl.narrow([tl.List(X)], [tl.List(INT), SYM])
    assert d == (tl.List(INT),) and delta == {1: INT}


def test_relation_examples():
    assert tl.relation([tl.Func(INT, BOOL)], [tl.Func(INT, BOOL)]) == tl.SUBSET
    assert tl.relation([INT, FLOAT], [INT]) == tl.OVERLAP
    assert tl.relation([SYM], [INT]) == tl.DISJOINT
    assert tl.relation([X], [tl.List(INT)]) == tl.OVERLAP


def test_relation_contravariant_argument_variable():
    inferred = [tl.Func(X, BOOL)]
    assert tl.relation(inferred, [tl.Func(INT, BOOL)], {1: (INT, FLOAT)}) == tl.SUBSET


def test_promotion_table():
    assert tl.promote("int", "float") == "float"
    assert tl.promote("long", "int") == "long"
    assert tl.promote("boolean", "byte") == "byte"
    assert tl.promote("symbol", "int") is None


def test_enumerate_ground_is_duplicate_free():
    ts = tl.enumerate_ground(tl.GroundUniverse(("int", "symbol"), 1, 2))
    assert len(ts) == len(set(ts))
    assert tl.Tuple(()) in ts and tl.HLIST in ts


@given(ground_types(), ground_types())
def test_meet_matches_oracle_intersection(universe, a, b):
    r = tl.meet(a, b)
    expected = universe.denotation(a) & universe.denotation(b)
    got = frozenset() if r is None else universe.denotation(r[0])
    assert got == expected


@given(ground_types(), ground_types())
def test_meet_is_commutative(universe, a, b):
    r1, r2 = tl.meet(a, b), tl.meet(b, a)
    assert (r1 is None) == (r2 is None)
    if r1 is not None:
        assert universe.denotation(r1[0]) == universe.denotation(r2[0])


@given(poly_types())
def test_meet_is_idempotent(t):
    r = tl.meet(t, t)
    assert r is not None
    assert tl.alpha_equal(r[0], t)


@given(poly_types(), poly_types())
def test_meet_disjointness_is_sound(universe, a, b):
    # shift b's variables apart so the two sides are independent
    b = tl.rename(b, {v: v + 10 for v in tl.free_vars(b)})
    if tl.meet(a, b) is not None:
        return
    ground = [INT, SYM, tl.List(INT)]
    assert not (universe.poly_denotation(a, ground) & universe.poly_denotation(b, ground))


@given(poly_types(), poly_types())
def test_meet_substitution_is_idempotent(a, b):
    r = tl.meet(a, b)
    if r is None:
        return
    t, s = r
    once = tl.apply_subst(t, s)
    assert tl.apply_subst(once, s) == once
    for v in s:
        assert v not in set(tl.free_vars(once))


def test_narrow_drops_contained_members():
    d, delta = tl.narrow([tl.List(INT), tl.List(tl.atom("long"))], [tl.List(INT)])
    assert d == (tl.List(INT),) and delta == {}


@given(ground_domains(), ground_domains())
def test_narrow_is_exact_on_ground_domains(universe, d1, d2):
    d, delta = tl.narrow(d1, d2)
    assert den(universe, d) == den(universe, d1) & den(universe, d2)
    assert delta == {}


def has_func(domain):
    stack = list(domain)
    while stack:
        t = stack.pop()
        if isinstance(t, tl.Func):
            return True
        stack.extend(tl.children(t))
    return False


@given(ground_domains(), ground_domains())
def test_relation_agrees_with_denotations(universe, inferred, declared):
    # the oracle models a function by one argument/result pair, which is
    # covariant in the argument; relation is contravariant there by design
    assume(not has_func(inferred) and not has_func(declared))
    rel = tl.relation(inferred, declared)
    di, dd = den(universe, inferred), den(universe, declared)
    if rel == tl.SUBSET:
        assert di <= dd
    elif rel == tl.DISJOINT:
        assert not (di & dd)
    else:
        assert di & dd and not di <= dd
    if not (di & dd):
        assert rel == tl.DISJOINT


@given(st.lists(poly_types(), max_size=4))
def test_dedup_is_alpha_unique(domain):
    d = tl.dedup(domain)
    keys = [tl.alpha_key(t) for t in d]
    assert len(keys) == len(set(keys))
    assert {tl.alpha_key(t) for t in domain} == set(keys)


@given(poly_types())
def test_show_and_parse_round_trip(t):
    (back,) = parse_type_decl(tl.show(t))
    assert tl.alpha_equal(back, t)


@given(st.lists(poly_types(), min_size=1, max_size=3))
def test_domain_show_and_parse_round_trip(domain):
    d = tl.dedup(domain)
    back = parse_type_decl(tl.show_domain(d))
    assert [tl.alpha_key(t) for t in back] == [tl.alpha_key(t) for t in d]
