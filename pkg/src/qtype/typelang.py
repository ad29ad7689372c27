"""Type expressions for the Q subset, and the operations on them.

A type expression denotes a (possibly infinite) set of Q types.  Because the
list-shaped constructors overlap (a tuple is a special list, an stuple is a
special tuple), plain unification is replaced by ``meet``, which returns an
expression denoting the intersection of its arguments.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

ATOMIC_TYPES = (
    "boolean", "byte", "short", "int", "long", "real", "float", "char",
    "symbol", "date", "datetime", "minute", "second", "time", "timespan",
    "timestamp",
)

# boolean < byte < short < int < long < real < float
NUMERIC_RANK = {name: i for i, name in enumerate(
    ("boolean", "byte", "short", "int", "long", "real", "float"))}

TEMPORAL_TYPES = ("date", "datetime", "minute", "second", "time", "timespan",
                  "timestamp")


class _Hashed:
    """Mixin caching the structural hash; types are hashed constantly."""

    __slots__ = ()

    def __hash__(self):
        h = self._h
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
        return h


@dataclass(frozen=True, eq=True)
class Atomic(_Hashed):
    name: str
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.name not in ATOMIC_TYPES:
            raise ValueError(f"unknown atomic type {self.name!r}")

    def _key(self):
        return (self.name,)

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class Var(_Hashed):
    id: int
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def _key(self):
        return (self.id,)

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class List(_Hashed):
    elem: "TypeExpr"
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def _key(self):
        return (self.elem,)

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class HList(_Hashed):
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def _key(self):
        return ()

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class Tuple(_Hashed):
    elems: tuple
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.elems, tuple):
            object.__setattr__(self, "elems", tuple(self.elems))

    def _key(self):
        return self.elems

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class STuple(_Hashed):
    names: tuple
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.names, tuple):
            object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValueError("stuple needs at least one name")

    def _key(self):
        return self.names

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class Dict(_Hashed):
    dom: "TypeExpr"
    rng: "TypeExpr"
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def _key(self):
        return (self.dom, self.rng)

    __hash__ = _Hashed.__hash__


@dataclass(frozen=True, eq=True)
class Func(_Hashed):
    arg: "TypeExpr"
    res: "TypeExpr"
    _h: Optional[int] = field(default=None, compare=False, repr=False)

    def _key(self):
        return (self.arg, self.res)

    __hash__ = _Hashed.__hash__


TypeExpr = Union[Atomic, Var, List, HList, Tuple, STuple, Dict, Func]
Substitution = dict  # var id -> TypeExpr
Domain = tuple  # of TypeExpr

LIST_SHAPED = (List, HList, Tuple, STuple)

_ATOMS = {name: Atomic(name) for name in ATOMIC_TYPES}
SYMBOL = _ATOMS["symbol"]
BOOLEAN = _ATOMS["boolean"]
HLIST = HList()
EMPTY_TUPLE = Tuple(())


def atom(name: str) -> Atomic:
    return _ATOMS[name]


def is_list_shaped(t: TypeExpr) -> bool:
    return isinstance(t, LIST_SHAPED)


# -- traversal and substitution ---------------------------------------------

def children(t: TypeExpr) -> tuple:
    tt = type(t)
    if tt is List:
        return (t.elem,)
    if tt is Tuple:
        return t.elems
    if tt is Dict:
        return (t.dom, t.rng)
    if tt is Func:
        return (t.arg, t.res)
    return ()


def map_children(t: TypeExpr, f) -> TypeExpr:
    tt = type(t)
    if tt is List:
        e = f(t.elem)
        return t if e is t.elem else List(e)
    if tt is Tuple:
        es = tuple(f(e) for e in t.elems)
        return t if all(a is b for a, b in zip(es, t.elems)) else Tuple(es)
    if tt is Dict:
        a, b = f(t.dom), f(t.rng)
        return t if a is t.dom and b is t.rng else Dict(a, b)
    if tt is Func:
        a, b = f(t.arg), f(t.res)
        return t if a is t.arg and b is t.res else Func(a, b)
    return t


def walk(t: TypeExpr, s: Mapping[int, TypeExpr]) -> TypeExpr:
    """Follow variable bindings at the top of ``t`` only."""
    while type(t) is Var and t.id in s:
        t = s[t.id]
    return t


def apply_subst(t: TypeExpr, s: Mapping[int, TypeExpr]) -> TypeExpr:
    if not s:
        return t
    if type(t) is Var:
        if t.id in s:
            return apply_subst(s[t.id], s)
        return t
    return map_children(t, lambda c: apply_subst(c, s))


def free_vars(t: TypeExpr) -> Iterator[int]:
    """Variable ids in ``t``, in left-to-right order (with repeats)."""
    if type(t) is Var:
        yield t.id
        return
    for c in children(t):
        yield from free_vars(c)


def is_ground(t: TypeExpr) -> bool:
    return next(free_vars(t), None) is None


def occurs(vid: int, t: TypeExpr, s: Mapping[int, TypeExpr]) -> bool:
    t = walk(t, s)
    if type(t) is Var:
        return t.id == vid
    return any(occurs(vid, c, s) for c in children(t))


def rename(t: TypeExpr, mapping: Mapping[int, int]) -> TypeExpr:
    if type(t) is Var:
        return Var(mapping[t.id]) if t.id in mapping else t
    return map_children(t, lambda c: rename(c, mapping))


def alpha_key(t: TypeExpr) -> TypeExpr:
    """Canonical representative of t's alpha-equivalence class."""
    order = {}
    for v in free_vars(t):
        if v not in order:
            order[v] = -1 - len(order)
    return rename(t, order) if order else t


def alpha_equal(a: TypeExpr, b: TypeExpr) -> bool:
    return alpha_key(a) == alpha_key(b)


def dedup(domain: Iterable[TypeExpr]) -> tuple:
    """Drop alpha-equivalent repeats, keeping first occurrences."""
    seen = set()
    out = []
    for t in domain:
        k = alpha_key(t)
        if k not in seen:
            seen.add(k)
            out.append(t)
    return tuple(out)


# -- meet --------------------------------------------------------------------
#
# Internal helpers return None for an empty intersection; the substitution
# ``s`` is extended in place and must be discarded by the caller on None.

def _bind(v: Var, t: TypeExpr, s: dict) -> Optional[TypeExpr]:
    if occurs(v.id, t, s):
        return None
    s[v.id] = t
    return t


def _meet_seq(xs, ys, s):
    out = []
    for x, y in zip(xs, ys):
        r = _meet(x, y, s)
        if r is None:
            return None
        out.append(r)
    return tuple(out)


def _m_hlist(a, b, s):
    return b if type(a) is HList else a


def _m_list_list(a, b, s):
    saved = dict(s)
    e = _meet(a.elem, b.elem, s)
    if e is None:
        # only the empty list is in both
        s.clear()
        s.update(saved)
        return EMPTY_TUPLE
    return List(e)


def _m_list_tuple(a, b, s):
    if type(a) is Tuple:
        a, b = b, a
    es = tuple(_meet(a.elem, e, s) for e in b.elems)
    return None if None in es else Tuple(es)


def _m_list_stuple(a, b, s):
    if type(a) is STuple:
        a, b = b, a
    return b if _meet(a.elem, SYMBOL, s) is not None else None


def _m_tuple_tuple(a, b, s):
    if len(a.elems) != len(b.elems):
        return None
    es = _meet_seq(a.elems, b.elems, s)
    return None if es is None else Tuple(es)


def _m_tuple_stuple(a, b, s):
    if type(a) is STuple:
        a, b = b, a
    if len(a.elems) != len(b.names):
        return None
    for e in a.elems:
        if _meet(e, SYMBOL, s) is None:
            return None
    return b


def _m_dict(a, b, s):
    d = _meet(a.dom, b.dom, s)
    if d is None:
        return None
    r = _meet(a.rng, b.rng, s)
    return None if r is None else Dict(d, r)


def _m_func(a, b, s):
    x = _meet(a.arg, b.arg, s)
    if x is None:
        return None
    r = _meet(a.res, b.res, s)
    return None if r is None else Func(x, r)


_RULES = {}
for _t in LIST_SHAPED:
    _RULES[HList, _t] = _RULES[_t, HList] = _m_hlist
_RULES[List, List] = _m_list_list
_RULES[List, Tuple] = _RULES[Tuple, List] = _m_list_tuple
_RULES[List, STuple] = _RULES[STuple, List] = _m_list_stuple
_RULES[Tuple, Tuple] = _m_tuple_tuple
_RULES[Tuple, STuple] = _RULES[STuple, Tuple] = _m_tuple_stuple
_RULES[Dict, Dict] = _m_dict
_RULES[Func, Func] = _m_func
_rules_get = _RULES.get


def _meet(a: TypeExpr, b: TypeExpr, s: dict) -> Optional[TypeExpr]:
    ta, tb = type(a), type(b)
    if s:
        if ta is Var:
            a = walk(a, s)
            ta = type(a)
        if tb is Var:
            b = walk(b, s)
            tb = type(b)
    if a is b or (ta is tb and a == b):
        return a
    if ta is Var:
        return _bind(a, b, s)
    if tb is Var:
        return _bind(b, a, s)
    rule = _rules_get((ta, tb))
    if rule is None:
        return None
    return rule(a, b, s)


def _normalize(s: dict) -> dict:
    return {k: apply_subst(v, s) for k, v in s.items()}


def meet(t1: TypeExpr, t2: TypeExpr,
         subst: Optional[Mapping[int, TypeExpr]] = None
         ) -> Optional[tuple]:
    """Intersect two type expressions.

    Returns ``(expr, substitution)`` or ``None`` when the denotations are
    disjoint.  The returned substitution extends ``subst`` and is normalized.
    """
    s = dict(subst) if subst else {}
    r = _meet(t1, t2, s)
    if r is None:
        return None
    if not s:
        return r, s
    s = _normalize(s)
    return apply_subst(r, s), s


def contained(x: TypeExpr, y: TypeExpr) -> bool:
    """Structural containment that treats variables as rigid (never binds them)."""
    if x == y:
        return True
    tx, ty = type(x), type(y)
    if ty is HList:
        return is_list_shaped(x)
    if ty is List:
        if tx is List:
            return contained(x.elem, y.elem)
        if tx is Tuple:
            return all(contained(e, y.elem) for e in x.elems)
        if tx is STuple:
            return contained(SYMBOL, y.elem)
        return False
    if ty is Tuple:
        if tx is Tuple:
            return len(x.elems) == len(y.elems) and all(
                contained(a, b) for a, b in zip(x.elems, y.elems))
        if tx is STuple:
            return len(x.names) == len(y.elems) and all(contained(SYMBOL, b) for b in y.elems)
        return False
    if ty is Dict and tx is Dict:
        return contained(x.dom, y.dom) and contained(x.rng, y.rng)
    if ty is Func and tx is Func:
        return contained(y.arg, x.arg) and contained(x.res, y.res)
    return False


def prune(domain: Sequence[TypeExpr]) -> tuple:
    """Drop members contained in another member; the denotation is unchanged."""
    d = dedup(domain)
    out = []
    for i, x in enumerate(d):
        if not any(j != i and contained(x, y) for j, y in enumerate(d)):
            out.append(x)
    return tuple(out)


def narrow(d1: Sequence[TypeExpr], d2: Sequence[TypeExpr],
           subst: Optional[Mapping[int, TypeExpr]] = None) -> tuple:
    """Pairwise meet of two domains.

    Returns ``(domain, bindings)``.  Bindings (new relative to ``subst``) are
    only reported when the result is a singleton; committing a binding taken
    from one of several surviving alternatives would be unsound.
    """
    base = subst or {}
    results = []
    for a in d1:
        for b in d2:
            r = meet(a, b, base)
            if r is not None:
                results.append(r)
    seen = set()
    kept = []
    for t, s in results:
        k = alpha_key(t)
        if k not in seen:
            seen.add(k)
            kept.append((t, s))
    if len(kept) > 1:
        # a survivor of pruning must not commit its own bindings: the dropped
        # alternatives may have needed different ones
        survivors = prune([t for t, _ in kept])
        return tuple(t for t, _ in kept if t in survivors), {}
    if len(kept) == 1:
        t, s = kept[0]
        delta = {k: v for k, v in s.items() if k not in base}
        return (t,), delta
    return tuple(t for t, _ in kept), {}


# -- set relation between an inferred and a declared domain -----------------

SUBSET, OVERLAP, DISJOINT = "subset", "overlap", "disjoint"


def _sub(x: TypeExpr, y: TypeExpr, env: dict,
         var_domains: Mapping[int, Sequence[TypeExpr]]) -> bool:
    """Is x contained in y?

    Unbound variables on the right are pattern variables and may be bound
    (restricted to their domain when one is known); unbound variables on the
    left are unknown types.  Function arguments are compared with the roles
    swapped, so a polymorphic parameter accepts any declared argument type
    inside its domain.
    """
    x = walk(x, env)
    y = walk(y, env)
    if isinstance(y, Var):
        if isinstance(x, Var) and x.id == y.id:
            return True
        dom = var_domains.get(y.id)
        if dom is not None and not any(_sub(x, m, dict(env), var_domains) for m in dom):
            return False
        if occurs(y.id, x, env):
            return False
        env[y.id] = x
        return True
    if isinstance(x, Var):
        dom = var_domains.get(x.id)
        if dom is None:
            return False
        return all(_sub(m, y, dict(env), var_domains) for m in dom)
    tx, ty = type(x), type(y)
    if ty is HList:
        return tx in LIST_SHAPED
    if tx is Atomic or ty is Atomic:
        return x == y
    if ty is List:
        if tx is List:
            return _sub(x.elem, y.elem, env, var_domains)
        if tx is Tuple:
            return all(_sub(e, y.elem, env, var_domains) for e in x.elems)
        if tx is STuple:
            return _sub(SYMBOL, y.elem, env, var_domains)
        return False
    if ty is Tuple:
        if tx is Tuple and len(x.elems) == len(y.elems):
            return all(_sub(a, b, env, var_domains) for a, b in zip(x.elems, y.elems))
        if tx is STuple and len(x.names) == len(y.elems):
            return all(_sub(SYMBOL, b, env, var_domains) for b in y.elems)
        return False
    if ty is STuple:
        return x == y
    if tx is Dict and ty is Dict:
        return (_sub(x.dom, y.dom, env, var_domains)
                and _sub(x.rng, y.rng, env, var_domains))
    if tx is Func and ty is Func:
        return (_sub(y.arg, x.arg, env, var_domains)
                and _sub(x.res, y.res, env, var_domains))
    return False


def _instances(t: TypeExpr, var_domains, cap: int = 64) -> list:
    vs = [v for v in dict.fromkeys(free_vars(t)) if v in var_domains]
    if not vs:
        return [t]
    out = []
    for combo in itertools.product(*(var_domains[v] for v in vs)):
        out.append(apply_subst(t, dict(zip(vs, combo))))
        if len(out) >= cap:
            return [t]
    return out


def _shift_apart(declared: Sequence[TypeExpr], inferred: Sequence[TypeExpr]):
    used = set()
    for t in inferred:
        used.update(free_vars(t))
    if not used:
        return list(declared)
    base = max(used) + 1
    mapping = {}
    out = []
    for t in declared:
        for v in free_vars(t):
            if v in used and v not in mapping:
                mapping[v] = base + len(mapping)
        out.append(rename(t, mapping))
    return out


def relation(inferred: Sequence[TypeExpr], declared: Sequence[TypeExpr],
             var_domains: Optional[Mapping[int, Sequence[TypeExpr]]] = None) -> str:
    """Classify the inferred set against a declared one: subset, overlap or disjoint."""
    var_domains = var_domains or {}
    if not inferred:
        return SUBSET
    declared = _shift_apart(declared, inferred)
    if all(any(_sub(e, d, {}, var_domains) for d in declared) for e in inferred):
        return SUBSET
    for e in inferred:
        for inst in _instances(e, var_domains):
            if any(meet(inst, d) is not None for d in declared):
                return OVERLAP
    return DISJOINT


# -- numeric helpers used by relation rules ----------------------------------

def promote(a: str, b: str) -> Optional[str]:
    ra, rb = NUMERIC_RANK.get(a), NUMERIC_RANK.get(b)
    if ra is None or rb is None:
        return None
    return a if ra >= rb else b


# -- ground enumeration ------------------------------------------------------

@dataclass(frozen=True)
class GroundUniverse:
    atoms: tuple = ("int", "float", "symbol")
    depth: int = 1
    width: int = 2
    names: tuple = ("a", "b")


def enumerate_ground(u: GroundUniverse) -> list:
    """All ground type expressions within the depth and tuple-width bounds.

    Depth 0 holds the basis atoms; each further level adds every constructor
    applied to expressions of the previous level.  Stuples are formed over
    ``u.names`` and only when ``symbol`` is in the basis.
    """
    level = [atom(a) for a in u.atoms]
    stuples = []
    if "symbol" in u.atoms and u.names:
        for k in range(1, u.width + 1):
            stuples.extend(STuple(ns) for ns in itertools.product(u.names, repeat=k))
    for _ in range(u.depth):
        prev = level
        nxt = [atom(a) for a in u.atoms]
        nxt.append(HLIST)
        nxt.extend(List(t) for t in prev)
        for k in range(0, u.width + 1):
            nxt.extend(Tuple(ts) for ts in itertools.product(prev, repeat=k))
        nxt.extend(stuples)
        nxt.extend(Dict(a, b) for a in prev for b in prev)
        nxt.extend(Func(a, b) for a in prev for b in prev)
        level = nxt
    return level


# -- printing ----------------------------------------------------------------

def _var_name(i: int) -> str:
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return letters[i] if i < 26 else f"T{i}"


def show(t: TypeExpr, names: Optional[dict] = None) -> str:
    """Render in declaration syntax; variables are lettered by first occurrence."""
    if names is None:
        names = {}
    if isinstance(t, Atomic):
        return t.name
    if isinstance(t, Var):
        if t.id not in names:
            names[t.id] = _var_name(len(names))
        return names[t.id]
    if isinstance(t, HList):
        return "hlist"
    if isinstance(t, List):
        return f"list({show(t.elem, names)})"
    if isinstance(t, Tuple):
        return "tuple(" + ", ".join(show(e, names) for e in t.elems) + ")"
    if isinstance(t, STuple):
        return "stuple(" + ", ".join(t.names) + ")"
    if isinstance(t, Dict):
        return f"dict({show(t.dom, names)}, {show(t.rng, names)})"
    if isinstance(t, Func):
        arg = show(t.arg, names)
        if isinstance(t.arg, Func):
            arg = f"({arg})"
        return f"{arg} -> {show(t.res, names)}"
    raise TypeError(t)


def show_domain(d: Sequence[TypeExpr]) -> str:
    if not d:
        return "<empty>"
    names = {}
    return " | ".join(show(t, names) for t in d)
