"""Constraint generation and propagation.

Keys are either AST node ids (ints) or type variables (``typelang.Var``).
Every key belongs to an equivalence class (union-find); a class has at most
one domain, a tuple of type expressions.  A class without a domain is
unconstrained.

Every store mutation goes through ``Store._set`` and is appended to a trail.
The trail gives both the replayable change log of each trace event and the
undo mechanism used by labeling.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from . import typelang as tl
from . import syntax as sx
from .relations import get_relation

Key = Union[int, tl.Var]

SOURCES = ("declaration", "builtin", "atomic", "variable", "syntax")
INTEGRAL = (tl.atom("int"), tl.atom("long"))


class UnknownBuiltin(Exception):
    def __init__(self, name, span=None):
        super().__init__(f"no signature for built-in {name!r}")
        self.name = name
        self.span = span


class _Absent:
    def __repr__(self):
        return "<absent>"


ABSENT = _Absent()


def key_order(k: Key):
    return (0, k) if isinstance(k, int) else (1, k.id)


def show_key(k: Key) -> str:
    return f"id({k})" if isinstance(k, int) else f"_{k.id}"


def show_type(t) -> str:
    return tl.show(t, {v: f"_{v}" for v in tl.free_vars(t)})


def show_dom(d) -> str:
    return "[" + ", ".join(show_type(t) for t in d) + "]"


# -- constraints -------------------------------------------------------------

@dataclass(frozen=True)
class DomC:
    key: Key
    domain: tuple
    source: str = field(default="rule", compare=False)
    origin: Optional[sx.SourceSpan] = field(default=None, compare=False)

    def keys(self):
        return (self.key,)

    def __str__(self):
        return f"dom({show_key(self.key)},{show_dom(self.domain)})"


@dataclass(frozen=True)
class EqC:
    a: Key
    b: Key
    source: str = field(default="rule", compare=False)
    origin: Optional[sx.SourceSpan] = field(default=None, compare=False)

    def keys(self):
        return (self.a, self.b)

    def __str__(self):
        return f"eq({show_key(self.a)},{show_key(self.b)})"


@dataclass(frozen=True)
class ApplyC:
    fn: Key
    args: tuple
    res: Key
    source: str = field(default="syntax", compare=False)
    origin: Optional[sx.SourceSpan] = field(default=None, compare=False)

    def keys(self):
        return (self.fn,) + self.args + (self.res,)

    def __str__(self):
        args = ",".join(show_key(k) for k in self.args)
        return f"apply({show_key(self.fn)},[{args}],{show_key(self.res)})"


@dataclass(frozen=True)
class RelC:
    name: str
    args: tuple
    payload: Optional[tuple] = None  # declared atomic-level domain for "generic"
    source: str = field(default="rule", compare=False)
    origin: Optional[sx.SourceSpan] = field(default=None, compare=False)

    def keys(self):
        return self.args

    def __str__(self):
        return f"{self.name}_c(" + ",".join(show_key(k) for k in self.args) + ")"


@dataclass(frozen=True)
class ListExtC:
    dir: str
    args: tuple
    rels: tuple
    payload: Optional[tuple] = None
    source: str = field(default="rule", compare=False)
    origin: Optional[sx.SourceSpan] = field(default=None, compare=False)
    level: int = field(default=0, compare=False)  # nesting depth of this rewrite

    def keys(self):
        return self.args

    def __str__(self):
        args = ",".join(show_key(k) for k in self.args)
        return f"listextension({self.dir},[{args}],[{','.join(self.rels)}])"


ACTIVE_KINDS = (ApplyC, RelC, ListExtC)


@dataclass(frozen=True)
class ConflictRecord:
    node: Key
    emptied_by: tuple  # the two domains whose narrow() is empty
    constraints: tuple

    def __str__(self):
        a, b = self.emptied_by
        return f"{show_key(self.node)}: {show_dom(a)} vs {show_dom(b)}"


@dataclass(frozen=True)
class TraceEvent:
    step: int
    rule: str
    consumed: tuple
    produced: tuple
    changes: tuple = field(repr=False, default=())

    def text(self) -> str:
        cons = ", ".join(str(c) for c in self.consumed) or "-"
        prod = ", ".join(str(c) for c in self.produced) or "-"
        return f"step {self.step}: FIRED {self.rule} CONSUMED {cons} PRODUCED {prod}"

    def json(self) -> str:
        return json.dumps({
            "step": self.step, "rule": self.rule,
            "consumed": [str(c) for c in self.consumed],
            "produced": [str(c) for c in self.produced],
        })


# -- store -------------------------------------------------------------------

_STATE_MAPS = ("parent", "members", "doms", "subst", "active", "writer", "meta")


class BudgetExceeded(Exception):
    pass


class Store:
    def __init__(self, step_budget: int = 100_000):
        self.parent = {}
        self.members = {}  # root -> tuple of keys, for classes with more than one key
        self.doms = {}
        self.subst = {}
        self.active = {}
        self.writer = {}
        self.meta = {"var": 0, "cid": 0}
        self.conflicts = []
        self.log = []
        self.trace = []
        self.pending = deque()
        self.queue = deque()
        self._queued = set()
        self._watch = {}
        self.generated = []
        self.nodes = {}
        self.steps = 0
        self.step_budget = step_budget
        self.budget_exceeded = False
        self.depth_capped = False
        self._produced = None
        self._cause = None

    # state, trail and undo
    def _set(self, mapname, k, v):
        m = getattr(self, mapname)
        old = m.get(k, ABSENT)
        if v is ABSENT:
            if old is ABSENT:
                return
            del m[k]
        else:
            m[k] = v
        self.log.append((mapname, k, old, v))

    def _add_conflict(self, rec):
        self.conflicts.append(rec)
        self.log.append(("conflicts", len(self.conflicts) - 1, ABSENT, rec))

    def mark(self):
        return (len(self.log), len(self.trace))

    def undo(self, mark):
        pos, tpos = mark
        while len(self.log) > pos:
            mapname, k, old, _ = self.log.pop()
            if mapname == "conflicts":
                self.conflicts.pop()
                continue
            m = getattr(self, mapname)
            if old is ABSENT:
                m.pop(k, None)
            else:
                m[k] = old
        del self.trace[tpos:]
        self.pending.clear()
        self.queue.clear()
        self._queued.clear()

    def state(self) -> dict:
        st = {name: dict(getattr(self, name)) for name in _STATE_MAPS}
        st["conflicts"] = list(self.conflicts)
        return st

    # basic queries
    def fresh(self) -> tl.Var:
        n = self.meta["var"] + 1
        self._set("meta", "var", n)
        return tl.Var(n)

    def instantiate(self, domain) -> tuple:
        mapping = {}
        for t in domain:
            for v in tl.free_vars(t):
                if v not in mapping:
                    mapping[v] = self.fresh().id
        return tuple(tl.rename(t, mapping) for t in domain)

    def find(self, k: Key) -> Key:
        parent = self.parent
        while k in parent:
            k = parent[k]
        return k

    def class_of(self, k: Key) -> tuple:
        r = self.find(k)
        return self.members.get(r, (r,))

    def dom(self, k: Key):
        return self.doms.get(self.find(k))

    def resolved(self, t):
        return tl.apply_subst(t, self.subst)

    def is_conflicted(self) -> bool:
        return any(d == () for d in self.doms.values())

    def node_domain(self, nid: int):
        d = self.dom(nid)
        return None if d is None else tuple(self.resolved(t) for t in d)

    def var_domains(self) -> dict:
        """Domains of unbound type variables, for relation checks."""
        out = {}
        for r, d in self.doms.items():
            for k in self.members.get(r, (r,)):
                if isinstance(k, tl.Var) and k.id not in self.subst:
                    out[k.id] = d
        return out

    # posting
    def post(self, c):
        """Queue a constraint for the next propagate() call."""
        self.pending.append(c)

    def _emit(self, c):
        if self._produced is not None:
            self._produced.append(c)
        if isinstance(c, DomC):
            self._tell_dom(c.key, c.domain, c)
        elif isinstance(c, EqC):
            self._union(c.a, c.b, c)
        else:
            cid = self._add(c)
            self._enqueue(cid)

    def _add(self, c) -> int:
        cid = self.meta["cid"] + 1
        self._set("meta", "cid", cid)
        self._set("active", cid, c)
        for k in c.keys():
            self._watch.setdefault(k, set()).add(cid)
        return cid

    def _discharge(self, cid):
        self._set("active", cid, ABSENT)

    def _enqueue(self, cid):
        if cid not in self._queued:
            self._queued.add(cid)
            self.queue.append(cid)

    def _wake(self, root):
        hits = set()
        for k in self.members.get(root, (root,)):
            for cid in self._watch.get(k, ()):
                if cid in self.active:
                    hits.add(cid)
        for cid in sorted(hits):
            self._enqueue(cid)

    # domain updates
    def _set_dom(self, root, d, cause):
        self._set("doms", root, d)
        self._set("writer", root, cause)
        self._wake(root)

    def _conflict(self, key, d1, d2, cause):
        r = self.find(key)
        node = key
        if not isinstance(key, int):
            ints = [k for k in self.members.get(r, (r,)) if isinstance(k, int)]
            if ints:
                node = min(ints)
        prior = self.writer.get(r)
        cons = tuple(c for c in (cause, prior) if c is not None)
        self._add_conflict(ConflictRecord(node, (tuple(d1), tuple(d2)), cons))

    def _fail(self, key, d1, d2):
        """Empty ``key``'s domain because ``d1`` and ``d2`` cannot both hold."""
        c = DomC(key, ())
        if self._produced is not None:
            self._produced.append(c)
        r = self.find(key)
        if self.doms.get(r) != ():
            self._set_dom(r, (), c)
        self._conflict(key, d1, d2, c)

    def _tell_dom(self, key, d, cause):
        d = tl.dedup(self.resolved(t) for t in d)
        r = self.find(key)
        cur = self.doms.get(r)
        if cur is None:
            if len(d) == 1 and type(d[0]) is tl.Var:
                self._union(key, d[0], cause)
                return
            self._set_dom(r, d, cause)
            if not d:
                self._conflict(key, (), d, cause)
                return
            self._settle(r, cause)
            return
        if not cur:
            return
        new, delta = tl.narrow(cur, d, self.subst)
        if not new:
            self._set_dom(r, (), cause)
            self._conflict(key, cur, d, cause)
            return
        new = tl.dedup(new)
        if new != cur:
            self._set_dom(r, new, cause)
        for vid in sorted(delta):
            self._bind(vid, delta[vid], cause)
        self._settle(self.find(key), cause)

    def _settle(self, root, cause):
        """A singleton class domain fixes the class's type variables."""
        d = self.doms.get(root)
        if d is None or len(d) != 1:
            return
        t = d[0]
        if type(t) is tl.Var:
            self._set("doms", root, ABSENT)
            self._union(root, t, cause)
            return
        for k in self.members.get(root, (root,)):
            if isinstance(k, tl.Var) and k.id not in self.subst:
                self._bind(k.id, t, cause)

    def _bind(self, vid, t, cause):
        t = self.resolved(t)
        cur = self.subst.get(vid)
        if cur is not None:
            # already bound: both meanings must agree
            self._tell_dom(tl.Var(vid), (t,), cause)
            return
        if type(t) is tl.Var:
            if t.id == vid:
                return
            self._set("subst", vid, t)
            self._rewrite(vid, t, cause)
            self._union(tl.Var(vid), t, cause)
            return
        if tl.occurs(vid, t, self.subst):
            r = self.find(tl.Var(vid))
            self._set_dom(r, (), cause)
            # a cyclic type: the variable itself is what cannot meet t
            self._conflict(tl.Var(vid), (tl.Var(vid),), (t,), cause)
            return
        self._set("subst", vid, t)
        self._rewrite(vid, t, cause)
        self._tell_dom(tl.Var(vid), (t,), cause)

    def _rewrite(self, vid, t, cause):
        one = {vid: t}
        for k in sorted((k for k, v in self.subst.items()
                         if k != vid and vid in tl.free_vars(v)), key=int):
            self._set("subst", k, tl.apply_subst(self.subst[k], one))
        changed = []
        for r in sorted(self.doms, key=key_order):
            d = self.doms[r]
            if any(vid in tl.free_vars(x) for x in d):
                nd = tl.dedup(tl.apply_subst(x, self.subst) for x in d)
                self._set("doms", r, nd)
                self._wake(r)
                changed.append(r)
        for r in changed:
            if self.find(r) == r:
                self._settle(r, cause)

    def _union(self, a, b, cause):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        root, child = sorted((ra, rb), key=key_order)
        da, db = self.doms.get(root), self.doms.get(child)
        self._set("parent", child, root)
        merged = self.members.get(root, (root,)) + self.members.get(child, (child,))
        self._set("members", root, merged)
        self._set("members", child, ABSENT)
        if db is not None:
            self._set("doms", child, ABSENT)
        if da is None and db is None:
            self._wake(root)
            return
        if da is None:
            self._set_dom(root, db, cause)
        elif db is None:
            self._wake(root)
        elif not da or not db:
            self._set_dom(root, (), cause)
        else:
            new, delta = tl.narrow(da, db, self.subst)
            if not new:
                self._set_dom(root, (), cause)
                self._conflict(a if self.find(a) == root else root, da, db, cause)
                return
            self._set_dom(root, tl.dedup(new), cause)
            for vid in sorted(delta):
                self._bind(vid, delta[vid], cause)
        self._settle(self.find(root), cause)

    # driving
    def _step(self, rule, head, body, discharge_cid=None):
        start = len(self.log)
        self._produced = []
        self._cause = head
        body()
        produced = tuple(self._produced)
        self._produced = None
        changes = tuple(self.log[start:])
        if changes or produced or rule.startswith("tell"):
            self.trace.append(TraceEvent(self.steps, rule, (head,), produced, changes))
        self.steps += 1

    def _process(self, c):
        if isinstance(c, ACTIVE_KINDS):
            def body():
                cid = self._add(c)
                self._fire_body(cid, c)
            self._step(_rule_name(c), c, body)
        elif isinstance(c, DomC):
            self._step("tell-dom", c, lambda: self._tell_dom(c.key, c.domain, c))
        elif isinstance(c, EqC):
            self._step("tell-eq", c, lambda: self._union(c.a, c.b, c))
        else:
            raise TypeError(c)

    def _fire(self, cid):
        c = self.active[cid]
        self._step(_rule_name(c), c, lambda: self._fire_body(cid, c))

    def _fire_body(self, cid, c):
        if isinstance(c, ApplyC):
            _fire_apply(self, cid, c)
        elif isinstance(c, ListExtC):
            _fire_listext(self, cid, c)
        else:
            rule = get_relation(c.name)
            if rule.kind == "either":
                _fire_either(self, cid, c)
            elif rule.kind == "generic":
                _fire_generic(self, cid, c)
            else:
                _fire_atomic(self, cid, c, rule)


def _rule_name(c) -> str:
    if isinstance(c, ApplyC):
        return "apply"
    if isinstance(c, ListExtC):
        return "listextension"
    return c.name


def propagate(store: Store) -> str:
    """Run to fixpoint.  Returns "quiescent", "conflicted" or "budget-exceeded"."""
    while store.pending or store.queue:
        if store.steps >= store.step_budget:
            store.budget_exceeded = True
            return "budget-exceeded"
        if store.pending:
            store._process(store.pending.popleft())
        else:
            cid = store.queue.popleft()
            store._queued.discard(cid)
            if cid in store.active:
                store._fire(cid)
    return "conflicted" if store.is_conflicted() else "quiescent"


def replay(initial: dict, events) -> dict:
    """Re-apply the change logs of ``events`` to a copy of an initial state."""
    st = {name: dict(initial[name]) for name in _STATE_MAPS}
    conflicts = list(initial["conflicts"])
    for ev in events:
        for mapname, k, _old, new in ev.changes:
            if mapname == "conflicts":
                conflicts.append(new)
            elif new is ABSENT:
                st[mapname].pop(k, None)
            else:
                st[mapname][k] = new
    st["conflicts"] = conflicts
    return st


# -- rules -------------------------------------------------------------------

def _compatible(store, key, t) -> bool:
    d = store.dom(key)
    if d is None:
        return True
    return any(tl.meet(x, t, store.subst) is not None for x in d)


_INDEX_TYPES = (tl.atom("int"), tl.atom("long"))


def _app_views(store, m) -> list:
    """(argument, result) pairs under which a value of type ``m`` can be applied.

    Functions are called, dictionaries and lists are indexed.
    """
    t = type(m)
    if t is tl.Func:
        return [(m.arg, m.res)]
    if t is tl.Dict:
        # key and value types describe whole lists; index by one key
        ks, vs = _items(store, m.dom), _items(store, m.rng)
        if ks is None or vs is None:
            return None
        return [(k, v) for k in ks for v in vs]
    if t is tl.List:
        return [(i, m.elem) for i in _INDEX_TYPES]
    if t is tl.Tuple:
        return [(i, e) for e in tl.dedup(m.elems) for i in _INDEX_TYPES]
    if t is tl.HList:
        v = store.fresh()
        return [(i, v) for i in _INDEX_TYPES]
    return []


def _items(store, t) -> tuple:
    """Possible element types of a list-shaped type, or None while ``t`` is unknown.

    Non-list types stand for themselves.
    """
    t = store.resolved(t)
    kind = type(t)
    if kind is tl.Var:
        return None
    if kind is tl.List:
        return (t.elem,)
    if kind is tl.Tuple:
        return tl.dedup(t.elems)
    if kind is tl.STuple:
        return (tl.SYMBOL,)
    if kind is tl.HList:
        return (store.fresh(),)
    return (t,)


def _fire_apply(store, cid, c):
    fn, arg, res = c.fn, c.args[0], c.res
    dfn = store.dom(fn)
    if dfn is None:
        return  # wait until the applied value is known
    if not dfn:
        store._discharge(cid)
        return
    kept, views = [], []
    per_member = [_app_views(store, m) for m in dfn]
    if any(vs is None for vs in per_member):
        return  # a dictionary whose key or value shape is still open
    for m, vs in zip(dfn, per_member):
        ok = [v for v in vs
              if _compatible(store, arg, v[0]) and _compatible(store, res, v[1])]
        if ok:
            kept.append(m)
            views.extend(ok)
    if not views:
        if not any(per_member):
            store._emit(DomC(fn, (tl.Func(store.fresh(), store.fresh()),)))
        else:
            every = [v for vs in per_member for v in vs]
            store._emit(DomC(arg, tl.dedup(v[0] for v in every)))
            if store.dom(arg) != ():
                store._emit(DomC(res, tl.dedup(v[1] for v in every)))
        store._discharge(cid)
        return
    if len(kept) < len(dfn):
        store._emit(DomC(fn, tuple(kept)))
    if len(views) == 1:
        a, r = views[0]
        store._emit(DomC(arg, (store.resolved(a),)))
        store._emit(DomC(res, (store.resolved(r),)))
        # variables shared between argument and result are only linked once
        # both sides have committed to a single alternative
        a, r = store.resolved(a), store.resolved(r)
        linked = all(len(store.dom(k) or ()) == 1 for k in (arg, res))
        if linked or (tl.is_ground(a) and tl.is_ground(r)) or store.dom(arg) == () \
                or store.dom(res) == ():
            store._discharge(cid)
        return
    store._emit(DomC(arg, tl.dedup(store.resolved(v[0]) for v in views)))
    store._emit(DomC(res, tl.dedup(store.resolved(v[1]) for v in views)))


def _atom_names(d):
    return tuple(t.name for t in d) if all(type(t) is tl.Atomic for t in d) else None


def _ordered(names):
    s = set(names)
    return tuple(tl.atom(n) for n in tl.ATOMIC_TYPES if n in s)


def _fire_atomic(store, cid, c, rule):
    ins, res = c.args[:-1], c.args[-1]
    names = []
    for k, adm in zip(ins, rule.admissible):
        d = store.dom(k)
        ns = None if d is None else _atom_names(d)
        if ns is None or not set(ns) <= set(adm):
            store._emit(DomC(k, _ordered(adm)))
            d = store.dom(k)
            if not d:
                store._discharge(cid)
                return
            ns = _atom_names(d)
        names.append(ns)
    if rule.special == "int_equate" and len(ins) == 2:
        wide = {"int", "long", "real", "float"}
        for i in (0, 1):
            other = names[1 - i]
            if names[i] == ("int",) and len(other) > 1 and set(other) <= wide:
                store._emit(EqC(ins[1 - i], res))
                store._discharge(cid)
                return
    dres = store.dom(res)
    res_ok = None
    if dres is not None:
        res_ok = {t.name for t in dres if type(t) is tl.Atomic}
    tuples = []
    for combo in itertools.product(*names):
        r = rule.results(*combo)
        if r is not None and (res_ok is None or r in res_ok):
            tuples.append(combo + (r,))
    for i, k in enumerate(ins):
        supp = {t[i] for t in tuples}
        if supp != set(names[i]):
            store._emit(DomC(k, _ordered(supp)))
            if not store.dom(k):
                store._discharge(cid)
                return
    supp_res = _ordered({t[-1] for t in tuples})
    if dres is None or set(dres) != set(supp_res):
        store._emit(DomC(res, supp_res))
        if not store.dom(res):
            store._discharge(cid)
            return
    names = [_atom_names(store.dom(k)) for k in ins]
    if all(len(ns) == 1 for ns in names):
        store._emit(DomC(res, store.dom(res)))
        store._discharge(cid)
        return
    # entailed: every remaining combination is valid with the same single result
    dres = store.dom(res)
    if len(dres) == 1 and type(dres[0]) is tl.Atomic:
        target = dres[0].name
        if all(rule.results(*combo) == target for combo in itertools.product(*names)):
            store._discharge(cid)


def _split_arg(f_arg, n):
    if n == 1:
        return (f_arg,)
    if type(f_arg) is tl.Tuple and len(f_arg.elems) == n:
        return f_arg.elems
    return None


def _fire_generic(store, cid, c):
    ins, res = c.args[:-1], c.args[-1]
    alts = []
    for f in store.instantiate(c.payload or ()):
        parts = _split_arg(f.arg, len(ins))
        if parts is not None:
            alts.append((parts, f.res))
    ok = [(p, r) for p, r in alts
          if all(_compatible(store, k, t) for k, t in zip(ins, p)) and _compatible(store, res, r)]
    chosen = ok if ok else alts
    if len(chosen) == 1 or not ok:
        for i, k in enumerate(ins):
            store._emit(DomC(k, tl.dedup(p[i] for p, _ in chosen)))
            if store.dom(k) == ():
                store._discharge(cid)
                return
        store._emit(DomC(res, tl.dedup(r for _, r in chosen)))
        if len(chosen) == 1 or store.dom(res) == ():
            store._discharge(cid)
        return
    for i, k in enumerate(ins):
        store._emit(DomC(k, tl.dedup(p[i] for p, _ in chosen)))
    store._emit(DomC(res, tl.dedup(r for _, r in chosen)))
    if all(len(store.dom(k) or (0, 0)) == 1 for k in c.args):
        store._discharge(cid)


def _fire_either(store, cid, c):
    t, f, w = c.args
    dt, df = store.dom(t), store.dom(f)
    if dt is None or df is None:
        return
    if not dt or not df:
        store._discharge(cid)
        return
    store._emit(DomC(w, tl.dedup(dt + df)))
    if len(dt) == 1 and len(df) == 1:
        store._discharge(cid)


def _ext_positions(direction, n):
    if n == 1:
        return (0,)
    if direction == "left":
        return (0,)
    if direction == "right":
        return (n - 1,)
    return tuple(range(n))


def _atom_like(t) -> bool:
    return type(t) is not tl.Var and not tl.is_list_shaped(t)


# Item-wise extension stops rewriting past this nesting depth.  Recursive
# definitions such as a: neg (1;a) would otherwise unroll forever.
MAX_EXTENSION_DEPTH = 6


def _fire_listext(store, cid, c):
    ins, res = c.args[:-1], c.args[-1]
    n = len(ins)
    ext = _ext_positions(c.dir, n)
    doms = {}
    for i in ext:
        d = store.dom(ins[i])
        if d is None:
            return
        if not d:
            store._discharge(cid)
            return
        doms[i] = d
    kinds = {}
    for i, d in doms.items():
        if all(_atom_like(t) for t in d):
            kinds[i] = "atom"
        elif all(tl.is_list_shaped(t) for t in d):
            kinds[i] = "list"
        else:
            return
    if all(k == "atom" for k in kinds.values()):
        for rel in c.rels:
            store._emit(RelC(rel, c.args, c.payload))
        store._discharge(cid)
        return
    if c.level >= MAX_EXTENSION_DEPTH:
        store.depth_capped = True
        return
    listy = [i for i in ext if kinds[i] == "list"]
    if any(len(doms[i]) > 1 for i in listy):
        return
    members = {i: doms[i][0] for i in listy}
    if any(type(m) is tl.HList for m in members.values()):
        return
    widths = []
    for i in listy:
        m = members[i]
        if type(m) is tl.Tuple:
            w = len(m.elems)
        elif type(m) is tl.STuple:
            w = len(m.names)
        else:
            continue
        if w not in widths:
            widths.append(w)
    if len(widths) > 1:
        # tuples of different widths cannot be extended item-wise
        d1, d2 = ((tl.Tuple(tuple(store.fresh() for _ in range(w))),) for w in widths[:2])
        store._fail(res, d1, d2)
        store._discharge(cid)
        return
    if widths:
        k = widths[0]
        rs = tuple(store.fresh() for _ in range(k))
        store._emit(DomC(res, (tl.Tuple(rs),)))
        if store.dom(res) == ():
            store._discharge(cid)
            return
        elems = {}
        for i in listy:
            vs = tuple(store.fresh() for _ in range(k))
            store._emit(DomC(ins[i], (tl.Tuple(vs),)))
            elems[i] = vs
        for j in range(k):
            args = tuple(elems[i][j] if i in elems else ins[i] for i in range(n)) + (rs[j],)
            store._emit(ListExtC(c.dir, args, c.rels, c.payload, level=c.level + 1))
        store._discharge(cid)
        return
    elems = {}
    for i in listy:
        e = members[i].elem
        if type(e) is tl.Var and e.id not in store.subst:
            elems[i] = e
        else:
            v = store.fresh()
            store._emit(DomC(ins[i], (tl.List(v),)))
            elems[i] = v
    z = store.fresh()
    args = tuple(elems.get(i, ins[i]) for i in range(n)) + (z,)
    store._emit(ListExtC(c.dir, args, c.rels, c.payload, level=c.level + 1))
    store._emit(DomC(res, (tl.List(z),)))
    store._discharge(cid)


# -- generation --------------------------------------------------------------

def generate_constraints(root: sx.Node, annots, sigs, step_budget: int = 100_000) -> Store:
    """One walk over the tree; constraints are grouped by their source."""
    store = Store(step_budget)
    buckets = {s: [] for s in ("syntax", "variable", "builtin", "atomic", "declaration")}
    occurrences = {}
    nodes = list(root.walk())
    store.nodes = {n.id: n for n in nodes}
    assigned = {n.target.name for n in nodes
                if isinstance(n, sx.Assign) and isinstance(n.target, sx.Var) and n.target.is_global}

    def add(source, c):
        buckets[source].append(c)

    def builtin_sig(v):
        if not isinstance(v, sx.Var):
            return None
        if v.operator:
            if v.name not in sigs:
                raise UnknownBuiltin(v.name, v.span)
            return sigs[v.name]
        if v.is_global and v.name not in assigned and v.name in sigs:
            return sigs[v.name]
        return None

    def shape(sig):
        if sig.arity > 1:
            arg = tl.Tuple(tuple(store.fresh() for _ in range(sig.arity)))
        else:
            arg = store.fresh()
        return (tl.Func(arg, store.fresh()),)

    for n in nodes:
        sp = n.span
        if isinstance(n, sx.Literal):
            add("atomic", DomC(n.id, (tl.atom(n.atype),), "atomic", sp))
        elif isinstance(n, sx.VectorLit):
            if n.atype == "symbol":
                t = tl.STuple(n.items)
            elif n.atype == "char":
                t = tl.List(tl.atom("char"))
            else:
                t = tl.Tuple(tuple(tl.atom(n.atype) for _ in n.items))
            add("atomic", DomC(n.id, (t,), "atomic", sp))
        elif isinstance(n, sx.Var):
            sig = builtin_sig(n)
            if sig is not None:
                d = shape(sig) if sig.ext else store.instantiate(sig.domain)
                add("builtin", DomC(n.id, d, "builtin", sp))
            else:
                occurrences.setdefault(n.key, []).append(n.id)
        elif isinstance(n, sx.Assign):
            add("syntax", EqC(n.target.id, n.value.id, "syntax", sp))
            add("syntax", EqC(n.id, n.value.id, "syntax", sp))
        elif isinstance(n, sx.IndexAssign):
            e = store.fresh()
            kk = store.fresh()
            add("syntax", DomC(n.base.id, (tl.List(e), tl.Dict(kk, e)), "syntax", sp))
            add("syntax", EqC(n.value.id, e, "syntax", sp))
            add("syntax", EqC(n.id, n.value.id, "syntax", sp))
        elif isinstance(n, sx.App):
            add("syntax", ApplyC(n.fn.id, (n.arg.id,), n.id, "syntax", sp))
            sig = builtin_sig(n.fn)
            if sig is not None and len(n.args) == sig.arity:
                ids = tuple(a.id for a in n.args) + (n.id,)
                if sig.ext:
                    rel = sig.relation
                    payload = sig.domain if rel == "generic" else None
                    add("builtin", ListExtC(sig.ext, ids, (rel,), payload, "builtin", sp))
                elif sig.rel:
                    add("builtin", RelC(sig.rel, ids, None, "builtin", sp))
        elif isinstance(n, sx.ListLit):
            vs = tuple(store.fresh() for _ in n.items)
            add("syntax", DomC(n.id, (tl.Tuple(vs),), "syntax", sp))
            for item, v in zip(n.items, vs):
                add("syntax", EqC(item.id, v, "syntax", sp))
        elif isinstance(n, sx.DictLit):
            kd, vd = store.fresh(), store.fresh()
            add("syntax", DomC(n.id, (tl.Dict(kd, vd),), "syntax", sp))
            add("syntax", EqC(n.domain.id, kd, "syntax", sp))
            add("syntax", EqC(n.range.id, vd, "syntax", sp))
        elif isinstance(n, sx.Cond):
            add("syntax", DomC(n.test.id, (tl.BOOLEAN,), "syntax", sp))
            add("syntax", RelC("either", (n.then.id, n.orelse.id, n.id), None, "syntax", sp))
        elif isinstance(n, sx.DoLoop):
            add("syntax", DomC(n.count.id, INTEGRAL, "syntax", sp))
        elif isinstance(n, sx.Lambda):
            ps = tuple(store.fresh() for _ in n.params)
            arg = ps[0] if len(ps) == 1 else (tl.Tuple(ps) if ps else store.fresh())
            r = store.fresh()
            add("syntax", DomC(n.id, (tl.Func(arg, r),), "syntax", sp))
            own = [m for m in sx.own_nodes(n.body) if isinstance(m, sx.Var)]
            for key, p in zip(n.param_keys, ps):
                first = next((m for m in own if m.key == key), None)
                if first is not None:
                    add("syntax", EqC(first.id, p, "syntax", sp))
            if n.body:
                add("syntax", EqC(r, n.body[-1].id, "syntax", sp))

    for ids in occurrences.values():
        for other in ids[1:]:
            n = store.nodes[other]
            buckets["variable"].append(EqC(ids[0], other, "variable", n.span))

    for a in annots:
        if a.kind == "imperative" and a.target is not None:
            add("declaration", DomC(a.target, store.instantiate(a.decl), "declaration", a.span))

    for s in ("syntax", "variable", "builtin", "atomic", "declaration"):
        store.generated.extend(buckets[s])
    store.pending.extend(store.generated)
    store.log.clear()
    return store
