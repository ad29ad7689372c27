"""Labeling: split domain lists until every live constraint has exited.

Depth-first search with first-vs-rest binary splits.  Backtracking uses the
store's undo trail, so a restored store is structurally identical to the
store before the split.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .engine import DomC, Store, key_order, propagate


@dataclass
class LabelConfig:
    max_splits: int = 10_000
    max_solutions: int = 64


@dataclass
class Solutions:
    states: list  # Store.state() snapshots
    splits: int = 0
    truncated: bool = False


@dataclass
class Inconsistent:
    conflicts: list  # conflict records of the last failed branch
    splits: int = 0


@dataclass
class BudgetExceeded:
    states: list = field(default_factory=list)
    splits: int = 0


def choose_split(store: Store):
    """Key of a live constraint with the shortest multi-member domain list."""
    best = None
    for c in store.active.values():
        for k in c.keys():
            d = store.dom(k)
            if d is None or len(d) < 2:
                continue
            cand = (len(d), key_order(k))
            if best is None or cand < best[0]:
                best = (cand, k)
    return None if best is None else best[1]


class _Budget(Exception):
    pass


def label(store: Store, config: LabelConfig = None):
    config = config or LabelConfig()
    solutions = []
    last_failure = []
    splits = 0
    explored = False
    base = len(store.conflicts)

    def search():
        nonlocal splits, explored, last_failure
        key = choose_split(store)
        if key is None:
            solutions.append(store.state())
            return
        d = store.dom(key)
        for branch in ((d[0],), d[1:]):
            if len(solutions) >= config.max_solutions:
                return
            if splits >= config.max_splits:
                raise _Budget
            splits += 1
            explored = True
            mark = store.mark()
            store.post(DomC(key, branch, "labeling"))
            status = propagate(store)
            if status == "budget-exceeded":
                store.undo(mark)
                raise _Budget
            if len(store.conflicts) > base:
                last_failure = list(store.conflicts[base:])
            else:
                search()
            store.undo(mark)

    try:
        search()
    except _Budget:
        return BudgetExceeded(solutions, splits)
    if not solutions and explored:
        return Inconsistent(last_failure, splits)
    truncated = len(solutions) >= config.max_solutions
    return Solutions(solutions, splits, truncated)


def needs_labeling(store: Store) -> bool:
    return choose_split(store) is not None


def state_store(state: dict) -> Store:
    """A read-only view of a solution snapshot with the Store query API."""
    s = Store()
    for name in ("parent", "members", "doms", "subst", "active", "writer", "meta"):
        setattr(s, name, dict(state[name]))
    s.conflicts = list(state["conflicts"])
    return s


def assignments(store: Store, keys) -> set:
    """Ground assignments (tuples of types over ``keys``) a solved store admits."""
    roots = []
    for k in keys:
        r = store.find(k)
        if r not in roots:
            roots.append(r)
    options = [store.doms.get(r, ()) for r in roots]
    out = set()
    for combo in itertools.product(*options):
        chosen = dict(zip(roots, combo))
        out.add(tuple(chosen[store.find(k)] for k in keys))
    return out
