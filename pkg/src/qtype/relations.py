"""Registry of relation rules applied to built-ins once arguments are atomic.

An ``atomic`` rule is a finite relation over atomic type names: a function
from the argument atoms to the result atom (or None when the combination is
a type error).  The engine enforces it by generalized arc consistency.  The
``generic`` and ``either`` kinds have dedicated firing logic in the engine.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .typelang import ATOMIC_TYPES, NUMERIC_RANK, TEMPORAL_TYPES, promote

NUMERIC = tuple(NUMERIC_RANK)


class DuplicateRule(ValueError):
    pass


@dataclass(frozen=True)
class RelationRule:
    name: str
    arity: int  # number of inputs; the result is an extra final argument
    kind: str = "atomic"  # atomic | generic | either
    admissible: tuple = ()  # per input: admissible atomic type names
    result: Optional[Callable[..., Optional[str]]] = None
    special: Optional[str] = None  # extra firing condition understood by the engine

    def results(self, *atoms) -> Optional[str]:
        if self.admissible and any(a not in adm for a, adm in zip(atoms, self.admissible)):
            return None
        return self.result(*atoms)


_REGISTRY: dict = {}


def register_relation(rule: RelationRule, registry: Optional[dict] = None) -> RelationRule:
    reg = _REGISTRY if registry is None else registry
    if rule.name in reg:
        raise DuplicateRule(f"relation {rule.name!r} is already registered")
    reg[rule.name] = rule
    return rule


def get_relation(name: str) -> RelationRule:
    return _REGISTRY[name]


def registry() -> dict:
    return dict(_REGISTRY)


def _sum(a, b):
    r = promote(a, b)
    if r in ("boolean", "byte"):
        return "int"
    return r


def _div(a, b):
    return "float"


def _cmp(a, b):
    if a in NUMERIC_RANK and b in NUMERIC_RANK:
        return "boolean"
    return "boolean" if a == b else None


_MINMAX_TYPES = NUMERIC + ("char",) + TEMPORAL_TYPES


def _minmax(a, b):
    if a in NUMERIC_RANK and b in NUMERIC_RANK:
        return promote(a, b)
    return a if a == b else None


def _tofloat(a):
    return "float"


def _arith1(a):
    return "int" if a in ("boolean", "byte") else a


for _rule in (
    RelationRule("sum", 2, admissible=(NUMERIC, NUMERIC), result=_sum, special="int_equate"),
    RelationRule("div", 2, admissible=(NUMERIC, NUMERIC), result=_div),
    RelationRule("cmp", 2, admissible=(ATOMIC_TYPES, ATOMIC_TYPES), result=_cmp),
    RelationRule("minmax", 2, admissible=(_MINMAX_TYPES, _MINMAX_TYPES), result=_minmax),
    RelationRule("tofloat", 1, admissible=(NUMERIC,), result=_tofloat),
    RelationRule("arith1", 1, admissible=(NUMERIC,), result=_arith1),
    RelationRule("generic", -1, kind="generic"),
    RelationRule("either", 2, kind="either"),
):
    register_relation(_rule)
