"""Ground-denotation oracle over a finite universe of value shapes.

A value shape abstracts a Q value down to what types can observe:

    ("a", name)       an atom of a non-symbol atomic type
    ("s", name)       a symbol atom holding ``name``
    ("L", items)      a list, ``items`` a tuple of value shapes
    ("D", keys, vals) a dictionary
    ("F", arg, res)   a function, identified by one argument/result shape pair

The denotation of a ground type expression is computed directly from the
meaning of each constructor, never through ``meet``; it is the reference the
meet, narrow and relation operations are checked against.
"""
from __future__ import annotations

import itertools
import operator
from functools import lru_cache

from . import typelang as tl


class Universe:
    def __init__(self, atoms=("int", "float", "symbol"), names=("a", "b"),
                 depth=2, width=2):
        self.atoms = tuple(atoms)
        self.names = tuple(names)
        self.depth = depth
        self.width = width
        self._levels = [self._atom_values(a) for a in self.atoms]
        self._levels = [tuple(v for vs in self._levels for v in vs)]
        for _ in range(depth):
            prev = self._levels[-1]
            vals = list(self._levels[0])
            vals.extend(self._lists(prev))
            vals.extend(("D", k, v) for k in prev for v in prev)
            vals.extend(("F", x, y) for x in prev for y in prev)
            self._levels.append(tuple(vals))
        self.values = self._levels[-1]
        self.index = {v: i for i, v in enumerate(self.values)}
        self._den = lru_cache(maxsize=None)(self._den_uncached)

    def _atom_values(self, name):
        if name == "symbol":
            return tuple(("s", n) for n in self.names)
        return (("a", name),)

    def _lists(self, elems):
        out = []
        for k in range(self.width + 1):
            out.extend(("L", seq) for seq in itertools.product(elems, repeat=k))
        return out

    def level(self, d):
        return self._levels[max(0, min(d, self.depth))]

    def _den_uncached(self, t, d):
        if isinstance(t, tl.Atomic):
            if t.name not in self.atoms:
                return frozenset()
            return frozenset(self._atom_values(t.name))
        if isinstance(t, tl.Var):
            raise ValueError("denotation of a non-ground expression")
        if d <= 0:
            return frozenset()
        if isinstance(t, tl.HList):
            return frozenset(self._lists(self.level(d - 1)))
        if isinstance(t, tl.List):
            return frozenset(self._lists(sorted(self._den(t.elem, d - 1), key=repr)))
        if isinstance(t, tl.Tuple):
            if len(t.elems) > self.width:
                return frozenset()
            parts = [self._den(e, d - 1) for e in t.elems]
            return frozenset(("L", seq) for seq in itertools.product(*parts))
        if isinstance(t, tl.STuple):
            if len(t.names) > self.width or "symbol" not in self.atoms:
                return frozenset()
            if any(n not in self.names for n in t.names):
                return frozenset()
            return frozenset([("L", tuple(("s", n) for n in t.names))])
        if isinstance(t, tl.Dict):
            ks, vs = self._den(t.dom, d - 1), self._den(t.rng, d - 1)
            return frozenset(("D", k, v) for k in ks for v in vs)
        if isinstance(t, tl.Func):
            xs, ys = self._den(t.arg, d - 1), self._den(t.res, d - 1)
            return frozenset(("F", x, y) for x in xs for y in ys)
        raise TypeError(t)

    def denotation(self, t) -> frozenset:
        return self._den(t, self.depth)

    def mask(self, t) -> int:
        """Denotation as a bitmask over ``self.values``."""
        m = 0
        idx = self.index
        for v in self.denotation(t):
            m |= 1 << idx[v]
        return m

    def domain_denotation(self, domain) -> frozenset:
        out = set()
        for t in domain:
            out |= self.denotation(t)
        return frozenset(out)

    def poly_denotation(self, t, ground) -> frozenset:
        """Union of denotations over every instantiation of t's variables from ``ground``."""
        vs = list(dict.fromkeys(tl.free_vars(t)))
        if not vs:
            return self.denotation(t)
        out = set()
        for combo in itertools.product(ground, repeat=len(vs)):
            out |= self.denotation(tl.apply_subst(t, dict(zip(vs, combo))))
        return frozenset(out)


def meet_mismatches(types, universe: Universe, limit: int = 10):
    """Compare meet against denotation intersection for every ordered pair.

    Returns ``(pairs checked, mismatch count, first few mismatches)``.
    """
    masks = [universe.mask(t) for t in types]
    holders = {}  # value -> indices of the types whose denotation holds it
    for j, t in enumerate(types):
        for v in universe.denotation(t):
            holders.setdefault(v, set()).add(j)
    cache = {}
    bad = []
    count = 0
    meet = tl.meet
    idx = range(len(types))
    for a, ma in zip(types, masks):
        results = list(map(meet, itertools.repeat(a), types))
        overlap = set()
        for v in universe.denotation(a):
            overlap |= holders[v]
        met = itertools.compress(idx, map(operator.is_not, results, itertools.repeat(None)))
        for j in overlap.union(met):
            r = results[j]
            if r is None:
                got = 0
            else:
                got = cache.get(r[0])
                if got is None:
                    got = cache[r[0]] = universe.mask(r[0])
            if got != ma & masks[j]:
                count += 1
                if len(bad) < limit:
                    bad.append((a, types[j], None if r is None else r[0]))
    return len(types) ** 2, count, bad
