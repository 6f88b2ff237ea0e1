"""Substitutions, unification, renaming and variant keys."""

from __future__ import annotations

import itertools
import sys
from typing import Iterable, Optional, Union

from .syntax import Atom, Clause, Compound, Const, Var

# deep list terms (long LD branches) recurse once per list cell
if sys.getrecursionlimit() < 50_000:
    sys.setrecursionlimit(50_000)

# unification is the hot path of the engine, so the functions below work on
# plain dicts; Substitution wraps them for the public API


def walk(t, s: dict):
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def _occurs(v: Var, t, s: dict) -> bool:
    stack = [t]
    while stack:
        x = walk(stack.pop(), s)
        if x == v:
            return True
        if isinstance(x, Compound):
            stack.extend(x.args)
    return False


def unify_into(a, b, s: dict, occurs_check: bool = True) -> bool:
    """Extend the triangular binding dict ``s`` so that a and b unify."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, s)
        y = walk(y, s)
        if x is y or x == y:
            continue
        if isinstance(x, Var):
            if occurs_check and _occurs(x, y, s):
                return False
            s[x] = y
        elif isinstance(y, Var):
            if occurs_check and _occurs(y, x, s):
                return False
            s[y] = x
        elif isinstance(x, Compound) and isinstance(y, Compound):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        else:
            return False
    return True


def resolve(t, s: dict):
    """Fully dereference ``t`` through triangular bindings."""
    if not s:
        return t
    if isinstance(t, Var):
        u = walk(t, s)
        if u is t:
            return t
        return resolve(u, s) if isinstance(u, Compound) else u
    if isinstance(t, Compound):
        args = tuple(resolve(a, s) for a in t.args)
        return t if args == t.args else Compound(t.functor, args)
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.predicate, tuple(resolve(a, s) for a in t.args))
    return t


def _resolve_guarded(t, s: dict, active: frozenset):
    # like resolve, but a variable met again inside its own binding stays put
    if isinstance(t, Var):
        if t in active or t not in s:
            return t
        return _resolve_guarded(s[t], s, active | {t})
    if isinstance(t, (Compound, Atom)) and t.args:
        args = tuple(_resolve_guarded(a, s, active) for a in t.args)
        return Compound(t.functor, args) if isinstance(t, Compound) else Atom(t.predicate, args)
    return t


def idempotent(s: dict, occurs_check: bool = True) -> dict:
    """Dereference every binding.

    Without the occurs check the bindings may be cyclic; a cyclic variable
    is then left in place, so the result is finite but not idempotent.
    """
    if occurs_check:
        return {v: resolve(t, s) for v, t in s.items()}
    return {v: _resolve_guarded(t, s, frozenset({v})) for v, t in s.items()}


class Substitution:
    """An idempotent finite map from variables to terms."""

    __slots__ = ("_map",)

    def __init__(self, bindings: Optional[dict] = None):
        m = {}
        for v, t in (bindings or {}).items():
            if t != v:
                m[v] = t
        self._map = m

    @classmethod
    def _trusted(cls, m: dict) -> "Substitution":
        s = cls.__new__(cls)
        s._map = m
        return s

    def __getitem__(self, v: Var):
        return self._map[v]

    def __contains__(self, v) -> bool:
        return v in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def items(self):
        return self._map.items()

    def as_dict(self) -> dict:
        return dict(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name}#{v.id}->{t}" for v, t in self._map.items())
        return "{" + inner + "}"

    def is_idempotent(self) -> bool:
        dom = set(self._map)
        return all(not (set(_vars(t)) & dom) for t in self._map.values())

    def compose(self, other: "Substitution") -> "Substitution":
        """Return ``self`` followed by ``other`` (apply self first)."""
        m = {v: apply(other, t) for v, t in self._map.items()}
        for v, t in other._map.items():
            if v not in m:
                m[v] = t
        return Substitution(m)

    def restrict(self, vs: Iterable[Var]) -> "Substitution":
        keep = set(vs)
        return Substitution._trusted({v: t for v, t in self._map.items() if v in keep})


EMPTY = Substitution()


def _vars(t):
    if isinstance(t, Var):
        yield t
    elif isinstance(t, (Compound, Atom)):
        for a in t.args:
            yield from _vars(a)


def mgu(a, b, occurs_check: bool = True) -> Optional[Substitution]:
    """Most general unifier of two atoms (or terms), or ``None``.

    The result is idempotent unless ``occurs_check`` is off and the
    bindings are cyclic. Atoms with different predicate symbols or
    arities never unify.
    """
    if isinstance(a, Atom) or isinstance(b, Atom):
        if not (isinstance(a, Atom) and isinstance(b, Atom)):
            return None
        if a.predicate != b.predicate or len(a.args) != len(b.args):
            return None
        pairs = zip(a.args, b.args)
    else:
        pairs = [(a, b)]
    s: dict = {}
    for x, y in pairs:
        if not unify_into(x, y, s, occurs_check):
            return None
    return Substitution._trusted(idempotent(s, occurs_check))


def apply(s: Substitution, t):
    """Apply a substitution to a term, atom, clause or tuple of atoms."""
    m = s._map if isinstance(s, Substitution) else s
    if not m:
        return t
    if isinstance(t, Clause):
        return Clause(apply(s, t.head), tuple(apply(s, b) for b in t.body))
    if isinstance(t, tuple):
        return tuple(apply(s, x) for x in t)
    return _subst(t, m)


def _subst(t, m: dict):
    if isinstance(t, Var):
        return m.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_subst(a, m) for a in t.args))
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.predicate, tuple(_subst(a, m) for a in t.args))
    return t


class FreshSupply:
    """Source of variable ids never handed out before."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)

    def next_id(self) -> int:
        return next(self._counter)


def rename_apart(c, supply: FreshSupply):
    """Return a variant of ``c`` whose variables all have fresh ids."""
    mapping: dict = {}
    out = _rename(c, mapping, supply)
    return out


def _rename(t, mapping: dict, supply: FreshSupply):
    if isinstance(t, Var):
        v = mapping.get(t)
        if v is None:
            v = mapping[t] = Var(t.name, supply.next_id())
        return v
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_rename(a, mapping, supply) for a in t.args))
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.predicate, tuple(_rename(a, mapping, supply) for a in t.args))
    if isinstance(t, Clause):
        return Clause(_rename(t.head, mapping, supply),
                      tuple(_rename(b, mapping, supply) for b in t.body))
    if isinstance(t, tuple):
        return tuple(_rename(x, mapping, supply) for x in t)
    return t


# ---------------------------------------------------------------- variants

class VariantKey(tuple):
    """Canonical form of an atom up to variable renaming.

    Variables become ``V0, V1, ...`` in first-occurrence order. The key
    is hashable and two atoms share a key exactly when they are variants.
    """

    __slots__ = ()

    @property
    def atom(self) -> Atom:
        return self[0]

    def __str__(self) -> str:
        return str(self[0])

    __repr__ = __str__


def variant_key(a) -> VariantKey:
    mapping: dict = {}
    return VariantKey((_canon(a, mapping),))


def _canon(t, mapping: dict):
    if isinstance(t, Var):
        v = mapping.get(t)
        if v is None:
            n = len(mapping)
            v = mapping[t] = Var(f"V{n}", n)
        return v
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_canon(a, mapping) for a in t.args))
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.predicate, tuple(_canon(a, mapping) for a in t.args))
    if isinstance(t, tuple):
        return tuple(_canon(x, mapping) for x in t)
    return t


def is_variant(a, b) -> bool:
    return variant_key(a) == variant_key(b)


def is_instance(general, specific) -> bool:
    """True when ``specific`` is an instance of ``general`` (one-way match)."""
    s: dict = {}
    stack = [(general, specific)]
    while stack:
        g, t = stack.pop()
        if isinstance(g, Var):
            if g in s:
                if s[g] != t:
                    return False
            else:
                s[g] = t
        elif isinstance(g, (Compound, Atom)):
            if type(g) is not type(t):
                return False
            name_g = g.functor if isinstance(g, Compound) else g.predicate
            name_t = t.functor if isinstance(t, Compound) else t.predicate
            if name_g != name_t or len(g.args) != len(t.args):
                return False
            stack.extend(zip(g.args, t.args))
        elif g != t:
            return False
    return True


def is_ground(t) -> bool:
    return next(_vars(t), None) is None


TermLike = Union[Var, Const, Compound, Atom]
