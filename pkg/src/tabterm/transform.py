"""The answer transformation and modular decomposition of programs."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .analysis import build_dep_graph, check_extends, recursive_preds
from .syntax import (BUILTINS, GENERATED_SUFFIX, Atom, Clause, Mode, Pred,
                     Program, Var, make_program)


class NameCollision(ValueError):
    pass


@dataclass(frozen=True)
class TransformMap:
    """Original tabled recursive predicate -> generated answer predicate."""

    mapping: dict
    tabling: frozenset

    @property
    def generated(self) -> frozenset:
        return frozenset(self.mapping.values())

    def original_of(self, pred: Pred):
        for p, q in self.mapping.items():
            if q == pred:
                return p
        return None


def answer_pred(p: Pred) -> Pred:
    return Pred(p.name + GENERATED_SUFFIX, p.arity)


def a_transform(p: Program):
    """Insert answer-witness atoms after tabled recursive calls.

    Every body atom whose predicate is tabled and in the head's SCC is
    followed by a copy over the generated ``__a`` predicate, and one
    generic fact per generated predicate is appended to the program.

    Returns
    -------
    (Program, TransformMap)
    """
    for q in p.predicates:
        if q.name.endswith(GENERATED_SUFFIX):
            raise NameCollision(f"{q} already uses the reserved suffix {GENERATED_SUFFIX!r}")
    g = build_dep_graph(p)
    tr = sorted(p.tabling & recursive_preds(g))
    mapping = {q: answer_pred(q) for q in tr}
    clauses = []
    for c in p.clauses:
        h = c.head.pred
        body = []
        for b in c.body:
            body.append(b)
            if b.pred in p.tabling and b.pred not in BUILTINS and g.same_scc(b.pred, h):
                body.append(Atom(mapping[b.pred].name, b.args))
        clauses.append(Clause(c.head, tuple(body)))
    for q in tr:
        args = tuple(Var(f"X{i + 1}", i) for i in range(q.arity))
        clauses.append(Clause(Atom(mapping[q].name, args), ()))
    modes = dict(p.modes)
    for q in tr:
        modes[mapping[q]] = (Mode.IN,) * q.arity
    tabling = p.tabling | frozenset(mapping.values())
    out = make_program(clauses, tabling, modes, p.queries)
    return out, TransformMap(mapping, tabling)


@dataclass
class Component:
    predicates: frozenset
    program: Program = field(repr=False)
    side_by_side: set = field(default_factory=set)   # indices of mutually extending peers


def subprogram(p: Program, preds) -> Program:
    preds = set(preds)
    clauses = [c for c in p.clauses if c.head.pred in preds]
    occurring = set(preds)
    for c in clauses:
        occurring.update(b.pred for b in c.body if b.pred not in BUILTINS)
    modes = {q: m for q, m in p.modes.items() if q in occurring or q in BUILTINS}
    return make_program(clauses, p.tabling & occurring, modes, ())


def modular_decompose(p: Program) -> list:
    """Split a program into components ordered top (callers) to bottom.

    Components come from the strongly connected components of the
    dependency graph over defined predicates; components with identical
    callers and callees are merged. Each component extends every component
    listed after it, and pairs that extend each other both ways are
    recorded in ``side_by_side``.
    """
    g = build_dep_graph(p)
    defined = p.defined
    sub = g.graph.subgraph(defined)
    sccs = [frozenset(s) for s in nx.strongly_connected_components(sub)]
    cond = nx.condensation(sub, scc=sccs)
    first_clause = {}
    for i, c in enumerate(p.clauses):
        first_clause.setdefault(c.head.pred, i)

    def signature(node):
        return (frozenset(cond.predecessors(node)), frozenset(cond.successors(node)))

    groups: dict = {}
    for node in cond.nodes:
        groups.setdefault(signature(node), []).append(node)
    merged = nx.DiGraph()
    owner = {}
    for members in groups.values():
        key = frozenset().union(*(cond.nodes[m]["members"] for m in members))
        merged.add_node(key)
        for m in members:
            owner[m] = key
    for a, b in cond.edges:
        merged.add_edge(owner[a], owner[b])
    order = list(nx.lexicographical_topological_sort(
        merged, key=lambda s: min(first_clause[q] for q in s)))
    comps = [Component(s, subprogram(p, s)) for s in order]
    reach = {s: nx.descendants(merged, s) for s in order}
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            if i != j and b not in reach[a] and a not in reach[b]:
                comps[i].side_by_side.add(j)
    return comps


def union_program(parts) -> Program:
    clauses, tab, modes = [], set(), {}
    for q in parts:
        clauses.extend(q.clauses)
        tab |= q.tabling
        modes.update(q.modes)
    return make_program(clauses, tab, modes, ())


def extends_below(comps: list) -> bool:
    """Check that every component extends the union of those below it."""
    for i in range(len(comps) - 1):
        lower = union_program([c.program for c in comps[i + 1:]])
        if not check_extends(comps[i].program, lower):
            return False
    return True
