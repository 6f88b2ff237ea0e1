"""Dependency-graph analyses and mode discipline checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import networkx as nx

from .syntax import BUILTINS, Atom, Compound, Pred, Program, Var, term_vars

CYCLE_CAP = 10 ** 6
EQ_PRED = Pred("=", 2)


class AnalysisBudgetExceeded(RuntimeError):
    """Simple-cycle enumeration went past the configured cap."""


class PairClass(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    NOT_MUTUAL = "NotMutuallyRecursive"


@dataclass
class DepGraph:
    """Predicate dependency graph: arc (p, q) when a p-clause calls q."""

    nodes: frozenset
    arcs: frozenset
    graph: nx.DiGraph = field(repr=False)
    sccs: list = field(repr=False)
    scc_of: dict = field(repr=False)

    def successors(self, p: Pred) -> set:
        return set(self.graph.successors(p))

    def same_scc(self, p: Pred, q: Pred) -> bool:
        return p == q or self.scc_of.get(p) == self.scc_of.get(q)

    def condensation_order(self) -> list:
        """SCCs listed callers first (topological order of the condensation)."""
        cond = nx.condensation(self.graph, scc=self.sccs)
        return [frozenset(cond.nodes[i]["members"]) for i in nx.topological_sort(cond)]

    def to_dot(self, tabling: Iterable[Pred] = ()) -> str:
        tab = set(tabling)
        lines = ["digraph deps {"]
        for p in sorted(self.nodes):
            shape = "box" if p in tab else "ellipse"
            lines.append(f'  "{p}" [shape={shape}];')
        for p, q in sorted(self.arcs):
            lines.append(f'  "{p}" -> "{q}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_dep_graph(p: Program) -> DepGraph:
    g = nx.DiGraph()
    g.add_nodes_from(p.predicates)
    for c in p.clauses:
        for b in c.body:
            if b.pred not in BUILTINS:
                g.add_edge(c.head.pred, b.pred)
    sccs = [frozenset(s) for s in nx.strongly_connected_components(g)]
    scc_of = {}
    for i, s in enumerate(sccs):
        for n in s:
            scc_of[n] = i
    return DepGraph(frozenset(g.nodes), frozenset(g.edges), g, sccs, scc_of)


def graph_from_arcs(nodes: Iterable, arcs: Iterable) -> DepGraph:
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(arcs)
    sccs = [frozenset(s) for s in nx.strongly_connected_components(g)]
    scc_of = {n: i for i, s in enumerate(sccs) for n in s}
    return DepGraph(frozenset(g.nodes), frozenset(g.edges), g, sccs, scc_of)


def recursive_preds(g: DepGraph) -> frozenset:
    out = set()
    for s in g.sccs:
        if len(s) > 1:
            out |= s
        else:
            (n,) = s
            if g.graph.has_edge(n, n):
                out.add(n)
    return frozenset(out)


def reachable_preds(g: DepGraph, roots: Iterable[Pred]) -> frozenset:
    out = set()
    for r in roots:
        if r in g.graph:
            out.add(r)
            out |= nx.descendants(g.graph, r)
    return frozenset(out)


def _walk_class(g: DepGraph, tab: set, p: Pred, q: Pred) -> PairClass:
    # closed-walk reading: used when no simple cycle holds both p and q
    scc = g.sccs[g.scc_of[p]]
    if not (scc & tab):
        return PairClass.C1
    reduced = g.graph.subgraph(n for n in scc if n not in tab)
    comps = nx.strongly_connected_components(reduced)
    for comp in comps:
        if p in comp and q in comp and (p != q or len(comp) > 1 or reduced.has_edge(p, p)):
            return PairClass.C3
    return PairClass.C2


def _cycle_verdict(has_free: bool, has_tab: bool) -> Optional[PairClass]:
    if has_free and has_tab:
        return PairClass.C3
    if has_tab:
        return PairClass.C2
    if has_free:
        return PairClass.C1
    return None


def classify_pair(g: DepGraph, tab: Iterable[Pred], p: Pred, q: Pred,
                  cap: int = CYCLE_CAP) -> PairClass:
    """Classify a pair of non-tabled, mutually recursive predicates.

    C1 when no simple cycle through both contains a tabled predicate, C2
    when every such cycle does, C3 when both kinds exist.
    """
    tab = set(tab)
    if p in tab or q in tab or p not in g.scc_of or q not in g.scc_of:
        return PairClass.NOT_MUTUAL
    if not g.same_scc(p, q):
        return PairClass.NOT_MUTUAL
    scc = g.sccs[g.scc_of[p]]
    sub = g.graph.subgraph(scc)
    has_free = has_tab = False
    # cheap necessary condition for a tabled-free cycle through both
    reduced = sub.subgraph(n for n in scc if n not in tab)
    free_possible = any(p in c and q in c for c in nx.strongly_connected_components(reduced)) \
        or (p == q and reduced.has_edge(p, p))
    tab_possible = bool(scc & tab)
    count = 0
    for cyc in nx.simple_cycles(sub):
        count += 1
        if count > cap:
            raise AnalysisBudgetExceeded(f"more than {cap} simple cycles in the component of {p}")
        nodes = set(cyc)
        if p in nodes and q in nodes:
            if nodes & tab:
                has_tab = True
            else:
                has_free = True
        if (has_free or not free_possible) and (has_tab or not tab_possible):
            break
    verdict = _cycle_verdict(has_free, has_tab)
    return verdict if verdict is not None else _walk_class(g, tab, p, q)


def brute_force_classify(nodes: Iterable, arcs: Iterable, tab: Iterable, p, q) -> PairClass:
    """Reference classifier that enumerates simple cycles by plain DFS.

    Intended for tiny graphs; it shares no code with :func:`classify_pair`
    apart from the fallback rule for pairs lying on no common cycle.
    """
    nodes = sorted(set(nodes))
    arcs = set(arcs)
    tab = set(tab)
    succ = {n: [m for m in nodes if (n, m) in arcs] for n in nodes}
    order = {n: i for i, n in enumerate(nodes)}
    cycles = []

    def extend(start, path, seen):
        last = path[-1]
        for m in succ[last]:
            if m == start:
                cycles.append(list(path))
            elif m not in seen and order[m] > order[start]:
                seen.add(m)
                path.append(m)
                extend(start, path, seen)
                path.pop()
                seen.discard(m)

    for s in nodes:
        extend(s, [s], {s})

    # mutual recursion via reachability, computed by hand
    def reach(a):
        out, stack = set(), [a]
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y not in out:
                    out.add(y)
                    stack.append(y)
        return out

    if p in tab or q in tab:
        return PairClass.NOT_MUTUAL
    if p != q and not (q in reach(p) and p in reach(q)):
        return PairClass.NOT_MUTUAL
    has_free = has_tab = False
    for cyc in cycles:
        cs = set(cyc)
        if p in cs and q in cs:
            if cs & tab:
                has_tab = True
            else:
                has_free = True
    verdict = _cycle_verdict(has_free, has_tab)
    if verdict is not None:
        return verdict
    return _walk_class(graph_from_arcs(nodes, arcs), tab, p, q)


@dataclass(frozen=True)
class WellChosen:
    ok: bool
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def check_well_chosen(g: DepGraph, tab: Iterable[Pred], cap: int = CYCLE_CAP) -> WellChosen:
    """No pair of non-tabled mutually recursive predicates may be C3.

    Distinct pairs are examined before a predicate paired with itself, so
    the witness names two predicates whenever possible.
    """
    tab = set(tab)
    rec = recursive_preds(g)
    diagonal = []
    for scc in sorted(g.sccs, key=lambda s: sorted(s)):
        members = sorted(n for n in scc if n not in tab and n in rec)
        for i, p in enumerate(members):
            for q in members[i + 1:]:
                if classify_pair(g, tab, p, q, cap) is PairClass.C3:
                    return WellChosen(False, (p, q))
            diagonal.append(p)
    for p in diagonal:
        if classify_pair(g, tab, p, p, cap) is PairClass.C3:
            return WellChosen(False, (p, p))
    return WellChosen(True)


def check_extends(p: Program, r: Program) -> bool:
    """True when no predicate defined in ``p`` occurs anywhere in ``r``."""
    occurring = set(r.predicates)
    return not (p.defined & occurring)


# ---------------------------------------------------------------- modes

@dataclass(frozen=True)
class ModeVerdict:
    kind: str           # "clause" or "query"
    index: int
    ok: bool
    atom_index: Optional[int] = None   # 1-based body position, n+1 for the head
    positions: tuple = ()
    reason: str = ""


@dataclass(frozen=True)
class ModeReport:
    verdicts: tuple

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    @property
    def failures(self) -> list:
        return [v for v in self.verdicts if not v.ok]

    def __bool__(self) -> bool:
        return self.ok


def _split(p: Program, atom: Atom):
    mode = p.mode(atom.pred)
    ins = [(i, atom.args[i]) for i, m in enumerate(mode) if m.value == "i"]
    outs = [(i, atom.args[i]) for i, m in enumerate(mode) if m.value == "o"]
    return ins, outs


def _vset(terms) -> set:
    return set(term_vars([t for _, t in terms]))


def _well_moded_clause(p: Program, head: Optional[Atom], body, kind, idx) -> ModeVerdict:
    if head is not None:
        h_in, h_out = _split(p, head)
    else:
        h_in, h_out = [], []
    known = _vset(h_in)
    for i, b in enumerate(body, start=1):
        ins, outs = _split(p, b)
        bad = tuple(j for j, t in ins if not set(term_vars(t)) <= known)
        if bad:
            return ModeVerdict(kind, idx, False, i, bad, f"input of {b} not produced earlier")
        known |= _vset(outs)
    bad = tuple(j for j, t in h_out if not set(term_vars(t)) <= known)
    if bad:
        return ModeVerdict(kind, idx, False, len(body) + 1, bad, "head output not produced by the body")
    return ModeVerdict(kind, idx, True)


def _output_vars(b: Atom, t) -> Optional[list]:
    """Variables of an output term, or None when the term is not allowed there.

    Ordinary outputs must be variables. The output side of ``=`` may be any
    linear term, since unifying it with the ground input only binds its
    fresh variables.
    """
    if isinstance(t, Var):
        return [t]
    if b.pred == EQ_PRED:
        occ = _var_occurrences(t, [])
        if len(occ) == len(set(occ)):
            return occ
    return None


def _var_occurrences(t, acc: list) -> list:
    if isinstance(t, Var):
        acc.append(t)
    elif isinstance(t, Compound):
        for a in t.args:
            _var_occurrences(a, acc)
    return acc


def _simply_moded_clause(p: Program, head: Optional[Atom], body, kind, idx) -> ModeVerdict:
    seen_out: set = set()
    for i, b in enumerate(body, start=1):
        _, outs = _split(p, b)
        for j, t in outs:
            vs = _output_vars(b, t)
            if vs is None or seen_out & set(vs):
                why = "output is not a variable" if vs is None else "output variable repeated"
                return ModeVerdict(kind, idx, False, i, (j,), why)
            seen_out.update(vs)
    seen_in = _vset(_split(p, head)[0]) if head is not None else set()
    for i, b in enumerate(body, start=1):
        ins, outs = _split(p, b)
        seen_in |= _vset(ins)
        clash = tuple(j for j, t in outs if set(term_vars(t)) & seen_in)
        if clash:
            return ModeVerdict(kind, idx, False, i, clash, "output variable occurs in an earlier or same input")
    return ModeVerdict(kind, idx, True)


def _check(p: Program, checker, queries) -> ModeReport:
    out = [checker(p, c.head, c.body, "clause", k) for k, c in enumerate(p.clauses)]
    qs = p.queries if queries is None else queries
    out += [checker(p, None, (q,), "query", k) for k, q in enumerate(qs)]
    return ModeReport(tuple(out))


def check_well_moded(p: Program, queries: Optional[Iterable[Atom]] = None) -> ModeReport:
    """Well-modedness of every clause and query (queries default to the declared ones)."""
    return _check(p, _well_moded_clause, None if queries is None else tuple(queries))


def check_simply_moded(p: Program, queries: Optional[Iterable[Atom]] = None) -> ModeReport:
    return _check(p, _simply_moded_clause, None if queries is None else tuple(queries))


def check_goal_moded(p: Program, goals: Iterable) -> tuple:
    """Well- and simply-modedness of a conjunctive goal via a dummy 0-ary head."""
    goals = tuple(goals)
    return (_well_moded_clause(p, None, goals, "query", 0),
            _simply_moded_clause(p, None, goals, "query", 0))
