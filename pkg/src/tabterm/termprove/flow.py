"""Unification-based type graph over argument positions.

Every argument position and clause variable gets a node; placing a term
in a node records its principal functor and (recursively) the nodes of
its arguments, and unification merges nodes. The resulting regular type
graph over-approximates the terms that can appear at each position.

It is used to decide which functor coefficients a norm really needs to
measure: a position whose type graph has no cycle can only hold finitely
many terms.
"""

from __future__ import annotations

import networkx as nx

from ..syntax import BUILTINS, Atom, Compound, Pred, Program, Var


class TypeGraph:
    def __init__(self):
        self.parent: list = []
        self.children: list = []   # node -> {functor Pred: [child nodes]}
        self.cells: dict = {}

    def new(self) -> int:
        self.parent.append(len(self.parent))
        self.children.append({})
        return len(self.parent) - 1

    def find(self, n: int) -> int:
        root = n
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[n] != root:
            self.parent[n], n = root, self.parent[n]
        return root

    def cell(self, key) -> int:
        if key not in self.cells:
            self.cells[key] = self.new()
        return self.find(self.cells[key])

    def union(self, a: int, b: int):
        work = [(a, b)]
        while work:
            x, y = (self.find(n) for n in work.pop())
            if x == y:
                continue
            self.parent[y] = x
            cx, cy = self.children[x], self.children[y]
            for f, kids in cy.items():
                if f in cx:
                    work.extend(zip(cx[f], kids))
                else:
                    cx[f] = kids
            self.children[y] = {}

    def place(self, node: int, t, env: dict):
        """Record that term ``t`` may occur at ``node``."""
        if isinstance(t, Var):
            key = env.get(t)
            if key is None:
                env[t] = node
            else:
                self.union(key, node)
            return
        if not isinstance(t, Compound):
            return
        node = self.find(node)
        f = Pred(t.functor, len(t.args))
        kids = self.children[node].get(f)
        if kids is None:
            kids = self.children[node][f] = [self.new() for _ in t.args]
        for k, a in zip(kids, t.args):
            self.place(k, a, env)

    def successors(self, n: int):
        for f, kids in self.children[self.find(n)].items():
            for i, k in enumerate(kids, start=1):
                yield f, i, self.find(k)

    def reach(self, n: int) -> set:
        seen, stack = set(), [self.find(n)]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(k for _, _, k in self.successors(x))
        return seen

    def cyclic_nodes(self) -> set:
        """Nodes lying on a cycle of the type graph."""
        g = nx.DiGraph()
        for n in {self.find(i) for i in range(len(self.parent))}:
            g.add_node(n)
            for _, _, k in self.successors(n):
                g.add_edge(n, k)
        out = set()
        for comp in nx.strongly_connected_components(g):
            if len(comp) > 1 or any(g.has_edge(n, n) for n in comp):
                out |= comp
        return out


def build_type_graph(p: Program, queries=None) -> TypeGraph:
    tg = TypeGraph()
    sources = [(c.head,) + c.body for c in p.clauses]
    sources += [(q,) for q in (p.queries if queries is None else queries)]
    for atoms in sources:
        env: dict = {}
        for a in atoms:
            _place_atom(tg, a, env)
    return tg


def _place_atom(tg: TypeGraph, a: Atom, env: dict):
    if a.pred == Pred("=", 2):
        n = tg.new()
        tg.place(n, a.args[0], env)
        tg.place(n, a.args[1], env)
        return
    if a.pred in BUILTINS:
        return
    for i, t in enumerate(a.args, start=1):
        tg.place(tg.cell((a.pred, i)), t, env)


def bounded_position(tg: TypeGraph, pred: Pred, i: int, cyclic=None) -> bool:
    """True when only finitely many terms can occur at argument ``i`` of ``pred``."""
    cyclic = tg.cyclic_nodes() if cyclic is None else cyclic
    return not (tg.reach(tg.cell((pred, i))) & cyclic)


def required_functor_coeffs(tg: TypeGraph, positions) -> set:
    """Functor coefficient indices a norm must make nonzero.

    For the given argument positions, a functor at a node on a cycle needs
    its constant part (index 0), and any functor argument that can lead
    back to a cycle needs its weight. Everything else only ever holds
    finitely many subterms and may be ignored by the norm.
    """
    cyclic = tg.cyclic_nodes()
    leads_to_cycle: dict = {}

    def unbounded(n: int) -> bool:
        n = tg.find(n)
        if n not in leads_to_cycle:
            leads_to_cycle[n] = bool(tg.reach(n) & cyclic)
        return leads_to_cycle[n]

    out = set()
    for pred, i in positions:
        for n in tg.reach(tg.cell((pred, i))):
            for f, kids in tg.children[n].items():
                if n in cyclic:
                    out.add((f, 0))
                for j, k in enumerate(kids, start=1):
                    if unbounded(k):
                        out.add((f, j))
    return out
