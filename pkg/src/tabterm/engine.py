"""Bounded LD resolution and variant-tabled LG resolution.

Both evaluators select the leftmost atom. The LG evaluator keeps one tree
per tabled call pattern (up to variance). Tabled atoms selected below a
tree root consume that table's answers. Everything else resolves against
the program clauses. Evaluations never raise on non-termination: they
stop at the first exhausted budget dimension and say which one it was.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .core import FreshSupply, apply, idempotent, rename_apart, unify_into, variant_key, VariantKey
from .syntax import Atom, Const, Pred, Program, Var, BUILTINS, term_vars

STEPS, DEPTH, TABLES, ANSWERS = "steps", "depth", "tables", "answers"
EQ = Pred("=", 2)
INTEGER = Pred("integer", 1)


@dataclass(frozen=True)
class Budget:
    max_steps: int = 100_000
    max_depth: int = 2_000
    max_tables: int = 256
    max_answers_per_table: int = 64

    def __post_init__(self):
        for name in ("max_steps", "max_depth", "max_tables", "max_answers_per_table"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class EvalOutcome:
    exhausted: list = field(default_factory=list)   # dimensions hit, in order
    num_trees: int = 0
    max_branch_depth: int = 0
    answers_per_tree: dict = field(default_factory=dict)
    total_steps: int = 0
    any_infinite_branch_suspected: bool = False
    any_answer_budget_hit: bool = False

    @property
    def completed(self) -> bool:
        return not self.exhausted

    @property
    def status(self) -> str:
        return "Completed" if self.completed else f"Exhausted({self.exhausted[0]})"

    def hit(self, dim: str):
        if dim not in self.exhausted:
            self.exhausted.append(dim)
        if dim == DEPTH:
            self.any_infinite_branch_suspected = True
        if dim == ANSWERS:
            self.any_answer_budget_hit = True

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "exhausted": list(self.exhausted),
            "num_trees": self.num_trees,
            "max_branch_depth": self.max_branch_depth,
            "answers_per_tree": dict(self.answers_per_tree),
            "total_steps": self.total_steps,
            "any_infinite_branch_suspected": self.any_infinite_branch_suspected,
            "any_answer_budget_hit": self.any_answer_budget_hit,
        }


class _Stop(Exception):
    pass


def _builtin_step(atom: Atom, occurs_check: bool):
    """Bindings for a builtin call, or None when it fails."""
    if atom.pred == EQ:
        s: dict = {}
        if unify_into(atom.args[0], atom.args[1], s, occurs_check):
            return idempotent(s, occurs_check)
        return None
    if atom.pred == INTEGER:
        t = atom.args[0]
        return {} if isinstance(t, Const) and isinstance(t.symbol, int) else None
    raise ValueError(f"unknown builtin {atom.pred}")


def _resolve(sel: Atom, clause_head: Atom, occurs_check: bool):
    if sel.predicate != clause_head.predicate or len(sel.args) != len(clause_head.args):
        return None
    s: dict = {}
    for x, y in zip(sel.args, clause_head.args):
        if not unify_into(x, y, s, occurs_check):
            return None
    return idempotent(s, occurs_check)


def _shape(t):
    if isinstance(t, Var):
        return None
    if isinstance(t, Const):
        return t
    return (t.functor, len(t.args))


def _index(program: Program) -> dict:
    """Clauses per predicate, each with the top-level shape of its head args."""
    out: dict = {}
    for c in program.clauses:
        out.setdefault(c.head.pred, []).append((tuple(_shape(a) for a in c.head.args), c))
    return out


def _may_match(shapes: tuple, sel: Atom) -> bool:
    for sh, a in zip(shapes, sel.args):
        if sh is None or isinstance(a, Var):
            continue
        if sh != _shape(a):
            return False
    return True


def _start_id(program: Program, goal) -> int:
    ids = [v.id for v in term_vars(goal)]
    return max([program.max_var_id()] + ids) + 1


# ---------------------------------------------------------------- LG

@dataclass
class TreeNode:
    id: int
    parent: Optional[int]
    goal: tuple
    template: Atom
    depth: int
    label: dict = field(default_factory=dict)   # bindings used on the arc from the parent
    kind: str = "root"                          # root | clause | answer | builtin


@dataclass
class LGTree:
    root: VariantKey
    root_atom: Atom
    tabled: bool
    nodes: list = field(default_factory=list)
    answers: list = field(default_factory=list)
    answer_keys: set = field(default_factory=set)
    consumers: list = field(default_factory=list)
    answer_budget_hit: bool = False

    def add_answer(self, atom: Atom, cap: int):
        k = variant_key(atom)
        if k in self.answer_keys:
            return False
        if len(self.answers) >= cap:
            self.answer_budget_hit = True
            return None
        self.answer_keys.add(k)
        self.answers.append(atom)
        return True


@dataclass
class LGForest:
    trees: dict                 # VariantKey -> LGTree, tabled subgoals only
    top: LGTree
    selected: set = field(default_factory=set)   # keys of every selected atom

    @property
    def all_trees(self) -> list:
        out = list(self.trees.values())
        if not self.top.tabled:
            out.insert(0, self.top)
        return out

    def to_dot(self, max_nodes: int = 500) -> str:
        lines = ["digraph forest {", "  node [shape=box, fontsize=10];"]
        count = 0
        for ti, t in enumerate(self.all_trees):
            lines.append(f'  subgraph cluster_{ti} {{ label="{t.root}";')
            for n in t.nodes:
                if count >= max_nodes:
                    break
                count += 1
                text = ", ".join(str(a) for a in n.goal) or "[]"
                text = text.replace('"', "'")
                lines.append(f'    t{ti}n{n.id} [label="{text}"];')
                if n.parent is not None:
                    lines.append(f'    t{ti}n{n.parent} -> t{ti}n{n.id} [label="{n.kind}"];')
            lines.append("  }")
        lines.append("}")
        return "\n".join(lines) + "\n"


class _LGRun:
    def __init__(self, program: Program, goal: Atom, budget: Budget, occurs_check: bool, keep_nodes: bool):
        self.p = program
        self.b = budget
        self.occurs = occurs_check
        self.keep = keep_nodes
        self.supply = FreshSupply(_start_id(program, goal))
        self.out = EvalOutcome()
        self.trees: dict = {}
        self.tasks: deque = deque()
        self.steps = 0
        self.selected: set = set()
        self.by_pred = _index(program)

    def new_tree(self, atom: Atom, tabled: bool) -> LGTree:
        key = variant_key(atom)
        root_atom = rename_apart(key.atom, self.supply)
        t = LGTree(key, root_atom, tabled)
        node = TreeNode(0, None, (root_atom,), root_atom, 0)
        t.nodes.append(node)
        self.tasks.append(("expand", t, node))
        return t

    def step(self):
        self.steps += 1
        if self.steps > self.b.max_steps:
            self.steps = self.b.max_steps
            self.out.hit(STEPS)
            raise _Stop

    def child(self, tree: LGTree, parent: TreeNode, goal: tuple, template: Atom, depth: int, label: dict, kind: str):
        self.step()
        node = TreeNode(len(tree.nodes), parent.id, goal, template, depth, label if self.keep else {}, kind)
        tree.nodes.append(node)
        if depth > self.out.max_branch_depth:
            self.out.max_branch_depth = depth
        self.tasks.append(("expand", tree, node))

    def add_answer(self, tree: LGTree, atom: Atom):
        r = tree.add_answer(atom, self.b.max_answers_per_table)
        if r is None:
            self.out.hit(ANSWERS)
        elif r:
            idx = len(tree.answers) - 1
            for cons_tree, cons_node in tree.consumers:
                self.tasks.append(("consume", cons_tree, cons_node, tree, idx))

    def expand(self, tree: LGTree, node: TreeNode):
        if not node.goal:
            self.add_answer(tree, node.template)
            return
        sel, rest = node.goal[0], node.goal[1:]
        self.selected.add(variant_key(sel))
        pred = sel.pred
        if pred in BUILTINS:
            s = _builtin_step(sel, self.occurs)
            if s is not None:
                self.child(tree, node, apply(s, rest), apply(s, node.template), node.depth, s, "builtin")
            return
        if pred in self.p.tabling and node.parent is not None:
            key = variant_key(sel)
            target = self.trees.get(key)
            if target is None:
                if len(self.trees) >= self.b.max_tables:
                    self.out.hit(TABLES)
                    return
                target = self.new_tree(sel, True)
                self.trees[key] = target
            target.consumers.append((tree, node))
            for idx in range(len(target.answers)):
                self.tasks.append(("consume", tree, node, target, idx))
            return
        if node.depth + 1 > self.b.max_depth:
            if self.by_pred.get(pred):
                self.out.hit(DEPTH)
            return
        for shapes, c in self.by_pred.get(pred, ()):
            if not _may_match(shapes, sel):
                continue
            c = rename_apart(c, self.supply)
            s = _resolve(sel, c.head, self.occurs)
            if s is None:
                continue
            self.child(tree, node, apply(s, c.body + rest), apply(s, node.template), node.depth + 1, s, "clause")

    def consume(self, tree: LGTree, node: TreeNode, source: LGTree, idx: int):
        ans = rename_apart(source.answers[idx], self.supply)
        s = _resolve(node.goal[0], ans, self.occurs)
        if s is None:
            return
        self.child(tree, node, apply(s, node.goal[1:]), apply(s, node.template), node.depth, s, "answer")

    def run(self, goal: Atom):
        tabled = goal.pred in self.p.tabling
        top = self.new_tree(goal, tabled)
        if tabled:
            self.trees[top.root] = top
        else:
            # the top tree of a non-tabled goal keeps the caller's variables
            top.root_atom = goal
            top.nodes[0] = TreeNode(0, None, (goal,), goal, 0)
            self.tasks[-1] = ("expand", top, top.nodes[0])
        try:
            while self.tasks:
                task = self.tasks.popleft()
                if task[0] == "expand":
                    self.expand(task[1], task[2])
                else:
                    self.consume(*task[1:])
        except _Stop:
            pass
        forest = LGForest(self.trees, top, self.selected)
        self.out.total_steps = self.steps
        self.out.num_trees = len(forest.all_trees)
        self.out.answers_per_tree = {str(t.root): len(t.answers) for t in forest.all_trees}
        if not self.keep:
            for t in forest.all_trees:
                t.nodes = t.nodes[:1]
        return forest, self.out


def lg_evaluate(program: Program, goal: Atom, budget: Budget = Budget(),
                occurs_check: bool = True, keep_nodes: bool = True):
    """Tabled evaluation of ``goal`` with variant tabling.

    Returns
    -------
    (LGForest, EvalOutcome)
        When the outcome is Completed the forest is the full LG-forest.
    """
    return _LGRun(program, goal, budget, occurs_check, keep_nodes).run(goal)


# ---------------------------------------------------------------- LD

@dataclass
class LDResult:
    answers: list
    outcome: EvalOutcome
    calls: set
    arcs: set
    nodes: list


def ld_explore(program: Program, goal, budget: Budget = Budget(), occurs_check: bool = True,
               stop_at_answers: bool = True, record_nodes: bool = False,
               collect_answers: bool = True) -> LDResult:
    """Depth-first exploration of the LD-tree of ``goal`` within ``budget``.

    ``goal`` is an atom or a tuple of atoms. Each goal entry remembers the
    call it descends from, which yields the direct-descendant arcs. With
    ``collect_answers`` off, answer instances are not built, which keeps
    long branches cheap.
    """
    goals = goal if isinstance(goal, tuple) else (goal,)
    template = goals[0] if len(goals) == 1 else Atom("goal", tuple(term_vars(goals)))
    if not collect_answers:
        template = Atom("answer")
    supply = FreshSupply(_start_id(program, goals))
    by_pred = _index(program)
    out = EvalOutcome(num_trees=1)
    answers, calls, arcs, nodes = [], set(), set(), []
    stack = [(tuple((g, None) for g in goals), template, 0)]
    steps = 0
    while stack:
        items, tmpl, depth = stack.pop()
        if record_nodes:
            nodes.append((variant_key((tuple(a for a, _ in items), tmpl)), depth))
        if not items:
            answers.append(tmpl)
            if stop_at_answers and len(answers) >= budget.max_answers_per_table:
                if stack:
                    out.hit(ANSWERS)
                break
            continue
        (sel, parent), rest = items[0], items[1:]
        key = variant_key(sel)
        calls.add(key)
        if parent is not None:
            arcs.add((parent, key))
        children = []
        if sel.pred in BUILTINS:
            s = _builtin_step(sel, occurs_check)
            if s is not None:
                children.append((tuple((apply(s, a), pk) for a, pk in rest), apply(s, tmpl), depth))
        else:
            clauses = by_pred.get(sel.pred, ())
            if clauses and depth + 1 > budget.max_depth:
                out.hit(DEPTH)
                clauses = ()
            for shapes, c in clauses:
                if not _may_match(shapes, sel):
                    continue
                c = rename_apart(c, supply)
                s = _resolve(sel, c.head, occurs_check)
                if s is None:
                    continue
                new = tuple((apply(s, b), key) for b in c.body) + tuple((apply(s, a), pk) for a, pk in rest)
                children.append((new, apply(s, tmpl), depth + 1))
        stop = False
        for ch in children:
            steps += 1
            if steps > budget.max_steps:
                steps = budget.max_steps
                out.hit(STEPS)
                stop = True
                break
            if ch[2] > out.max_branch_depth:
                out.max_branch_depth = ch[2]
        if stop:
            break
        stack.extend(reversed(children))
    out.total_steps = steps
    out.answers_per_tree = {str(variant_key(template)): len(answers)}
    return LDResult(answers, out, calls, arcs, nodes)


def ld_solutions(program: Program, goal: Atom, budget: Budget = Budget(), occurs_check: bool = True):
    """Computed answers (as instances of ``goal``) in depth-first order."""
    r = ld_explore(program, goal, budget, occurs_check)
    return r.answers, r.outcome


def call_set_sample(program: Program, goal: Atom, budget: Budget = Budget(), occurs_check: bool = True) -> set:
    """Variant keys of atoms selected during a bounded LD exploration."""
    return ld_explore(program, goal, budget, occurs_check, stop_at_answers=False,
                      collect_answers=False).calls


@dataclass
class CallGraph:
    nodes: set
    arcs: set
    outcome: EvalOutcome

    def to_dot(self) -> str:
        ids = {k: i for i, k in enumerate(sorted(self.nodes, key=str))}
        lines = ["digraph callgraph {"]
        for k, i in ids.items():
            lines.append(f'  n{i} [label="{str(k)}"];')
        for a, b in sorted(self.arcs, key=lambda ab: (str(ab[0]), str(ab[1]))):
            lines.append(f"  n{ids[a]} -> n{ids[b]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def call_graph_sample(program: Program, goal: Atom, budget: Budget = Budget(), occurs_check: bool = True) -> CallGraph:
    r = ld_explore(program, goal, budget, occurs_check, stop_at_answers=False, collect_answers=False)
    return CallGraph(r.calls, r.arcs, r.outcome)


@dataclass(frozen=True)
class ForestStats:
    num_trees: int
    answers: dict
    max_depth: int
    num_nodes: int


def forest_stats(f: LGForest) -> ForestStats:
    trees = f.all_trees
    return ForestStats(
        num_trees=len(trees),
        answers={str(t.root): len(t.answers) for t in trees},
        max_depth=max((n.depth for t in trees for n in t.nodes), default=0),
        num_nodes=sum(len(t.nodes) for t in trees),
    )


def answer_keys(atoms) -> set:
    return {variant_key(a) for a in atoms}
