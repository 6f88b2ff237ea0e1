"""Constraint generation and elimination of universal variables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

from ..analysis import (PairClass, build_dep_graph, classify_pair,
                        recursive_preds, reachable_preds)
from ..syntax import BUILTINS, Pred, Program
from .flow import bounded_position, build_type_graph, required_functor_coeffs
from .symbolic import (Ineq, Poly, functor_coeff, pred_coeff, size_expr,
                       symbolic_level)

# constraint kinds
VALIDITY = "validity"
DECREASE = "decrease"
OUTPUT = "output"
INPUT = "input"
FUNCTOR_KIND = "functor"


class SymbolCond(NamedTuple):
    symbol: object
    op: str          # "=0" or "!=0"

    def __str__(self) -> str:
        return f"{self.symbol} {'= 0' if self.op == '=0' else '!= 0'}"


@dataclass(frozen=True)
class SymConstraint:
    premises: tuple
    conclusion: object           # Ineq or SymbolCond
    origin: str
    kind: str
    clause: Optional[int] = None  # index into program.clauses
    atom: Optional[int] = None    # 1-based body position
    pred: Optional[Pred] = None   # predicate the constraint is about

    def __str__(self) -> str:
        if not self.premises:
            return str(self.conclusion)
        return " & ".join(str(p) for p in self.premises) + " => " + str(self.conclusion)


class Obligations(NamedTuple):
    """Which predicates carry which proof obligations."""

    reach: frozenset        # predicates whose outputs are ignored by the level
    partitioned: frozenset  # tabled predicates whose inputs must be measured
    lg_targets: Optional[frozenset]  # None: quasi mode; else the generated answer predicates


def goal_preds(goals) -> set:
    return {g.pred for g in goals if g.pred not in BUILTINS}


def obligations(p: Program, goals, role: str = "quasi", answer_preds=frozenset()) -> Obligations:
    g = build_dep_graph(p)
    roots = goal_preds(goals)
    reach = reachable_preds(g, roots) if roots else frozenset(p.predicates)
    if role == "lg":
        rec = recursive_preds(g)
        tabled = (p.tabling & rec) | frozenset(answer_preds)
        return Obligations(reach, reach & tabled, frozenset(answer_preds))
    return Obligations(reach, reach & p.tabling, None)


def gen_validity(p: Program) -> list:
    out = []
    for k, c in enumerate(p.clauses):
        prem = tuple(e for e in (size_expr(b, p) for b in c.body) if e is not None)
        concl = size_expr(c.head, p)
        out.append(SymConstraint(prem, concl, f"validity of clause {k + 1} ({c.head.pred})",
                                 VALIDITY, clause=k, pred=c.head.pred))
    return out


def gen_rigid_quasi(p: Program, reach=None, goals=None, role: str = "quasi",
                    answer_preds=frozenset(), exempt_bounded_inputs: bool = False) -> list:
    """Output, input, functor and decrease conditions for a rigid level mapping.

    ``role="lg"`` restricts decreases to body atoms in the head's SCC or
    over generated answer predicates, and requires measured inputs only on
    tabled recursive and answer predicates. With ``exempt_bounded_inputs``
    an input position that can only hold finitely many terms need not be
    measured.
    """
    goals = tuple(p.queries if goals is None else goals)
    ob = obligations(p, goals, role, answer_preds)
    if reach is not None:
        ob = ob._replace(reach=frozenset(reach), partitioned=frozenset(reach) & ob.partitioned)
    out = []
    for q in sorted(ob.reach):
        for i in p.outputs(q):
            out.append(SymConstraint((), SymbolCond(pred_coeff(q, i + 1), "=0"),
                                     f"{q} output argument {i + 1} is not measured", OUTPUT, pred=q))
    tg = build_type_graph(p, goals)
    cyclic = tg.cyclic_nodes()
    positions = []
    for q in sorted(ob.partitioned):
        for i in p.inputs(q):
            positions.append((q, i + 1))
            if exempt_bounded_inputs and bounded_position(tg, q, i + 1, cyclic):
                continue
            out.append(SymConstraint((), SymbolCond(pred_coeff(q, i + 1), "!=0"),
                                     f"{q} input argument {i + 1} is measured", INPUT, pred=q))
    for f, j in sorted(required_functor_coeffs(tg, positions)):
        out.append(SymConstraint((), SymbolCond(functor_coeff(f, j), "!=0"),
                                 f"functor {f} weight {j} is nonzero", FUNCTOR_KIND))
    out.extend(gen_decreases(p, ob))
    return out


def gen_decreases(p: Program, ob: Obligations) -> list:
    g = build_dep_graph(p)
    out = []
    for k, c in enumerate(p.clauses):
        h = c.head.pred
        head_level = symbolic_level(c.head)
        prem: list = []
        for i, b in enumerate(c.body, start=1):
            q = b.pred
            needed = q not in BUILTINS and (
                ob.lg_targets is None or g.same_scc(q, h) or q in ob.lg_targets)
            if needed:
                rel = ">=" if not _strict(p, g, h, q) else ">"
                out.append(SymConstraint(tuple(prem), Ineq(head_level, rel, symbolic_level(b)),
                                         f"clause {k + 1} ({h}) body atom {i} ({q})",
                                         DECREASE, clause=k, atom=i, pred=q))
            e = size_expr(b, p)
            if e is not None:
                prem.append(e)
    return out


def _strict(p: Program, g, h: Pred, q: Pred) -> bool:
    if q in p.tabling or not g.same_scc(h, q):
        return False
    if h in p.tabling:
        # every cycle through h passes the tabled predicate h itself
        return False
    return classify_pair(g, p.tabling, h, q) != PairClass.C2


# ---------------------------------------------------------------- elimination

class Alternative(NamedTuple):
    """One premise-multiplier choice: every ``poly >= bound`` must hold."""

    multipliers: tuple
    conditions: tuple    # of (Poly, int)


@dataclass(frozen=True)
class Eliminated:
    constraint: SymConstraint
    alternatives: tuple  # empty tuple: unsatisfiable; an empty Alternative: trivially true

    @property
    def trivial(self) -> bool:
        return any(not a.conditions for a in self.alternatives)


def premise_differences(premises) -> list:
    """Each premise as ``lhs - rhs >= 0`` forms; equalities give both directions.

    Returns a list of (premise index, sign, SymExpr).
    """
    out = []
    for j, e in enumerate(premises):
        d = e.lhs - e.rhs
        out.append((j, 1, d))
        if e.rel == "=":
            out.append((j, -1, -d))
    return out


def _simplify(conds) -> Optional[tuple]:
    """Drop trivially true conditions; None if one is trivially false."""
    kept = []
    for poly, bound in conds:
        nonconst = [c for m, c in poly.terms.items() if m]
        const = poly.constant()
        if all(c >= 0 for c in nonconst) and const >= bound:
            continue
        if all(c <= 0 for c in nonconst) and const < bound:
            return None
        kept.append((poly, bound))
    uniq = []
    for x in kept:
        if x not in uniq:
            uniq.append(x)
    return tuple(uniq)


def symbol_condition_alternatives(cond: SymbolCond) -> tuple:
    s = Poly.sym(cond.symbol)
    if cond.op == "=0":
        return (Alternative((), ((-s, 0),)),)
    return (Alternative((), ((s, 1),)),)


def eliminate(c: SymConstraint) -> Eliminated:
    """Turn a constraint into symbol-only alternatives (multipliers in {0,1})."""
    if isinstance(c.conclusion, SymbolCond):
        return Eliminated(c, symbol_condition_alternatives(c.conclusion))
    concl = c.conclusion
    diff = concl.lhs - concl.rhs
    bound = 1 if concl.rel == ">" else 0
    diffs = premise_differences(c.premises)
    alts, seen = [], set()
    for lam in itertools.product((0, 1), repeat=len(diffs)):
        used = [(j, s) for (j, s, _), l in zip(diffs, lam) if l]
        if len({j for j, _ in used}) < len(used):
            continue  # both directions of one equality cancel out
        rest = diff
        for (_, _, d), l in zip(diffs, lam):
            if l:
                rest = rest - d
        conds = [(coef, 0) for _, coef in sorted(rest.coeffs.items(), key=lambda vc: vc[0].id)]
        conds.append((rest.const, bound))
        simp = _simplify(conds)
        if simp is None:
            continue
        key = frozenset(simp)
        if key in seen:
            continue
        seen.add(key)
        alts.append(Alternative(tuple(used), simp))
        if not simp:
            return Eliminated(c, (alts[-1],))
    return Eliminated(c, tuple(alts))
