"""Proof pipelines and modular composition of certificates."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..analysis import (AnalysisBudgetExceeded, build_dep_graph,
                        check_extends, check_simply_moded, check_well_moded,
                        check_well_chosen)
from ..engine import Budget, lg_evaluate
from ..syntax import Program, make_program, render_atom
from .certificate import (Certificate, check_constraint, check_mapping,
                          fingerprint, role_constraints)
from .constraints import DECREASE, eliminate
from .solver import solve
from .symbolic import PRED, EXT, program_symbols

PROVED = "Proved"
UNPROVED = "UnprovedWithinBound"
INAPPLICABLE = "Inapplicable"


class ExtendsViolation(ValueError):
    pass


class CompositionRejected(ValueError):
    def __init__(self, message: str, statuses):
        super().__init__(message)
        self.statuses = statuses


@dataclass
class ProofReport:
    verdict: str
    role: str
    reason: str = ""
    certificate: Optional[Certificate] = None
    statuses: list = field(default_factory=list)
    modes: dict = field(default_factory=dict)
    well_chosen: dict = field(default_factory=dict)
    cross_check: list = field(default_factory=list)
    constraint_count: int = 0
    bound: int = 2
    seconds: float = 0.0

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "role": self.role,
            "reason": self.reason,
            "bound": self.bound,
            "constraints": self.constraint_count,
            "failed_constraints": [s.to_dict() for s in self.statuses if not s.ok],
            "certificate": self.certificate.to_json() if self.certificate else None,
            "modes": self.modes,
            "well_chosen": self.well_chosen,
            "cross_check": self.cross_check,
        }


def _mode_summary(p: Program, goals) -> dict:
    wm = check_well_moded(p, goals)
    sm = check_simply_moded(p, goals)

    def fails(r):
        return [f"{v.kind} {v.index + 1}: {v.reason}" for v in r.failures]

    return {"well_moded": wm.ok, "simply_moded": sm.ok,
            "failures": fails(wm) + fails(sm)}


def _well_chosen_summary(p: Program) -> dict:
    try:
        wc = check_well_chosen(build_dep_graph(p), p.tabling)
    except AnalysisBudgetExceeded as exc:
        return {"ok": None, "witness": None, "note": str(exc)}
    wit = [str(x) for x in wc.witness] if wc.witness else None
    return {"ok": wc.ok, "witness": wit}


def cross_check(p: Program, goals, budget: Budget = Budget()) -> list:
    """Run the tabled engine on each goal; empirical evidence only."""
    out = []
    for g in goals:
        f, o = lg_evaluate(p, g, budget, keep_nodes=False)
        out.append({"query": render_atom(g), **o.to_dict()})
    return out


def _prove(p: Program, goals, k: int, role: str, budget: Optional[Budget]) -> ProofReport:
    start = time.perf_counter()
    goals = tuple(p.queries if goals is None else goals)
    rep = ProofReport(INAPPLICABLE, role, bound=k)
    rep.modes = _mode_summary(p, goals)
    rep.well_chosen = _well_chosen_summary(p)
    if not goals:
        rep.reason = "no query given"
    elif not (rep.modes["well_moded"] and rep.modes["simply_moded"]):
        rep.reason = "mode check failed"
    else:
        # the literal conditions first, then with bounded inputs exempted
        for exempt in (False, True):
            target, cs = role_constraints(p, role, goals, exempt)
            rep.constraint_count = len(cs)
            mapping = solve(program_symbols(target), [eliminate(c) for c in cs], k)
            if mapping is None:
                rep.verdict = UNPROVED
                rep.reason = f"no symbol mapping into 0..{k}"
                continue
            rep.statuses = [check_constraint(c, mapping) for c in cs]
            if all(s.ok for s in rep.statuses):
                rep.verdict = PROVED
                rep.reason = "bounded input positions left unmeasured" if exempt else ""
                rep.certificate = Certificate(mapping, fingerprint(p), k, role, exempt)
                break
            rep.verdict = UNPROVED
            rep.reason = "solver result rejected by the checker"
    if budget is not None and goals:
        rep.cross_check = cross_check(p, goals, budget)
    rep.seconds = time.perf_counter() - start
    return rep


def prove_quasi(p: Program, goals=None, k: int = 2, budget: Optional[Budget] = Budget()) -> ProofReport:
    """Look for a rigid level mapping proving quasi-termination.

    Pass ``budget=None`` to skip the engine cross-check.
    """
    return _prove(p, goals, k, "quasi", budget)


def prove_lg(p: Program, goals=None, k: int = 2, budget: Optional[Budget] = Budget()) -> ProofReport:
    """Prove LG-termination via quasi-termination of the answer transform."""
    return _prove(p, goals, k, "lg", budget)


# ---------------------------------------------------------------- composition

def _with_queries(p: Program, goals) -> Program:
    return make_program(p.clauses, p.tabling, p.modes, tuple(goals))


def _union(a: Program, b: Program, goals) -> Program:
    modes = dict(b.modes)
    modes.update(a.modes)
    return make_program(a.clauses + b.clauses, a.tabling | b.tabling, modes, tuple(goals))


def calls_into(p: Program, r: Program) -> tuple:
    """Body atoms of ``p`` over predicates defined in ``r`` (as call templates)."""
    out = []
    for c in p.clauses:
        out += [b for b in c.body if b.pred in r.defined and b not in out]
    return tuple(out)


@dataclass
class Composition:
    certificate: Certificate
    program: Program
    statuses: list
    parts: dict   # sub-condition name -> list of statuses

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.statuses)


def _split_statuses(statuses, upper: Program, lower: Program, union: Program) -> dict:
    n_upper = len(upper.clauses)
    parts = {"base": [], "upper_decrease": [], "link_domination": [], "other": []}
    for s in statuses:
        c = s.constraint
        if c.clause is not None and c.clause >= n_upper:
            parts["base"].append(s)
        elif c.kind == DECREASE and c.pred in upper.defined:
            parts["upper_decrease"].append(s)
        elif c.kind == DECREASE:
            parts["link_domination"].append(s)
        elif c.clause is None and c.pred is not None and c.pred in lower.defined:
            parts["base"].append(s)
        else:
            parts["other"].append(s)
    return parts


def compose_sum(upper: Program, lower: Program, base: Certificate, upper_level: dict,
                link_level: dict, ext: Optional[dict] = None, goals=None) -> Composition:
    """Combine a certificate for ``lower`` with level mappings for ``upper``.

    Predicate coefficients of predicates defined in ``upper`` are the sum
    of ``upper_level`` and ``link_level``; every other symbol keeps the
    value from ``base``. Extended coefficients for the upper predicates
    come from ``ext`` (default 0, the always-valid trivial relation).
    The union is then re-checked; finite partitioning of bounded input
    positions is discharged by the type graph instead of a nonzero weight.
    """
    if not check_extends(upper, lower):
        raise ExtendsViolation("the upper program defines a predicate used by the lower one")
    base_goals = calls_into(upper, lower)
    base_status = check_mapping(_with_queries(lower, base_goals), base.mapping, base.role)
    goals = tuple(upper.queries if goals is None else goals)
    union = _union(upper, lower, goals)
    mapping = {s: base.mapping.get(s, 0) for s in program_symbols(union)}
    upper_keys = {(q.name, q.arity) for q in upper.defined}
    for s in mapping:
        if (s.name, s.arity) in upper_keys:
            if s.kind == PRED:
                mapping[s] = upper_level.get(s, 0) + link_level.get(s, 0)
            elif s.kind == EXT:
                mapping[s] = (ext or {}).get(s, 0)
    statuses = check_mapping(union, mapping, "modular-component")
    parts = _split_statuses(statuses, upper, lower, union)
    parts["base_certificate"] = base_status
    cert = Certificate(mapping, fingerprint(union), base.bound, "modular-component")
    comp = Composition(cert, union, statuses, parts)
    failed = [s for s in statuses + base_status if not s.ok]
    if failed:
        raise CompositionRejected(f"{len(failed)} constraint(s) fail after composition: "
                                  + "; ".join(f"{s.origin}: {s.detail}" for s in failed[:3]), failed)
    return comp


def compose_min(p1: Program, c1: Certificate, p2: Program, c2: Certificate, goals=None) -> Composition:
    """Union certificate for two components that do not call each other.

    Coefficients of a predicate or functor known to only one side are
    copied; where both sides carry a value the smaller one is kept for
    predicate coefficients. A single norm is shared, so where the functor
    coefficients differ the larger values, then either side's values and
    finally the smaller values are tried, and the first choice that the
    union accepts is kept.
    """
    if not (check_extends(p1, p2) and check_extends(p2, p1)):
        raise ExtendsViolation("components are not independent of each other")
    goals = tuple(p1.queries + p2.queries if goals is None else goals)
    union = _union(p1, p2, goals)
    base, clash = {}, {}
    for s in program_symbols(union):
        vals = [c.mapping[s] for c in (c1, c2) if s in c.mapping]
        if not vals:
            base[s] = 0
        elif s.kind in (PRED, EXT) or len(set(vals)) == 1:
            base[s] = min(vals)
        else:
            clash[s] = vals
    choices = [max, lambda v: v[0], lambda v: v[1], min] if clash else [min]
    first = None
    for pick in choices:
        mapping = dict(base)
        mapping.update({s: pick(v) for s, v in clash.items()})
        statuses = check_mapping(union, mapping, "modular-component")
        cert = Certificate(mapping, fingerprint(union), max(c1.bound, c2.bound), "modular-component")
        comp = Composition(cert, union, statuses, {"union": statuses})
        if comp.ok:
            return comp
        first = first or statuses
    failed = [s for s in first if not s.ok]
    raise CompositionRejected(f"{len(failed)} constraint(s) fail on the union: "
                              + "; ".join(f"{s.origin}: {s.detail}" for s in failed[:3]), failed)
