"""Certificates: serialized symbol mappings and their independent checker."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

from ..syntax import Pred, Program, render
from ..transform import a_transform
from .constraints import (SymbolCond, SymConstraint, gen_rigid_quasi,
                          gen_validity)
from .symbolic import EXT, FUNCTOR, PRED, SymbolId, program_symbols

ROLES = ("quasi", "lg", "modular-component")

# the checker accepts nonnegative integer premise multipliers up to this
# value; the solver only ever uses 0 and 1
CHECK_MULTIPLIER = 3


class FingerprintMismatch(ValueError):
    pass


def fingerprint(p: Program) -> str:
    """sha256 over the canonical rendering (clauses, tabling, modes, queries)."""
    return hashlib.sha256(render(p).encode("utf-8")).hexdigest()


@dataclass
class Certificate:
    mapping: dict
    fingerprint: str
    bound: int
    role: str = "quasi"
    # input positions holding only finitely many terms were left unmeasured
    exempt_bounded_inputs: bool = False

    @property
    def exempt(self) -> bool:
        return self.exempt_bounded_inputs or self.role == "modular-component"

    def to_json(self) -> dict:
        doc = {"fingerprint": self.fingerprint, "bound": self.bound, "role": self.role,
               "functor_coeffs": {}, "pred_coeffs": {}, "ext_pred_coeffs": {}}
        if self.exempt_bounded_inputs:
            doc["exempt_bounded_inputs"] = True
        groups = {FUNCTOR: "functor_coeffs", PRED: "pred_coeffs", EXT: "ext_pred_coeffs"}
        for s in sorted(self.mapping, key=SymbolId.sort_key):
            key = str(Pred(s.name, s.arity))
            size = s.arity if s.kind == PRED else s.arity + 1
            arr = doc[groups[s.kind]].setdefault(key, [0] * size)
            arr[s.index - 1 if s.kind == PRED else s.index] = self.mapping[s]
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> "Certificate":
        mapping = {}
        for kind, key in ((FUNCTOR, "functor_coeffs"), (PRED, "pred_coeffs"), (EXT, "ext_pred_coeffs")):
            for name, arr in doc.get(key, {}).items():
                f = Pred.parse(name)
                first = 1 if kind == PRED else 0
                for i, v in enumerate(arr, start=first):
                    if not isinstance(v, int) or v < 0:
                        raise ValueError(f"coefficient {name}[{i}] must be a natural number")
                    mapping[SymbolId(kind, f.name, f.arity, i)] = v
        role = doc.get("role", "quasi")
        if role not in ROLES:
            raise ValueError(f"unknown certificate role {role!r}")
        return cls(mapping, doc.get("fingerprint", ""), int(doc.get("bound", 2)), role,
                   bool(doc.get("exempt_bounded_inputs", False)))

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        return cls.from_json(json.loads(text))

    def total_over(self, symbols) -> dict:
        """The mapping extended with 0 for symbols it does not mention."""
        return {s: self.mapping.get(s, 0) for s in symbols}


@dataclass
class ConstraintStatus:
    origin: str
    kind: str
    ok: bool
    detail: str = ""
    constraint: Optional[SymConstraint] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"origin": self.origin, "kind": self.kind, "ok": self.ok, "detail": self.detail}


def role_program(p: Program, role: str):
    """Program whose constraints a certificate of ``role`` answers for."""
    if role == "lg":
        pa, tmap = a_transform(p)
        return pa, tmap.generated
    return p, frozenset()


def role_constraints(p: Program, role: str, goals=None, exempt: Optional[bool] = None) -> tuple:
    target, generated = role_program(p, role)
    goals = tuple(p.queries if goals is None else goals)
    cs = gen_validity(target) + gen_rigid_quasi(
        target, goals=goals, role="lg" if role == "lg" else "quasi", answer_preds=generated,
        exempt_bounded_inputs=(role == "modular-component") if exempt is None else exempt)
    return target, cs


def _linear(expr, mapping):
    return ({v: c.evaluate(mapping) for v, c in expr.coeffs.items()}, expr.const.evaluate(mapping))


def _sub(a, b, lam):
    coeffs = dict(a[0])
    for v, c in b[0].items():
        coeffs[v] = coeffs.get(v, 0) - lam * c
    return coeffs, a[1] - lam * b[1]


def check_constraint(c: SymConstraint, mapping: dict) -> ConstraintStatus:
    """Evaluate one constraint under a concrete mapping.

    Premises and conclusion become linear forms with integer coefficients;
    the implication holds when some nonnegative integer combination of the
    premises (equalities may be used in either direction) leaves only
    nonnegative coefficients and a large enough constant.
    """
    if isinstance(c.conclusion, SymbolCond):
        v = mapping[c.conclusion.symbol]
        ok = v == 0 if c.conclusion.op == "=0" else v != 0
        return ConstraintStatus(c.origin, c.kind, ok, "" if ok else f"{c.conclusion} fails: value {v}", c)
    concl = c.conclusion
    target = _sub(_linear(concl.lhs, mapping), _linear(concl.rhs, mapping), 1)
    bound = 1 if concl.rel == ">" else 0
    prem = [_sub(_linear(e.lhs, mapping), _linear(e.rhs, mapping), 1) for e in c.premises]
    ranges = [range(-CHECK_MULTIPLIER, CHECK_MULTIPLIER + 1) if e.rel == "=" else range(CHECK_MULTIPLIER + 1)
              for e in c.premises]
    best = None
    for lam in itertools.product(*ranges):
        rest = target
        for d, l in zip(prem, lam):
            if l:
                rest = _sub(rest, d, l)
        bad = sum(1 for x in rest[0].values() if x < 0) + (rest[1] < bound)
        if not bad:
            return ConstraintStatus(c.origin, c.kind, True, "", c)
        if best is None or bad < best[0]:
            best = (bad, rest)
    coeffs, const = best[1]
    terms = [f"{x}*{v.name}" for v, x in sorted(coeffs.items(), key=lambda vx: vx[0].id) if x]
    detail = " + ".join(terms + [str(const)]) + (" >= 1" if bound else " >= 0") + " is violated"
    return ConstraintStatus(c.origin, c.kind, False, detail, c)


def check_mapping(p: Program, mapping: dict, role: str = "quasi", goals=None,
                  exempt: Optional[bool] = None) -> list:
    target, cs = role_constraints(p, role, goals, exempt)
    total = {s: mapping.get(s, 0) for s in program_symbols(target)}
    return [check_constraint(c, total) for c in cs]


def check_certificate(p: Program, cert: Certificate, goals=None) -> list:
    """Per-constraint pass/fail list for ``cert`` on ``p``.

    Raises FingerprintMismatch when the certificate was issued for a
    different program.
    """
    fp = fingerprint(p)
    if cert.fingerprint != fp:
        raise FingerprintMismatch(f"certificate fingerprint {cert.fingerprint[:12]}... "
                                  f"does not match program {fp[:12]}...")
    return check_mapping(p, cert.mapping, cert.role, goals, cert.exempt)
