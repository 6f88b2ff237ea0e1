"""Symbolic coefficients, polynomials over them, and symbolic size measures.

A symbol mapping assigns a natural number to every coefficient symbol;
the symbolic norm, level and size expressions below turn into concrete
ones once a mapping is substituted.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, NamedTuple, Optional

from ..syntax import BUILTINS, Atom, Const, Pred, Program, Var

FUNCTOR, PRED, EXT = "f", "p", "e"
_KIND_ORDER = {FUNCTOR: 0, PRED: 1, EXT: 2}


class SymbolId(NamedTuple):
    """A coefficient symbol.

    ``kind`` is ``"f"`` (functor coefficient, index 0..m), ``"p"``
    (predicate coefficient, index 1..n) or ``"e"`` (extended predicate
    coefficient, index 0..n).
    """

    kind: str
    name: str
    arity: int
    index: int

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.name, self.arity, self.index)

    def __str__(self) -> str:
        if self.kind == FUNCTOR:
            return f"{self.name}/{self.arity}#f{self.index}"
        if self.kind == PRED:
            return f"{self.name}/{self.arity}#p{self.index}"
        return f"{self.name}/{self.arity}#e{self.index}"


def functor_coeff(f: Pred, i: int) -> SymbolId:
    return SymbolId(FUNCTOR, f.name, f.arity, i)


def pred_coeff(p: Pred, i: int) -> SymbolId:
    return SymbolId(PRED, p.name, p.arity, i)


def ext_coeff(p: Pred, i: int) -> SymbolId:
    return SymbolId(EXT, p.name, p.arity, i)


def program_symbols(p: Program) -> list:
    """Every coefficient symbol of ``p`` in the fixed solver order."""
    out = []
    for f in p.functors:
        out += [functor_coeff(f, i) for i in range(f.arity + 1)]
    for q in p.predicates:
        out += [pred_coeff(q, i) for i in range(1, q.arity + 1)]
        out += [ext_coeff(q, i) for i in range(q.arity + 1)]
    return sorted(out, key=SymbolId.sort_key)


# ---------------------------------------------------------------- polynomials

class Poly:
    """Polynomial with integer coefficients over :class:`SymbolId` values.

    Monomials are sorted tuples of symbols (repetition encodes powers).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls({(): c})

    @classmethod
    def sym(cls, s: SymbolId) -> "Poly":
        return cls({(s,): 1})

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, int):
            return Poly({m: c * other for m, c in self.terms.items()})
        out: dict = defaultdict(int)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[tuple(sorted(m1 + m2, key=SymbolId.sort_key))] += c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> int:
        return self.terms.get((), 0)

    def symbols(self) -> set:
        return {s for m in self.terms for s in m}

    def nonnegative_coeffs(self) -> bool:
        return all(c >= 0 for c in self.terms.values())

    def evaluate(self, mapping) -> int:
        total = 0
        for m, c in self.terms.items():
            v = c
            for s in m:
                v *= mapping[s]
                if v == 0:
                    break
            total += v
        return total

    def substitute(self, mapping: dict) -> "Poly":
        """Replace the symbols present in ``mapping`` by their values."""
        out: dict = defaultdict(int)
        for m, c in self.terms.items():
            rest = []
            for s in m:
                if s in mapping:
                    c *= mapping[s]
                else:
                    rest.append(s)
            out[tuple(rest)] += c
        return Poly(out)

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda mc: (len(mc[0]), [s.sort_key() for s in mc[0]])):
            body = "*".join(str(s) for s in m)
            if not m:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


ZERO = Poly()
ONE = Poly.const(1)


class SymExpr:
    """Linear form over universal variables with polynomial coefficients."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Optional[dict] = None, const: Poly = ZERO):
        self.coeffs = {v: c for v, c in (coeffs or {}).items() if not c.is_zero()}
        self.const = const

    @classmethod
    def var(cls, v: Var) -> "SymExpr":
        return cls({v: ONE})

    def __add__(self, other: "SymExpr") -> "SymExpr":
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out[v] + c if v in out else c
        return SymExpr(out, self.const + other.const)

    def __neg__(self) -> "SymExpr":
        return SymExpr({v: -c for v, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other: "SymExpr") -> "SymExpr":
        return self + (-other)

    def scale(self, p: Poly) -> "SymExpr":
        return SymExpr({v: c * p for v, c in self.coeffs.items()}, self.const * p)

    def variables(self) -> set:
        return set(self.coeffs)

    def symbols(self) -> set:
        out = self.const.symbols()
        for c in self.coeffs.values():
            out |= c.symbols()
        return out

    def evaluate(self, mapping, env: dict) -> int:
        total = self.const.evaluate(mapping)
        for v, c in self.coeffs.items():
            total += c.evaluate(mapping) * env[v]
        return total

    def substitute(self, mapping: dict) -> "SymExpr":
        return SymExpr({v: c.substitute(mapping) for v, c in self.coeffs.items()},
                       self.const.substitute(mapping))

    def __eq__(self, other) -> bool:
        return isinstance(other, SymExpr) and self.coeffs == other.coeffs and self.const == other.const

    def __hash__(self):
        return hash((frozenset(self.coeffs.items()), self.const))

    def __str__(self) -> str:
        parts = []
        for v, c in sorted(self.coeffs.items(), key=lambda vc: vc[0].id):
            cs = str(c)
            parts.append(f"({cs})*{v.name}" if len(c.terms) > 1 else f"{cs}*{v.name}")
        if not self.const.is_zero() or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)

    __repr__ = __str__


EMPTY_EXPR = SymExpr()


class Ineq(NamedTuple):
    """``lhs rel rhs`` with ``rel`` one of ``>=``, ``>`` or ``=``."""

    lhs: SymExpr
    rel: str
    rhs: SymExpr

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel} {self.rhs}"

    def holds(self, mapping, env: dict) -> bool:
        a = self.lhs.evaluate(mapping, env)
        b = self.rhs.evaluate(mapping, env)
        return a >= b if self.rel == ">=" else a > b if self.rel == ">" else a == b


# ---------------------------------------------------------------- measures

def symbolic_norm(t) -> SymExpr:
    """Variables map to themselves, constants to 0, f(t1..tn) to f0 + sum fi*|ti|."""
    if isinstance(t, Var):
        return SymExpr.var(t)
    if isinstance(t, Const):
        return EMPTY_EXPR
    f = Pred(t.functor, len(t.args))
    out = SymExpr({}, Poly.sym(functor_coeff(f, 0)))
    for i, a in enumerate(t.args, start=1):
        out = out + symbolic_norm(a).scale(Poly.sym(functor_coeff(f, i)))
    return out


def symbolic_level(a: Atom) -> SymExpr:
    if a.pred in BUILTINS:
        return EMPTY_EXPR
    out = EMPTY_EXPR
    for i, t in enumerate(a.args, start=1):
        out = out + symbolic_norm(t).scale(Poly.sym(pred_coeff(a.pred, i)))
    return out


def size_expr(a: Atom, program: Program) -> Optional[Ineq]:
    """Symbolic interargument relation of an atom; ``None`` means trivially true."""
    if a.predicate == "=" and len(a.args) == 2:
        return Ineq(symbolic_norm(a.args[0]), "=", symbolic_norm(a.args[1]))
    if a.pred in BUILTINS:
        return None
    p = a.pred
    lhs, rhs = EMPTY_EXPR, SymExpr({}, Poly.sym(ext_coeff(p, 0)))
    for i, m in enumerate(program.mode(p)):
        term = symbolic_norm(a.args[i]).scale(Poly.sym(ext_coeff(p, i + 1)))
        if m.value == "i":
            lhs = lhs + term
        else:
            rhs = rhs + term
    return Ineq(lhs, ">=", rhs)


def concrete_norm(t, mapping) -> int:
    """Norm of a ground term induced by a symbol mapping (direct evaluation)."""
    if isinstance(t, Const):
        return 0
    if isinstance(t, Var):
        raise ValueError("concrete_norm needs a ground term")
    f = Pred(t.functor, len(t.args))
    total = mapping[functor_coeff(f, 0)]
    for i, a in enumerate(t.args, start=1):
        w = mapping[functor_coeff(f, i)]
        if w:
            total += w * concrete_norm(a, mapping)
    return total


def concrete_level(a: Atom, mapping) -> int:
    if a.pred in BUILTINS:
        return 0
    return sum(mapping[pred_coeff(a.pred, i)] * concrete_norm(t, mapping)
               for i, t in enumerate(a.args, start=1)
               if mapping[pred_coeff(a.pred, i)])


def symbols_of(items: Iterable) -> set:
    out = set()
    for x in items:
        out |= x.symbols()
    return out
