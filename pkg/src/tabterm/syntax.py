"""Concrete and abstract syntax for definite programs with tabling and modes.

The surface language is a small Prolog subset::

    :- table path/4.
    :- mode path(i,i,o,o).
    path(X,Ed,Y,[Y]) :- edge(X,Ed,Y).
    :- query path(a,[e(a,b)],Y,L).

Lists are sugar for ``'.'/2`` and ``'[]'``. See ``docs/format.md``.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

LIST_CONS = "."
LIST_NIL = "[]"
GENERATED_SUFFIX = "__a"


class ParseError(ValueError):
    """Raised for malformed source text or inconsistent directives."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class UnknownPredicate(ParseError):
    pass


# ---------------------------------------------------------------- terms

class _Frozen:
    __slots__ = ()

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __delattr__(self, name):
        raise AttributeError(f"{type(self).__name__} is immutable")


class Var(_Frozen):
    """A logic variable; ``id`` distinguishes variables sharing a name."""

    __slots__ = ("name", "id", "_hash")

    def __init__(self, name: str, id: int):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "_hash", hash((1, id)))

    def __eq__(self, other):
        return other.__class__ is Var and other.id == self.id and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.id})"

    def __str__(self) -> str:
        return self.name

    def __reduce__(self):
        return (Var, (self.name, self.id))


class Const(_Frozen):
    __slots__ = ("symbol", "_hash")

    def __init__(self, symbol: Union[str, int]):
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "_hash", hash((2, type(symbol).__name__, symbol)))

    def __eq__(self, other):
        return (other.__class__ is Const and other.symbol == self.symbol
                and type(other.symbol) is type(self.symbol))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Const({self.symbol!r})"

    def __str__(self) -> str:
        return _render_const(self.symbol)

    def __reduce__(self):
        return (Const, (self.symbol,))


class Compound(_Frozen):
    __slots__ = ("functor", "args", "_hash")

    def __init__(self, functor: str, args: tuple):
        if not args:
            raise ValueError("compound terms need at least one argument")
        args = tuple(args)
        object.__setattr__(self, "functor", functor)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash((3, functor, args)))

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        if self is other:
            return True
        return (other.__class__ is Compound and other._hash == self._hash
                and other.functor == self.functor and other.args == self.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Compound({self.functor!r}, {self.args!r})"

    def __str__(self) -> str:
        return render_term(self)

    def __reduce__(self):
        return (Compound, (self.functor, self.args))


Term = Union[Var, Const, Compound]


class Pred(tuple):
    """A predicate or functor symbol ``name/arity``."""

    __slots__ = ()

    def __new__(cls, name: str, arity: int):
        return tuple.__new__(cls, (name, arity))

    @property
    def name(self) -> str:
        return self[0]

    @property
    def arity(self) -> int:
        return self[1]

    def __str__(self) -> str:
        return f"{self[0]}/{self[1]}"

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> "Pred":
        name, _, arity = text.rpartition("/")
        if not name or not arity.isdigit():
            raise ValueError(f"bad predicate indicator {text!r}")
        return cls(name, int(arity))


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def pred(self) -> Pred:
        return Pred(self.predicate, len(self.args))

    def __str__(self) -> str:
        return render_atom(self)


@dataclass(frozen=True, slots=True)
class Clause:
    head: Atom
    body: tuple = ()

    def __post_init__(self):
        if self.head.pred in BUILTINS:
            raise ValueError(f"builtin {self.head.pred} cannot head a clause")

    def __str__(self) -> str:
        return render_clause(self)


class Mode(str, Enum):
    IN = "i"
    OUT = "o"


BUILTINS = {
    Pred("=", 2): (Mode.IN, Mode.OUT),
    Pred("integer", 1): (Mode.IN,),
}


def is_builtin(pred: Pred) -> bool:
    return pred in BUILTINS


def term_vars(t, acc: Optional[list] = None) -> list:
    """Variables of a term, atom or sequence, in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t not in acc:
            acc.append(t)
    elif isinstance(t, Compound):
        for a in t.args:
            term_vars(a, acc)
    elif isinstance(t, Atom):
        for a in t.args:
            term_vars(a, acc)
    elif isinstance(t, Clause):
        term_vars(t.head, acc)
        for b in t.body:
            term_vars(b, acc)
    elif isinstance(t, (tuple, list)):
        for x in t:
            term_vars(x, acc)
    return acc


def make_list(items: Iterable[Term], tail: Optional[Term] = None) -> Term:
    items = list(items)
    out = tail if tail is not None else Const(LIST_NIL)
    for x in reversed(items):
        out = Compound(LIST_CONS, (x, out))
    return out


# ---------------------------------------------------------------- program

@dataclass(frozen=True)
class Program:
    """An immutable definite program with its directives.

    Build instances with :func:`make_program` so that the symbol
    inventories stay consistent with the clauses and queries.
    """

    clauses: tuple
    tabling: frozenset
    modes: dict
    queries: tuple = ()
    predicates: frozenset = field(default=frozenset(), compare=False)
    functors: frozenset = field(default=frozenset(), compare=False)
    constants: frozenset = field(default=frozenset(), compare=False)
    builtins: frozenset = field(default=frozenset(), compare=False)
    warnings: tuple = field(default=(), compare=False)

    @property
    def defined(self) -> frozenset:
        return frozenset(c.head.pred for c in self.clauses)

    @property
    def nontabled(self) -> frozenset:
        return self.predicates - self.tabling

    def mode(self, pred: Pred) -> tuple:
        if pred in self.modes:
            return self.modes[pred]
        if pred in BUILTINS:
            return BUILTINS[pred]
        raise KeyError(f"no mode for {pred}")

    def inputs(self, pred: Pred) -> list:
        return [i for i, m in enumerate(self.mode(pred)) if m is Mode.IN]

    def outputs(self, pred: Pred) -> list:
        return [i for i, m in enumerate(self.mode(pred)) if m is Mode.OUT]

    def clauses_for(self, pred: Pred) -> list:
        return [c for c in self.clauses if c.head.pred == pred]

    def max_var_id(self) -> int:
        ids = [v.id for c in self.clauses for v in term_vars(c)]
        ids += [v.id for q in self.queries for v in term_vars(q)]
        return max(ids, default=-1)


def _walk_symbols(t, functors: set, constants: set):
    if isinstance(t, Const):
        constants.add(t.symbol)
    elif isinstance(t, Compound):
        functors.add(Pred(t.functor, len(t.args)))
        for a in t.args:
            _walk_symbols(a, functors, constants)


def make_program(clauses: Iterable[Clause], tabling: Iterable[Pred] = (),
                 modes: Optional[dict] = None, queries: Iterable[Atom] = (),
                 default_mode: Optional[str] = None,
                 warn: Iterable[str] = ()) -> Program:
    """Assemble a :class:`Program`, deriving inventories and checking modes.

    Parameters
    ----------
    default_mode:
        ``None`` (missing modes are an error), ``"all-in"`` or ``"all-out"``.
    """
    clauses = tuple(clauses)
    queries = tuple(queries)
    modes = dict(modes or {})
    preds, builtins_used, functors, constants = set(), set(), set(), set()
    for atom in [c.head for c in clauses] + [b for c in clauses for b in c.body] + list(queries):
        (builtins_used if atom.pred in BUILTINS else preds).add(atom.pred)
        for a in atom.args:
            _walk_symbols(a, functors, constants)
    tabling = frozenset(tabling)
    notes = list(warn)
    for p in sorted(tabling):
        if p in BUILTINS:
            raise ParseError(f"builtin {p} cannot be tabled")
        if p not in preds:
            notes.append(f"tabled predicate {p} does not occur in the program")
    for p in sorted(preds):
        if p.arity == 0:
            modes.setdefault(p, ())
        if p not in modes:
            if default_mode == "all-in":
                modes[p] = (Mode.IN,) * p.arity
            elif default_mode == "all-out":
                modes[p] = (Mode.OUT,) * p.arity
            elif default_mode is None:
                raise ParseError(f"missing mode declaration for {p}")
            else:
                raise ValueError(f"unknown default mode {default_mode!r}")
    for p, m in modes.items():
        if len(m) != p.arity:
            raise ParseError(f"mode for {p} has {len(m)} positions")
    return Program(clauses, tabling, modes, queries, frozenset(preds),
                   frozenset(functors), frozenset(constants),
                   frozenset(builtins_used), tuple(notes))


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.|'')*')
  | (?P<punct>[()\[\],|.=/])
""", re.VERBOSE)


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "quoted":
                value = value[1:-1].replace("''", "'").replace("\\'", "'")
                kind = "name"
            toks.append(_Tok(kind, value, line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, first_var_id: int = 0):
        self.toks = _tokenize(text)
        self.i = 0
        self.first_var_id = first_var_id
        self._reset_vars()

    def _reset_vars(self):
        self.vars: dict = {}
        self.next_id = self.first_var_id

    # helpers
    def peek(self, off: int = 0) -> _Tok:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "neck") and t.text == text

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.kind not in ("punct", "neck") or t.text != text:
            shown = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {shown!r}", t.line, t.col)
        return t

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    # grammar
    def variable(self, name: str) -> Var:
        if name == "_":
            v = Var("_", self.next_id)
            self.next_id += 1
            return v
        if name not in self.vars:
            self.vars[name] = Var(name, self.next_id)
            self.next_id += 1
        return self.vars[name]

    def term(self) -> Term:
        t = self.next()
        if t.kind == "var":
            return self.variable(t.text)
        if t.kind == "int":
            return Const(int(t.text))
        if t.kind == "name":
            if self.at("("):
                return Compound(t.text, tuple(self.arglist()))
            return Const(t.text)
        if t.kind == "punct" and t.text == "[":
            return self.list_rest()
        self.error(f"unexpected {t.text or 'end of input'!r}", t)

    def arglist(self) -> list:
        self.expect("(")
        args = [self.term()]
        while self.at(","):
            self.next()
            args.append(self.term())
        self.expect(")")
        return args

    def list_rest(self) -> Term:
        if self.at("]"):
            self.next()
            return Const(LIST_NIL)
        items = [self.term()]
        while self.at(","):
            self.next()
            items.append(self.term())
        tail = None
        if self.at("|"):
            self.next()
            tail = self.term()
        self.expect("]")
        return make_list(items, tail)

    def atom(self) -> Atom:
        t = self.peek()
        if t.kind == "name":
            # could be `name(...)` atom or the left side of `=`
            if self.peek(1).kind == "punct" and self.peek(1).text == "=":
                return self.equation()
            save = self.i
            self.next()
            args = self.arglist() if self.at("(") else []
            if self.at("="):
                self.i = save
                return self.equation()
            return Atom(t.text, tuple(args))
        if t.kind in ("var", "int") or (t.kind == "punct" and t.text == "["):
            return self.equation()
        self.error(f"expected an atom, found {t.text or 'end of input'!r}", t)

    def equation(self) -> Atom:
        lhs = self.term()
        self.expect("=")
        rhs = self.term()
        return Atom("=", (lhs, rhs))

    def body(self) -> list:
        out = [self.atom()]
        while self.at(","):
            self.next()
            out.append(self.atom())
        return out

    def pred_indicator(self) -> Pred:
        t = self.next()
        if t.kind != "name" and not (t.kind == "punct" and t.text == "="):
            self.error("expected predicate name", t)
        self.expect("/")
        n = self.next()
        if n.kind != "int":
            self.error("expected arity", n)
        return Pred(t.text, int(n.text))

    def mode_decl(self) -> tuple:
        t = self.next()
        if t.kind != "name" and not (t.kind == "punct" and t.text == "="):
            self.error("expected predicate name in mode declaration", t)
        modes = []
        if self.at("("):
            self.next()
            while True:
                m = self.next()
                if m.kind != "name" or m.text not in ("i", "o", "in", "out"):
                    self.error("mode positions must be i or o", m)
                modes.append(Mode.IN if m.text.startswith("i") else Mode.OUT)
                if self.at(","):
                    self.next()
                    continue
                self.expect(")")
                break
        return Pred(t.text, len(modes)), tuple(modes)


def parse_program(text: str, default_mode: Optional[str] = None,
                  allow_generated: bool = False) -> Program:
    """Parse program source into a :class:`Program`.

    Parameters
    ----------
    text:
        Source in the ``.tlp`` format.
    default_mode:
        Fallback for predicates without a mode declaration
        (``"all-in"`` or ``"all-out"``); by default they are an error.
    allow_generated:
        Accept predicate names with the reserved ``__a`` suffix, as
        produced by the answer transformation.

    Raises
    ------
    ParseError
        On syntax errors (with line and column) and bad directives.
    """
    ps = _Parser(text)
    clauses, queries, tabling, modes, user_modes = [], [], [], {}, set()
    notes = []
    while ps.peek().kind != "eof":
        start = ps.peek()
        ps._reset_vars()
        if ps.at(":-"):
            ps.next()
            kw = ps.next()
            if kw.kind != "name":
                ps.error("expected directive name", kw)
            if kw.text == "table":
                tabling.append(ps.pred_indicator())
                while ps.at(","):
                    ps.next()
                    tabling.append(ps.pred_indicator())
            elif kw.text == "mode":
                decls = [ps.mode_decl()]
                while ps.at(","):
                    ps.next()
                    decls.append(ps.mode_decl())
                for p, m in decls:
                    if p in user_modes:
                        raise ParseError(f"duplicate mode for {p}", kw.line, kw.col)
                    if p.name == "=" or p.name == "integer":
                        if p not in BUILTINS:
                            raise ParseError(f"mode arity mismatch for builtin {p.name}", kw.line, kw.col)
                        if p.name == "integer" and m != BUILTINS[p]:
                            raise ParseError("integer/1 has the fixed mode (i)", kw.line, kw.col)
                    user_modes.add(p)
                    modes[p] = m
            elif kw.text == "query":
                ps.first_var_id = 0
                queries.append(ps.atom())
            else:
                ps.error(f"unknown directive {kw.text!r}", kw)
            ps.expect(".")
            continue
        head = ps.atom()
        body = []
        if ps.at(":-"):
            ps.next()
            body = ps.body()
        ps.expect(".")
        if head.pred in BUILTINS:
            raise ParseError(f"builtin {head.pred} cannot head a clause", start.line, start.col)
        clauses.append(Clause(head, tuple(body)))
    if not allow_generated:
        for atom in [c.head for c in clauses] + [b for c in clauses for b in c.body] + queries:
            if atom.predicate.endswith(GENERATED_SUFFIX):
                raise ParseError(f"predicate name {atom.predicate!r} uses the reserved suffix {GENERATED_SUFFIX!r}")
    builtin_modes = {p: m for p, m in modes.items() if p in BUILTINS}
    user = {p: m for p, m in modes.items() if p not in BUILTINS}
    for p in user:
        arities = {q.arity for q in _all_preds(clauses, queries) if q.name == p.name}
        if arities and p.arity not in arities:
            raise ParseError(f"mode arity mismatch for {p.name}: declared {p.arity}, used with {sorted(arities)}")
    user.update(builtin_modes)
    prog = make_program(clauses, tabling, user, queries, default_mode=default_mode, warn=notes)
    for w in prog.warnings:
        warnings.warn(w, stacklevel=2)
    return prog


def _all_preds(clauses, queries) -> set:
    out = set()
    for c in clauses:
        out.add(c.head.pred)
        out.update(b.pred for b in c.body)
    out.update(q.pred for q in queries)
    return out


def parse_goal(text: str, program: Program) -> Atom:
    """Parse a single goal atom for ``program``.

    Variables receive ids above every id used in the program, so the goal
    never shares variables with a clause.
    """
    text = text.strip()
    if text.endswith("."):
        text = text[:-1]
    ps = _Parser(text, first_var_id=program.max_var_id() + 1)
    atom = ps.atom()
    if ps.peek().kind != "eof":
        ps.error(f"trailing input {ps.peek().text!r}")
    if atom.pred not in program.predicates and atom.pred not in BUILTINS:
        raise UnknownPredicate(f"unknown predicate {atom.pred}")
    return atom


# ---------------------------------------------------------------- rendering

_PLAIN_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _render_const(sym) -> str:
    if isinstance(sym, int):
        return str(sym)
    if sym == LIST_NIL or _PLAIN_NAME.match(sym):
        return sym
    return "'" + sym.replace("'", "''") + "'"


def _render_name(name: str) -> str:
    return name if _PLAIN_NAME.match(name) else "'" + name.replace("'", "''") + "'"


def render_term(t: Term, names: Optional[dict] = None) -> str:
    if isinstance(t, Var):
        return names.get(t, t.name) if names else t.name
    if isinstance(t, Const):
        return _render_const(t.symbol)
    if t.functor == LIST_CONS and len(t.args) == 2:
        items, cur = [], t
        while isinstance(cur, Compound) and cur.functor == LIST_CONS and len(cur.args) == 2:
            items.append(render_term(cur.args[0], names))
            cur = cur.args[1]
        inner = ",".join(items)
        if isinstance(cur, Const) and cur.symbol == LIST_NIL:
            return f"[{inner}]"
        return f"[{inner}|{render_term(cur, names)}]"
    return f"{_render_name(t.functor)}({','.join(render_term(a, names) for a in t.args)})"


def render_atom(a: Atom, names: Optional[dict] = None) -> str:
    if a.predicate == "=" and len(a.args) == 2:
        return f"{render_term(a.args[0], names)} = {render_term(a.args[1], names)}"
    if not a.args:
        return _render_name(a.predicate)
    return f"{_render_name(a.predicate)}({','.join(render_term(x, names) for x in a.args)})"


def _var_names(obj) -> dict:
    """Give distinct variables distinct printable names."""
    names, used = {}, set()
    for v in term_vars(obj):
        if v.name == "_":
            continue
        base = v.name
        cand = base
        n = 1
        while cand in used:
            cand = f"{base}_{n}"
            n += 1
        used.add(cand)
        names[v] = cand
    # anonymous variables that occur more than once must be named
    counts: dict = {}
    _count_vars(obj, counts)
    for v, c in counts.items():
        if v.name == "_" and c > 1:
            cand, n = "G", 0
            while cand in used:
                n += 1
                cand = f"G{n}"
            used.add(cand)
            names[v] = cand
    return names


def _count_vars(t, counts: dict):
    if isinstance(t, Var):
        counts[t] = counts.get(t, 0) + 1
    elif isinstance(t, (Compound, Atom)):
        for a in t.args:
            _count_vars(a, counts)
    elif isinstance(t, Clause):
        _count_vars(t.head, counts)
        for b in t.body:
            _count_vars(b, counts)


def render_clause(c: Clause) -> str:
    names = _var_names(c)
    head = render_atom(c.head, names)
    if not c.body:
        return head + "."
    return head + " :- " + ", ".join(render_atom(b, names) for b in c.body) + "."


def render(program: Program) -> str:
    """Emit canonical source text that parses back to an equal program."""
    lines = []
    if program.tabling:
        lines.append(":- table " + ", ".join(f"{_render_name(p.name)}/{p.arity}" for p in sorted(program.tabling)) + ".")
    for p in sorted(program.modes):
        m = program.modes[p]
        if not m:
            continue
        if p in BUILTINS and m == BUILTINS[p]:
            continue
        lines.append(f":- mode {_render_name(p.name)}({','.join(x.value for x in m)}).")
    for c in program.clauses:
        lines.append(render_clause(c))
    for q in program.queries:
        lines.append(f":- query {render_atom(q, _var_names(q))}.")
    return "\n".join(lines) + ("\n" if lines else "")


def iter_atoms(program: Program) -> Iterator[Atom]:
    for c in program.clauses:
        yield c.head
        yield from c.body
    yield from program.queries
