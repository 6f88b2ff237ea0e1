from hypothesis import given, settings, strategies as st

from conftest import goal, load
from strategies import VARS, atom_strategy, ground_terms, renamings
from tabterm.core import (EMPTY, FreshSupply, Substitution, apply,
                          is_instance, is_variant, mgu, rename_apart,
                          variant_key)
from tabterm.syntax import (Atom, Compound, Const, Var, make_list,
                            parse_program, term_vars)

X, Y, Z = Var("X", 0), Var("Y", 1), Var("Z", 2)
a, b = Const("a"), Const("b")


def test_mgu_simple():
    s = mgu(Atom("p", (X, Compound("f", (Y,)))), Atom("p", (a, Compound("f", (b,)))))
    assert s.as_dict() == {X: a, Y: b}


def test_mgu_predicate_clash():
    assert mgu(Atom("p", (X,)), Atom("q", (X,))) is None
    assert mgu(Atom("p", (X,)), Atom("p", (X, X))) is None


def test_mgu_occurs_check():
    fx = Compound("f", (X,))
    assert mgu(X, fx) is None
    assert mgu(X, fx, occurs_check=False) is not None


def test_mgu_path_pair():
    p = parse_program("t(path(a,E,Y,L), path(X2,Ed,Z,[Y2|L2])).", default_mode="all-in")
    left, right = p.clauses[0].head.args
    lhs = Atom("path", left.args)
    rhs = Atom("path", right.args)
    s = mgu(lhs, rhs)
    assert s is not None and s.is_idempotent()
    assert apply(s, lhs) == apply(s, rhs)
    v = {x.name: x for x in term_vars((lhs, rhs))}
    # the unified atom is path(a, E', Y', [Y2|L2]) up to renaming
    expected = Atom("path", (a, v["Ed"], v["Z"], make_list([v["Y2"]], v["L2"])))
    assert is_variant(apply(s, lhs), expected)
    assert apply(s, v["X2"]) == a


def test_apply():
    s = Substitution({X: a})
    assert apply(s, Atom("p", (X, Y))) == Atom("p", (a, Y))
    t = Atom("p", (X, Compound("f", (Y,))))
    assert apply(EMPTY, t) == t


def test_compose_then_apply():
    s = Substitution({X: Compound("f", (Y,))}).compose(Substitution({Y: b}))
    assert apply(s, Atom("p", (X,))) == Atom("p", (Compound("f", (b,)),))


def test_substitution_drops_identity_bindings():
    assert len(Substitution({X: X, Y: a})) == 1


def test_rename_apart():
    c = parse_program("p(X) :- q(X).", default_mode="all-in").clauses[0]
    supply = FreshSupply(10)
    c1, c2 = rename_apart(c, supply), rename_apart(c, supply)
    ids1 = {v.id for v in term_vars(c1)}
    ids2 = {v.id for v in term_vars(c2)}
    assert not ids1 & ids2
    assert is_variant((c1.head,) + c1.body, (c.head,) + c.body)


def test_rename_ground_clause_unchanged():
    c = parse_program("p(a) :- q(b).", default_mode="all-in").clauses[0]
    assert rename_apart(c, FreshSupply()) == c


def test_rename_path_clause_fresh_variables():
    c = load("path").clauses[1]
    r = rename_apart(c, FreshSupply(1000))
    assert len({v.id for v in term_vars(r)}) == 5
    assert all(v.id >= 1000 for v in term_vars(r))


def test_variant_key_examples():
    U, V = Var("U", 7), Var("V", 8)
    assert variant_key(Atom("p", (X, Y, X))) == variant_key(Atom("p", (U, V, U)))
    assert variant_key(Atom("p", (X, Y))) != variant_key(Atom("p", (X, X)))
    p = load("path")
    k = variant_key(goal(p, "path(a,[e(a,b),e(b,a)],Y,L)"))
    assert str(k) == "path(a,[e(a,b),e(b,a)],V0,V1)"


def test_is_instance():
    assert is_instance(Atom("p", (X, X)), Atom("p", (a, a)))
    assert not is_instance(Atom("p", (X, X)), Atom("p", (a, b)))


# ---------------------------------------------------------------- properties

def _rename(t, m):
    return apply(Substitution(m), t)


@settings(max_examples=1000, deadline=None)
@given(atom_strategy(), atom_strategy())
def test_mgu_is_unifier_and_idempotent(x, y):
    s = mgu(x, y)
    if s is not None:
        assert s.is_idempotent()
        assert apply(s, x) == apply(s, y)
        assert apply(s, apply(s, x)) == apply(s, x)


@settings(max_examples=1000, deadline=None)
@given(atom_strategy(), st.data())
def test_mgu_generality(x, data):
    # build a ground unifier by construction, then check it factors through the mgu
    ground = {v: data.draw(ground_terms) for v in VARS}
    inst = apply(Substitution(ground), x)
    fresh = [Var(f"G{i}", 200 + i) for i in range(3)]
    gen = {}

    def generalize(t):
        if data.draw(st.integers(0, 4)) == 0:
            v = data.draw(st.sampled_from(fresh))
            if v in gen and gen[v] != t:
                return t
            gen[v] = t
            return v
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(generalize(u) for u in t.args))
        return t

    y = Atom("p", tuple(generalize(t) for t in inst.args))
    sigma = Substitution({**ground, **gen})
    assert apply(sigma, x) == apply(sigma, y)
    theta = mgu(x, y)
    assert theta is not None
    assert is_instance(apply(theta, x), apply(sigma, x))


@settings(max_examples=1000, deadline=None)
@given(atom_strategy(), atom_strategy(), renamings())
def test_variant_key_congruence(x, y, ren):
    # unifiability after renaming apart depends only on the keys
    y2 = _rename(y, ren)
    assert (mgu(x, y2) is None) == (mgu(variant_key(x).atom, _rename(variant_key(y).atom, {
        Var(f"V{i}", i): Var(f"W{i}", 500 + i) for i in range(20)})) is None)


def test_no_occurs_check_cycle_stays_finite():
    s = mgu(Atom("p", (X, Y)), Atom("p", (Compound("f", (X,)), X)), occurs_check=False)
    assert s is not None
    assert apply(s, X) == Compound("f", (X,))
