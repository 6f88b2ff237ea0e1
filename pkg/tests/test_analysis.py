import pytest
from hypothesis import given, settings, strategies as st

from conftest import load
from tabterm.analysis import (AnalysisBudgetExceeded, PairClass,
                              brute_force_classify, build_dep_graph,
                              check_extends, check_goal_moded,
                              check_simply_moded, check_well_chosen,
                              check_well_moded, classify_pair,
                              graph_from_arcs, recursive_preds,
                              reachable_preds)
from tabterm.syntax import Pred, parse_program
from tabterm.transform import subprogram

A, B, C = Pred("a", 0), Pred("b", 0), Pred("c", 0)


def P(name, n=0):
    return Pred(name, n)


def test_wellchosen_p1_graph():
    g = build_dep_graph(load("wellchosen_p1"))
    assert g.arcs == {(A, B), (B, C), (C, B)}
    assert {B, C} in g.sccs
    assert recursive_preds(g) == {B, C}


def test_fact_only_graph():
    g = build_dep_graph(parse_program("p(a).", default_mode="all-in"))
    assert g.nodes == {P("p", 1)} and not g.arcs
    assert recursive_preds(g) == frozenset()


def test_path_graph():
    g = build_dep_graph(load("path"))
    path, edge = P("path", 4), P("edge", 3)
    assert g.arcs == {(path, path), (path, edge), (edge, edge)}
    assert recursive_preds(g) == {path, edge}


def test_exapq_recursive():
    assert recursive_preds(build_dep_graph(load("exapq"))) == {P("p", 1)}


def test_builtins_not_in_graph():
    g = build_dep_graph(load("grammar_r"))
    assert Pred("=", 2) not in g.nodes


def test_reachable_preds():
    g = build_dep_graph(load("examodular"))
    assert reachable_preds(g, [P("path", 4)]) == {P("path", 4), P("edge", 3)}


@pytest.mark.parametrize("name,expected", [("wellchosen_p1", PairClass.C1),
                                           ("wellchosen_p2", PairClass.C2),
                                           ("wellchosen_p3", PairClass.C3)])
def test_classify_triple(name, expected):
    p = load(name)
    g = build_dep_graph(p)
    assert p.tabling == {A}
    assert classify_pair(g, p.tabling, B, C) is expected
    assert classify_pair(g, p.tabling, C, B) is expected


def test_classify_not_mutual():
    p = load("wellchosen_p1")
    g = build_dep_graph(p)
    assert classify_pair(g, p.tabling, A, B) is PairClass.NOT_MUTUAL


@pytest.mark.parametrize("name,ok", [("wellchosen_p1", True), ("wellchosen_p2", True),
                                     ("wellchosen_p3", False)])
def test_well_chosen_triple(name, ok):
    p = load(name)
    wc = check_well_chosen(build_dep_graph(p), p.tabling)
    assert wc.ok is ok
    if not ok:
        assert wc.witness == (B, C)


def test_all_tabled_is_well_chosen():
    p = load("wellchosen_p3")
    assert check_well_chosen(build_dep_graph(p), p.predicates).ok


def test_cycle_cap():
    # 0 and 1 hang off a 5-clique and share no simple cycle, so every
    # cycle of the component is enumerated
    clique = range(2, 7)
    arcs = [(i, j) for i in clique for j in clique if i != j] + [(0, 2), (2, 0), (1, 3), (3, 1)]
    g = graph_from_arcs(range(7), arcs)
    with pytest.raises(AnalysisBudgetExceeded):
        classify_pair(g, set(), 0, 1, cap=10)
    assert classify_pair(g, set(), 0, 1) is brute_force_classify(range(7), arcs, set(), 0, 1)


def test_mode_checks_exaconstr():
    p = load("exaconstr")
    assert check_well_moded(p).ok
    assert check_simply_moded(p).ok
    wm, sm = check_goal_moded(p, p.queries)
    assert wm.ok and sm.ok


def test_unbound_input_violation():
    p = parse_program(":- mode p(i).\n:- mode q(i).\np(X) :- q(Y).\nq(a).")
    r = check_well_moded(p)
    assert not r.ok
    (f,) = r.failures
    assert f.kind == "clause" and f.index == 0 and f.atom_index == 1 and f.positions == (0,)


def test_head_output_not_produced():
    p = parse_program(":- mode p(o).\np(X).")
    (f,) = check_well_moded(p).failures
    assert f.atom_index == 1


def test_output_not_variable():
    p = parse_program(":- mode p(i).\n:- mode q(o).\np(X) :- q(f(Y)).\nq(f(a)).")
    (f,) = check_simply_moded(p).failures
    assert f.atom_index == 1 and "not a variable" in f.reason


def test_output_repeated():
    p = parse_program(":- mode q(o).\n:- mode r(o).\np :- q(X), r(X).\nq(a).\nr(a).")
    (f,) = check_simply_moded(p).failures
    assert f.atom_index == 2 and "repeated" in f.reason


def test_equation_output_may_be_linear_term():
    p = load("grammar_r")
    assert check_well_moded(p).ok and check_simply_moded(p).ok
    bad = parse_program(":- mode p(i,o).\np(X,Y) :- X = [Y|Y].")
    assert not check_simply_moded(bad).ok


def test_query_checked_via_dummy_head():
    p = load("path")
    wm = check_well_moded(p, [parse_program(":- query path(X,G,Y,L).", default_mode="all-in").queries[0]])
    assert not wm.ok and wm.failures[0].kind == "query"


def test_grammar_parser_is_not_well_moded():
    assert not check_well_moded(load("grammar_pr")).ok


def test_extends():
    pr = load("grammar_pr")
    upper = subprogram(pr, {P("s", 3), P("a", 3)})
    lower = subprogram(pr, {P("s", 2), P("a", 2)})
    assert check_extends(upper, lower)
    assert not check_extends(lower, upper)
    assert not check_extends(pr, pr)
    path = load("path")
    assert check_extends(subprogram(path, {P("path", 4)}), subprogram(path, {P("edge", 3)}))


# ---------------------------------------------------------------- properties

@st.composite
def small_graphs(draw, max_nodes=7):
    n = draw(st.integers(1, max_nodes))
    nodes = list(range(n))
    arcs = draw(st.sets(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes)), max_size=n * 3))
    tab = draw(st.sets(st.sampled_from(nodes)))
    return nodes, arcs, tab


@settings(max_examples=1500, deadline=None)
@given(small_graphs(), st.data())
def test_classify_matches_brute_force(gr, data):
    nodes, arcs, tab = gr
    p = data.draw(st.sampled_from(nodes))
    q = data.draw(st.sampled_from(nodes))
    g = graph_from_arcs(nodes, arcs)
    assert classify_pair(g, tab, p, q) is brute_force_classify(nodes, arcs, tab, p, q)


@settings(max_examples=1000, deadline=None)
@given(small_graphs(), st.data())
def test_classify_symmetric(gr, data):
    nodes, arcs, tab = gr
    p = data.draw(st.sampled_from(nodes))
    q = data.draw(st.sampled_from(nodes))
    g = graph_from_arcs(nodes, arcs)
    assert classify_pair(g, tab, p, q) is classify_pair(g, tab, q, p)


@settings(max_examples=1000, deadline=None)
@given(small_graphs())
def test_transport_within_scc(gr):
    nodes, arcs, tab = gr
    g = graph_from_arcs(nodes, arcs)
    if not check_well_chosen(g, tab).ok:
        return
    rec = recursive_preds(g)
    for scc in g.sccs:
        free = sorted(n for n in scc if n not in tab and n in rec)
        classes = {classify_pair(g, tab, x, y) for x in free for y in free if x != y}
        assert len(classes) <= 1


@settings(max_examples=1000, deadline=None)
@given(small_graphs())
def test_only_direct_recursion_untabled_is_well_chosen(gr):
    nodes, arcs, tab = gr
    g = graph_from_arcs(nodes, arcs)
    # untabled predicates that are non-recursive or recursive only through themselves
    if any(len(s) > 1 and s - set(tab) for s in g.sccs):
        return
    assert check_well_chosen(g, tab).ok
