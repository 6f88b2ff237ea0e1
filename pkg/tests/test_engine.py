from collections import Counter

import pytest

from conftest import goal, load
from tabterm.core import variant_key
from tabterm.engine import (Budget, answer_keys, call_graph_sample,
                            call_set_sample, forest_stats, ld_explore,
                            ld_solutions, lg_evaluate)
from tabterm.syntax import make_program, parse_program

PATH_QUERY = "path(a,[e(a,b),e(b,a)],Y,L)"
PATH_CALLS = {
    "path(a,[e(a,b),e(b,a)],V0,V1)", "path(b,[e(a,b),e(b,a)],V0,V1)",
    "edge(a,[e(a,b),e(b,a)],V0)", "edge(a,[e(b,a)],V0)", "edge(a,[],V0)",
    "edge(b,[e(a,b),e(b,a)],V0)", "edge(b,[e(b,a)],V0)", "edge(b,[],V0)",
}


def untabled(p):
    return make_program(p.clauses, (), p.modes, p.queries)


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(max_steps=0)


def test_path_forest():
    p = load("path")
    f, o = lg_evaluate(p, goal(p, PATH_QUERY))
    assert o.num_trees == 2
    assert {str(k) for k in f.trees} == {"path(a,[e(a,b),e(b,a)],V0,V1)", "path(b,[e(a,b),e(b,a)],V0,V1)"}
    assert all(t.answer_budget_hit for t in f.trees.values())
    assert o.any_answer_budget_hit and not o.completed
    assert o.status == "Exhausted(answers)"
    assert forest_stats(f).num_trees == 2


def test_path_call_set():
    p = load("path")
    assert {str(k) for k in call_set_sample(p, goal(p, PATH_QUERY))} == PATH_CALLS


def test_path_call_graph():
    p = load("path")
    cg = call_graph_sample(p, goal(p, PATH_QUERY))
    arcs = {(str(a), str(b)) for a, b in cg.arcs}
    top = "path(a,[e(a,b),e(b,a)],V0,V1)"
    assert (top, "edge(a,[e(a,b),e(b,a)],V0)") in arcs
    assert (top, "path(b,[e(a,b),e(b,a)],V0,V1)") in arcs
    assert {str(k) for k in cg.nodes} == PATH_CALLS
    assert cg.to_dot().startswith("digraph callgraph {")


def test_reachable_completes():
    p = load("reachable")
    f, o = lg_evaluate(p, p.queries[0])
    assert o.completed and o.num_trees == 2
    assert {str(a) for a in f.top.answers} == {"reachable(a,[e(a,b),e(b,a)],b)",
                                               "reachable(a,[e(a,b),e(b,a)],a)"}
    st = forest_stats(f)
    assert st.num_trees == 2 and sorted(st.answers.values()) == [2, 2]


def test_pq_loop_untabled_single_tree():
    p = load("pq_loop")
    f, o = lg_evaluate(p, p.queries[0])
    assert len(f.all_trees) == 1 and o.exhausted == ["depth"]
    assert o.any_infinite_branch_suspected


def test_ld_edge():
    p = load("path")
    ans, o = ld_solutions(p, goal(p, "edge(a,[e(a,b),e(b,a)],Y)"))
    assert o.completed and [str(a) for a in ans] == ["edge(a,[e(a,b),e(b,a)],b)"]


def test_ld_ground_fact():
    p = parse_program("p(a).", default_mode="all-in")
    ans, o = ld_solutions(p, goal(p, "p(a)"))
    assert o.completed and [str(a) for a in ans] == ["p(a)"]


def test_ld_exapq_infinite_answers():
    p = load("exapq")
    ans, o = ld_solutions(p, p.queries[0])
    assert o.exhausted == ["answers"]
    assert [str(a) for a in ans[:3]] == ["p(a)", "p(f(a))", "p(f(f(a)))"]


def test_exapq_call_set_grows():
    p = load("exapq")
    small = call_set_sample(p, p.queries[0], Budget(max_steps=50))
    large = call_set_sample(p, p.queries[0], Budget(max_steps=200))
    assert {"q(a)", "q(f(a))"} <= {str(k) for k in small}
    assert small < large


def test_exapq_tabled_forest():
    p = load("exapq")
    f, o = lg_evaluate(p, p.queries[0])
    # one tabled tree with infinitely many answers
    assert o.num_trees == 1 and o.any_answer_budget_hit


def test_fact_only_call_set_and_graph():
    p = parse_program("p(a).", default_mode="all-in")
    g = goal(p, "p(a)")
    assert {str(k) for k in call_set_sample(p, g)} == {"p(a)"}
    assert not call_graph_sample(p, g).arcs


def test_pq_call_graph_cycle():
    p = load("pq_loop")
    cg = call_graph_sample(p, p.queries[0], Budget(max_depth=20))
    assert {(str(a), str(b)) for a, b in cg.arcs} == {("p", "q"), ("q", "p")}


def test_empty_program_ground_goal():
    p = parse_program(":- query p.")
    f, o = lg_evaluate(p, p.queries[0])
    st = forest_stats(f)
    assert st.num_trees == 1 and st.answers == {"p": 0} and o.completed


def test_builtins():
    p = parse_program(":- mode t(o).\nt(X) :- X = 3, integer(X).\nt(X) :- X = a, integer(X).")
    ans, o = ld_solutions(p, goal(p, "t(X)"))
    assert o.completed and [str(a) for a in ans] == ["t(3)"]
    f, o = lg_evaluate(p, goal(p, "t(X)"))
    assert [str(a) for a in f.top.answers] == ["t(3)"]


def test_occurs_check_flag():
    p = parse_program(":- mode t(o).\nt(X) :- X = f(X).")
    ans, _ = ld_solutions(p, goal(p, "t(X)"))
    assert ans == []
    ans, _ = ld_solutions(p, goal(p, "t(X)"), occurs_check=False)
    assert len(ans) == 1


def test_grammar_runs():
    p = load("grammar_r")
    f, o = lg_evaluate(p, goal(p, "s([a,a,a,b],So)"))
    assert o.completed and [str(a) for a in f.top.answers] == ["s([a,a,a,b],[])"]
    f, o = lg_evaluate(p, goal(p, "s([a,a,a,a],So)"))
    assert o.completed and f.top.answers == []


def test_tables_budget():
    p = parse_program(":- table n/1.\n:- mode n(i).\nn(X) :- n(s(X)).")
    f, o = lg_evaluate(p, goal(p, "n(z)"), Budget(max_tables=5))
    assert o.exhausted == ["tables"]


def test_steps_budget():
    p = load("pq_loop")
    _, o = lg_evaluate(p, p.queries[0], Budget(max_steps=10))
    assert o.exhausted[0] == "steps"


# ---------------------------------------------------------------- invariants

COMPLETING = [("reachable", None), ("grammar_r", None), ("grammar_r", "s([a,a,b,b],So)"),
              ("wellchosen_p2", "a"), ("exaconstr", "edge(a,Y)"),
              ("path", "edge(b,[e(a,b),e(b,a)],Y)")]


def test_badly_chosen_tabling_loops():
    # b and c recurse through each other without meeting a tabled node
    p = load("wellchosen_p1")
    _, o = lg_evaluate(p, goal(p, "a"))
    assert not o.completed and o.exhausted == ["depth"]


@pytest.mark.parametrize("name,q", COMPLETING)
def test_answers_invariant_under_tabling(name, q):
    p = load(name)
    g = p.queries[0] if q is None else goal(p, q)
    f, o = lg_evaluate(p, g)
    ans, lo = ld_solutions(p, g, Budget(max_depth=60, max_steps=20000))
    if o.completed and lo.completed:
        assert answer_keys(ans) == answer_keys(f.top.answers)
    else:
        assert o.completed
        # LD may loop; every LD answer it did find is a tabled answer
        assert answer_keys(ans) <= answer_keys(f.top.answers)


@pytest.mark.parametrize("name", ["reachable", "grammar_r", "exapq", "exaconstr", "wellchosen_p3"])
def test_untabled_single_tree_matches_ld(name):
    p = untabled(load(name))
    g = p.queries[0] if p.queries else goal(p, "a")
    b = Budget(max_steps=400, max_depth=30, max_answers_per_table=10 ** 6)
    f, o = lg_evaluate(p, g, b)
    assert len(f.all_trees) == 1
    r = ld_explore(p, g, b, stop_at_answers=False, record_nodes=True)
    if o.completed and r.outcome.completed:
        lg_nodes = Counter((variant_key((n.goal, n.template)), n.depth) for n in f.top.nodes)
        assert lg_nodes == Counter(r.nodes)


@pytest.mark.parametrize("name", ["reachable", "grammar_r", "path", "exapq"])
def test_budget_monotonicity(name):
    p = load(name)
    g = p.queries[0]
    prev_trees, prev_answers, prev_calls = set(), set(), set()
    for n in (50, 200, 1000):
        b = Budget(max_steps=n, max_answers_per_table=n)
        f, _ = lg_evaluate(p, g, b)
        trees = set(f.trees)
        answers = {(k, variant_key(a)) for k, t in f.trees.items() for a in t.answers}
        calls = call_set_sample(p, g, b)
        assert prev_trees <= trees and prev_answers <= answers and prev_calls <= calls
        prev_trees, prev_answers, prev_calls = trees, answers, calls


@pytest.mark.parametrize("name", ["path", "reachable", "grammar_r", "examodular"])
def test_call_graph_arcs_are_selected_pairs(name):
    # every sampled arc joins two atoms that were both selected, parent first
    p = load(name)
    g = p.queries[0]
    b = Budget(max_steps=2000, max_depth=40)
    r = ld_explore(p, g, b, stop_at_answers=False, collect_answers=False)
    for a, c in r.arcs:
        assert a in r.calls and c in r.calls
    heads = {k.atom.pred for k, _ in r.arcs}
    bodies = {(c.head.pred, x.pred) for c in p.clauses for x in c.body}
    assert {(k.atom.pred, m.atom.pred) for k, m in r.arcs} <= bodies
    assert heads <= p.defined


def test_forest_dot():
    p = load("reachable")
    f, _ = lg_evaluate(p, p.queries[0])
    dot = f.to_dot()
    assert dot.startswith("digraph forest {") and "cluster_1" in dot
