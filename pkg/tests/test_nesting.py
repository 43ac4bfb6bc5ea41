import pytest

from mttlab.fixtures import double, ident, improp, mlnest, nest2, revdewey
from mttlab.lookahead import all_trees
from mttlab.mtt import Evaluator, apply
from mttlab.nesting import (
    Origin, StateCallTree, decide_lhi, decide_lshi, erase_sharp, find_ml_nesting_loop,
    find_nesting_loop, find_pattern, growth_family, origin_output, origins, sharpen,
    state_call_tree, trim, validate_loop, widest_trim,
)
from mttlab.trees import Sharp, Tree, iter_nodes, parse_tree as T


def chain(k, sym="a", base="e"):
    t = Tree(base)
    for _ in range(k):
        t = Tree(sym, [t])
    return t


def test_sharpen_wraps_rules():
    ms = sharpen(nest2())
    assert str(ms.rules[("q", "a", ("p",))]) == "#q(<q,x1>(<q,x1>(y1)))"
    assert str(apply(ms, T("a(a(e))"))) == "#q0(#q(#q(b(#q(b(c))))))"


def test_marker_count_is_rule_firings():
    m = nest2()
    for k in range(1, 6):
        out = apply(sharpen(m), chain(k))
        markers = sum(1 for _, s in iter_nodes(out) if type(s.label) is Sharp)
        # q0 fires once, q fires 2^(j-1) times at input depth j
        assert markers == 1 + sum(2 ** (j - 1) for j in range(1, k + 1))


def test_erasure_law(shipped, random_corpus):
    for m in list(shipped.values()) + random_corpus[:20]:
        ms = sharpen(m)
        e, es = Evaluator(m), Evaluator(ms)
        for s in all_trees(m.input_alphabet, 6):
            assert erase_sharp(es.apply(s)) is e.apply(s)


def test_origins():
    pairs = origins(ident(), T("f(a, a)"))
    assert ((), ()) in pairs
    assert pairs == {((), ()), ((1,), (1,)), ((2,), (2,))}
    out = origin_output(sharpen(nest2()), chain(3))
    marks = [(v, s.label.node) for v, s in iter_nodes(out) if type(s.label.label) is Sharp]
    sc = state_call_tree(nest2(), chain(3))
    assert {(u, v) for v, u in marks} == set(sc.nodes)


def test_state_call_tree_examples():
    sc = state_call_tree(ident(), T("a"))
    assert sc.describe() == [("ε", "ε", ("q0", "p", 0))]
    sc = state_call_tree(nest2(), T("a(a(e))"))
    assert sc.describe() == [
        ("ε", "ε", ("q0", "p", 0)),
        ("1", "1", ("q", "p", 1)),
        ("1.1", "1.1", ("q", "p", 1)),
        ("1.1", "1.1.1.1", ("q", "p", 0)),
    ]
    for node, par in sc.parent.items():
        if par is not None:
            assert sc.depth(par) == sc.depth(node) - 1


def test_trim():
    sc = state_call_tree(nest2(), chain(4))
    assert set(trim(sc, (), ()).nodes) == {((), ())}
    widths = [widest_trim(state_call_tree(nest2(), chain(n)), (1,) * n).width() for n in range(1, 7)]
    assert widths == [1, 2, 4, 8, 16, 32]
    sc = state_call_tree(ident(), T("f(f(a, a), f(a, a))"))
    assert all(trim(sc, u, v).width() == 1 for u, v in sc.nodes)


def test_width_law():
    """Nodes of a trim at input depth ``|u|`` are the calls at ``u`` nesting along ``v``."""
    m = nest2()
    t = chain(4)
    sc = state_call_tree(m, t)
    out = origin_output(sharpen(m), t)
    for v, s in iter_nodes(out):
        if s.children:
            continue
        u = ()
        anc = [n for path, n in iter_nodes(out) if v[:len(path)] == path]
        for d in range(5):
            count = sum(1 for n in anc if type(n.label.label) is Sharp and n.label.node == u)
            tr = trim(sc, u, v)
            assert count == sum(1 for n in tr.nodes if n[0] == u)
            u = u + (1,)


def test_find_pattern_hand_built():
    nodes = {((), ()): "r", ((1,), (1,)): "A", ((2,), (2,)): "B",
             ((1, 1), (1, 1)): "A", ((1, 2), (1, 2)): "B", ((2, 1), (2, 1)): "B"}
    parent = {((), ()): None, ((1,), (1,)): ((), ()), ((2,), (2,)): ((), ()),
              ((1, 1), (1, 1)): ((1,), (1,)), ((1, 2), (1, 2)): ((1,), (1,)),
              ((2, 1), (2, 1)): ((2,), (2,))}
    sc = StateCallTree(T("e"), ident(), T("e"), nodes, parent)
    found = find_pattern(sc, label=lambda n: nodes[n])
    assert found == (((1,), (1,)), ((2,), (2,)), ((1, 1), (1, 1)), ((1, 2), (1, 2)), ((2, 1), (2, 1)))


def test_find_pattern_absent_on_distinct_labels():
    nodes = {((), ()): 0, ((1,), (1,)): 1, ((1, 1), (1, 1)): 2}
    parent = {((), ()): None, ((1,), (1,)): ((), ()), ((1, 1), (1, 1)): ((1,), (1,))}
    sc = StateCallTree(T("e"), ident(), T("e"), nodes, parent)
    assert find_pattern(sc, label=lambda n: nodes[n]) is None


def test_find_pattern_on_nest2():
    tr = widest_trim(state_call_tree(nest2(), chain(5)), (1,) * 5)
    a, b, *_ = find_pattern(tr)
    assert tr.label(a)[0] == tr.label(b)[0] == "q"


def test_loops():
    loop = find_nesting_loop(nest2())
    assert loop.kind == "Nesting" and loop.validated
    assert str(loop.context) == "a(@p)" and loop.states == ("q", "q") and loop.params[0] == 1
    assert find_nesting_loop(ident()) is None
    assert find_nesting_loop(double()) is None
    ml = find_ml_nesting_loop(mlnest())
    assert ml.kind == "MLNesting" and validate_loop(mlnest(), ml)
    assert find_ml_nesting_loop(ident()) is None


@pytest.mark.parametrize("make", [ident, double, revdewey, improp])
def test_linear_fixtures(make):
    for decide in (decide_lshi, decide_lhi):
        r = decide(make())
        assert r.verdict and r.bound >= 1 and r.loop is None


def test_nest2_decisions():
    for decide in (decide_lshi, decide_lhi):
        r = decide(nest2())
        assert not r.verdict and r.loop.kind == "Nesting"


def test_mlnest_decisions():
    assert decide_lshi(mlnest()).verdict
    r = decide_lhi(mlnest())
    assert not r.verdict and r.loop.kind == "MLNesting"
    heights = [growth_family(r, k).height for k in (1, 2, 3)]
    outs = [apply(mlnest(), growth_family(r, k)).height for k in (1, 2, 3)]
    ratios = [o / h for o, h in zip(outs, heights)]
    assert ratios[0] < ratios[1] < ratios[2]


def test_report_json():
    r = decide_lshi(nest2()).to_json()
    assert r["verdict"] is False and r["loop"]["kind"] == "Nesting" and "bound" not in r
    r = decide_lhi(double()).to_json()
    assert r["verdict"] is True and r["growth_bound"] == r["bound"] * r["rhs_height"]
