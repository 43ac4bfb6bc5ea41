import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mttlab.errors import InfinitePout, NotNondeleting
from mttlab.fixtures import ident, improp, nest2
from mttlab.mtt import Mtt, eval_state
from mttlab.pout import (
    compute_F, depth_of_param, erase, lcop, phi_set, pout_enumerate, pout_f, pout_finite,
    refined_lcop, restrict,
)
from mttlab.trees import Tree, param, parse_tree as T, powerset_leaf


def test_lcop_examples():
    assert lcop(T("f(y1, g(a))"), {1}) is T("f(y1, $)")
    assert lcop(T("g(a)"), {1}) is T("$")
    assert lcop(T("h(<q,x1>(y1), y1)"), {1}) is T("h(<q,x1>(y1), y1)")
    assert lcop(T("f(y1, y2)"), {1}) is T("f(y1, $)")


@st.composite
def param_trees(draw, depth=4):
    if depth == 0 or draw(st.booleans()) and depth < 4:
        return Tree(draw(st.sampled_from(["a", "y1", "y2", "y3"])))
    sym = draw(st.sampled_from(["f", "g"]))
    k = 2 if sym == "f" else 1
    return Tree(sym, [draw(param_trees(depth - 1)) for _ in range(k)])


@settings(max_examples=300, deadline=None)
@given(param_trees(), st.sets(st.integers(1, 3)))
def test_lcop_idempotent(s, yp):
    once = lcop(s, yp)
    assert lcop(once, yp) is once


@settings(max_examples=300, deadline=None)
@given(param_trees(), st.sets(st.integers(1, 3), min_size=1))
def test_refined_lcop_erases_to_lcop(s, yp):
    assert erase(refined_lcop(s, yp)) is lcop(s, yp)


@settings(max_examples=300, deadline=None)
@given(param_trees(), st.sets(st.integers(1, 3)), st.sets(st.integers(1, 3)))
def test_restrict_matches_direct_refinement(s, small, extra):
    big = small | extra
    if not small:
        return
    assert restrict(refined_lcop(s, big), small) is refined_lcop(s, small)


def test_depth_of_param():
    assert depth_of_param(T("f(y1, g(y1))"), 1) == 2
    assert depth_of_param(T("y1"), 1) == 0
    assert depth_of_param(T("a"), 1) == -1


def test_pout_enumerate_examples():
    assert pout_enumerate(improp(), "q", {1}, "p", 6) == {T("y1"), T("h($, y1)")}
    assert pout_enumerate(nest2(), "q", {1}, "p", 4) == {
        T("b(y1)"), T("b(b(y1))"), T("b(b(b(b(y1))))"), T("b(b(b(b(b(b(b(b(y1))))))))")}
    assert pout_enumerate(nest2(), "q", {1}, "p", 0) == set()


def test_pout_finite_examples():
    res = pout_finite(improp(), "q", 1, "p")
    assert res.status == "Finite"
    assert set(res.forms) == {T("y1"), T("h($, y1)")} == pout_enumerate(improp(), "q", {1}, "p", 10)
    res = pout_finite(nest2(), "q", 1, "p")
    assert res.status == "Infinite"
    assert res.witness.verified
    depths = [depth_of_param(eval_state(nest2(), "q", res.witness.input(n)), 1) for n in range(5)]
    assert all(a < b for a, b in zip(depths, depths[1:]))
    assert pout_finite(ident(), "q0", 1, "p").status == "NotApplicable"


def test_compute_F_examples():
    fp, f1, fmap = compute_F(improp(), "p")
    assert ("q", 1) in fp and "q" in f1 and fmap["q"] == {1}
    fp, _, _ = compute_F(nest2(), "p")
    assert ("q", 1) not in fp
    assert compute_F(ident(), "p") == (set(), set(), {})


def test_pout_f_examples():
    assert pout_f(improp(), "q", {1}, "p") == {T("y1"), Tree("h", [powerset_leaf([]), T("y1")])}
    assert {erase(t) for t in pout_f(improp(), "q", {1}, "p")} == pout_enumerate(improp(), "q", {1}, "p", 8)
    with pytest.raises(InfinitePout):
        pout_f(nest2(), "q", {1}, "p")


def test_phi_set():
    assert phi_set(ident(), "p") == [{}]
    assert len(phi_set(improp(), "p")) == len(pout_f(improp(), "q", {1}, "p"))


def test_phi_set_product_rule():
    # two improper states with 2 and 3 forms
    m = Mtt.build({"q0": 0, "r": 1, "s": 1}, "q0", {"a": 1, "e": 0}, {"h": 2, "c": 0}, {
        ("q0", "a"): "<r,x1>(<s,x1>(c))",
        ("q0", "e"): "c",
        ("r", "a"): "h(c, y1)",
        ("r", "e"): "y1",
        ("s", "a"): "h(<s,x1>(c), y1)",
        ("s", "e"): "y1",
    })
    sizes = {q: len(pout_f(m, q, {1}, "p")) for q in ("r", "s")}
    assert len(phi_set(m, "p")) == sizes["r"] * sizes["s"]
    assert sorted(sizes.values()) == [2, 2]
    m3 = Mtt.build({"q0": 0, "r": 1, "s": 1, "t": 1}, "q0", {"a": 1, "e": 0}, {"h": 2, "c": 0}, {
        ("q0", "a"): "<r,x1>(<s,x1>(c))",
        ("q0", "e"): "c",
        ("r", "a"): "h(c, y1)",
        ("r", "e"): "y1",
        ("s", "a"): "<t,x1>(y1)",
        ("s", "e"): "y1",
        ("t", "a"): "h(c, h(c, y1))",
        ("t", "e"): "h(c, y1)",
    })
    assert [len(pout_f(m3, q, {1}, "p")) for q in ("r", "s")] == [2, 3]
    assert len(phi_set(m3, "p")) == 2 * 3 * 2


def test_deleting_transducer_rejected():
    m = Mtt.build({"q0": 0, "q": 1}, "q0", {"a": 1, "e": 0}, {"c": 0}, {
        ("q0", "a"): "<q,x1>(c)", ("q0", "e"): "c", ("q", "a"): "c", ("q", "e"): "y1"})
    with pytest.raises(NotNondeleting):
        pout_finite(m, "q", 1, "p")


def test_fixture_verdicts_agree_with_enumeration(shipped):
    for m in shipped.values():
        for q, r in m.states.items():
            for j in range(1, r + 1):
                for p in m.lookahead.states:
                    res = pout_finite(m, q, j, p)
                    e = [pout_enumerate(m, q, {j}, p, b) for b in (4, 8, 10)]
                    if res.status == "Finite":
                        assert e[2] == set(res.forms)
                    else:
                        assert len(e[0]) < len(e[1]) < len(e[2])
