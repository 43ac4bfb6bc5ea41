import pytest

from mttlab.errors import UnknownSymbol
from mttlab.lookahead import TreeAutomaton, all_trees
from mttlab.trees import Mark, Tree, parse_tree as T, sort_key


def parity():
    return TreeAutomaton(["even", "odd"], {"a": 1, "e": 0}, {
        ("e", ()): "even",
        ("a", ("even",)): "odd",
        ("a", ("odd",)): "even",
    })


def test_parity_run():
    la = parity()
    assert la.run(T("e")) == "even"
    assert la.run(T("a(a(a(e)))")) == "odd"
    assert la.run(Tree(Mark("odd"))) == "odd"
    assert la.run(T("a(@odd)")) == "even"


def test_parity_samples():
    la = parity()
    assert la.sample_tree("odd") is T("a(e)")
    assert la.sample_tree("even") is T("e")
    assert la.nonempty_states() == {"even", "odd"}


def test_trivial_enumeration():
    la = TreeAutomaton.trivial({"a": 1, "e": 0})
    assert la.enumerate_trees("p", 3) == [T("e"), T("a(e)"), T("a(a(e))")]


def test_partial_table_rejected():
    with pytest.raises(ValueError):
        TreeAutomaton(["p"], {"a": 1, "e": 0}, {("e", ()): "p"})


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parity().run(T("b"))


def test_empty_state():
    la = TreeAutomaton(["p", "dead"], {"e": 0, "g": 2}, {
        ("e", ()): "p",
        **{("g", (x, y)): "p" for x in ("p", "dead") for y in ("p", "dead")},
    })
    assert la.nonempty_states() == {"p"}
    assert la.sample_tree("dead") is None
    assert la.enumerate_trees("dead", 6) == []


@pytest.mark.parametrize("n", range(1, 8))
def test_enumerate_agrees_with_run(n):
    la = TreeAutomaton(["p0", "p1"], {"g": 2, "a": 1, "e": 0}, {
        ("e", ()): "p0",
        ("a", ("p0",)): "p1", ("a", ("p1",)): "p1",
        ("g", ("p0", "p0")): "p0", ("g", ("p0", "p1")): "p1",
        ("g", ("p1", "p0")): "p0", ("g", ("p1", "p1")): "p1",
    })
    everything = all_trees(la.alphabet, n)
    for p in la.states:
        got = la.enumerate_trees(p, n)
        assert got == sorted(got, key=sort_key)
        assert set(got) == {t for t in everything if la.run(t) == p}


def test_all_trees_counts():
    # unary-binary trees: Motzkin-like counts 1, 1, 2, 4, 9
    alpha = {"f": 2, "g": 1, "a": 0}
    counts = [sum(1 for t in all_trees(alpha, n) if t.size == n) for n in range(1, 6)]
    assert counts == [1, 1, 2, 4, 9]
