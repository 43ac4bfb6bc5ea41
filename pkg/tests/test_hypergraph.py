import itertools

from hypothesis import given, settings, strategies as st

from mttlab.hypergraph import HOLE, Hypergraph, plug_hole
from mttlab.trees import Tree

CAP = 100  # acyclic sums over four nodes stay below 31


def oracle(g):
    """Value sets truncated at ``CAP``; ``CAP`` itself stands for "larger"."""
    vals = {n: set() for n in g.nodes}
    changed = True
    while changed:
        changed = False
        for n, prods in g.productions.items():
            for p in prods:
                sums = {p.const}
                for t in p.targets:
                    sums = {min(CAP, a + b) for a in sums for b in vals[t]}
                new = sums - vals[n]
                if new:
                    vals[n] |= new
                    changed = True
    return vals


@st.composite
def grammars(draw):
    n = draw(st.integers(1, 4))
    g = Hypergraph()
    for i in range(n):
        g.node(i)
    for _ in range(draw(st.integers(0, 7))):
        node = draw(st.integers(0, n - 1))
        targets = draw(st.lists(st.integers(0, n - 1), max_size=2))
        g.add(node, draw(st.integers(0, 2)), targets)
    return g


@settings(max_examples=300, deadline=None)
@given(grammars())
def test_solve_matches_value_sets(g):
    res = g.solve()
    vals = oracle(g)
    for n in g.nodes:
        assert (n in res.realizable) == bool(vals[n])
        assert (n in res.unbounded) == (CAP in vals[n])
        assert (n in res.positive) == any(v > 0 for v in vals[n])
        if vals[n] and CAP not in vals[n]:
            assert res.maximum[n] == max(vals[n])


@settings(max_examples=200, deadline=None)
@given(grammars())
def test_witness_cycle_returns(g):
    res = g.solve()
    for n in res.unbounded:
        prefix, cycle = res.witness(n)
        node = n
        for prod, idx in prefix:
            assert prod.node == node
            node = prod.targets[idx]
        start = node
        for prod, idx in cycle:
            assert prod.node == node
            node = prod.targets[idx]
        assert node == start


def test_doubling_chain():
    g = Hypergraph()
    g.add("a", 1, ())
    g.add("b", 0, ("a", "a"))
    g.add("c", 0, ("b", "b"))
    res = g.solve()
    assert res.maximum["c"] == 4
    assert not res.unbounded


def test_self_loop_without_gain_is_bounded():
    g = Hypergraph()
    g.add("a", 0, ("a",))
    g.add("a", 3, ())
    res = g.solve()
    assert res.maximum["a"] == 3 and not res.unbounded


def test_unrealizable_node():
    g = Hypergraph()
    g.add("a", 1, ("a",))
    res = g.solve()
    assert "a" not in res.realizable and not res.unbounded


def test_plug_hole():
    ctx = Tree("f", [Tree("a"), HOLE])
    assert plug_hole(ctx, Tree("b")) is Tree("f", [Tree("a"), Tree("b")])
