import pytest

from mttlab.errors import UndefinedRule
from mttlab.fixtures import double, ident, improp, mlnest, nest2, revdewey
from mttlab.lookahead import TreeAutomaton, all_trees
from mttlab.mtt import (
    Evaluator, Mtt, apply, eval_state, extend, plug, provisional_output, reachable_calls, validate,
)
from mttlab.trees import Call, Mark, PCall, Tree, param, param_index, parse_tree as T, subst_params


class Pending:
    """Label of an unevaluated call ``<q, s>`` in a sentential form."""

    def __init__(self, q, s):
        self.q, self.s = q, s


def rewrite(m, s, limit=20000):
    """Outermost rewriting of ``<q0, s>`` until no call is left."""
    form = Tree(Pending(m.initial, s))
    for _ in range(limit):
        path = _outermost(form)
        if path is None:
            return form
        form = _replace(form, path, m)
    raise RuntimeError("rewriting did not terminate within the limit")


def _outermost(t, path=()):
    if isinstance(t.label, Pending):
        return path
    for i, c in enumerate(t.children, 1):
        hit = _outermost(c, path + (i,))
        if hit is not None:
            return hit
    return None


def _replace(t, path, m):
    if path:
        i = path[0]
        kids = list(t.children)
        kids[i - 1] = _replace(kids[i - 1], path[1:], m)
        return Tree(t.label, kids)
    q, s = t.label.q, t.label.s
    ps = tuple(m.lookahead.run(c) for c in s.children)
    rhs = m.rules[(q, s.label, ps)]
    args = t.children

    def go(node):
        if type(node.label) is Call:
            return Tree(Pending(node.label.state, s.children[node.label.var - 1]),
                        [go(c) for c in node.children])
        j = param_index(node.label)
        if j is not None:
            return args[j - 1]
        return Tree(node.label, [go(c) for c in node.children])

    return go(rhs)


@pytest.mark.parametrize("make", [ident, double, nest2, revdewey, improp, mlnest])
def test_evaluator_matches_rewriting(make):
    m = make()
    for s in all_trees(m.input_alphabet, 6):
        assert apply(m, s) is rewrite(m, s)


def test_evaluator_matches_rewriting_on_corpus(random_corpus):
    for m in random_corpus[:20]:
        ev = Evaluator(m)
        for s in all_trees(m.input_alphabet, 4):
            if ev.apply(s).size > 2000:
                continue
            assert ev.apply(s) is rewrite(m, s)


def test_fixture_outputs():
    assert apply(ident(), T("f(a, f(a, a))")) is T("f(a, f(a, a))")
    assert apply(double(), T("a(e)")) is T("f(c, c)")
    assert eval_state(nest2(), "q", T("a(e)")) is T("b(b(y1))")
    assert apply(nest2(), T("a(a(e))")) is T("b(b(c))")
    assert apply(improp(), T("a(a(e))")) is T("h(c, c)")
    assert apply(mlnest(), T("s(e, e)")) is T("b(b(c))")


def test_nest2_output_height():
    m = nest2()
    for k in range(1, 9):
        s = T("e")
        for _ in range(k):
            s = Tree("a", [s])
        assert apply(m, s).height == 2 ** (k - 1) + 1


@pytest.mark.parametrize("make", [ident, double, nest2, revdewey, improp, mlnest])
def test_fixtures_are_valid(make):
    assert validate(make()).ok


def test_validate_lists_each_kind():
    m = Mtt.build({"q0": 0, "q": 2}, "q0", {"a": 1, "e": 0}, {"b": 1, "c": 0}, {
        ("q0", "a"): "<q,x1>(c, c)",
        ("q", "a"): "b(<q,x2>(y1, y1))",
        ("q", "e"): "y1",
    })
    kinds = validate(m).kinds()
    assert {"Totality", "Rank", "Nondeletion"} <= kinds
    assert ("q0", "e", ()) in {v.key for v in validate(m).violations if v.kind == "Totality"}


def test_undefined_rule_raises():
    m = Mtt.build({"q0": 0}, "q0", {"a": 1, "e": 0}, {"c": 0}, {("q0", "a"): "c"})
    with pytest.raises(UndefinedRule):
        apply(m, T("e"))


def test_provisional_output_examples():
    pending = lambda *kids: Tree(PCall("q", Mark("p")), list(kids))  # noqa: E731
    assert provisional_output(nest2(), T("a(@p)")) is pending(T("c"))
    assert provisional_output(nest2(), T("a(a(@p))")) is pending(pending(T("c")))
    assert provisional_output(double(), T("a(@p)")) is Tree(
        "f", [Tree(PCall("q0", Mark("p"))), Tree(PCall("q0", Mark("p")))])


def test_provisional_output_replacement_law():
    """Plugging ``s'`` into the hole equals substituting ``M_q(s')`` for each pending call."""
    for make in (double, nest2, revdewey, improp):
        m = make()
        ev = Evaluator(m)
        hole = Mark("p")
        for ctx in all_trees(extend(m).input_alphabet, 4):
            if sum(1 for _ in _marks(ctx)) != 1:
                continue
            for filler in all_trees(m.input_alphabet, 3):
                direct = ev.apply(plug(ctx, hole, filler))
                pending = ev.apply(ctx)
                assert direct is _fill(pending, ev, filler)


def _marks(t):
    if type(t.label) is Mark:
        yield t
    for c in t.children:
        yield from _marks(c)


def _fill(t, ev, filler):
    kids = [_fill(c, ev, filler) for c in t.children]
    if type(t.label) is PCall:
        return subst_params(ev.state(t.label.state, filler), kids)
    return Tree(t.label, kids) if kids else t


def test_extend_adds_marks():
    m = extend(nest2())
    assert Mark("p") in m.input_alphabet
    assert m.rules[("q", Mark("p"), ())] is Tree(PCall("q", Mark("p")), [Tree(param(1))])
    assert validate(m).ok


def brute_reachable(m, size):
    """Pairs seen as pending calls in ``M̂(s)`` over small inputs with marks."""
    found = set()
    ext = extend(m)
    ev = Evaluator(m)
    for s in all_trees(ext.input_alphabet, size):
        if any(n.label.la not in m.nonempty for n in _marks(s)):
            continue
        for node in _nodes(ev.apply(s)):
            if type(node.label) is PCall:
                found.add((node.label.state, node.label.mark.la))
    return found


def _nodes(t):
    yield t
    for c in t.children:
        yield from _nodes(c)


def test_reachable_calls_fixtures():
    assert reachable_calls(nest2()) == {("q0", "p"), ("q", "p")}
    assert reachable_calls(ident()) == {("q0", "p")}


def test_reachable_calls_against_brute_force(random_corpus):
    for m in random_corpus[:25]:
        got = reachable_calls(m)
        brute = brute_reachable(m, 5)
        assert brute <= got
        ctx = reachable_calls(m, with_contexts=True)
        ev = Evaluator(m)
        for (q, p), c in ctx.items():
            out = ev.apply(c)
            assert any(type(n.label) is PCall and n.label.state == q and n.label.mark.la == p
                       for n in _nodes(out))


def test_lookahead_selects_rules():
    la = TreeAutomaton(["even", "odd"], {"a": 1, "e": 0}, {
        ("e", ()): "even", ("a", ("even",)): "odd", ("a", ("odd",)): "even"})
    m = Mtt.build({"q0": 0}, "q0", {"a": 1, "e": 0}, {"b": 1, "c": 0, "d": 0}, {
        ("q0", "a", ("even",)): "b(<q0,x1>)",
        ("q0", "a", ("odd",)): "<q0,x1>",
        ("q0", "e"): "c",
    }, lookahead=la)
    assert apply(m, T("a(a(a(e)))")) is T("b(b(c))")
