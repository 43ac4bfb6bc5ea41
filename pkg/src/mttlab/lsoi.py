"""Distinct-subtree growth: the equivalence gadget and empirical profiles.

Whether a transducer's number of distinct output subtrees grows linearly in
the input size is at least as hard as equivalence.  :func:`build_gadget`
turns two transducers into one whose distinct-subtree growth is linear
exactly when they agree on every input; the rest of the module measures
growth on concrete inputs and never claims a decision.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from fractions import Fraction

from .errors import AlphabetMismatch
from .lookahead import TreeAutomaton, all_trees
from .mtt import Evaluator, Mtt
from .trees import Call, RankedAlphabet, Tree, param, subtrees


@dataclass(frozen=True)
class LsoiProfile:
    samples: tuple              # (input, input_size, distinct_subtrees)
    fitted_ratio: Fraction      # least-squares slope of count over size, through the origin
    verdict_hint: str           # LinearConsistent | SuperLinear (heuristic, not a decision)
    slope: float = 0.0          # ordinary least squares with intercept
    intercept: float = 0.0
    residual_ratio: float = 0.0  # RMS residual of that fit over mean count

    def rows(self) -> list:
        return [(str(t), n, c) for t, n, c in self.samples]


def _fresh(name: str, taken) -> str:
    out, k = name, 1
    while out in taken:
        out = f"{name}{k}"
        k += 1
    return out


def _rename_states(m: Mtt, taken: set, suffix: str) -> tuple:
    mapping = {}
    for q in m.states:
        new = q
        if q in taken:
            new = _fresh(f"{q}{suffix}", taken | set(m.states) | set(mapping.values()))
        mapping[q] = new

    def fix(t: Tree) -> Tree:
        label = t.label
        if type(label) is Call:
            label = Call(mapping[label.state], label.var)
        return Tree(label, [fix(c) for c in t.children]) if t.children else Tree(label)

    rules = {(mapping[q], sym, ps): fix(rhs) for (q, sym, ps), rhs in m.rules.items()}
    states = {mapping[q]: k for q, k in m.states.items()}
    return states, mapping[m.initial], rules, mapping


def build_gadget(m1: Mtt, m2: Mtt, name: str = "gadget") -> Mtt:
    """A transducer of linear distinct-subtree growth iff ``m1`` and ``m2`` are equivalent.

    On ``a^{n+1}(t)`` with ``t`` free of ``a`` it outputs a full binary tree of
    height ``n`` whose leaves hold ``f``-lists of ``M1(t)``/``M2(t)`` spelling
    the reversed path to the leaf; on any other input it outputs ``e``.
    Overlapping state names of ``m2`` are renamed; ``a``, ``f``, ``e`` and the
    two new states get fresh names when taken.  The new state ``q`` drops its
    first two parameters at the bottom, so the gadget is not nondeleting.
    """
    if m1.input_alphabet != m2.input_alphabet or m1.output_alphabet != m2.output_alphabet:
        raise AlphabetMismatch("both transducers need the same input and output alphabets")
    for m in (m1, m2):
        if not m.lookahead.is_trivial:
            raise AlphabetMismatch("look-ahead must be trivial")
    sigma = m1.input_alphabet
    delta = m1.output_alphabet
    a = _fresh("a", set(sigma))
    f = _fresh("f", set(delta))
    e = _fresh("e", set(delta) | {f})
    s1, i1, r1, _ = _rename_states(m1, set(), "")
    s2, i2, r2, _ = _rename_states(m2, set(s1), "_2")
    taken = set(s1) | set(s2)
    q0 = _fresh("q0", taken)
    q = _fresh("q", taken | {q0})

    sigma2 = dict(sigma)
    sigma2[a] = 1
    p = m1.lookahead.states[0]
    la = TreeAutomaton.trivial(sigma2, p)
    out = dict(delta)
    out[f] = 2
    out[e] = 0
    y = [Tree(param(j)) for j in range(1, 4)]
    x = lambda st, args=(): Tree(Call(st, 1), list(args))  # noqa: E731

    rules = {}
    for src in (r1, r2):
        for (st, sym, _), rhs in src.items():
            rules[(st, sym, (p,) * sigma[sym])] = rhs
    rules[(q0, a, (p,))] = x(q, [x(i1), x(i2), Tree(e)])
    rules[(q, a, (p,))] = Tree(f, [x(q, [y[0], y[1], Tree(f, [y[0], y[2]])]),
                                   x(q, [y[0], y[1], Tree(f, [y[1], y[2]])])])
    for sym, k in sigma.items():
        rules[(q0, sym, (p,) * k)] = Tree(e)
        rules[(q, sym, (p,) * k)] = y[2]
    for st, k in list(s1.items()) + list(s2.items()):
        rules[(st, a, (p,))] = x(st, [Tree(param(j)) for j in range(1, k + 1)])
    states = {**s1, **s2, q0: 0, q: 3}
    return Mtt(states, q0, sigma2, RankedAlphabet(out), la, rules, name=name)


def distinct_subtrees(t: Tree) -> int:
    """``|sub(t)|``, exact thanks to interning."""
    return len(subtrees(t))


def profile(m: Mtt, inputs, measure=distinct_subtrees) -> LsoiProfile:
    """Growth of ``measure(M(s))`` against ``|s|``; see :func:`profile_lsoi`."""
    ev = Evaluator(m)
    samples = tuple((s, s.size, measure(ev.apply(s))) for s in inputs)
    return _fit(samples)


def profile_lsoi(m: Mtt, inputs) -> LsoiProfile:
    """Distinct output subtrees per input, with a linear fit and a growth hint.

    The hint is ``SuperLinear`` when every sample of the second half exceeds
    the linear trend fitted on the first half by more than 5%.
    """
    return profile(m, inputs)


TOLERANCE = 1.05


def _fit(samples) -> LsoiProfile:
    xs = [n for _, n, _ in samples]
    ys = [c for _, _, c in samples]
    if not samples:
        return LsoiProfile((), Fraction(0), "LinearConsistent")
    ratio = Fraction(sum(x * y for x, y in zip(xs, ys)), sum(x * x for x in xs))
    slope, intercept, resid = float(ratio), 0.0, 0.0
    if len(set(xs)) >= 2:
        slope, intercept = statistics.linear_regression(xs, ys)
        res = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
        resid = (sum(r * r for r in res) / len(res)) ** 0.5 / (sum(ys) / len(ys))
    half = len(samples) // 2
    hint = "LinearConsistent"
    if half >= 1:
        if len(set(xs[:half])) >= 2:
            a, b = statistics.linear_regression(xs[:half], ys[:half])
            trend = [a * x + b for x in xs[half:]]
        else:
            c = max(Fraction(y, x) for x, y in zip(xs[:half], ys[:half]))
            trend = [c * x for x in xs[half:]]
        if all(y > TOLERANCE * t for y, t in zip(ys[half:], trend)):
            hint = "SuperLinear"
    return LsoiProfile(tuple(samples), ratio, hint, slope, intercept, resid)


def sampled_equivalence(m1: Mtt, m2: Mtt, size_budget: int):
    """Smallest input of size ``≤ size_budget`` on which the translations differ, else ``None``."""
    if m1.input_alphabet != m2.input_alphabet:
        raise AlphabetMismatch("input alphabets differ")
    e1, e2 = Evaluator(m1), Evaluator(m2)
    for s in all_trees(m1.input_alphabet, size_budget):
        if e1.apply(s) != e2.apply(s):
            return s
    return None


def pumped_inputs(m: Mtt, t: Tree, ns) -> list:
    """``a^{n+1}(t)`` for the gadget ``m`` (its fresh unary symbol is the only new input symbol)."""
    a = gadget_symbol(m)
    out = []
    for n in ns:
        s = t
        for _ in range(n + 1):
            s = Tree(a, [s])
        out.append(s)
    return out


def gadget_symbol(m: Mtt) -> str:
    """The unary input symbol added by :func:`build_gadget`."""
    q0 = m.initial
    for (q, sym, _), rhs in m.rules.items():
        if q == q0 and rhs.children and type(rhs.label) is Call:
            return sym
    raise ValueError("not a gadget")
