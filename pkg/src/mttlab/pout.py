"""Output forms of parameters: lcop pruning, pout sets and their finiteness.

``pout((q, Y'), p)`` is the set of prunings ``⌈M_q(s)⌉_{Y'}`` over ``s ∈ L_p``:
every maximal subtree without a parameter of ``Y'`` becomes ``$``.

Finiteness of ``pout((q, y_j), p)`` is decided on the occurrence graph (see
:mod:`mttlab.hypergraph`): the node ``(q, j, p)`` stands for the depths of
``y_j`` in ``M_q(s)``, ``s ∈ L_p``, and a rule contributes one production per
occurrence of ``y_j`` in its right-hand side.  Finite sets are then computed
exactly by a joint fixpoint over vectors of refined forms, one vector per
realizable combination (the look-ahead enrichment used by normalisation).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable

from .errors import AnalysisError, InfinitePout, NotNondeleting
from .hypergraph import HOLE, RefinedSystem, plug_hole
from .mtt import Mtt, format_key
from .trees import (
    NOP,
    Call,
    Tree,
    is_powerset_leaf,
    param_index,
    powerset_leaf,
    sort_key,
    to_str,
    transform,
)

_NOP = Tree(NOP)


def lcop(s: Tree, yp) -> Tree:
    """``⌈s⌉_{Y'}`` with ``Y'`` given as a set of parameter indices."""
    yp = frozenset(yp)

    def fn(node, kids):
        if not (node.params & yp):
            return _NOP
        if not kids:
            return node
        return Tree(node.label, kids)

    if not yp:
        return _NOP
    return transform(s, fn)


def erase(form: Tree) -> Tree:
    """Replace every powerset leaf by ``$``."""
    return transform(form, lambda n, kids: _NOP if is_powerset_leaf(n.label)
                     else (Tree(n.label, kids) if kids else n))


def restrict(form: Tree, yp) -> Tree:
    """Re-collapse a refined form with respect to the smaller set ``yp``."""
    yp = frozenset(yp)

    def fn(node, kids):
        label = node.label
        if not kids:
            if is_powerset_leaf(label):
                return node
            j = param_index(label)
            if j is not None and j not in yp:
                return powerset_leaf([j])
            return node
        if all(is_powerset_leaf(k.label) for k in kids):
            return powerset_leaf(frozenset().union(*(k.label for k in kids)))
        return Tree(label, kids)

    return transform(form, fn)


def refined_lcop(s: Tree, yp) -> Tree:
    """``⌈s⌉_{Y'}`` with each pruned subtree replaced by the set of its parameter indices."""
    yp = frozenset(yp)

    def fn(node, kids):
        if not (node.params & yp):
            return powerset_leaf(node.params)
        if not kids:
            return node
        return Tree(node.label, kids)

    return transform(s, fn)


def depth_of_param(s: Tree, j: int) -> int:
    """Largest number of edges from the root to an occurrence of ``y_j`` (``-1`` if absent)."""
    def fn(node, kids):
        if not kids:
            return 0 if param_index(node.label) == j else -1
        d = max(kids)
        return d + 1 if d >= 0 else -1

    return _fold(s, fn)


def _fold(t: Tree, fn):
    memo: dict = {}
    stack = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if node in memo:
            continue
        if ready or not node.children:
            memo[node] = fn(node, [memo[c] for c in node.children])
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in node.children if c not in memo)
    return memo[t]


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class PumpWitness:
    """Inputs ``prefix[loop^n[base]]`` along which a tracked quantity grows.

    ``prefix`` and ``loop`` contain the hole :data:`~mttlab.hypergraph.HOLE`
    exactly once; ``la`` is the look-ahead state of every ``loop^n[base]``.
    """

    prefix: Tree
    loop: Tree
    base: Tree
    la: Hashable
    verified: bool = False

    def input(self, n: int) -> Tree:
        t = self.base
        for _ in range(n):
            t = plug_hole(self.loop, t)
        return plug_hole(self.prefix, t)

    def describe(self) -> str:
        def show(t):
            return to_str(t).replace(to_str(HOLE), "[]")

        return f"prefix {show(self.prefix)}, loop {show(self.loop)}, base {show(self.base)}"


@dataclass(frozen=True)
class PoutResult:
    status: str  # Finite | Infinite | NotApplicable
    forms: frozenset = frozenset()
    witness: PumpWitness | None = None

    @property
    def finite(self) -> bool:
        return self.status != "Infinite"

    def sorted_forms(self) -> list:
        return sorted(self.forms, key=sort_key)

    def __str__(self):
        if self.status == "Infinite":
            return f"Infinite ({self.witness.describe()})" if self.witness else "Infinite"
        if self.status == "NotApplicable":
            return "NotApplicable"
        return "Finite {" + ", ".join(to_str(t) for t in self.sorted_forms()) + "}"


# --------------------------------------------------------------------------
# oracle


def pout_enumerate(m: Mtt, q, yp, p, size_budget: int) -> set:
    """Brute force: lcops of ``M_q(s)`` for all ``s ∈ L_p`` up to ``size_budget`` nodes."""
    from .mtt import Evaluator

    if size_budget <= 0:
        return set()
    ev = Evaluator(m)
    return {lcop(ev.state(q, s), yp) for s in m.lookahead.enumerate_trees(p, size_budget)}


# --------------------------------------------------------------------------
# analysis


class DepthDomain:
    """Labels ``(q, j)``: depth of ``y_j`` in ``M_q(s)``; keys are look-ahead states.

    A rule contributes one production per occurrence of ``y_j`` in its
    right-hand side: the constant counts output symbols above it and each call
    above it targets ``(r, l)`` on its child, ``l`` the argument passed through.
    """

    def __init__(self, m: Mtt):
        self.m = m
        self.symbols = list(m.input_alphabet.items())
        self.by_sym: dict = {}
        for key, rhs in m.rules.items():
            self.by_sym.setdefault((key[1], key[2]), []).append((key, rhs))

    def leaves(self):
        return ()

    def combine(self, sym, ps):
        return self.m.lookahead.step(sym, ps)

    def rules(self, sym, ps):
        for key, rhs in self.by_sym.get((sym, ps), ()):
            q = key[0]
            for path, anc, leaf in _param_occurrences(rhs):
                const = 0
                targets = []
                for node, step in anc:
                    if type(node.label) is Call:
                        targets.append(((node.label.state, step), node.label.var))
                    else:
                        const += 1
                yield (q, param_index(leaf.label)), const, tuple(targets), (key, path)


def _param_occurrences(rhs: Tree):
    """Yield ``(path, ancestors, leaf)`` per parameter leaf; ancestors are ``(node, step)`` pairs."""
    stack = [((), (), rhs)]
    while stack:
        path, anc, node = stack.pop()
        if not node.children:
            if param_index(node.label) is not None:
                yield path, anc, node
            continue
        if not node.params:
            continue
        for i in range(len(node.children), 0, -1):
            stack.append((path + (i,), anc + ((node, i),), node.children[i - 1]))


class PoutAnalysis:
    """All finiteness facts and exact finite forms of one nondeleting transducer."""

    def __init__(self, m: Mtt, max_vectors: int = 20000):
        from .mtt import validate

        report = validate(m).without("Totality") if m.partial else validate(m)
        if "Nondeletion" in report.kinds():
            raise NotNondeleting("; ".join(str(v) for v in report.violations if v.kind == "Nondeletion"))
        self.m = m
        self.la = m.lookahead
        self.system = RefinedSystem(DepthDomain(m))
        ne = m.nonempty
        self.F: dict = {p: {} for p in self.la.states}
        for (q, p) in m.alive:
            finite = frozenset(j for j in range(1, m.rank(q) + 1) if self.is_finite(q, j, p))
            if finite:
                self.F[p][q] = finite
        self.F1: dict = {p: tuple(q for q in m.states if q in self.F[p]) for p in self.la.states}
        self._max_depth = max(self.system.result.maximum.values(), default=0)
        self.max_vectors = max_vectors
        self.vectors: dict = {p: {} for p in self.la.states if p in ne}
        self.transitions: dict = {}
        self._fixpoint()

    # -- finiteness ----------------------------------------------------------

    def is_finite(self, q, j, p) -> bool:
        if (q, p) not in self.m.alive:
            return True
        return not self.system.unbounded((q, j), p)

    def depth_bound(self, q, j, p):
        """Largest depth of ``y_j`` in ``M_q(s)``, ``s ∈ L_p`` (``None`` if unbounded)."""
        if not self.is_finite(q, j, p):
            return None
        return self.system.maximum((q, j), p)

    def finite_params(self, q, p) -> frozenset:
        return self.F.get(p, {}).get(q, frozenset())

    # -- vectors of refined forms -----------------------------------------

    def as_map(self, p, phi: tuple) -> dict:
        return dict(zip(self.F1[p], phi))

    def step(self, sym, children: tuple) -> tuple:
        """``h'_σ((p1, φ1), ..., (pk, φk)) = (p, φ)``."""
        ps = tuple(c[0] for c in children)
        p = self.la.step(sym, ps)
        maps = [self.as_map(pi, phi) for pi, phi in children]
        forms = []
        for q in self.F1[p]:
            rhs = self.m.rules.get((q, sym, ps))
            if rhs is None:
                raise AnalysisError(f"state {q} alive at {p} but no rule {format_key((q, sym, ps))}")
            forms.append(self.form_of(rhs, self.F[p][q], maps))
        return p, tuple(forms)

    def form_of(self, rhs: Tree, yp: frozenset, maps: list) -> Tree:
        memo: dict = {}

        def go(node):
            hit = memo.get(node)
            if hit is not None:
                return hit
            if not (node.params & yp):
                res = powerset_leaf(node.params)
            elif not node.children:
                res = node
            elif type(node.label) is Call:
                r, i = node.label.state, node.label.var
                form = maps[i - 1].get(r)
                if form is None:
                    raise AnalysisError(f"call <{r},x{i}> carries tracked parameters but {r} has no finite form")
                args = [go(a) for a in node.children]
                res = self._plug_form(form, args, node.children, yp, r)
            else:
                res = Tree(node.label, [go(c) for c in node.children])
            memo[node] = res
            return res

        res = go(rhs)
        if res.height > self._max_depth + 2:
            raise AnalysisError("refined form exceeds the depth bound")
        return res

    @staticmethod
    def _plug_form(form, args, raw_args, yp, r):
        n = len(args)

        def fn(node, kids):
            label = node.label
            if not kids:
                if is_powerset_leaf(label):
                    for l in label:
                        if raw_args[l - 1].params & yp:
                            raise AnalysisError(
                                f"tracked parameter passed to infinite parameter y{l} of {r}")
                    return powerset_leaf(frozenset().union(*(raw_args[l - 1].params for l in label)))
                j = param_index(label)
                if j is not None and j <= n:
                    return args[j - 1]
                return node
            if all(is_powerset_leaf(k.label) for k in kids):
                return powerset_leaf(frozenset().union(*(k.label for k in kids)))
            return Tree(label, kids)

        return transform(form, fn)

    def _fixpoint(self):
        ne = [p for p in self.la.states if p in self.vectors]
        done: set = set()
        changed = True
        total = 0
        while changed:
            changed = False
            pool = [(p, phi) for p in ne for phi in list(self.vectors[p])]
            for sym, k in self.la.alphabet.items():
                for combo in itertools.product(pool, repeat=k):
                    key = (sym, combo)
                    if key in done:
                        continue
                    done.add(key)
                    p, phi = self.step(sym, combo)
                    self.transitions[key] = (p, phi)
                    if phi not in self.vectors[p]:
                        self.vectors[p][phi] = None
                        total += 1
                        changed = True
                        if total > self.max_vectors:
                            raise AnalysisError("too many enriched look-ahead states")

    # -- queries ---------------------------------------------------------

    def realizable(self, p) -> list:
        return sorted(self.vectors.get(p, {}), key=lambda phi: [sort_key(t) for t in phi])

    def pout_f(self, q, yp, p) -> set:
        yp = frozenset(yp)
        if p not in self.vectors or (q, p) not in self.m.alive:
            return set()
        fin = self.finite_params(q, p)
        if not yp <= fin:
            raise InfinitePout(f"pout(({q}, {sorted(yp)}), {p}) is infinite")
        idx = self.F1[p].index(q) if q in self.F1[p] else None
        if idx is None:  # yp is empty
            return {powerset_leaf(range(1, self.m.rank(q) + 1))}
        return {restrict(phi[idx], yp) for phi in self.vectors[p]}

    def pout(self, q, yp, p) -> set:
        return {erase(t) for t in self.pout_f(q, yp, p)}

    # -- witnesses -------------------------------------------------------

    def pump_witness(self, q, j, p) -> PumpWitness | None:
        node = self.system.unbounded_node((q, j), p)
        if node is None:
            return None
        prefix, loop, inner, state = self.system.contexts(node)
        w = PumpWitness(prefix, loop, inner, state.key)
        depths = [depth_of_param(self._eval(q, w.input(n)), j) for n in range(4)]
        ok = all(a < b for a, b in zip(depths, depths[1:]))
        return PumpWitness(prefix, loop, inner, state.key, ok)

    def _eval(self, q, s):
        from .mtt import eval_state

        return eval_state(self.m, q, s)


_CACHE_ATTR = "_pout_analysis"


def analysis(m: Mtt) -> PoutAnalysis:
    """The (cached) analysis of ``m``."""
    a = m.__dict__.get(_CACHE_ATTR)
    if a is None:
        a = PoutAnalysis(m)
        m.__dict__[_CACHE_ATTR] = a
    return a


# --------------------------------------------------------------------------
# public operations


def pout_finite(m: Mtt, q, y: int, p) -> PoutResult:
    """Decide ``pout((q, y), p)``; finite sets are exact, infinite ones come with a pumping witness."""
    if not 1 <= y <= m.rank(q):
        return PoutResult("NotApplicable")
    a = analysis(m)
    if p not in m.nonempty or (q, p) not in m.alive:
        return PoutResult("Finite", frozenset())
    if a.is_finite(q, y, p):
        return PoutResult("Finite", frozenset(a.pout(q, {y}, p)))
    return PoutResult("Infinite", witness=a.pump_witness(q, y, p))


def compute_F(m: Mtt, p):
    """``(F_p, F_p^1, F_p(·))``."""
    a = analysis(m)
    fmap = dict(a.F.get(p, {}))
    fp = {(q, j) for q, js in fmap.items() for j in js}
    return fp, set(a.F1.get(p, ())), fmap


def pout_f(m: Mtt, q, yp, p) -> set:
    return analysis(m).pout_f(q, yp, p)


def phi_set(m: Mtt, p) -> list:
    """All mappings ``φ`` with ``φ(r) ∈ pout^f((r, F_p(r)), p)``: the full product."""
    a = analysis(m)
    states = a.F1.get(p, ())
    comps = [sorted(a.pout_f(r, a.F[p][r], p), key=sort_key) for r in states]
    return [dict(zip(states, combo)) for combo in itertools.product(*comps)]
