"""Depth-proper normal form.

A call ``<r, x_i>`` is improper when some parameter of ``r`` has only finitely
many output forms on the look-ahead state of ``x_i``.  One round of
:func:`build_pi` enriches the look-ahead with the vector of those forms and
replaces every improper call by its known form, delegating each pruned part to
a helper state that computes exactly that part.  :func:`depth_proper` repeats
rounds until no reachable call is improper.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable

from .errors import AnalysisError, IterationCapExceeded
from .lookahead import TreeAutomaton
from .mtt import Mtt, call_states, reachable_calls
from .pout import analysis
from .trees import Call, Tree, is_powerset_leaf, param, param_index, rename_params, to_str, format_path


@dataclass(frozen=True)
class HelperState:
    """Computes the part of ``r``'s output below ``hole`` of the known form ``form``."""

    base_la: Hashable
    base_state: Hashable
    form: Tree
    hole: tuple
    rank: int

    def __str__(self):
        return f"({self.base_la}, {self.base_state}, {to_str(self.form)}, {format_path(self.hole)})"


@dataclass(frozen=True)
class EnrichedLaState:
    base: Hashable
    phi: tuple  # ((state, form), ...)

    def __str__(self):
        inner = ", ".join(f"{q}: {to_str(t)}" for q, t in self.phi)
        return f"({self.base}, {{{inner}}})"


@dataclass
class NormalForm:
    mtt: Mtt
    iterations: int
    history: list = field(default_factory=list)  # one Mtt per round, input first


def helpers_of(m: Mtt) -> dict:
    """Provenance of helper states: ``name -> HelperState``."""
    return m.__dict__.get("helpers", {})


def enriched_of(m: Mtt) -> dict:
    """Provenance of look-ahead states of ``π(M)``: ``name -> EnrichedLaState``."""
    return m.__dict__.get("enriched", {})


def _fresh(base: str, taken: set) -> str:
    if base not in taken:
        taken.add(base)
        return base
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    name = f"{base}_{k}"
    taken.add(name)
    return name


def phi_fn(zeta: Tree, t: Tree, u: tuple, child_las: tuple, helper=None) -> Tree:
    """Literal three-case walk of a right-hand side ``zeta`` against a form ``t`` along ``u``.

    Ground case (``u`` empty, ``t`` a powerset leaf): ``zeta`` itself.  Call
    case: the pending call is handed to a helper state named by
    ``helper(HelperState)`` (default: the :class:`HelperState` itself).
    Symbol case: descend into the child selected by ``u``.
    """
    make = helper or (lambda h: h)
    while True:
        if not u:
            if is_powerset_leaf(t.label):
                return zeta
            raise AnalysisError("path ends before a powerset leaf")
        if type(zeta.label) is Call:
            j = zeta.label.var
            h = HelperState(child_las[j - 1], zeta.label.state, t, tuple(u), len(_leaf_at(t, u).label))
            return Tree(Call(make(h), j), [Tree(param(l)) for l in range(1, h.rank + 1)])
        if zeta.label != t.label or len(zeta.children) != len(t.children):
            raise AnalysisError(f"form {to_str(t)} does not match {to_str(zeta)}")
        zeta = zeta.children[u[0] - 1]
        t = t.children[u[0] - 1]
        u = u[1:]


def _leaf_at(t: Tree, u) -> Tree:
    for i in u:
        t = t.children[i - 1]
    return t


class _Builder:
    def __init__(self, m: Mtt):
        self.m = m
        self.a = analysis(m)
        self.taken = {str(q) for q in m.states}
        self.helper_names: dict = {}   # HelperState -> name
        self.pending: list = []

    def helper(self, p, r, t, w) -> str:
        leaf = _leaf_at(t, w)
        h = HelperState(p, r, t, tuple(w), len(leaf.label))
        name = self.helper_names.get(h)
        if name is None:
            name = _fresh(f"{r}_h", self.taken)
            self.helper_names[h] = name
            self.pending.append(h)
        return name

    def theta(self, rhs: Tree, kids: tuple) -> Tree:
        """Replace improper calls of ``rhs`` given the children's ``(p_i, φ_i)``."""
        maps = [self.a.as_map(p, phi) for p, phi in kids]
        memo: dict = {}

        def go(node):
            hit = memo.get(node)
            if hit is not None:
                return hit
            label = node.label
            if type(label) is Call and label.state in maps[label.var - 1]:
                i = label.var
                t = maps[i - 1][label.state]
                args = [go(c) for c in node.children]
                res = self.expand(t, label.state, i, kids[i - 1][0], args)
            elif node.children:
                res = Tree(label, [go(c) for c in node.children])
            else:
                res = node
            memo[node] = res
            return res

        return go(rhs)

    def expand(self, t, r, i, p, args) -> Tree:
        def ex(s, path):
            label = s.label
            if is_powerset_leaf(label):
                name = self.helper(p, r, t, path)
                return Tree(Call(name, i), [args[l - 1] for l in sorted(label)])
            j = param_index(label)
            if j is not None and not s.children:
                return args[j - 1]
            return Tree(label, [ex(c, path + (k,)) for k, c in enumerate(s.children, 1)])

        return ex(t, ())

    def helper_rhs(self, h: HelperState, sym, kids) -> Tree:
        full = self.theta(self.m.rules[(h.base_state, sym, tuple(k[0] for k in kids))], kids)
        node, form = full, h.form
        for step in h.hole:
            if node.label != form.label or len(node.children) != len(form.children):
                raise AnalysisError(f"helper {h}: output does not follow its form")
            node, form = node.children[step - 1], form.children[step - 1]
        want = form.label
        if node.params != want:
            raise AnalysisError(f"helper {h}: parameters {sorted(node.params)} differ from {sorted(want)}")
        order = sorted(want)
        return rename_params(node, {l: k for k, l in enumerate(order, 1)})


def build_pi(m: Mtt) -> Mtt:
    """One round: enrich the look-ahead and remove improper calls."""
    b = _Builder(m)
    a = b.a
    la = m.lookahead
    taken_la = {str(p) for p in la.states}
    names: dict = {}
    for p in la.states:
        vecs = a.realizable(p)
        if len(vecs) == 1:
            names[(p, vecs[0])] = p
            continue
        taken_la.discard(str(p))
        for k, phi in enumerate(vecs, 1):
            names[(p, phi)] = _fresh(f"{p}_{k}", taken_la)
    pairs = {v: k for k, v in names.items()}
    new_states = list(names.values())
    trans = {}
    for (sym, combo), res in a.transitions.items():
        trans[(sym, tuple(names[c] for c in combo))] = names[res]
    new_la = TreeAutomaton(new_states, m.input_alphabet, trans)

    rules: dict = {}
    combos_by_sym = {sym: list(itertools.product(new_states, repeat=k))
                     for sym, k in m.input_alphabet.items()}
    for q in m.states:
        for sym, combos in combos_by_sym.items():
            for combo in combos:
                kids = tuple(pairs[c] for c in combo)
                rhs = m.rules.get((q, sym, tuple(k[0] for k in kids)))
                if rhs is None:
                    continue
                rules[(q, sym, combo)] = b.theta(rhs, kids)
    done = 0
    while done < len(b.pending):
        h = b.pending[done]
        done += 1
        name = b.helper_names[h]
        for sym, combos in combos_by_sym.items():
            for combo in combos:
                kids = tuple(pairs[c] for c in combo)
                p, phi = a.transitions[(sym, kids)]
                if p != h.base_la or a.as_map(p, phi).get(h.base_state) != h.form:
                    continue
                rules[(name, sym, combo)] = b.helper_rhs(h, sym, kids)

    states = dict(m.states)
    for h, name in b.helper_names.items():
        states[name] = h.rank
    partial = set(m.partial) | set(b.helper_names.values())
    out = Mtt(states, m.initial, m.input_alphabet, m.output_alphabet, new_la, rules,
              partial=partial, name=m.name)
    out.__dict__["enriched"] = {n: EnrichedLaState(p, tuple(zip(a.F1[p], phi)))
                                for (p, phi), n in names.items()}
    prov = dict(helpers_of(m))
    prov.update({name: h for h, name in b.helper_names.items()})
    out.__dict__["helpers"] = prov
    return collect(out)


def collect(m: Mtt) -> Mtt:
    """Drop states not reachable from the initial state through right-hand sides."""
    calls: dict = {}
    for (q, _, _), rhs in m.rules.items():
        calls.setdefault(q, set()).update(r for r, _ in call_states(rhs))
    keep = {m.initial}
    stack = [m.initial]
    while stack:
        q = stack.pop()
        for r in calls.get(q, ()):
            if r not in keep:
                keep.add(r)
                stack.append(r)
    if len(keep) == len(m.states):
        return m
    states = {q: k for q, k in m.states.items() if q in keep}
    rules = {key: rhs for key, rhs in m.rules.items() if key[0] in keep}
    out = Mtt(states, m.initial, m.input_alphabet, m.output_alphabet, m.lookahead, rules,
              partial=m.partial & keep, name=m.name)
    for attr in ("helpers", "enriched"):
        if attr in m.__dict__:
            out.__dict__[attr] = {k: v for k, v in m.__dict__[attr].items()
                                  if attr != "helpers" or k in keep}
    return out


def improper_calls(m: Mtt) -> list:
    """Reachable ``(q, j, p)`` whose parameter ``y_j`` has finitely many forms on ``L_p``."""
    a = analysis(m)
    out = []
    for q, p in sorted(reachable_calls(m), key=lambda x: (str(x[0]), str(x[1]))):
        if (q, p) not in m.alive:
            continue
        for j in range(1, m.rank(q) + 1):
            if a.is_finite(q, j, p):
                out.append((q, j, p))
    return out


def is_depth_proper(m: Mtt) -> bool:
    return not improper_calls(m)


def normalize(m: Mtt, max_iters: int = 32) -> NormalForm:
    history = [m]
    cur = m
    for it in range(max_iters + 1):
        if is_depth_proper(cur):
            return NormalForm(cur, it, history)
        if it == max_iters:
            break
        cur = build_pi(cur)
        history.append(cur)
    raise IterationCapExceeded(max_iters)


def depth_proper(m: Mtt, max_iters: int = 32) -> Mtt:
    """The depth-proper transducer equivalent to ``m``."""
    return normalize(m, max_iters).mtt
