"""Nesting of state calls, state call trees, and the LSHI / LHI decisions.

On a depth-proper transducer, linear size-to-height increase holds exactly
when the number of calls on one input hole stacked along an output path is
bounded (finite nesting); linear height-to-height increase holds exactly when
the same count over all holes of a context is bounded (finite ML-nesting).
Both counts are least solutions of grammars over contexts (see
:class:`NestingDomain`), decided with :mod:`mttlab.hypergraph`.  Witness loops
are extracted from pumped inputs and checked against their definition by
evaluating provisional outputs.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from typing import Hashable

from .hypergraph import HOLE, RefinedSystem, plug_hole
from .mtt import Evaluator, Mtt, reachable_calls, plug
from .normalize import normalize
from .pout import analysis
from .trees import (
    Call,
    Mark,
    PCall,
    RankedAlphabet,
    Sharp,
    Tree,
    format_path,
    iter_nodes,
    param_index,
    subtree,
    replace_at,
    to_str,
    transform,
)

# --------------------------------------------------------------------------
# instrumented transducer


def sharpen(m: Mtt) -> Mtt:
    """``M#``: every right-hand side of ``q`` wrapped in the unary marker ``#_q``."""
    delta = dict(m.output_alphabet)
    for q in m.states:
        delta[Sharp(q)] = 1
    rules = {key: Tree(Sharp(key[0]), [rhs]) for key, rhs in m.rules.items()}
    return Mtt(m.states, m.initial, m.input_alphabet, RankedAlphabet(delta), m.lookahead, rules,
               partial=m.partial, name=(m.name + "#" if m.name else None))


def erase_sharp(t: Tree) -> Tree:
    return transform(t, lambda n, kids: kids[0] if type(n.label) is Sharp
                     else (Tree(n.label, kids) if kids else n))


@dataclass(frozen=True)
class Origin:
    """Output label tagged with the input node whose rule created it."""

    label: Hashable
    node: tuple

    def __str__(self):
        return f"{self.label}@{format_path(self.node)}"


class OriginEvaluator:
    """Evaluates ``M_q(t/u)`` keyed by input position, tagging created nodes."""

    def __init__(self, m: Mtt, t: Tree):
        self.m = m
        self.t = t
        self.memo: dict = {}

    def state(self, q, u: tuple) -> Tree:
        key = (q, u)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        s = subtree(self.t, u)
        ps = tuple(self.m.lookahead.run(c) for c in s.children)
        rhs = self.m.rules[(q, s.label, ps)]
        local: dict = {}

        def go(node):
            r = local.get(node)
            if r is not None:
                return r
            label = node.label
            if type(label) is Call:
                args = [go(c) for c in node.children]
                from .trees import subst_params

                r = subst_params(self.state(label.state, u + (label.var,)), args)
            elif param_index(label) is not None and not node.children:
                r = node
            else:
                r = Tree(Origin(label, u), [go(c) for c in node.children])
            local[node] = r
            return r

        res = go(rhs)
        self.memo[key] = res
        return res


def _strip_origins(t: Tree) -> Tree:
    return transform(t, lambda n, kids: Tree(n.label.label if type(n.label) is Origin else n.label, kids))


def origin_output(m: Mtt, t: Tree) -> Tree:
    """``M(t)`` with every label tagged by its origin."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        return OriginEvaluator(m, t).state(m.initial, ())
    finally:
        sys.setrecursionlimit(old)


def origins(m: Mtt, t: Tree) -> set:
    """``Origin(t, M(t))``: pairs ``(u, v)`` with output node ``v`` created at input node ``u``."""
    out = origin_output(m, t)
    return {(n.label.node, v) for v, n in iter_nodes(out)}


# --------------------------------------------------------------------------
# state call trees


@dataclass
class StateCallTree:
    """Unranked tree of state calls; nodes are ``(u, v)`` pairs."""

    t: Tree
    mtt: Mtt
    output: Tree            # M#(t), labels untagged
    nodes: dict             # (u, v) -> state
    parent: dict            # (u, v) -> (u', v') or None
    along: tuple | None = None  # output path the labels refer to (trimmed trees)
    _sym: dict = field(default_factory=dict)

    @property
    def root(self):
        return ((), ())

    def children(self, node) -> list:
        return sorted((n for n, p in self.parent.items() if p == node), key=_node_key)

    def depth(self, node) -> int:
        return len(node[0])

    def width(self) -> int:
        counts: dict = {}
        for u, _ in self.nodes:
            counts[len(u)] = counts.get(len(u), 0) + 1
        return max(counts.values(), default=0)

    def is_ancestor(self, a, b) -> bool:
        """``a`` is a strict ancestor of ``b``."""
        n = self.parent.get(b)
        while n is not None:
            if n == a:
                return True
            n = self.parent.get(n)
        return False

    def _arg_paths(self, node) -> dict:
        """For the call at ``node``: parameter index -> paths (relative to the call) of its occurrences."""
        hit = self._sym.get(node)
        if hit is None:
            u, _ = node
            q = self.nodes[node]
            sym = Evaluator(self.mtt).state(q, subtree(self.t, u))
            hit = {}
            for path, s in iter_nodes(sym):
                j = param_index(s.label)
                if j is not None and not s.children:
                    hit.setdefault(j, []).append(path)
            self._sym[node] = hit
        return hit

    def arg_index(self, node, v: tuple) -> int:
        """Index of the argument of the call at ``node`` that output path ``v`` enters, else 0."""
        _, v0 = node
        if v[:len(v0)] != v0:
            return 0
        rel = v[len(v0):]
        for j, paths in sorted(self._arg_paths(node).items()):
            for path in paths:
                if rel[:len(path)] == path and len(rel) > len(path):
                    return j
        return 0

    def label(self, node) -> tuple:
        """``(q, p, i)``; ``i`` refers to ``along`` when set, else to any deeper call."""
        u, v = node
        q = self.nodes[node]
        p = self.mtt.lookahead.run(subtree(self.t, u))
        if self.along is not None:
            return (q, p, self.arg_index(node, self.along))
        best = 0
        for other in self.nodes:
            if other != node and other[1][:len(v)] == v and len(other[1]) > len(v):
                i = self.arg_index(node, other[1])
                if i and (best == 0 or i < best):
                    best = i
        return (q, p, best)

    def describe(self) -> list:
        return [(format_path(u), format_path(v), self.label((u, v))) for u, v in sorted(self.nodes, key=_node_key)]


def _node_key(n):
    return (len(n[0]), n[0], len(n[1]), n[1])


def state_call_tree(m: Mtt, t: Tree) -> StateCallTree:
    ms = sharpen(m)
    out = origin_output(ms, t)
    nodes = {}
    for v, s in iter_nodes(out):
        lab = s.label
        if type(lab) is Origin and type(lab.label) is Sharp:
            nodes[(lab.node, v)] = lab.label.state
    parent = {}
    for (u, v) in nodes:
        if not u and not v:
            parent[(u, v)] = None
            continue
        up = u[:-1]
        par = None
        for k in range(len(v) - 1, -1, -1):
            if (up, v[:k]) in nodes:
                par = (up, v[:k])
                break
        parent[(u, v)] = par
    return StateCallTree(t, m, _strip_origins(out), nodes, parent)


def trim(sc: StateCallTree, u: tuple, v: tuple) -> StateCallTree:
    """Keep the calls ``(u', v')`` with ``u'`` a prefix of ``u`` and ``v'`` a prefix of ``v``."""
    keep = {n: q for n, q in sc.nodes.items() if u[:len(n[0])] == n[0] and v[:len(n[1])] == n[1]}
    parent = {n: sc.parent[n] for n in keep}
    return StateCallTree(sc.t, sc.mtt, sc.output, keep, parent, tuple(v), sc._sym)


def trim_along(sc: StateCallTree, v: tuple) -> StateCallTree:
    """Keep every call on a prefix of output path ``v`` (all input nodes)."""
    keep = {n: q for n, q in sc.nodes.items() if v[:len(n[1])] == n[1]}
    parent = {n: sc.parent[n] for n in keep}
    return StateCallTree(sc.t, sc.mtt, sc.output, keep, parent, tuple(v), sc._sym)


def widest_trim(sc: StateCallTree, u: tuple | None = None) -> StateCallTree:
    """The trim of largest width over output paths ending at a call (restricted to prefixes of ``u``)."""
    best = None
    for node in sc.nodes:
        nu, v = node
        if u is not None and u[:len(nu)] != nu:
            continue
        tr = trim(sc, u if u is not None else nu, v) if u is not None else trim_along(sc, v)
        if best is None or tr.width() > best.width():
            best = tr
    return best


def find_pattern(tree: StateCallTree, label=None):
    """Five nodes ``(N_q0, N_q, N_q0', N_q', N_q'')`` forming the loop pattern, or ``None``.

    Depths: ``d(N_q0) = d(N_q)`` and the three lower nodes share a larger
    depth; labels: ``N_q0, N_q0'`` share one label, ``N_q, N_q', N_q''``
    another; ancestry: ``N_q0 → N_q0'``, ``N_q0 → N_q'``, ``N_q → N_q''``.
    """
    label = label or tree.label
    by_depth: dict = {}
    for n in sorted(tree.nodes, key=_node_key):
        by_depth.setdefault(tree.depth(n), []).append(n)
    labels = {n: label(n) for n in tree.nodes}
    desc: dict = {}
    for n in tree.nodes:
        a = tree.parent.get(n)
        while a is not None:
            desc.setdefault(a, set()).add(n)
            a = tree.parent.get(a)
    depths = sorted(by_depth)
    for d1 in depths:
        level = by_depth[d1]
        for a in level:
            for b in level:
                if a == b:
                    continue
                la, lb = labels[a], labels[b]
                da, db = desc.get(a, set()), desc.get(b, set())
                for d2 in depths:
                    if d2 <= d1:
                        continue
                    low = by_depth[d2]
                    a0 = [n for n in low if n in da and labels[n] == la]
                    q0s = [n for n in low if n in da and labels[n] == lb]
                    q1s = [n for n in low if n in db and labels[n] == lb]
                    for x in a0:
                        for y in q0s:
                            if y == x:
                                continue
                            for z in q1s:
                                if z != x and z != y:
                                    return (a, b, x, y, z)
    return None


# --------------------------------------------------------------------------
# nesting grammars


class NestingDomain:
    """Counts of pending calls on holes along output paths.

    Keys: ``("g", p)`` for ground subtrees, ``("h", p_top, p_hole)`` for
    single-hole contexts (``multi=False``) and ``("h", p_top)`` for contexts
    with any number of holes (``multi=True``).  Labels: ``("all", q)`` for the
    largest count along any path of ``M̂_q(C)``, ``("par", q, l)`` for paths
    ending at ``y_l``.
    """

    def __init__(self, m: Mtt, multi: bool):
        self.m = m
        self.multi = multi
        self.symbols = list(m.input_alphabet.items())
        self.by_sym: dict = {}
        for key, rhs in m.rules.items():
            self.by_sym.setdefault((key[1], key[2]), []).append((key, rhs))

    def leaves(self):
        for p in self.m.lookahead.states:
            if p not in self.m.nonempty:
                continue
            base = {}
            for q in self.m.states:
                if (q, p) in self.m.alive:
                    base[("all", q)] = 1
                    for l in range(1, self.m.rank(q) + 1):
                        base[("par", q, l)] = 1
            key = ("h", p) if self.multi else ("h", p, p)
            yield key, base, Tree(Mark(p))

    def combine(self, sym, keys):
        tops = tuple(k[1] for k in keys)
        top = self.m.lookahead.step(sym, tops)
        holed = [k for k in keys if k[0] == "h"]
        if not holed:
            return ("g", top)
        if self.multi:
            return ("h", top)
        if len(holed) > 1:
            return None
        return ("h", top, holed[0][2])

    def rules(self, sym, keys):
        tops = tuple(k[1] for k in keys)
        holed = {i for i, k in enumerate(keys, 1) if k[0] == "h"}
        if not holed:
            return
        seen = set()
        for key, rhs in self.by_sym.get((sym, tops), ()):
            q = key[0]
            for path, anc, node in _endpoints(rhs):
                targets = [(("par", a.label.state, step), a.label.var) for a, step in anc
                           if type(a.label) is Call and a.label.var in holed]
                label = node.label
                if type(label) is Call and label.var in holed:
                    targets.append((("all", label.state), label.var))
                item = (("all", q), tuple(targets))
                if item not in seen:
                    seen.add(item)
                    yield ("all", q), 0, tuple(targets), (key, path)
                j = param_index(label)
                if j is not None and not node.children:
                    item = (("par", q, j), tuple(targets))
                    if item not in seen:
                        seen.add(item)
                        yield ("par", q, j), 0, tuple(targets), (key, path)


def _endpoints(rhs: Tree):
    """``(path, ancestors, node)`` for every leaf and every call of ``rhs``."""
    stack = [((), (), rhs)]
    while stack:
        path, anc, node = stack.pop()
        if not node.children or type(node.label) is Call:
            yield path, anc, node
        for i in range(len(node.children), 0, -1):
            stack.append((path + (i,), anc + ((node, i),), node.children[i - 1]))


# --------------------------------------------------------------------------
# loops


@dataclass(frozen=True)
class GeneratorLoop:
    kind: str                   # Nesting | MLNesting
    context: Tree               # holes Mark(p) (Nesting) or Mark(p0, 1), Mark(p, 2) (MLNesting)
    la: tuple                   # (p,) or (p0, p)
    states: tuple               # (q0, q)
    params: tuple               # (i, j); j = 0 when q0's call itself is nested
    prefix: Tree                # C0 with hole Mark(p) / Mark(p0): q0 is called there
    validated: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "context": to_str(self.context),
            "prefix": to_str(self.prefix),
            "la": [str(p) for p in self.la],
            "states": [str(q) for q in self.states],
            "params": list(self.params),
            "validated": self.validated,
        }

    def pumped(self, n: int) -> Tree:
        """``C0[C^n[X]]`` with the holes left as marks."""
        if self.kind == "Nesting":
            hole = Mark(self.la[0])
            t = Tree(hole)
            for _ in range(n):
                t = plug(self.context, hole, t)
            return plug(self.prefix, hole, t)
        h1 = Mark(self.la[0], 1)
        t = Tree(h1)
        for _ in range(n):
            t = plug(self.context, h1, t)
        return plug(self.prefix, Mark(self.la[0]), t)


def _find_label(t: Tree, pred) -> bool:
    return any(pred(s.label) for _, s in iter_nodes(t))


def _param_paths(t: Tree, j: int):
    """Ancestor lists ``[(label, step)]`` for every occurrence of ``y_j``."""
    stack = [(t, ())]
    while stack:
        s, anc = stack.pop()
        if not s.children:
            if param_index(s.label) == j:
                yield anc
            continue
        if j not in s.params:
            continue
        for i, c in enumerate(s.children, 1):
            stack.append((c, anc + ((s.label, i),)))


def nesting_conditions(m: Mtt, ctx: Tree, p, reach=None):
    """First ``(q0, q, i, j)`` for which ``(ctx, p, q0, q)`` satisfies the nesting-loop definition."""
    hole = Mark(p)
    if m.lookahead.run(ctx) != p:
        return None
    reach = reachable_calls(m) if reach is None else reach
    ev = Evaluator(m)
    prov = {q: ev.state(q, ctx) for q in m.states if (q, p) in m.alive}
    for q in sorted(prov, key=str):
        for i in range(1, m.rank(q) + 1):
            if not any(type(s.label) is PCall and s.label.state == q and s.label.mark == hole
                       and i in s.children[i - 1].params for _, s in iter_nodes(prov[q])):
                continue
            for q0 in sorted(prov, key=str):
                if (q0, p) not in reach:
                    continue
                pq = PCall(q, hole)
                pq0 = PCall(q0, hole)
                if any(s.label == pq and _find_label(s.children[i - 1], lambda l: l == pq0)
                       for _, s in iter_nodes(prov[q0])):
                    return (q0, q, i, 0)
                for j in range(1, m.rank(q0) + 1):
                    for anc in _param_paths(prov[q0], j):
                        if (pq0, j) in anc and (pq, i) in anc:
                            return (q0, q, i, j)
    return None


def ml_conditions(m: Mtt, ctx: Tree, p0, p, reach=None):
    """First ``(q0, q, i, j)`` satisfying the ML-nesting-loop definition on ``ctx[X1, X2]``."""
    h1, h2 = Mark(p0, 1), Mark(p, 2)
    if m.lookahead.run(ctx) != p0:
        return None
    reach = reachable_calls(m) if reach is None else reach
    ev = Evaluator(m)
    for q0 in sorted((q for q in m.states if (q, p0) in reach and (q, p0) in m.alive), key=str):
        prov = ev.state(q0, ctx)
        pq0 = PCall(q0, h1)
        for q in sorted((q for q in m.states if (q, p) in m.alive and m.rank(q) > 0), key=str):
            pq = PCall(q, h2)
            for _, s in iter_nodes(prov):
                if s.label == pq:
                    for i, c in enumerate(s.children, 1):
                        if _find_label(c, lambda l: l == pq0):
                            return (q0, q, i, 0)
            for j in range(1, m.rank(q0) + 1):
                for anc in _param_paths(prov, j):
                    if (pq0, j) in anc:
                        for lab, step in anc:
                            if lab == pq:
                                return (q0, q, step, j)
    return None


def _nest_count(t: Tree, pred) -> int:
    """Largest number of nodes satisfying ``pred`` on one root-to-leaf path."""
    memo: dict = {}
    stack = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if node in memo:
            continue
        if ready or not node.children:
            below = max((memo[c] for c in node.children), default=0)
            memo[node] = below + (1 if pred(node.label) else 0)
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in node.children if c not in memo)
    return memo[t]


def validate_loop(m: Mtt, loop: GeneratorLoop, rounds: int = 4) -> bool:
    """Pumping strictly increases the nesting of ``q``'s pending calls."""
    q = loop.states[1]
    counts = []
    for n in range(1, rounds + 1):
        prov = Evaluator(m).apply(loop.pumped(n))
        counts.append(_nest_count(prov, lambda l: type(l) is PCall and l.state == q))
        if prov.size > 2_000_000:
            break
    return len(counts) >= 2 and all(a < b for a, b in zip(counts, counts[1:]))


def _samples_for_marks(m: Mtt, t: Tree, keep=()) -> Tree:
    samples = m.lookahead.witnesses()
    return transform(t, lambda n, kids: samples[n.label.la]
                     if type(n.label) is Mark and n.label not in keep and n is not HOLE
                     else (Tree(n.label, kids) if kids else n))


def _make_loop(m, kind, ctx, las, cond, ctxs):
    q0, q, i, j = cond
    prefix = ctxs[(q0, las[0])]
    loop = GeneratorLoop(kind, ctx, las, (q0, q), (i, j), prefix)
    return GeneratorLoop(kind, ctx, las, (q0, q), (i, j), prefix, validate_loop(m, loop))


SC_LIMIT = 4000  # largest output explored through state call trees


def find_nesting_loop(m: Mtt, system: RefinedSystem | None = None, max_power: int = 4):
    """A validated nesting generator loop of (depth-proper) ``m``, or ``None``."""
    system = system or RefinedSystem(NestingDomain(m, multi=False))
    node = _unbounded_seed(m, system)
    if node is None:
        return None
    ctxs = reachable_calls(m, with_contexts=True)
    reach = frozenset(ctxs)
    prefix, loop, inner, state = system.contexts(node)
    top = state.key[1]
    cands = []
    # pattern in the state call tree of a pumped input
    ev = Evaluator(m)
    for n in (2, 3, 4, 5):
        t = plug_hole(prefix, _power(loop, n, inner))
        spine = _hole_path(plug_hole(prefix, _power(loop, n, HOLE)))
        t = _samples_for_marks(m, t)
        if ev.apply(t).size > SC_LIMIT:
            break
        sc = state_call_tree(m, t)
        tr = widest_trim(sc, spine)
        pat = find_pattern(tr) if tr is not None else None
        if pat:
            u1, u2 = pat[0][0], pat[2][0]
            p = m.lookahead.run(subtree(t, u2))
            c = subtree(replace_at(t, u2, Tree(Mark(p))), u1)
            cands.append((c, p))
    for k in range(1, max_power + 1):
        cands.append((plug_hole(_power(loop, k, HOLE), Tree(Mark(top))), top))
    for c, p in cands:
        cond = nesting_conditions(m, c, p, reach)
        if cond is not None and (cond[0], p) in ctxs:
            lp = _make_loop(m, "Nesting", c, (p,), cond, ctxs)
            if lp.validated:
                return lp
    return None


def find_ml_nesting_loop(m: Mtt, system: RefinedSystem | None = None, max_power: int = 3):
    """A validated ML-nesting generator loop of (depth-proper) ``m``, or ``None``."""
    system = system or RefinedSystem(NestingDomain(m, multi=True))
    node = _unbounded_seed(m, system)
    if node is None:
        return None
    ctxs = reachable_calls(m, with_contexts=True)
    reach = frozenset(ctxs)
    _, loop, _, state = system.contexts(node)
    p0 = state.key[1]
    for k in range(1, max_power + 1):
        base = _power(loop, k, HOLE)
        marks = [(v, s.label) for v, s in iter_nodes(base) if type(s.label) is Mark and s is not HOLE]
        for v, mk in marks:
            c = replace_at(base, v, Tree(Mark(mk.la, 2)))
            c = _samples_for_marks(m, c, keep=(Mark(mk.la, 2),))
            c = plug_hole(c, Tree(Mark(p0, 1)))
            cond = ml_conditions(m, c, p0, mk.la, reach)
            if cond is not None and (cond[0], p0) in ctxs:
                lp = _make_loop(m, "MLNesting", c, (p0, mk.la), cond, ctxs)
                if lp.validated:
                    return lp
    return None


def _power(loop: Tree, n: int, inner: Tree) -> Tree:
    t = inner
    for _ in range(n):
        t = plug_hole(loop, t)
    return t


def _hole_path(t: Tree) -> tuple:
    for v, s in iter_nodes(t):
        if s is HOLE:
            return v
    return ()


def _unbounded_seed(m: Mtt, system: RefinedSystem):
    for st in sorted(system.witness, key=repr):
        if st.key[0] != "h":
            continue
        node = (("all", m.initial), st)
        if node in system.result.unbounded:
            return node
    return None


# --------------------------------------------------------------------------
# decisions


@dataclass
class DecisionReport:
    property: str                 # LSHI | LHI
    verdict: bool
    bound: int | None             # nesting bound b when verdict holds
    rhs_height: int               # c: largest right-hand side height of the normal form
    loop: GeneratorLoop | None
    pump: tuple | None            # (prefix, loop, inner) contexts of the unbounded nesting
    iterations: int
    normal_form: Mtt
    timings: dict = field(default_factory=dict)

    @property
    def growth_bound(self) -> int | None:
        """``b·c``: output height per unit of input size (LSHI) or height (LHI)."""
        return None if self.bound is None else self.bound * self.rhs_height

    def to_json(self) -> dict:
        out = {
            "property": self.property,
            "verdict": self.verdict,
            "iterations": self.iterations,
            "rhs_height": self.rhs_height,
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
        }
        if self.bound is not None:
            out["bound"] = self.bound
            out["growth_bound"] = self.growth_bound
        if self.loop is not None:
            out["loop"] = self.loop.to_json()
        return out


def _decide(m: Mtt, prop: str, max_iters: int) -> DecisionReport:
    timings = {}
    t0 = time.perf_counter()
    nf = normalize(m, max_iters)
    mp = nf.mtt
    timings["normalize"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    single = RefinedSystem(NestingDomain(mp, multi=False))
    multi = RefinedSystem(NestingDomain(mp, multi=True)) if prop == "LHI" else None
    system = multi if multi is not None else single
    node = _unbounded_seed(mp, system)
    timings["decide"] = time.perf_counter() - t1
    c = mp.max_rhs_height
    if node is None:
        vals = [system.result.maximum.get((("all", mp.initial), st))
                for st in system.witness if st.key[0] == "h"]
        b = max((v for v in vals if v is not None), default=1)
        return DecisionReport(prop, True, max(b, 1), c, None, None, nf.iterations, mp, timings)
    t2 = time.perf_counter()
    loop = find_nesting_loop(mp, single) if _unbounded_seed(mp, single) else None
    if loop is None and prop == "LHI":
        loop = find_ml_nesting_loop(mp, multi)
    timings["loop"] = time.perf_counter() - t2
    prefix, lp, inner, _ = system.contexts(node)
    return DecisionReport(prop, False, None, c, loop, (prefix, lp, inner), nf.iterations, mp, timings)


def decide_lshi(m: Mtt, max_iters: int = 32) -> DecisionReport:
    """Linear size-to-height increase, decided on the depth-proper normal form."""
    return _decide(m, "LSHI", max_iters)


def decide_lhi(m: Mtt, max_iters: int = 32) -> DecisionReport:
    """Linear height-to-height increase, decided on the depth-proper normal form."""
    return _decide(m, "LHI", max_iters)


# --------------------------------------------------------------------------
# pumped input families (for empirical checks)


def deep_inputs(m: Mtt, q, i, p, k: int) -> Tree:
    """A tree in ``L_p`` on which ``y_i`` of ``q`` sits deep (``k`` pumps of the depth witness)."""
    w = analysis(m).pump_witness(q, i, p)
    if w is None:
        return m.lookahead.witnesses()[p]
    return w.input(k)


def growth_family(report: DecisionReport, k: int) -> Tree:
    """Input number ``k`` of a family whose output growth breaks the linear bound."""
    m = report.normal_form
    loop = report.loop
    samples = m.lookahead.witnesses()
    if loop is None:
        prefix, lp, inner = report.pump
        t = _samples_for_marks(m, plug_hole(prefix, _power(lp, k, inner)))
        return t
    q, i = loop.states[1], loop.params[0]
    if loop.kind == "Nesting":
        p = loop.la[0]
        deep = deep_inputs(m, q, i, p, k)
        n = deep.size if report.property == "LSHI" else deep.height
        return plug(loop.pumped(n), Mark(p), deep)
    p0, p = loop.la
    deep = deep_inputs(m, q, i, p, k)
    n = deep.height
    t = loop.pumped(n)
    t = plug(t, Mark(p, 2), deep)
    return plug(t, Mark(p0, 1), samples[p0])
