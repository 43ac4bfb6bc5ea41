"""Boundedness of least solutions over weighted grammars.

A node ``n`` has productions ``n -> c + v(t1) + ... + v(tk)``; its value set is
the least solution of these equations over the naturals.  Both the depth of a
parameter in the outputs of a state and the nesting of state calls along a path
reduce to this form.  A value set is infinite exactly when the node reaches a
strongly connected component containing a production that re-enters the
component and also gains something (a positive constant or a target that can
be positive).
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Hashable

from .errors import AnalysisError


@dataclass(frozen=True)
class Production:
    node: Hashable
    const: int
    targets: tuple
    info: object = None


@dataclass
class GrowthResult:
    realizable: frozenset
    positive: frozenset
    unbounded: frozenset
    maximum: dict
    pumping: dict = field(default_factory=dict)  # pumping node -> (production, index of re-entering target)
    graph: "Hypergraph | None" = None

    def bounded(self, node) -> bool:
        return node in self.realizable and node not in self.unbounded

    def witness(self, node):
        """``(prefix, cycle)`` of ``(production, target index)`` steps.

        ``prefix`` leads from ``node`` to a pumping node ``u``; ``cycle`` starts
        with the gaining production of ``u`` and returns to ``u``.
        """
        if node not in self.unbounded:
            return None
        g = self.graph
        prev = {node: None}
        queue = deque([node])
        end = None
        while queue:
            n = queue.popleft()
            if n in self.pumping:
                end = n
                break
            for prod in g.usable(n, self.realizable):
                for idx, t in enumerate(prod.targets):
                    if t not in prev:
                        prev[t] = (n, prod, idx)
                        queue.append(t)
        prefix = []
        n = end
        while prev[n] is not None:
            m, prod, idx = prev[n]
            prefix.append((prod, idx))
            n = m
        prefix.reverse()
        gain, idx = self.pumping[end]
        start = gain.targets[idx]
        cycle = [(gain, idx)]
        if start != end:
            comp = self._component(end)
            back = {start: None}
            queue = deque([start])
            while queue and end not in back:
                n = queue.popleft()
                for prod in g.usable(n, self.realizable):
                    for i, t in enumerate(prod.targets):
                        if t in comp and t not in back:
                            back[t] = (n, prod, i)
                            queue.append(t)
            tail = []
            n = end
            while back[n] is not None:
                m, prod, i = back[n]
                tail.append((prod, i))
                n = m
            cycle.extend(reversed(tail))
        return prefix, cycle

    def _component(self, node):
        return self.graph.component_of(node, self.realizable)


class Hypergraph:
    def __init__(self):
        self.productions: dict = defaultdict(list)
        self._sccs = None

    def node(self, n):
        self.productions.setdefault(n, [])

    def add(self, node, const: int, targets=(), info=None):
        self.productions[node].append(Production(node, const, tuple(targets), info))
        for t in targets:
            self.productions.setdefault(t, [])
        self._sccs = None

    @property
    def nodes(self):
        return list(self.productions)

    def usable(self, n, realizable):
        return [p for p in self.productions.get(n, ()) if all(t in realizable for t in p.targets)]

    def realizable(self) -> frozenset:
        """Nodes with a finite derivation (counter-based worklist)."""
        prods = [p for ps in self.productions.values() for p in ps]
        missing = []
        waiting = defaultdict(list)
        queue = deque()
        for k, p in enumerate(prods):
            ts = set(p.targets)
            missing.append(len(ts))
            for t in ts:
                waiting[t].append(k)
            if not ts:
                queue.append(p.node)
        real: set = set()
        while queue:
            n = queue.popleft()
            if n in real:
                continue
            real.add(n)
            for k in waiting[n]:
                missing[k] -= 1
                if missing[k] == 0 and prods[k].node not in real:
                    queue.append(prods[k].node)
        return frozenset(real)

    def _components(self, realizable):
        """Tarjan's algorithm, iterative, over edges of usable productions."""
        if self._sccs is not None:
            return self._sccs
        ordered = [n for n in self.productions if n in realizable]
        succ = {n: list(dict.fromkeys(t for p in self.usable(n, realizable) for t in p.targets))
                for n in ordered}
        index: dict = {}
        low: dict = {}
        on_stack: set = set()
        stack: list = []
        comp: dict = {}
        order: list = []
        counter = 0
        for root in ordered:
            if root in index:
                continue
            work = [(root, 0)]
            while work:
                v, i = work.pop()
                if i == 0:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack.add(v)
                recurse = False
                nbrs = succ[v]
                while i < len(nbrs):
                    w = nbrs[i]
                    i += 1
                    if w not in index:
                        work.append((v, i))
                        work.append((w, 0))
                        recurse = True
                        break
                    if w in on_stack:
                        low[v] = min(low[v], index[w])
                if recurse:
                    continue
                if low[v] == index[v]:
                    members = set()
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        members.add(w)
                        if w == v:
                            break
                    fm = frozenset(members)
                    order.append(fm)
                    for w in members:
                        comp[w] = fm
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
        self._sccs = (succ, comp, order)
        return self._sccs

    def component_of(self, node, realizable):
        return self._components(realizable)[1][node]

    def solve(self) -> GrowthResult:
        real = self.realizable()
        usable = {n: self.usable(n, real) for n in real}
        rev_prod = defaultdict(list)
        for n in real:
            for p in usable[n]:
                for t in p.targets:
                    rev_prod[t].append(p.node)
        pos: set = set()
        queue = deque(n for n in real if any(p.const > 0 for p in usable[n]))
        while queue:
            n = queue.popleft()
            if n in pos:
                continue
            pos.add(n)
            for m in rev_prod[n]:
                if m not in pos:
                    queue.append(m)
        succ, comp, order = self._components(real)
        pumping: dict = {}
        for n in (n for n in self.productions if n in real):
            c = comp[n]
            for prod in usable[n]:
                inside = [i for i, t in enumerate(prod.targets) if t in c]
                for i in inside:
                    gains = prod.const > 0 or any(
                        prod.targets[j] in pos for j in range(len(prod.targets)) if j != i)
                    if gains:
                        pumping[n] = (prod, i)
                        break
                if n in pumping:
                    break
        # nodes reaching a pumping node
        rev = defaultdict(set)
        for n in real:
            for t in succ[n]:
                rev[t].add(n)
        unb = set(pumping)
        queue = deque(pumping)
        while queue:
            n = queue.popleft()
            for m in rev[n]:
                if m not in unb:
                    unb.add(m)
                    queue.append(m)
        # maximum values of bounded nodes, components sinks first
        val: dict = {}
        for c in order:
            if next(iter(c)) in unb:
                continue
            members = list(c)
            for _ in range(len(members) + 2):
                changed = False
                for n in members:
                    best = val.get(n)
                    for prod in usable[n]:
                        if all(t in val for t in prod.targets):
                            v = prod.const + sum(val[t] for t in prod.targets)
                            if best is None or v > best:
                                best = v
                    if best is not None and best != val.get(n):
                        val[n] = best
                        changed = True
                if not changed:
                    break
            else:
                raise AnalysisError("maximum computation did not stabilise")
        return GrowthResult(frozenset(real), frozenset(pos), frozenset(unb), val, pumping, self)


# --------------------------------------------------------------------------
# refinement by positivity


class RState:
    """Abstract subtree state ``key`` together with the labels whose value is ``≥ 1`` on it.

    Values of a label are not independent across calls on the same subtree;
    carrying the exact positivity set makes every gain in a cycle real.
    """

    __slots__ = ("key", "pos", "_hash")

    def __init__(self, key: Hashable, pos: frozenset):
        self.key = key
        self.pos = pos
        self._hash = hash((key, pos))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (self is other or type(other) is RState and self._hash == other._hash
                and self.key == other.key and self.pos == other.pos)

    def __repr__(self):
        return f"RState(key={self.key!r}, pos={set(self.pos) or '{}'})"


class RefinedSystem:
    """Grammar over ``(label, RState)`` nodes built from a domain description.

    The domain provides:

    * ``leaves()``: ``(key, {label: const}, witness)`` for atomic holes;
    * ``symbols``: ``[(sym, rank)]``;
    * ``combine(sym, child_keys)``: parent key or ``None`` when not allowed;
    * ``rules(sym, child_keys)``: ``[(label, const, ((label', child), ...), info)]``.

    Ground nullary symbols are ordinary symbols of rank 0.  Witnesses are
    built as ``Tree(sym, child_witnesses)``.
    """

    def __init__(self, domain, max_states: int = 50000):
        from .trees import Tree

        self.domain = domain
        self.witness: dict = {}
        self.transitions: list = []
        self.graph = Hypergraph()
        rules_cache: dict = {}
        for key, base, wit in domain.leaves():
            st = RState(key, frozenset(l for l, c in base.items() if c >= 1))
            self.witness.setdefault(st, wit)
            for label, c in base.items():
                self.graph.add((label, st), c, (), ("base",))
        combine_cache: dict = {}
        old: dict = {}
        new = _by_key(self.witness)
        first = True
        while new or first:
            pool = {k: old.get(k, []) + new.get(k, []) for k in set(old) | set(new)}
            fresh: list = []
            for sym, k in domain.symbols:
                if k == 0 and not first:
                    continue
                for keys in itertools.product(sorted(pool, key=repr), repeat=k):
                    ck = (sym, keys)
                    if ck in combine_cache:
                        parent_key = combine_cache[ck]
                    else:
                        parent_key = combine_cache[ck] = domain.combine(sym, keys)
                    if parent_key is None:
                        continue
                    combos = _semi_naive([old.get(x, []) for x in keys], [new.get(x, []) for x in keys],
                                         [pool[x] for x in keys])
                    prods = None
                    for combo in combos:
                        if prods is None:
                            prods = rules_cache.get(ck)
                            if prods is None:
                                prods = rules_cache[ck] = list(domain.rules(sym, keys))
                        pos = frozenset(label for label, const, targets, _ in prods
                                        if const >= 1 or any(t in combo[i - 1].pos for t, i in targets))
                        parent = RState(parent_key, pos)
                        self.transitions.append((sym, combo, parent))
                        for label, const, targets, info in prods:
                            self.graph.add((label, parent), const,
                                           tuple((t, combo[i - 1]) for t, i in targets),
                                           (sym, combo, tuple(i for _, i in targets), info))
                        if parent not in self.witness:
                            self.witness[parent] = Tree(sym, [self.witness[c] for c in combo])
                            fresh.append(parent)
                            if len(self.witness) > max_states:
                                raise AnalysisError("too many refined states")
            old, new, first = pool, _by_key(fresh), False
        self.result = self.graph.solve()

    def states_over(self, key) -> list:
        return [s for s in self.witness if s.key == key]

    def nodes_over(self, label, key) -> list:
        return [(label, s) for s in self.states_over(key) if (label, s) in self.result.realizable]

    def unbounded(self, label, key) -> bool:
        return any(n in self.result.unbounded for n in self.nodes_over(label, key))

    def realizable(self, label, key) -> bool:
        return bool(self.nodes_over(label, key))

    def maximum(self, label, key):
        vals = [self.result.maximum[n] for n in self.nodes_over(label, key) if n in self.result.maximum]
        return max(vals, default=None)

    def unbounded_node(self, label, key):
        for n in self.nodes_over(label, key):
            if n in self.result.unbounded:
                return n
        return None

    def contexts(self, node):
        """``(prefix, loop, inner, loop_state)`` for a pumping witness of ``node``.

        ``prefix`` and ``loop`` contain the private hole :data:`HOLE` once;
        ``inner`` is the witness of the looping state, so
        ``prefix[loop^n[inner]]`` realises growing values.
        """
        from .trees import Tree

        prefix_steps, cycle_steps = self.result.witness(node)

        def compose(steps):
            ctx = HOLE
            for prod, idx in steps:
                sym, combo, childs, _ = prod.info
                c = childs[idx]
                kids = [self.witness[s] for s in combo]
                kids[c - 1] = HOLE
                ctx = plug_hole(ctx, Tree(sym, kids))
            return ctx

        loop_state = cycle_steps[0][0].node[1]
        return compose(prefix_steps), compose(cycle_steps), self.witness[loop_state], loop_state


def _by_key(states) -> dict:
    out: dict = {}
    for st in states:
        out.setdefault(st.key, []).append(st)
    return out


def _semi_naive(old, new, pool):
    """Tuples drawn position-wise from ``pool`` with at least one member of ``new``.

    The first position holding a new member splits the tuples, so each one
    is produced once.
    """
    k = len(pool)
    if k == 0:
        yield ()
        return
    for first in range(k):
        if not new[first]:
            continue
        yield from itertools.product(*(old[:first] + [new[first]] + pool[first + 1:]))


def plug_hole(ctx, filler):
    """Replace the private hole of ``ctx`` by ``filler``."""
    from .trees import Tree, transform

    return transform(ctx, lambda n, kids: filler if n is HOLE
                     else (Tree(n.label, kids) if kids else n))


def _make_hole():
    from .trees import Mark, Tree

    return Tree(Mark("□", -1))


HOLE = _make_hole()
