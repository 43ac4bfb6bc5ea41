"""Total deterministic bottom-up tree automata used as look-ahead."""

from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Mapping

from .errors import UnknownSymbol
from .trees import Mark, RankedAlphabet, Tree, sort_key


class TreeAutomaton:
    """``(P, Σ, h)`` with ``h[(σ, (p1..pk))] = p``.

    The transition table must be total; partial tables are rejected.  Input
    marks (:class:`~mttlab.trees.Mark`) are accepted by :meth:`run` and map to
    their own look-ahead state.
    """

    def __init__(self, states: Iterable[Hashable], alphabet: RankedAlphabet | Mapping,
                 transitions: Mapping):
        self.states = tuple(dict.fromkeys(states))
        self.alphabet = alphabet if isinstance(alphabet, RankedAlphabet) else RankedAlphabet(alphabet)
        self.transitions = dict(transitions)
        state_set = set(self.states)
        missing = []
        for sym, k in self.alphabet.items():
            for ps in itertools.product(self.states, repeat=k):
                target = self.transitions.get((sym, ps))
                if target is None:
                    missing.append((sym, ps))
                elif target not in state_set:
                    raise ValueError(f"transition {sym}{ps} leads to unknown state {target!r}")
        if missing:
            sym, ps = missing[0]
            raise ValueError(f"look-ahead not total: no transition for {sym}{ps}"
                             + (f" (+{len(missing) - 1} more)" if len(missing) > 1 else ""))
        for (sym, ps) in self.transitions:
            if sym not in self.alphabet or len(ps) != self.alphabet[sym]:
                raise ValueError(f"transition for unknown symbol {sym}/{len(ps)}")
        self._run_cache: dict = {}
        self._nonempty = None

    @classmethod
    def trivial(cls, alphabet, state: Hashable = "p") -> "TreeAutomaton":
        alphabet = alphabet if isinstance(alphabet, RankedAlphabet) else RankedAlphabet(alphabet)
        return cls([state], alphabet, {(s, (state,) * k): state for s, k in alphabet.items()})

    @property
    def is_trivial(self) -> bool:
        return len(self.states) == 1

    def __repr__(self):
        return f"TreeAutomaton(states={list(self.states)}, alphabet={self.alphabet!r})"

    def step(self, sym, ps: tuple):
        try:
            return self.transitions[(sym, ps)]
        except KeyError:
            raise UnknownSymbol(f"no transition for {sym}{ps}") from None

    def run(self, s: Tree):
        """``ĥ(s)``, memoised per interned subtree."""
        cache = self._run_cache
        hit = cache.get(s)
        if hit is not None:
            return hit
        stack = [(s, False)]
        while stack:
            node, ready = stack.pop()
            if node in cache:
                continue
            label = node.label
            if type(label) is Mark:
                cache[node] = label.la
                continue
            if ready or not node.children:
                ps = tuple(cache[c] for c in node.children)
                if label not in self.alphabet:
                    raise UnknownSymbol(f"symbol {label} not in input alphabet")
                cache[node] = self.step(label, ps)
                continue
            stack.append((node, True))
            stack.extend((c, False) for c in node.children if c not in cache)
        if len(cache) > 500_000:
            result = cache[s]
            cache.clear()
            return result
        return cache[s]

    def nonempty_states(self) -> frozenset:
        """``{p | L_p ≠ ∅}`` as a least fixpoint."""
        if self._nonempty is None:
            self._nonempty = frozenset(self.witnesses())
        return self._nonempty

    def witnesses(self) -> dict:
        """Minimal-height witness tree per nonempty state.

        Rounds proceed by height; within a round symbols are tried in
        declaration order and child tuples in the order states were found, so
        the result is deterministic.
        """
        found: dict = {}
        while True:
            order = list(found)
            new: dict = {}
            for sym, k in self.alphabet.items():
                for ps in itertools.product(order, repeat=k):
                    p = self.transitions[(sym, ps)]
                    if p not in found and p not in new:
                        new[p] = Tree(sym, [found[q] for q in ps])
            if not new:
                return found
            found.update(new)

    def sample_tree(self, p) -> Tree | None:
        return self.witnesses().get(p)

    def enumerate_trees(self, p, max_size: int) -> list:
        """All trees in ``L_p`` of size ``≤ max_size``, sorted by ``(size, text)``."""
        by_size = self.trees_by_size(max_size)
        out = [t for n in range(1, max_size + 1) for t in by_size[n].get(p, ())]
        out.sort(key=sort_key)
        return out

    def trees_by_size(self, max_size: int) -> list:
        """``table[n][p]`` = list of trees of size ``n`` in ``L_p``."""
        table: list = [dict() for _ in range(max_size + 1)]
        for n in range(1, max_size + 1):
            cur: dict = {}
            for sym, k in self.alphabet.items():
                if k == 0:
                    if n == 1:
                        cur.setdefault(self.transitions[(sym, ())], []).append(Tree(sym))
                    continue
                for parts in _compositions(n - 1, k):
                    pools = []
                    for m in parts:
                        pools.append([(q, t) for q, ts in table[m].items() for t in ts])
                    for combo in itertools.product(*pools):
                        ps = tuple(q for q, _ in combo)
                        cur.setdefault(self.transitions[(sym, ps)], []).append(
                            Tree(sym, [t for _, t in combo]))
            table[n] = cur
        return table


def _compositions(n: int, k: int):
    """Ordered ways to write ``n`` as a sum of ``k`` positive parts."""
    if k == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def all_trees(alphabet: Mapping, max_size: int) -> list:
    """Every tree over ``alphabet`` of size ``≤ max_size`` (sorted)."""
    return TreeAutomaton.trivial(alphabet).enumerate_trees("p", max_size)
