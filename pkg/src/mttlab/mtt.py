"""Macro tree transducers with regular look-ahead (total, deterministic)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .errors import InvalidTransducer, UndefinedRule
from .lookahead import TreeAutomaton
from .trees import (
    Call,
    Mark,
    PCall,
    RankedAlphabet,
    Tree,
    is_reserved,
    param,
    param_index,
    subst_params,
)


@dataclass(frozen=True)
class Violation:
    kind: str  # Totality | Determinism | Nondeletion | Rank | Symbol | Initial
    key: tuple | None
    message: str

    def __str__(self):
        where = f" at {format_key(self.key)}" if self.key else ""
        return f"{self.kind}Violation{where}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def without(self, *kinds) -> "ValidationReport":
        return ValidationReport([v for v in self.violations if v.kind not in kinds])

    def raise_if_invalid(self):
        if self.violations:
            raise InvalidTransducer(self.violations)


def format_key(key) -> str:
    q, sym, ps = key
    if ps:
        return f"({q}, {sym}({', '.join(f'x{i + 1}:{p}' for i, p in enumerate(ps))}))"
    return f"({q}, {sym})"


class Mtt:
    """``(Q, P, Σ, Δ, q0, R, h)``.

    ``rules`` maps ``(q, σ, (p1..pk))`` to a right-hand side tree over
    ``Δ ∪ <Q, X_k> ∪ Y_m``.  States listed in ``partial`` may lack rules for
    keys that are never reached (helper states introduced by normalisation).
    Instances are treated as immutable.
    """

    def __init__(self, states: Mapping, initial, input_alphabet, output_alphabet,
                 lookahead: TreeAutomaton, rules: Mapping, partial: Iterable = (), name: str | None = None):
        self.states = RankedAlphabet(states) if not isinstance(states, RankedAlphabet) else states
        self.initial = initial
        self.input_alphabet = (input_alphabet if isinstance(input_alphabet, RankedAlphabet)
                               else RankedAlphabet(input_alphabet))
        self.output_alphabet = (output_alphabet if isinstance(output_alphabet, RankedAlphabet)
                                else RankedAlphabet(output_alphabet))
        self.lookahead = lookahead
        self.rules = dict(rules)
        self.partial = frozenset(partial)
        self.name = name

    @classmethod
    def build(cls, states, initial, input_alphabet, output_alphabet, rules,
              lookahead: TreeAutomaton | None = None, name=None, partial=()) -> "Mtt":
        """Convenience constructor.

        A rule key may omit the look-ahead vector, ``(q, σ)``; it then applies
        to every vector not given explicitly.  Right-hand sides may be text.
        """
        from .trees import parse_tree

        input_alphabet = RankedAlphabet(input_alphabet)
        if lookahead is None:
            lookahead = TreeAutomaton.trivial(input_alphabet)
        explicit = {}
        wildcard = {}
        for key, rhs in rules.items():
            if isinstance(rhs, str):
                rhs = parse_tree(rhs)
            if len(key) == 2:
                wildcard[key] = rhs
            else:
                explicit[(key[0], key[1], tuple(key[2]))] = rhs
        full = dict(explicit)
        for (q, sym), rhs in wildcard.items():
            k = input_alphabet[sym]
            for ps in itertools.product(lookahead.states, repeat=k):
                full.setdefault((q, sym, ps), rhs)
        return cls(states, initial, input_alphabet, output_alphabet, lookahead, full,
                   partial=partial, name=name)

    def __repr__(self):
        return (f"Mtt({self.name or ''} |Q|={len(self.states)} |P|={len(self.lookahead.states)} "
                f"|R|={len(self.rules)})")

    # -- structure ---------------------------------------------------------

    def rank(self, q) -> int:
        return self.states[q]

    def keys(self):
        """All rule keys required by totality."""
        for q in self.states:
            for sym, k in self.input_alphabet.items():
                for ps in itertools.product(self.lookahead.states, repeat=k):
                    yield (q, sym, ps)

    @cached_property
    def max_rhs_height(self) -> int:
        return max((r.height for r in self.rules.values()), default=1)

    @cached_property
    def max_rhs_size(self) -> int:
        return max((r.size for r in self.rules.values()), default=1)

    @cached_property
    def nonempty(self) -> frozenset:
        return self.lookahead.nonempty_states()

    @cached_property
    def alive(self) -> frozenset:
        """Pairs ``(q, p)`` such that ``M_q`` is defined on ``L_p`` (all pairs for total states)."""
        out = set()
        ne = self.nonempty
        for q in self.states:
            if q not in self.partial:
                out.update((q, p) for p in ne)
        for (q, sym, ps), _ in self.rules.items():
            if q in self.partial and all(p in ne for p in ps):
                out.add((q, self.lookahead.step(sym, ps)))
        return frozenset(out)

    @cached_property
    def extended(self) -> "Mtt":
        return extend(self)

    def validate(self) -> ValidationReport:
        return validate(self)

    def __call__(self, s: Tree) -> Tree:
        return apply(self, s)


def call_states(rhs: Tree) -> set:
    """``{(q, i)}`` for every call ``<q, x_i>`` occurring in ``rhs``."""
    out = set()
    stack = [rhs]
    seen = set()
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        if type(s.label) is Call:
            out.add((s.label.state, s.label.var))
        stack.extend(s.children)
    return out


# --------------------------------------------------------------------------
# validation


def validate(m: Mtt) -> ValidationReport:
    """Check totality, determinism, well-rankedness and nondeletion.

    Never raises; every violation is listed with its rule key.
    """
    out: list = []
    if m.initial not in m.states:
        out.append(Violation("Initial", None, f"initial state {m.initial} undeclared"))
    elif m.states[m.initial] != 0:
        out.append(Violation("Initial", None, f"initial state {m.initial} has rank {m.states[m.initial]}"))
    for alpha, what in ((m.input_alphabet, "input"), (m.output_alphabet, "output")):
        for sym in alpha:
            if type(sym) is str and (is_reserved(sym) or sym == "$"):
                out.append(Violation("Symbol", None, f"{what} symbol {sym} uses a reserved name"))
    if m.lookahead.alphabet != m.input_alphabet:
        out.append(Violation("Symbol", None, "look-ahead alphabet differs from input alphabet"))
    for key in m.keys():
        if key not in m.rules and key[0] not in m.partial:
            out.append(Violation("Totality", key, "no rule"))
    for key, rhs in m.rules.items():
        q, sym, ps = key
        if q not in m.states or sym not in m.input_alphabet or len(ps) != m.input_alphabet[sym] \
                or any(p not in m.lookahead.states for p in ps):
            out.append(Violation("Symbol", key, "rule key outside Q × Σ × P^k"))
            continue
        k = len(ps)
        mq = m.states[q]
        for msg in _rhs_problems(m, rhs, k, mq):
            out.append(Violation("Rank", key, msg))
        missing = set(range(1, mq + 1)) - rhs.params
        if missing:
            out.append(Violation("Nondeletion", key,
                                 "drops " + ", ".join(param(j) for j in sorted(missing))))
    return ValidationReport(out)


def _rhs_problems(m: Mtt, rhs: Tree, k: int, mq: int):
    seen = set()
    stack = [rhs]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        label = s.label
        n = len(s.children)
        if type(label) is Call:
            if label.state not in m.states:
                yield f"call to unknown state {label.state}"
            elif m.states[label.state] != n:
                yield f"call {label} has {n} arguments, rank is {m.states[label.state]}"
            if not 1 <= label.var <= k:
                yield f"variable x{label.var} out of range (k={k})"
        elif param_index(label) is not None:
            j = param_index(label)
            if n:
                yield f"parameter {label} has children"
            if j > mq:
                yield f"parameter {label} exceeds state rank {mq}"
        elif label in m.output_alphabet:
            if m.output_alphabet[label] != n:
                yield f"output symbol {label} has {n} children, rank is {m.output_alphabet[label]}"
        else:
            yield f"unknown output symbol {label}"
        stack.extend(s.children)


# --------------------------------------------------------------------------
# evaluation


class Evaluator:
    """Computes ``M_q(s)`` with memoisation keyed by ``(q, interned s)``.

    Input leaves labelled by :class:`Mark` are treated as holes: ``<q, mark>``
    evaluates to the pending call ``PCall(q, mark)(y1..ym)``, i.e. evaluation
    of the extension ``M̂``.
    """

    def __init__(self, m: Mtt):
        self.m = m
        self.memo: dict = {}
        self._la = m.lookahead

    def state(self, q, s: Tree) -> Tree:
        key = (q, s)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        label = s.label
        if type(label) is Mark:
            result = Tree(PCall(q, label), [Tree(param(j)) for j in range(1, self.m.states[q] + 1)])
        else:
            ps = tuple(self._la.run(c) for c in s.children)
            rhs = self.m.rules.get((q, label, ps))
            if rhs is None:
                raise UndefinedRule(f"no rule for {format_key((q, label, ps))}")
            result = self.instantiate(rhs, s.children)
        self.memo[key] = result
        return result

    def instantiate(self, rhs: Tree, kids: tuple) -> Tree:
        """``rhs[[<q', x_i> <- M_q'(kids[i])]]`` with parameters left symbolic."""
        local: dict = {}

        def go(node):
            hit = local.get(node)
            if hit is not None:
                return hit
            label = node.label
            if type(label) is Call:
                args = [go(c) for c in node.children]
                res = subst_params(self.state(label.state, kids[label.var - 1]), args)
            elif node.children:
                res = Tree(label, [go(c) for c in node.children])
            else:
                res = node
            local[node] = res
            return res

        return go(rhs)

    def apply(self, s: Tree) -> Tree:
        return self.state(self.m.initial, s)


def eval_state(m: Mtt, q, s: Tree) -> Tree:
    """``M_q(s)`` over ``Δ ∪ Y_m``."""
    return Evaluator(m).state(q, s)


def apply(m: Mtt, s: Tree) -> Tree:
    """``M(s) = M_{q0}(s)``."""
    return Evaluator(m).apply(s)


def provisional_output(m: Mtt, s: Tree) -> Tree:
    """``M̂(s)`` for ``s`` over ``Σ ∪ {Mark(p)}``."""
    return Evaluator(m).apply(s)


# --------------------------------------------------------------------------
# extension and reachability


def extend(m: Mtt) -> Mtt:
    """The extension ``M̂`` with a nullary input symbol ``Mark(p)`` per look-ahead state.

    Marks are a separate label type, so they never clash with input symbols.
    """
    marks = {p: Mark(p) for p in m.lookahead.states}
    sigma = m.input_alphabet.union({mk: 0 for mk in marks.values()})
    trans = dict(m.lookahead.transitions)
    for p, mk in marks.items():
        trans[(mk, ())] = p
    la = TreeAutomaton(m.lookahead.states, sigma, trans)
    delta = dict(m.output_alphabet)
    rules = dict(m.rules)
    for q, rank in m.states.items():
        for p, mk in marks.items():
            pc = PCall(q, mk)
            delta[pc] = rank
            rules[(q, mk, ())] = Tree(pc, [Tree(param(j)) for j in range(1, rank + 1)])
    return Mtt(m.states, m.initial, sigma, RankedAlphabet(delta), la, rules,
               partial=m.partial, name=(m.name + "^" if m.name else None))


def reachable_calls(m: Mtt, with_contexts: bool = False):
    """Pairs ``(q, p)`` such that ``<q, p>`` occurs in ``M̂(s)`` for some ``s ∈ T_Σ(P)``.

    Only look-ahead states with nonempty languages are considered.  With
    ``with_contexts`` a mapping from each pair to an input context (a tree
    containing the hole ``Mark(p)``) witnessing it is returned instead.
    """
    la = m.lookahead
    ne = m.nonempty
    samples = la.witnesses()
    ctx: dict = {}
    queue = []
    for p in la.states:
        if p in ne and (m.initial, p) in m.alive:
            ctx[(m.initial, p)] = Tree(Mark(p))
            queue.append((m.initial, p))
    by_state: dict = {}
    for key, rhs in m.rules.items():
        by_state.setdefault(key[0], []).append((key, rhs))
    while queue:
        q, p = queue.pop(0)
        here = ctx[(q, p)]
        for (_, sym, ps), rhs in by_state.get(q, ()):
            if la.step(sym, ps) != p or any(pi not in ne for pi in ps):
                continue
            for r, i in sorted(call_states(rhs), key=lambda x: (str(x[0]), x[1])):
                pair = (r, ps[i - 1])
                if pair in ctx:
                    continue
                kids = [samples[pj] for pj in ps]
                kids[i - 1] = Tree(Mark(ps[i - 1]))
                ctx[pair] = plug(here, Mark(p), Tree(sym, kids))
                queue.append(pair)
    if with_contexts:
        return ctx
    return frozenset(ctx)


def plug(context: Tree, mark: Mark, filler: Tree) -> Tree:
    """Replace the hole leaf ``mark`` in ``context`` by ``filler``."""
    from .trees import first_order_subst

    return first_order_subst(context, {mark: filler})
