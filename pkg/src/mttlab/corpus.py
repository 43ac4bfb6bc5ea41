"""Seeded random nondeleting transducers with look-ahead, for testing."""

from __future__ import annotations

import itertools
import random

from .lookahead import TreeAutomaton
from .mtt import Mtt
from .trees import Call, Tree, param

OUTPUT = {"f": 2, "b": 1, "c": 0}


def random_mtt(seed: int, max_states: int = 3, max_la: int = 2, max_rank: int = 2,
               max_depth: int = 3) -> Mtt:
    """A total, deterministic, nondeleting transducer drawn from ``seed``.

    Input symbols: ``e/0`` plus one or two of ``a/1``, ``g/2``.  State ranks
    and input ranks never exceed ``max_rank``.
    """
    rng = random.Random(seed)
    sigma = {"e": 0}
    extra = rng.choice([["a"], ["g"], ["a", "g"]])
    for s in extra:
        sigma[s] = 1 if s == "a" else 2
    sigma = {k: v for k, v in sigma.items() if v <= max_rank}
    n_la = rng.randint(1, max_la)
    la_states = [f"p{i}" for i in range(n_la)]
    trans = {}
    for sym, k in sigma.items():
        for ps in itertools.product(la_states, repeat=k):
            trans[(sym, ps)] = rng.choice(la_states)
    la = TreeAutomaton(la_states, sigma, trans)
    n_states = rng.randint(1, max_states)
    states = {"q0": 0}
    for i in range(1, n_states):
        states[f"q{i}"] = rng.randint(0, max_rank)
    names = list(states)
    rules = {}
    for q, m in states.items():
        for sym, k in sigma.items():
            for ps in itertools.product(la_states, repeat=k):
                rules[(q, sym, ps)] = _random_rhs(rng, names, states, m, k, max_depth)
    return Mtt(states, "q0", sigma, OUTPUT, la, rules, name=f"random{seed}")


def _random_rhs(rng, names, states, m, k, max_depth) -> Tree:
    for _ in range(60):
        t = _gen(rng, names, states, m, k, max_depth)
        if t.params >= set(range(1, m + 1)):
            return t
    # fall back to a right comb holding every parameter
    t = Tree(param(m))
    for j in range(m - 1, 0, -1):
        t = Tree("f", [Tree(param(j)), t])
    return t


def _gen(rng, names, states, m, k, depth) -> Tree:
    options = ["leaf"]
    if depth > 0:
        options += ["b", "f"]
        if k:
            options += ["call", "call"]
    choice = rng.choice(options)
    if choice == "leaf":
        if m and rng.random() < 0.7:
            return Tree(param(rng.randint(1, m)))
        if k and rng.random() < 0.5:
            zero = [r for r in names if states[r] == 0]
            if zero:
                return Tree(Call(rng.choice(zero), rng.randint(1, k)))
        return Tree("c")
    if choice == "b":
        return Tree("b", [_gen(rng, names, states, m, k, depth - 1)])
    if choice == "f":
        return Tree("f", [_gen(rng, names, states, m, k, depth - 1),
                          _gen(rng, names, states, m, k, depth - 1)])
    r = rng.choice(names)
    return Tree(Call(r, rng.randint(1, k)),
                [_gen(rng, names, states, m, k, depth - 1) for _ in range(states[r])])


def corpus(n: int = 50, seed: int = 0, **kw) -> list:
    """``n`` random transducers from consecutive seeds starting at ``seed``."""
    return [random_mtt(seed + i, **kw) for i in range(n)]
