"""Small reference transducers used by the tests, the CLI and the docs."""

from __future__ import annotations

from .mtt import Mtt


def ident() -> Mtt:
    """Identity on trees over ``{f/2, a/0}``."""
    return Mtt.build({"q0": 0}, "q0", {"f": 2, "a": 0}, {"f": 2, "a": 0}, {
        ("q0", "f"): "f(<q0,x1>, <q0,x2>)",
        ("q0", "a"): "a",
    }, name="IDENT")


def double() -> Mtt:
    """``a^n(e)`` to the full binary tree of height ``n + 1``."""
    return Mtt.build({"q0": 0}, "q0", {"a": 1, "e": 0}, {"f": 2, "c": 0}, {
        ("q0", "a"): "f(<q0,x1>, <q0,x1>)",
        ("q0", "e"): "c",
    }, name="DOUBLE")


def nest2() -> Mtt:
    """``a^k(e)`` to a ``b``-chain of length ``2^(k-1)``: the calls of ``q`` nest."""
    return Mtt.build({"q0": 0, "q": 1}, "q0", {"a": 1, "e": 0}, {"b": 1, "c": 0}, {
        ("q0", "a"): "<q,x1>(c)",
        ("q0", "e"): "c",
        ("q", "a"): "<q,x1>(<q,x1>(y1))",
        ("q", "e"): "b(y1)",
    }, name="NEST2")


def revdewey() -> Mtt:
    """Leaves of the binary tree over ``a^n(e)`` carry their reversed node address."""
    return Mtt.build({"q0": 0, "q": 1}, "q0", {"a": 1, "e": 0},
                     {"f": 2, "1": 1, "2": 1, "e": 0}, {
        ("q0", "a"): "f(<q,x1>(1(e)), <q,x1>(2(e)))",
        ("q0", "e"): "e",
        ("q", "a"): "f(<q,x1>(1(y1)), <q,x1>(2(y1)))",
        ("q", "e"): "y1",
    }, name="REVDEWEY")


def improp() -> Mtt:
    """``y1`` of ``q`` never sits deeper than one ``h``: an improper call."""
    return Mtt.build({"q0": 0, "q": 1}, "q0", {"a": 1, "e": 0}, {"h": 2, "c": 0}, {
        ("q0", "a"): "<q,x1>(c)",
        ("q0", "e"): "c",
        ("q", "a"): "h(<q,x1>(c), y1)",
        ("q", "e"): "y1",
    }, name="IMPROP")


def mlnest() -> Mtt:
    """Calls on sibling subtrees nest: output height exponential in input height."""
    return Mtt.build({"q0": 0, "q": 1}, "q0", {"s": 2, "e": 0}, {"b": 1, "c": 0}, {
        ("q0", "s"): "<q,x1>(<q,x2>(c))",
        ("q0", "e"): "c",
        ("q", "s"): "<q,x1>(<q,x2>(y1))",
        ("q", "e"): "b(y1)",
    }, name="MLNEST")


def constant_leaf(leaf: str, name: str | None = None) -> Mtt:
    """Copies ``s``-chains over ``{s/1, e/0}`` and ends them in ``leaf`` (``c`` or ``d``)."""
    return Mtt.build({"q": 0}, "q", {"s": 1, "e": 0}, {"s": 1, "c": 0, "d": 0}, {
        ("q", "s"): "s(<q,x1>)",
        ("q", "e"): leaf,
    }, name=name or f"CONST_{leaf.upper()}")


def lsoi_pair() -> tuple:
    """Two transducers that differ exactly on every input (first on ``e``)."""
    return constant_leaf("c"), constant_leaf("d")


FIXTURES = {
    "IDENT": ident,
    "DOUBLE": double,
    "NEST2": nest2,
    "REVDEWEY": revdewey,
    "IMPROP": improp,
    "MLNEST": mlnest,
}


def fixture(name: str) -> Mtt:
    try:
        return FIXTURES[name.upper()]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
