"""Ranked trees, node addressing and the two substitution calculi.

Trees are hash-consed: constructing ``Tree(label, children)`` twice with equal
arguments yields the same object, so equality is identity and a set of subtrees
is computed by walking the shared DAG instead of the expanded tree.

Labels are plain strings for ordinary symbols, parameters (``y1``, ``y2``, ...)
and the pruning symbol ``$``.  Structured labels (state calls, input marks,
powerset leaves) are the small frozen classes defined below.
"""

from __future__ import annotations

import re
import threading
import weakref
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    NonNullarySymbol,
    ParamOutOfArity,
    PathOutOfRange,
    TreeSyntaxError,
)

NOP = "$"

Path = tuple  # tuple[int, ...], 1-based child indices

_PARAM_RE = re.compile(r"y([1-9][0-9]*)\Z")
_param_cache: dict = {}


def param(j: int) -> str:
    return f"y{j}"


def param_index(label) -> int | None:
    """Return ``j`` when ``label`` is the parameter ``y_j``, else ``None``."""
    if type(label) is not str:
        return None
    try:
        return _param_cache[label]
    except KeyError:
        m = _PARAM_RE.match(label)
        j = int(m.group(1)) if m else None
        if len(_param_cache) < 100_000:
            _param_cache[label] = j
        return j


def is_reserved(name: str) -> bool:
    """Names in the ``x<i>``/``y<j>`` namespaces cannot be alphabet symbols."""
    return bool(re.fullmatch(r"[xy][1-9][0-9]*", name))


@dataclass(frozen=True)
class Call:
    """State call ``<q, x_i>`` inside a right-hand side."""

    state: Hashable
    var: int

    def __str__(self):
        return f"<{self.state},x{self.var}>"


@dataclass(frozen=True)
class Mark:
    """Nullary input leaf standing for an unknown subtree with look-ahead ``la``.

    ``tag`` tells apart several holes carrying the same look-ahead state.
    """

    la: Hashable
    tag: int = 0

    def __str__(self):
        return f"@{self.la}" if self.tag == 0 else f"@{self.la}#{self.tag}"


@dataclass(frozen=True)
class PCall:
    """Pending call ``<q, p>`` of a provisional output, ``mark`` is the input leaf."""

    state: Hashable
    mark: Mark

    def __str__(self):
        return f"<{self.state},{self.mark}>"


@dataclass(frozen=True)
class Sharp:
    """Marker ``#_q`` of rank 1 placed at the root of every rule instance of ``q``."""

    state: Hashable

    def __str__(self):
        return f"#{self.state}"


def powerset_leaf(indices: Iterable[int]) -> "Tree":
    return Tree(frozenset(indices))


def is_powerset_leaf(label) -> bool:
    return type(label) is frozenset


def label_str(label) -> str:
    if type(label) is frozenset:
        return "{" + ",".join(str(i) for i in sorted(label)) + "}"
    return str(label)


_EMPTY = frozenset()


class Tree:
    """Immutable interned ranked tree.

    ``size``, ``height`` and ``params`` (indices of parameters occurring in the
    tree) are computed once at construction.
    """

    __slots__ = ("label", "children", "size", "height", "params", "_hash", "__weakref__")

    _table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __new__(cls, label, children: Iterable["Tree"] = ()):
        children = tuple(children)
        key = (label, children)
        node = cls._table.get(key)
        if node is not None:
            return node
        with cls._lock:
            node = cls._table.get(key)
            if node is not None:
                return node
            node = object.__new__(cls)
            node.label = label
            node.children = children
            if children:
                node.size = 1 + sum(c.size for c in children)
                node.height = 1 + max(c.height for c in children)
                ps = _EMPTY
                for c in children:
                    if c.params:
                        ps = ps | c.params if ps else c.params
                node.params = ps
            else:
                node.size = 1
                node.height = 1
                j = param_index(label)
                node.params = frozenset((j,)) if j is not None else _EMPTY
            node._hash = hash(key)
            cls._table[key] = node
            return node

    def __reduce__(self):
        return (Tree, (self.label, self.children))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __ne__(self, other):
        return self is not other

    @property
    def rank(self) -> int:
        return len(self.children)

    def __repr__(self):
        return f"Tree({to_str(self)!r})"

    def __str__(self):
        return to_str(self)

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)


def leaf(label) -> Tree:
    return Tree(label)


def sort_key(t: Tree):
    return (t.size, to_str(t))


# --------------------------------------------------------------------------
# traversal helpers


def iter_nodes(t: Tree) -> Iterator[tuple[Path, Tree]]:
    """Yield ``(path, subtree)`` for every node in preorder."""
    stack = [((), t)]
    while stack:
        u, s = stack.pop()
        yield u, s
        for i in range(len(s.children), 0, -1):
            stack.append((u + (i,), s.children[i - 1]))


def transform(t: Tree, fn: Callable[[Tree, tuple], Tree], skip: Callable[[Tree], bool] | None = None) -> Tree:
    """Bottom-up rebuild: ``fn(node, new_children)`` for every node.

    Results are memoised per shared node and the walk is iterative, so very
    deep trees are fine.  ``skip(node)`` short-circuits to the node itself.
    """
    memo: dict = {}
    stack = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if node in memo:
            continue
        if skip is not None and skip(node):
            memo[node] = node
            continue
        if ready or not node.children:
            memo[node] = fn(node, tuple(memo[c] for c in node.children))
            continue
        stack.append((node, True))
        for c in node.children:
            if c not in memo:
                stack.append((c, False))
    return memo[t]


# --------------------------------------------------------------------------
# node access


def node_access(t: Tree, u: Sequence[int]) -> tuple:
    """Return ``(t[u], t/u)``."""
    s = t
    for i in u:
        if not 1 <= i <= len(s.children):
            raise PathOutOfRange(f"path {format_path(u)} not in tree {t}")
        s = s.children[i - 1]
    return s.label, s


def subtree(t: Tree, u: Sequence[int]) -> Tree:
    return node_access(t, u)[1]


def replace_at(t: Tree, u: Sequence[int], t2: Tree) -> Tree:
    """Return ``t[u <- t2]``."""
    spine = [t]
    for i in u:
        s = spine[-1]
        if not 1 <= i <= len(s.children):
            raise PathOutOfRange(f"path {format_path(u)} not in tree {t}")
        spine.append(s.children[i - 1])
    new = t2
    for depth in range(len(u) - 1, -1, -1):
        s = spine[depth]
        i = u[depth]
        kids = list(s.children)
        kids[i - 1] = new
        new = Tree(s.label, kids)
    return new


def format_path(u: Sequence[int]) -> str:
    return ".".join(str(i) for i in u) if u else "ε"


def parse_path(text: str) -> Path:
    text = text.strip()
    if text in ("", "ε", "e", "eps"):
        return ()
    return tuple(int(x) for x in text.split("."))


# --------------------------------------------------------------------------
# substitution


def first_order_subst(t: Tree, bindings: Mapping) -> Tree:
    """Replace every leaf labelled ``σ_i`` by ``bindings[σ_i]``; no re-scanning."""
    bound = dict(bindings)
    if not bound:
        return t

    def fn(node, kids):
        if not kids and node.label in bound:
            return bound[node.label]
        if not kids:
            return node
        return Tree(node.label, kids)

    _check_nullary(t, bound)
    return transform(t, fn)


def _check_nullary(t: Tree, bound: Mapping) -> None:
    seen = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        if s.children and s.label in bound:
            raise NonNullarySymbol(f"symbol {label_str(s.label)} has rank {len(s.children)}")
        stack.extend(s.children)


def subst_params(t: Tree, args: Sequence[Tree]) -> Tree:
    """First-order substitution ``t[y_j <- args[j-1]]``; parameter-free parts are shared."""
    if not t.params:
        return t
    n = len(args)

    def fn(node, kids):
        if not kids:
            j = param_index(node.label)
            if j is not None and j <= n:
                return args[j - 1]
            return node
        return Tree(node.label, kids)

    return transform(t, fn, skip=lambda node: not node.params)


def rename_params(t: Tree, mapping: Mapping[int, int]) -> Tree:
    """Simultaneously rename parameters ``y_a -> y_mapping[a]``."""
    return subst_params(t, [Tree(param(mapping[j])) if j in mapping else Tree(param(j))
                            for j in range(1, max(t.params, default=0) + 1)])


def second_order_subst(t: Tree, bindings: Mapping, ranks: Mapping | None = None) -> Tree:
    """``t[[σ_i <- t_i]]``: every ``σ_i(s_1..s_k)`` becomes ``t_i[y_j <- s_j']``.

    ``s_j'`` is the already substituted ``j``-th child.  When ``ranks`` is given
    the images are checked up front, otherwise at each occurrence.
    """
    bound = dict(bindings)
    if not bound:
        return t
    if ranks is not None:
        for label, image in bound.items():
            k = ranks[label]
            if image.params and max(image.params) > k:
                raise ParamOutOfArity(f"image of {label_str(label)} uses y{max(image.params)} > rank {k}")

    def fn(node, kids):
        image = bound.get(node.label)
        if image is None:
            if not kids:
                return node
            return Tree(node.label, kids)
        if image.params and max(image.params) > len(kids):
            raise ParamOutOfArity(
                f"image of {label_str(node.label)} uses y{max(image.params)} > rank {len(kids)}")
        return subst_params(image, kids)

    return transform(t, fn)


# --------------------------------------------------------------------------
# metrics


def subtrees(t: Tree) -> set:
    """The set ``sub(t)`` of distinct subtrees."""
    seen = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        stack.extend(s.children)
    return seen


def metrics(t: Tree) -> tuple:
    """Return ``(size, height, subtrees)``; a single node has height 1."""
    return t.size, t.height, subtrees(t)


def labels(t: Tree) -> set:
    return {s.label for s in subtrees(t)}


# --------------------------------------------------------------------------
# textual syntax

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<call><\s*[^<>,\s]+\s*,\s*[^<>,\s]+\s*>)
      | (?P<set>\{[0-9,\s]*\})
      | (?P<ident>[#@]?[A-Za-z0-9_'.$\-]+(?:\#[0-9]+)?)
      | (?P<punct>[(),])
    )""",
    re.VERBOSE,
)


def _parse_label(kind: str, text: str):
    if kind == "set":
        body = text[1:-1].strip()
        return frozenset(int(x) for x in body.split(",") if x.strip())
    if kind == "call":
        state, arg = (x.strip() for x in text[1:-1].split(","))
        if arg.startswith("@"):
            return PCall(state, _parse_mark(arg))
        m = re.fullmatch(r"x([1-9][0-9]*)", arg)
        if not m:
            raise ValueError(f"bad call argument {arg!r}")
        return Call(state, int(m.group(1)))
    if text.startswith("@"):
        return _parse_mark(text)
    if text.startswith("#") and len(text) > 1:
        return Sharp(text[1:])
    return text


def _parse_mark(text: str) -> Mark:
    body = text[1:]
    if "#" in body:
        la, tag = body.rsplit("#", 1)
        return Mark(la, int(tag))
    return Mark(body)


def tokenize(text: str, line: int = 1, col0: int = 1):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise TreeSyntaxError(f"unexpected character {text[pos:pos + 1]!r}", line, col0 + pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), col0 + start))
        pos = m.end()
    return out


def parse_tree(text: str, line: int = 1, col0: int = 1) -> Tree:
    """Parse ``f(a, g(b))``; nullary parentheses are optional."""
    toks = tokenize(text, line, col0)
    if not toks:
        raise TreeSyntaxError("empty tree", line, col0)
    tree, pos = _parse_from(toks, 0, line)
    if pos != len(toks):
        raise TreeSyntaxError(f"trailing input {toks[pos][1]!r}", line, toks[pos][2])
    return tree


def _parse_from(toks, pos, line):
    # iterative to survive very deep inputs
    stack: list = []  # (label, children)
    while True:
        if pos >= len(toks):
            raise TreeSyntaxError("unexpected end of input", line, toks[-1][2] if toks else 1)
        kind, text, col = toks[pos]
        if kind == "punct":
            raise TreeSyntaxError(f"expected a symbol, got {text!r}", line, col)
        try:
            label = _parse_label(kind, text)
        except ValueError as exc:
            raise TreeSyntaxError(str(exc), line, col) from None
        pos += 1
        if pos < len(toks) and toks[pos][1] == "(":
            pos += 1
            if pos < len(toks) and toks[pos][1] == ")":
                pos += 1
                node = Tree(label)
            else:
                stack.append((label, []))
                continue
        else:
            node = Tree(label)
        # close finished frames
        while True:
            if not stack:
                return node, pos
            stack[-1][1].append(node)
            if pos >= len(toks):
                raise TreeSyntaxError("unclosed parenthesis", line, toks[-1][2])
            kind, text, col = toks[pos]
            if text == ",":
                pos += 1
                break
            if text == ")":
                pos += 1
                lab, kids = stack.pop()
                node = Tree(lab, kids)
                continue
            raise TreeSyntaxError(f"expected ',' or ')', got {text!r}", line, col)


def to_str(t: Tree) -> str:
    parts: list = []
    stack: list = [t]
    while stack:
        item = stack.pop()
        if type(item) is str:
            parts.append(item)
            continue
        parts.append(label_str(item.label))
        if item.children:
            parts.append("(")
            stack.append(")")
            for i in range(len(item.children) - 1, -1, -1):
                stack.append(item.children[i])
                if i:
                    stack.append(", ")
    return "".join(parts)


# --------------------------------------------------------------------------
# ranked alphabets


class RankedAlphabet(Mapping):
    """Ordered mapping ``symbol -> rank``; declaration order is significant."""

    def __init__(self, symbols: Iterable[tuple] | Mapping = ()):
        items = symbols.items() if isinstance(symbols, Mapping) else symbols
        self._ranks: dict = {}
        for name, rank in items:
            if name in self._ranks:
                raise ValueError(f"duplicate symbol {name!r}")
            if rank < 0:
                raise ValueError(f"negative rank for {name!r}")
            self._ranks[name] = int(rank)

    def __getitem__(self, name):
        return self._ranks[name]

    def __iter__(self):
        return iter(self._ranks)

    def __len__(self):
        return len(self._ranks)

    def __repr__(self):
        return "RankedAlphabet(" + ", ".join(f"{n}/{r}" for n, r in self._ranks.items()) + ")"

    def __eq__(self, other):
        return isinstance(other, RankedAlphabet) and list(self._ranks.items()) == list(other._ranks.items())

    def __hash__(self):
        return hash(tuple(self._ranks.items()))

    def of_rank(self, k: int) -> list:
        return [s for s, r in self._ranks.items() if r == k]

    @property
    def max_rank(self) -> int:
        return max(self._ranks.values(), default=0)

    def union(self, other: Mapping) -> "RankedAlphabet":
        merged = dict(self._ranks)
        for name, rank in other.items():
            if merged.get(name, rank) != rank:
                raise ValueError(f"symbol {name!r} with two ranks")
            merged[name] = rank
        return RankedAlphabet(merged)

    def well_ranked(self, t: Tree, extra: Mapping | None = None) -> bool:
        for s in subtrees(t):
            r = self._ranks.get(s.label)
            if r is None and extra is not None:
                r = extra.get(s.label)
            if r is None or r != len(s.children):
                return False
        return True
