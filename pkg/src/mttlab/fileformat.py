"""Text format for transducers.

::

    # comments start with '#' at the beginning of a line
    mtt NEST2
    input: a/1 e/0
    output: b/1 c/0
    lookahead: p            # states; transitions follow, indented
      a(p) -> p
      e -> p
    states: q0/0 q/1
    initial: q0
    partial:                # states allowed to lack rules (optional)
    rules:
      q0, a(x1:p) -> <q,x1>(c)
      q0, e -> c
      q, a(x1:p) (y1) -> b(<q,x1>(<q,x1>(y1)))
      q, e (y1) -> b(y1)

A ``lookahead:`` line without transitions declares the trivial automaton with
that single state; the section may be omitted (state ``p``).  With a trivial
look-ahead, ``:p`` annotations on variables may be left out.
"""

from __future__ import annotations

import itertools
import re
from pathlib import Path

from .errors import InvalidTransducer, TreeSyntaxError
from .lookahead import TreeAutomaton
from .mtt import Mtt, Violation, validate
from .trees import RankedAlphabet, parse_tree, to_str

_SECTIONS = ("mtt", "input", "output", "lookahead", "states", "initial", "partial", "rules")
_RANKED = re.compile(r"([^\s/]+)/([0-9]+)$")
_RULE = re.compile(r"\s*(?P<q>[^,\s]+)\s*,\s*(?P<sym>[^\s(]+)\s*(?P<groups>(?:\([^()]*\)\s*)*)->(?P<rhs>.*)$")
_GROUP = re.compile(r"\(([^()]*)\)")
_TRANS = re.compile(r"\s*(?P<sym>[^\s(]+)\s*(?:\((?P<args>[^()]*)\))?\s*->\s*(?P<to>\S+)\s*$")


def _strip_comment(line: str) -> str:
    if line.lstrip().startswith("#"):
        return ""
    m = re.search(r"\s#\s", line)
    return line[:m.start()] if m else line


def _ranked(text: str, line: int, col: int) -> dict:
    out = {}
    for m in re.finditer(r"\S+", text):
        r = _RANKED.match(m.group())
        if not r:
            raise TreeSyntaxError(f"expected name/rank, got {m.group()!r}", line, col + m.start())
        if r.group(1) in out:
            raise TreeSyntaxError(f"{r.group(1)} declared twice", line, col + m.start())
        out[r.group(1)] = int(r.group(2))
    return out


def loads(text: str, check: bool = True) -> Mtt:
    """Parse a transducer.

    Syntax errors raise :class:`TreeSyntaxError` with line and column.  With
    ``check``, validation problems (except missing parameters, which only the
    analyses reject) raise :class:`InvalidTransducer`.
    """
    head: dict = {}
    trans_lines: list = []
    rule_lines: list = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        indented = line[0].isspace()
        m = re.match(r"([a-z]+)\s*:?(.*)$", line) if not indented else None
        if m and m.group(1) in _SECTIONS and (m.group(1) == "mtt" or ":" in line.split()[0] + ":"):
            key, rest = m.group(1), m.group(2)
            if key != "mtt" and not line[len(key):].lstrip().startswith(":"):
                raise TreeSyntaxError(f"expected ':' after {key}", lineno, len(key) + 1)
            if key in head:
                raise TreeSyntaxError(f"section {key} given twice", lineno, 1)
            col = line.index(rest) + 1 if rest.strip() else len(line) + 1
            head[key] = (rest.strip(), lineno, col)
            section = key
            continue
        if section == "lookahead":
            trans_lines.append((line, lineno))
        elif section == "rules":
            rule_lines.append((line, lineno))
        else:
            raise TreeSyntaxError("line outside of a section", lineno, 1)
    for key in ("input", "output", "states", "initial", "rules"):
        if key not in head:
            raise TreeSyntaxError(f"missing section {key}", 1, 1)
    name = head["mtt"][0] if "mtt" in head else None
    sigma = _ranked(*head["input"])
    delta = _ranked(*head["output"])
    states = _ranked(*head["states"])
    initial = head["initial"][0]
    partial = head["partial"][0].split() if "partial" in head else []

    if "lookahead" in head:
        la_states = head["lookahead"][0].split()
        if not la_states:
            raise TreeSyntaxError("no look-ahead states", head["lookahead"][1], head["lookahead"][2])
    else:
        la_states = ["p"]
    trans = {}
    for line, lineno in trans_lines:
        m = _TRANS.match(line)
        if not m:
            raise TreeSyntaxError("expected 'sym(p1, ..) -> p'", lineno, 1)
        args = tuple(a.strip() for a in (m.group("args") or "").split(",") if a.strip())
        key = (m.group("sym"), args)
        if key in trans:
            raise TreeSyntaxError(f"transition {m.group('sym')}{args} given twice", lineno, 1)
        trans[key] = m.group("to")
    try:
        if not trans_lines and len(la_states) == 1:
            la = TreeAutomaton.trivial(sigma, la_states[0])
        else:
            la = TreeAutomaton(la_states, sigma, trans)
    except ValueError as exc:
        line = head["lookahead"][1] if "lookahead" in head else 1
        raise TreeSyntaxError(str(exc), line, 1) from None
    trivial = len(la_states) == 1

    rules: dict = {}
    problems: list = []
    for line, lineno in rule_lines:
        m = _RULE.match(line)
        if not m:
            raise TreeSyntaxError("expected 'q, sym(x1:p1, ..) (y1, ..) -> rhs'", lineno, 1)
        q, sym = m.group("q"), m.group("sym")
        xs: list = []
        ys: list = []
        for g in _GROUP.finditer(m.group("groups")):
            items = [a.strip() for a in g.group(1).split(",") if a.strip()]
            col = m.start("groups") + g.start() + 1
            if items and all(re.fullmatch(r"y[1-9][0-9]*", a) for a in items):
                ys = items
            else:
                xs = items
                for i, a in enumerate(items, 1):
                    x = re.fullmatch(r"x([1-9][0-9]*)\s*(?::\s*(\S+))?", a)
                    if not x or int(x.group(1)) != i:
                        raise TreeSyntaxError(f"expected x{i}[:state], got {a!r}", lineno, col)
                    if x.group(2) is None and not trivial:
                        raise TreeSyntaxError(f"x{i} needs a look-ahead state", lineno, col)
        ps = []
        for a in xs:
            part = a.split(":")
            ps.append(part[1].strip() if len(part) > 1 else la_states[0])
        if ys != [f"y{j}" for j in range(1, len(ys) + 1)]:
            raise TreeSyntaxError("parameters must be y1, y2, ..", lineno, m.start("groups") + 1)
        rhs_col = m.start("rhs") + 1
        rhs = parse_tree(m.group("rhs"), lineno, rhs_col)
        key = (q, sym, tuple(ps))
        if q in states and len(ys) != states[q]:
            problems.append(Violation("Rank", key, f"line {lineno}: {len(ys)} parameters, "
                                                   f"state {q} has rank {states[q]}"))
        if key in rules:
            problems.append(Violation("Determinism", key, f"line {lineno}: second rule for this key"))
            continue
        rules[key] = rhs
    m = Mtt(states, initial, sigma, delta, la, rules, partial=partial, name=name)
    if check:
        report = validate(m).without("Nondeletion")
        bad = problems + report.violations
        if bad:
            raise InvalidTransducer(bad)
    return m


def load(path, check: bool = True) -> Mtt:
    return loads(Path(path).read_text(encoding="utf-8"), check)


def _ranked_str(alpha) -> str:
    return " ".join(f"{s}/{k}" for s, k in alpha.items())


def dumps(m: Mtt) -> str:
    """Canonical text; ``loads(dumps(m))`` rebuilds ``m``."""
    la = m.lookahead
    lines = []
    if m.name:
        lines.append(f"mtt {m.name}")
    lines.append(f"input: {_ranked_str(m.input_alphabet)}")
    lines.append(f"output: {_ranked_str(m.output_alphabet)}")
    lines.append("lookahead: " + " ".join(str(p) for p in la.states))
    if not la.is_trivial:
        for sym, k in la.alphabet.items():
            for ps in itertools.product(la.states, repeat=k):
                args = f"({', '.join(map(str, ps))})" if ps else ""
                lines.append(f"  {sym}{args} -> {la.transitions[(sym, ps)]}")
    lines.append(f"states: {_ranked_str(m.states)}")
    lines.append(f"initial: {m.initial}")
    if m.partial:
        lines.append("partial: " + " ".join(str(q) for q in m.states if q in m.partial))
    lines.append("rules:")
    for q, rank in m.states.items():
        for sym, k in m.input_alphabet.items():
            for ps in itertools.product(la.states, repeat=k):
                rhs = m.rules.get((q, sym, ps))
                if rhs is None:
                    continue
                xs = ", ".join(f"x{i}:{p}" for i, p in enumerate(ps, 1))
                head = f"  {q}, {sym}" + (f"({xs})" if k else "")
                if rank:
                    head += " (" + ", ".join(f"y{j}" for j in range(1, rank + 1)) + ")"
                lines.append(f"{head} -> {to_str(rhs)}")
    return "\n".join(lines) + "\n"


def dump(m: Mtt, path) -> None:
    Path(path).write_text(dumps(m), encoding="utf-8")
