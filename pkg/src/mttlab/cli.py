"""``mttlab`` command line.

Exit codes: 0 when the command ran (the verdict is in the report), 1 for
usage errors, 2 when a transducer or input tree is invalid.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path

from . import __version__
from .errors import AlphabetMismatch, InvalidTransducer, MttError, NotNondeleting, TreeSyntaxError
from .fileformat import dump, dumps, load
from .lsoi import build_gadget, distinct_subtrees, profile, sampled_equivalence
from .mtt import Evaluator, format_key, reachable_calls, validate
from .nesting import decide_lhi, decide_lshi
from .normalize import normalize
from .pout import pout_finite
from .trees import Tree, parse_tree, to_str

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# input patterns


def expand_pattern(text: str, n: int | None = None) -> Tree:
    """Expand ``sym^K(inner)``; ``K`` is a number or ``N`` (bound to ``n``)."""
    out = _expand(text.strip(), n)
    return parse_tree(out)


def _expand(text: str, n) -> str:
    m = re.search(r"([A-Za-z0-9_'.\-]+)\^([0-9]+|N)\(", text)
    if not m:
        return text
    if m.group(2) == "N" and n is None:
        raise UsageError("pattern uses N but no --range was given")
    k = n if m.group(2) == "N" else int(m.group(2))
    depth, i = 1, m.end()
    while i < len(text) and depth:
        depth += {"(": 1, ")": -1}.get(text[i], 0)
        i += 1
    if depth:
        raise TreeSyntaxError("unbalanced parenthesis in pattern", 1, m.start() + 1)
    inner = _expand(text[m.end():i - 1], n)
    expanded = f"{m.group(1)}(" * k + inner + ")" * k
    return text[:m.start()] + expanded + _expand(text[i:], n)


def parse_range(text: str) -> list:
    m = re.fullmatch(r"\s*([0-9]+)\s*(?:\.\.\s*([0-9]+))?\s*", text)
    if not m:
        raise UsageError(f"bad range {text!r} (expected A..B)")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    return list(range(lo, hi + 1))


def input_trees(source: str, rng: str | None) -> list:
    path = Path(source)
    if path.is_file():
        lines = [l.strip() for l in path.read_text(encoding="utf-8").splitlines()]
        return [expand_pattern(l) for l in lines if l and not l.startswith("#")]
    if "N" in re.findall(r"\^(N)\(", source):
        return [expand_pattern(source, n) for n in parse_range(rng or "1..10")]
    return [expand_pattern(source)]


# --------------------------------------------------------------------------
# commands


def _violations(vs) -> list:
    return [{"kind": v.kind, "key": format_key(v.key) if v.key else None, "message": v.message}
            for v in vs]


def cmd_eval(args):
    m = load(args.file)
    t = expand_pattern(args.tree)
    out = Evaluator(m).apply(t)
    payload = {"input": to_str(t), "output": to_str(out), "size": out.size, "height": out.height}
    return payload, to_str(out)


def cmd_validate(args):
    m = load(args.file, check=False)
    report = validate(m)
    payload = {"ok": report.ok, "violations": _violations(report.violations)}
    text = "ok" if report.ok else "\n".join(str(v) for v in report.violations)
    return payload, text, (0 if report.ok else 2)


def cmd_normalize(args):
    m = load(args.file)
    nf = normalize(m, args.max_iters)
    text = dumps(nf.mtt)
    if args.output:
        dump(nf.mtt, args.output)
    payload = {
        "iterations": nf.iterations,
        "states": len(nf.mtt.states),
        "lookahead_states": len(nf.mtt.lookahead.states),
        "rules": len(nf.mtt.rules),
        "transducer": text,
    }
    return payload, text.rstrip("\n")


def cmd_pout(args):
    m = load(args.file)
    if args.state is not None:
        ranks = [args.param] if args.param else range(1, m.rank(args.state) + 1)
        las = [args.lookahead] if args.lookahead else [p for p in m.lookahead.states if (args.state, p) in m.alive]
        queries = [(args.state, j, p) for p in las for j in ranks]
    else:
        queries = [(q, j, p) for q, p in sorted(reachable_calls(m), key=lambda x: (str(x[0]), str(x[1])))
                   for j in range(1, m.rank(q) + 1)]
    entries = []
    lines = []
    for q, j, p in queries:
        r = pout_finite(m, q, j, p)
        e = {"state": str(q), "param": j, "lookahead": str(p), "status": r.status}
        if r.status == "Finite":
            e["forms"] = [to_str(t) for t in r.sorted_forms()]
        if r.witness is not None:
            e["witness"] = r.witness.describe()
        entries.append(e)
        detail = ", ".join(e.get("forms", [])) if r.status == "Finite" else e.get("witness", "")
        lines.append(f"pout(({q}, y{j}), {p}): {r.status}" + (f"  {detail}" if detail else ""))
    return {"entries": entries}, "\n".join(lines) or "no parameters"


def cmd_decide(args):
    m = load(args.file)
    fn = decide_lshi if args.property == "lshi" else decide_lhi
    report = fn(m, args.max_iters)
    payload = report.to_json()
    lines = [f"{report.property}: {'yes' if report.verdict else 'no'}"]
    if report.verdict:
        lines.append(f"nesting bound b = {report.bound}, rhs height c = {report.rhs_height}, "
                     f"growth bound b*c = {report.growth_bound}")
    elif report.loop is not None:
        lp = report.loop
        lines.append(f"{lp.kind} loop: context {to_str(lp.context)} after {to_str(lp.prefix)}, "
                     f"states {lp.states[0]}/{lp.states[1]}, params {lp.params}")
    lines.append(f"normal form after {report.iterations} round(s)")
    return payload, "\n".join(lines)


def cmd_gadget(args):
    m1, m2 = load(args.m1), load(args.m2)
    g = build_gadget(m1, m2)
    text = dumps(g)
    if args.output:
        dump(g, args.output)
    payload = {"states": len(g.states), "rules": len(g.rules), "output": args.output, "transducer": text}
    return payload, (f"wrote {args.output}" if args.output else text.rstrip("\n"))


MEASURES = {
    "lsoi": distinct_subtrees,
    "height": lambda t: t.height,
    "size": lambda t: t.size,
}


def cmd_profile(args):
    m = load(args.file)
    inputs = input_trees(args.inputs, args.range)
    pr = profile(m, inputs, MEASURES[args.measure])
    samples = [{"input": to_str(t), "input_size": n, "input_height": t.height, "value": c}
               for t, n, c in pr.samples]
    payload = {
        "measure": args.measure,
        "label": "profile",
        "samples": samples,
        "fitted_ratio": str(pr.fitted_ratio),
        "slope": pr.slope,
        "intercept": pr.intercept,
        "residual_ratio": pr.residual_ratio,
        "hint": pr.verdict_hint,
    }
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "input_size", "input_height", args.measure])
        for s in samples:
            w.writerow([s["input"], s["input_size"], s["input_height"], s["value"]])
        text = buf.getvalue().rstrip("\n")
    else:
        rows = [f"{s['input_size']:>6} {s['value']:>10}  {s['input']}" for s in samples]
        rows.append(f"profile hint: {pr.verdict_hint} (slope {pr.slope:.3f}, residual {pr.residual_ratio:.3%})")
        text = "\n".join(rows)
    return payload, text


def cmd_equiv(args):
    m1, m2 = load(args.m1), load(args.m2)
    s = sampled_equivalence(m1, m2, args.budget)
    payload = {"budget": args.budget, "counterexample": to_str(s) if s is not None else None}
    if s is None:
        return payload, f"no difference on inputs of size <= {args.budget}"
    o1, o2 = m1(s), m2(s)
    payload["outputs"] = [to_str(o1), to_str(o2)]
    return payload, f"differ on {to_str(s)}: {to_str(o1)} vs {to_str(o2)}"


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mttlab", description="Macro tree transducers with look-ahead: evaluation, "
                                           "normal form, and linear growth analyses.")
    p.add_argument("--version", action="version", version=f"mttlab {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="translate one input tree")
    s.add_argument("file")
    s.add_argument("tree", help="input tree, e.g. 'a(a(e))' or 'a^5(e)'")
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("validate", parents=[common], help="check totality, ranks and nondeletion")
    s.add_argument("file")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("normalize", parents=[common], help="compute the depth-proper normal form")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.add_argument("--max-iters", type=int, default=32)
    s.set_defaults(run=cmd_normalize)

    s = sub.add_parser("pout", parents=[common], help="finiteness and forms of parameter outputs")
    s.add_argument("file")
    s.add_argument("--state")
    s.add_argument("--param", type=int)
    s.add_argument("--lookahead")
    s.set_defaults(run=cmd_pout)

    s = sub.add_parser("decide", parents=[common], help="decide LSHI or LHI")
    s.add_argument("property", choices=["lshi", "lhi"])
    s.add_argument("file")
    s.add_argument("--max-iters", type=int, default=32)
    s.set_defaults(run=cmd_decide)

    s = sub.add_parser("gadget", parents=[common], help="build the distinct-subtree gadget of two transducers")
    s.add_argument("m1")
    s.add_argument("m2")
    s.add_argument("-o", "--output")
    s.set_defaults(run=cmd_gadget)

    s = sub.add_parser("profile", parents=[common], help="measure output growth on inputs")
    s.add_argument("measure", choices=sorted(MEASURES))
    s.add_argument("file")
    s.add_argument("--inputs", required=True, help="pattern such as 'a^N(e)' or a file of trees")
    s.add_argument("--range", help="values of N, e.g. 1..10 (default)")
    s.add_argument("--csv", action="store_true")
    s.set_defaults(run=cmd_profile)

    s = sub.add_parser("equiv-sample", parents=[common], help="search a small input where two transducers differ")
    s.add_argument("m1")
    s.add_argument("m2")
    s.add_argument("--budget", type=int, default=6)
    s.set_defaults(run=cmd_equiv)
    return p


def _error_payload(exc) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, InvalidTransducer):
        err["violations"] = _violations(exc.violations)
    return err


def run_command(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_usage().strip())
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    as_json = getattr(args, "json", False)
    try:
        res = args.run(args)
        code = res[2] if len(res) > 2 else 0
        payload, text = res[0], res[1]
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        payload, text, code = {"error": _error_payload(exc)}, str(exc), 2
    except (InvalidTransducer, TreeSyntaxError, NotNondeleting, AlphabetMismatch, MttError) as exc:
        lines = [f"{type(exc).__name__}: {exc}"]
        if isinstance(exc, InvalidTransducer):
            lines = [f"{type(exc).__name__}:"] + [f"  {v}" for v in exc.violations]
        payload, text, code = {"error": _error_payload(exc)}, "\n".join(lines), 2
    if as_json:
        body = {"command": args.command, "schema_version": SCHEMA_VERSION, **payload}
        json.dump(body, out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        print(text, file=out if code == 0 else (out if "error" not in payload else sys.stderr))
    return code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
