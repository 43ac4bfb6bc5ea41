import io
import json
from pathlib import Path

import jsonschema
import pytest

from mttlab.cli import expand_pattern, parse_range, run_command
from mttlab.fileformat import load
from mttlab.lsoi import build_gadget, profile
from mttlab.nesting import decide_lhi, decide_lshi
from mttlab.normalize import normalize
from mttlab.pout import pout_finite
from mttlab.trees import parse_tree as T

DATA = Path(__file__).resolve().parents[1] / "src" / "mttlab" / "data"
SCHEMA = json.loads((DATA / "report.schema.json").read_text())


def run(*argv):
    buf = io.StringIO()
    code = run_command([str(a) for a in argv], buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, text = run(*argv, "--json")
    payload = json.loads(text)
    jsonschema.validate(payload, SCHEMA)
    return code, payload


def f(name):
    return DATA / f"{name}.mtt"


def test_patterns():
    assert expand_pattern("a^3(e)") is T("a(a(a(e)))")
    assert expand_pattern("s(a^2(e), e)") is T("s(a(a(e)), e)")
    assert expand_pattern("a^N(e)", 2) is T("a(a(e))")
    assert parse_range("2..4") == [2, 3, 4]


def test_eval_revdewey():
    code, text = run("eval", f("REVDEWEY"), "a(a(e))")
    assert code == 0
    assert text.strip() == "f(f(1(1(e)), 2(1(e))), f(1(2(e)), 2(2(e))))"
    code, payload = run_json("eval", f("NEST2"), "a^3(e)")
    assert payload["height"] == 5


def test_validate_exit_codes():
    assert run("validate", f("IDENT"))[0] == 0
    code, payload = run_json("validate", DATA / "broken.mtt")
    assert code == 2 and not payload["ok"]
    assert {v["kind"] for v in payload["violations"]} == {"Totality", "Rank"}


def test_invalid_file_is_exit_2():
    code, payload = run_json("decide", "lshi", DATA / "broken.mtt")
    assert code == 2 and payload["error"]["type"] == "InvalidTransducer"
    code, payload = run_json("eval", f("NEST2"), "a(")
    assert code == 2 and payload["error"]["type"] == "TreeSyntaxError"
    code, _ = run_json("eval", DATA / "missing.mtt", "e")
    assert code == 2


def test_usage_is_exit_1():
    assert run()[0] == 1
    assert run("decide", "xyz", f("NEST2"))[0] == 1
    assert run("frobnicate")[0] == 1


def test_decide_nest2():
    code, payload = run_json("decide", "lshi", f("NEST2"))
    assert code == 0 and payload["verdict"] is False and payload["loop"]["kind"] == "Nesting"
    code, payload = run_json("decide", "lhi", f("MLNEST"))
    assert payload["verdict"] is False and payload["loop"]["kind"] == "MLNesting"


@pytest.mark.parametrize("name", ["IDENT", "DOUBLE", "REVDEWEY", "IMPROP", "NEST2", "MLNEST"])
def test_decide_is_thin_wrapper(name):
    m = load(f(name))
    for prop, fn in (("lshi", decide_lshi), ("lhi", decide_lhi)):
        _, payload = run_json("decide", prop, f(name))
        direct = fn(m).to_json()
        for key in ("verdict", "bound", "loop", "iterations", "rhs_height"):
            assert payload.get(key) == direct.get(key)


def test_pout_and_normalize(tmp_path):
    code, payload = run_json("pout", f("IMPROP"), "--state", "q", "--param", "1", "--lookahead", "p")
    assert payload["entries"] == [{"state": "q", "param": 1, "lookahead": "p", "status": "Finite",
                                   "forms": ["y1", "h($, y1)"]}]
    assert pout_finite(load(f("IMPROP")), "q", 1, "p").status == "Finite"
    _, payload = run_json("pout", f("NEST2"))
    assert payload["entries"][0]["status"] == "Infinite" and "witness" in payload["entries"][0]
    out = tmp_path / "nf.mtt"
    code, payload = run_json("normalize", f("IMPROP"), "-o", out)
    assert code == 0 and payload["iterations"] == normalize(load(f("IMPROP"))).iterations
    assert run("decide", "lshi", out)[0] == 0


def test_gadget_profile_equiv(tmp_path):
    out = tmp_path / "g.mtt"
    code, _ = run_json("gadget", f("CONST_C"), f("CONST_D"), "-o", out)
    assert code == 0
    g = load(out)
    direct = build_gadget(load(f("CONST_C")), load(f("CONST_D")))
    assert set(g.rules) == set(direct.rules)
    code, payload = run_json("profile", "lsoi", out, "--inputs", "a^N(e)", "--range", "2..11")
    assert payload["label"] == "profile" and payload["hint"] == "SuperLinear"
    prof = profile(direct, [expand_pattern("a^N(e)", n) for n in range(2, 12)])
    assert [s["value"] for s in payload["samples"]] == [c for _, _, c in prof.samples]
    code, text = run("profile", "height", f("NEST2"), "--inputs", "a^N(e)", "--range", "1..3", "--csv")
    assert text.splitlines() == ["input,input_size,input_height,height",
                                 "a(e),2,2,2", "a(a(e)),3,3,3", "a(a(a(e))),4,4,5"]
    code, payload = run_json("equiv-sample", f("CONST_C"), f("CONST_D"))
    assert payload["counterexample"] == "e"
    code, payload = run_json("equiv-sample", f("IDENT"), f("IDENT"))
    assert payload["counterexample"] is None


def test_profile_inputs_from_file(tmp_path):
    src = tmp_path / "inputs.txt"
    src.write_text("f(a, a)\n\nf(a, f(a, a))\n")
    code, payload = run_json("profile", "size", f("IDENT"), "--inputs", src)
    assert [s["value"] for s in payload["samples"]] == [3, 5]
