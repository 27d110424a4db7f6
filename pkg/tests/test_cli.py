from __future__ import annotations

import json
import random
import subprocess
import sys

import pytest

from conftest import FIXTURES, SIG1, SIG2, rand_spec
from dmpva.bracket import BracketSpec
from dmpva.cli import SpecError, main, parse_spec, report_from_json, report_from_text, run, serialize_spec
from dmpva.ncalg import Signature

F = str(FIXTURES)


def doc(**kw) -> str:
    base = {"algebra": {"variables": ["u"], "order": "infinite"}, "bracket": {}}
    base.update(kw)
    return json.dumps(base)


# -- spec documents ---------------------------------------------------------

def test_syntax_errors_carry_line_and_column():
    with pytest.raises(SpecError) as e:
        parse_spec('{\n  "algebra": {,\n}')
    assert e.value.line == 2 and e.value.column == 15
    assert "line 2, column 15" in str(e.value)


@pytest.mark.parametrize("text,path", [
    (doc(extra=1), "$.extra"),
    (doc(algebra={"variables": []}), "$.algebra.variables"),
    (doc(algebra={"variables": ["u"], "order": 0}), "$.algebra.order"),
    (doc(bracket={"u,w": []}), '$.bracket["u,w"]'),
    (doc(bracket={"u,u": [{"lambda": 0, "tensor": [["x", [], []]]}]}), '$.bracket["u,u"][0].tensor[0][0]'),
    (doc(bracket={"u,u": [{"lambda": 0, "tensor": [["1", [["w", 0]], []]]}]}), '$.bracket["u,u"][0].tensor[0][1][0][0]'),
    (doc(bracket={"u,u": [{"lambda": 0}]}), '$.bracket["u,u"][0]'),
    ('[1, 2]', "$"),
])
def test_structural_errors_carry_a_path(text, path):
    with pytest.raises(SpecError) as e:
        parse_spec(text)
    assert e.value.path == path, str(e.value)


def test_finite_order_ranges_are_enforced():
    bad = doc(algebra={"variables": ["u"], "order": 3}, bracket={"u,u": [{"lambda": 3, "tensor": [["1", [], []]]}]})
    with pytest.raises(SpecError):
        parse_spec(bad)


def test_rational_section_needs_infinite_order():
    with pytest.raises(SpecError):
        parse_spec(doc(algebra={"variables": ["u"], "order": 4}, rational={}))


def test_non_utf8_is_rejected():
    with pytest.raises(SpecError):
        parse_spec(b"\xff\xfe")


def test_empty_bracket_is_zero_spec():
    spec = parse_spec(doc())
    assert spec == BracketSpec.zero(SIG1)


@pytest.mark.parametrize("sig", [SIG1, SIG2, Signature(("u", "v"), 5)])
def test_round_trip(sig):
    rng = random.Random(len(sig.names) + (sig.order or 0))
    for _ in range(50):
        spec = rand_spec(rng, sig)
        text = serialize_spec(spec)
        back = parse_spec(text)
        assert back == spec
        assert serialize_spec(back) == text


def test_rational_round_trip():
    from conftest import fixture_spec
    from dmpva.rational import symbols_equal

    for name in ("rational_quadratic.json", "nib_m1_half_k1_p2.json"):
        spec = fixture_spec(name)
        back = parse_spec(serialize_spec(spec))
        assert serialize_spec(back) == serialize_spec(spec)
        assert all(symbols_equal(back.pairs[k], spec.pairs[k], 6) for k in spec.pairs)


# -- commands ----------------------------------------------------------------

def test_eval_example():
    code, text = run(["eval", f"{F}/free_commutator.json", "--left", "u", "--right", "u^2", "--format", "json"])
    assert code == 0
    lines = json.loads(text)["sections"][0]["lines"]
    assert lines == ["1: -(1 ⊗ u^2) + (u^2 ⊗ 1)"]


def test_flow_example():
    code, text = run(["flow", f"{F}/simple_pair.json", "--hamiltonian", "1/3*u^3"])
    assert code == 0
    assert "du/dt = 0" in text and "dv/dt = u^2" in text


def test_functional_bracket_example():
    code, text = run(["functional", "bracket", f"{F}/simple_pair.json", "--f", "u^2", "--g", "v"])
    assert code == 0 and "∫(2*u)" in text


def test_exit_codes(capsys):
    assert main(["check", f"{F}/quartic_pair_r1_a3.json"]) == 0
    assert main(["check", f"{F}/not_jacobi_a1_b2_r0.json"]) == 1
    assert main(["rational", "nib", "--alpha", "1", "--beta", "1", "--k", "1", "--p", "2", "--window=-2:2"]) == 1
    assert main(["check", f"{F}/does_not_exist.json"]) == 2
    assert main(["eval", f"{F}/simple_pair.json", "--left", "u+", "--right", "v"]) == 2
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        run(["check", f"{F}/simple_pair.json", "--threads", "0"])
    assert e.value.code == 2


SMOKE = [
    ["check", f"{F}/volterra_square.json", "--jacobi"],
    ["check", f"{F}/canonical_pair.json", "--skew"],
    ["check", f"{F}/cyclic_order5.json"],
    ["eval", f"{F}/cyclic_order5.json", "--left", "u[4]", "--right", "u"],
    ["triple", f"{F}/simple_pair.json", "--a", "u", "--b", "v", "--c", "u"],
    ["flow", f"{F}/quadratic_pair_r1_a3.json", "--hamiltonian", "u^2"],
    ["rep", f"{F}/volterra_square.json", "--n", "1"],
    ["classify-r1", f"{F}/volterra_square.json"],
    ["classify-r2", f"{F}/quartic_pair_r1_a3.json"],
    ["rational", "iota", "--function", "(1+z)/(1-z)", "--window=-3:3", "--direction", "-"],
    ["rational", "nib", "--alpha", "-1", "--beta", "1/2", "--k", "1", "--p", "2", "--window=-3:3"],
    ["rational", "check", f"{F}/rational_quadratic.json", "--window=-2:2"],
    ["functional", "canonicalize", "--vars", "u,v", "--f", "u*v-v*u+u[2]"],
    ["varcomplex", "delta", "--f", "u*u[1]"],
    ["varcomplex", "delta", "--degree", "1", "--f", "u[1]"],
    ["varcomplex", "frechet", "--f", "u[1]+u[-1]"],
]


@pytest.mark.parametrize("argv", SMOKE, ids=lambda a: " ".join(a[:2]))
def test_text_and_json_carry_the_same_report(argv):
    code_t, text = run(argv)
    code_j, js = run(argv + ["--format", "json"])
    assert code_t == code_j == 0
    assert report_from_text(text).to_dict() == report_from_json(js).to_dict()
    assert report_from_text(text).to_text() == text


def test_rational_check_reports_both_skew_readings():
    code, text = run(["check", f"{F}/rational_constant.json", "--window=-3:3"])
    assert code == 0
    assert "PASS skew (rational)" in text
    assert "skew (bilateral series, informational):\n  fails\n  witness" in text
    code, text = run(["rational", "check", f"{F}/rational_quadratic.json", "--window=-2:2", "--format", "json"])
    assert code == 0 and json.loads(text)["status"] == "PASS"


def test_threads_do_not_change_output():
    argv = ["check", f"{F}/not_jacobi_a2_b1_r3.json", "--format", "json"]
    assert run(argv + ["--threads", "1"]) == run(argv + ["--threads", "4"])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "dmpva", "check", f"{F}/canonical_pair.json"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.endswith("status: PASS\n")
