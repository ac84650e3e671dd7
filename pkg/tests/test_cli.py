import io
import json
import subprocess
import sys


from uaworkbench.cli import algebra_from_json, algebra_to_json, run
from uaworkbench.gallery import chain_heyting, lukasiewicz


def ua(*argv):
    out = io.StringIO()
    try:
        code, report = run(list(argv), stdout=out)
    except SystemExit as e:
        return e.code, None, ""
    return code, report, out.getvalue()


def test_dominion_expect_closed_fails_on_gadget():
    code, rep, _ = ua("dominion", "--class", "gallery:chain_heyting(5)", "--big", "gallery:power(chain_heyting(5),2)",
                      "--sub", "[[0,0],[1,2],[3,3],[4,4]]", "--expect-closed")
    assert code == 1
    assert [4, 3] in rep["witness"]["outside_sub"]


def test_dominion_without_flag_succeeds():
    code, rep, _ = ua("dominion", "--class", "gallery:chain_heyting(5)", "--big", "gallery:power(chain_heyting(5),2)",
                      "--sub", "[[0,0],[1,2],[3,3],[4,4]]")
    assert code == 0 and rep["verdict"] == "Proven"


def test_functional_constant_formula():
    code, rep, _ = ua("functional", "--class", "gallery:lukasiewicz(2)", "--formula", "2.y=1 & y*(1.y)=0")
    assert code == 0 and rep["context"]["inputs"] == []


def test_primal_refuted_by_subuniverse():
    code, rep, _ = ua("primal", "gallery:lukasiewicz(2)")
    assert code == 1
    # indices 0 and 2 are the values 0 and 1
    assert rep["witness"]["subuniverse"] == [0, 2]


def test_budget_exhaustion_exits_2():
    code, rep, _ = ua("term-search", "gallery:lukasiewicz_with_constant(2)", "--condition", "pixley",
                      "--budget", "steps=2000")
    assert code == 2 and rep["witness"]["exhausted"] == "steps"


def test_usage_and_input_errors(tmp_path):
    assert ua("nonsense")[0] == 3
    assert ua("repro", "nope")[0] == 3
    assert ua("primal", "x", "--budget", "bogus=1")[0] == 3
    assert ua("primal", str(tmp_path / "missing.json"))[0] == 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"size": 2, "operations": {"f": {"arity": 1, "table": [0, 2]}}}))
    assert ua("validate", str(bad))[0] == 4
    assert ua("eval", "gallery:d2_bdl", "--formula", "x =", "--assign", "x=0")[0] == 4


def test_algebra_file_round_trip(tmp_path):
    A = chain_heyting(4)
    p = tmp_path / "c4.json"
    p.write_text(json.dumps(algebra_to_json(A), sort_keys=True))
    B = algebra_from_json(json.loads(p.read_text()))
    assert B == A
    code, rep, _ = ua("membership", str(p), "--class", "gallery:chain_heyting(5)")
    assert code == 0


def test_json_without_signature_order_and_mv_notation(tmp_path):
    L = lukasiewicz(2)
    data = algebra_to_json(L)
    del data["signature"]
    p = tmp_path / "l2.json"
    p.write_text(json.dumps(data))
    code, rep, _ = ua("implicit-table", str(p), "--formula", "2.y = 1 & y*(1.y) = 0", "--inputs", "", "--out", "y")
    assert code == 0 and rep["witness"]["table"] == [[[], 1]]


def test_eval_and_term():
    code, rep, _ = ua("eval", "gallery:d2_bdl", "--formula", "meet(x,y) = 0", "--assign", "x=0,y=1")
    assert code == 0 and rep["witness"]["holds"] is True
    code, rep, _ = ua("eval", "gallery:d2_bdl", "--formula", "meet(x,y) = 1", "--assign", "x=0,y=1")
    assert code == 1
    code, rep, _ = ua("eval", "gallery:zmod_ring(5)", "--term", "x^2*y", "--assign", "x=2,y=3")
    assert rep["witness"]["value"] == 2


def test_other_commands():
    assert ua("conlat", "gallery:chain_heyting(3)")[1]["witness"]["size"] == 3
    assert ua("rfsi", "gallery:power(d2_bdl,2)", "--class", "gallery:d2_bdl")[0] == 1
    assert ua("ses", "--class", "gallery:d2_rcdl")[0] == 0
    code, rep, _ = ua("interpolate", "--class", "gallery:d2_boolean", "--formula", "gallery:complement")
    assert code == 0 and rep["witness"]["term"] == "neg(x)"
    code, rep, _ = ua("expand", "--class", "gallery:d2_bdl", "--define", "neg=gallery:complement")
    assert code == 0 and rep["witness"]["class"] == "Q(D2[neg])"
    code, rep, _ = ua("expand", "--class", "gallery:monoid_c(3)", "--define", "inv(x;y)=x*y = 1 & y*x = 1")
    assert code == 1 and rep["witness"]["undefined_at"] == [1]
    code, rep, _ = ua("beth-witness", "gallery:d2_bdl", "--define", "neg=gallery:complement")
    assert code == 0
    assert ua("zigzag", "gallery:zmod_group(2)", "--sub", "[0]", "--element", "1")[0] == 1
    assert ua("zigzag", "gallery:zmod_group(2)", "--sub", "[0, 1]", "--element", "1")[0] == 0
    code, rep, _ = ua("gallery")
    assert "chain_heyting" in rep["witness"]["algebras"]
    code, rep, _ = ua("gallery", "complement")
    assert rep["witness"]["inputs"] == ["x"]


def test_text_format():
    code, _, text = ua("primal", "gallery:d2_boolean", "--format", "text")
    assert code == 0 and text.startswith("verdict: Proven\n")


def test_reports_are_byte_stable_and_cache_agrees(tmp_path):
    args = ["repro", "finite-fields"]
    a = ua(*args)[2]
    b = ua(*args, "--workers", "3")[2]
    cold = ua(*args, "--cache-dir", str(tmp_path))[2]
    warm = ua(*args, "--cache-dir", str(tmp_path))[2]
    assert a == b == cold == warm
    assert list(tmp_path.rglob("*.json"))


def test_save_writes_report(tmp_path):
    out = tmp_path / "r.json"
    code, rep, text = ua("primal", "gallery:d2_boolean", "--save", str(out))
    assert json.loads(out.read_text()) == rep


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "uaworkbench.cli", "primal", "gallery:lukasiewicz(2)"],
                       capture_output=True, text=True)
    assert r.returncode == 1
    assert json.loads(r.stdout)["verdict"] == "Refuted"
