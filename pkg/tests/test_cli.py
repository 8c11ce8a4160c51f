import io
import json
import subprocess
import sys

import jsonschema
import pytest

from crystallo.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_USAGE, load_schema, run
from crystallo.constructions import builtin_algebra
from crystallo.specs import format_algebra

SCHEMA = load_schema()


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    assert code == EXIT_OK, err
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    return data


@pytest.fixture
def files(tmp_path):
    hz2 = tmp_path / "hZ2.alg"
    hz2.write_text(format_algebra(builtin_algebra("h(Z2)").renamed("hZ2"), "Hex3"))
    klein = tmp_path / "z2xz2.alg"
    klein.write_text(format_algebra(builtin_algebra("Z2*Z2").renamed("Z2xZ2"), "Grp"))
    custom = tmp_path / "custom.alg"
    custom.write_text(
        "variety Sl { op m/2; eq m(x, x) = x; eq m(x, y) = m(y, x); }\n"
        "algebra chain : Sl { size 2; m: [0, 0, 0, 1]; }\n"
    )
    broken = tmp_path / "broken.alg"
    broken.write_text("algebra z : Grp { size 2; mul: [0, 1, 1]; inv: [0, 1]; e = 0; }")
    return {"hz2": str(hz2), "klein": str(klein), "custom": str(custom), "broken": str(broken)}


def test_internal_on_file(files):
    data = call_json("internal", "--algebra", files["hz2"], "--structure", "abelian-group")
    assert data["count"] == 1 and data["command"] == "internal"


def test_laws_diamond(files):
    data = call_json("laws", "--algebra", files["klein"], "--law", "distributive")
    assert data["verdict"] == "FAILS"
    assert data["counterexample"]["T"] == [[0, 1], [2, 3]]


def test_report_small_sample_with_sweep():
    data = call_json("report", "--variety", "hex3", "--structure", "abelian-group", "--samples", "builtin:hex3-small")
    assert data["verdict"] == "CRYSTALLOGRAPHIC"
    names = [s["name"] for s in data["samples"]]
    assert "h(Z2)" in names and any(n.startswith("Hex3[2]") for n in names)


def test_report_without_sweep():
    data = call_json(
        "report", "--variety", "hex3", "--structure", "abelian-group", "--samples", "builtin:hex3-small", "--sweep", "0"
    )
    assert data["verdict"] == "INTENSIVELY"


def test_report_rejects_foreign_samples():
    code, _, err = call("report", "--variety", "hex3", "--structure", "group", "--samples", "builtin:groups")
    assert code == EXIT_INPUT and "signature" in err


def test_validate_and_check(files):
    data = call_json("validate", files["custom"])
    assert data["algebras"] == [{"name": "chain", "satisfies": True, "size": 2, "variety": "Sl"}]
    data = call_json("check", "--algebra", files["hz2"], "--variety", "builtin:Hex3")
    assert data["verdict"] == "SATISFIED"
    data = call_json("check", "--algebra", "builtin:Z3", "--variety", "AbGrp")
    assert data["verdict"] == "SATISFIED"


def test_file_variety_resolution(files):
    data = call_json("congruences", "--algebra", files["custom"])
    assert data["count"] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("congruences", "--algebra", "builtin:Klein"),
        ("shifting", "--algebra", "builtin:unary4"),
        ("chyper-span", "--left", "builtin:h(Z2)", "--right", "builtin:h(Z3)"),
        ("cooperator", "--algebra", "builtin:jt3", "--u", "0,1", "--v", "0,2"),
        ("graphs", "--algebra", "builtin:Z3"),
        ("graphs", "--algebra", "builtin:P3", "--relation", "0-1,1-2"),
        ("construct", "--functor", "h", "--group", "Z3"),
        ("construct", "--functor", "a", "--p", "5"),
        ("pad-chyper", "--times", "2"),
        ("models", "--variety", "Imp", "--size", "2", "--pin", "1=1"),
        ("internal", "--algebra", "builtin:D3", "--structure", "group", "--brute-force"),
    ],
)
def test_subcommands_validate_against_schema(argv):
    call_json(*argv)


def test_text_format():
    code, out, _ = call("shifting", "--algebra", "builtin:unary4", "--format", "text")
    assert code == EXIT_OK
    assert "verdict: FAILS" in out


def test_exit_codes(files):
    assert call()[0] == EXIT_USAGE
    assert call("frobnicate")[0] == EXIT_USAGE
    assert call("laws", "--algebra", "builtin:Z2")[0] == EXIT_USAGE
    assert call("models", "--variety", "Grp", "--size", "2", "--budget", "0")[0] == EXIT_USAGE
    assert call("congruences", "--algebra", files["broken"])[0] == EXIT_INPUT
    assert call("congruences", "--algebra", "/no/such/file")[0] == EXIT_INPUT
    assert call("congruences", "--algebra", "builtin:Nope")[0] == EXIT_INPUT
    assert call("models", "--variety", "Grp", "--size", "4", "--budget", "5")[0] == EXIT_BUDGET
    assert call("internal", "--algebra", "builtin:Klein", "--structure", "group", "--budget", "3")[0] == EXIT_BUDGET


def test_fails_verdicts_still_exit_zero(files):
    code, out, _ = call("laws", "--algebra", files["klein"], "--law", "distributive")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "FAILS"


def test_runs_are_byte_identical():
    argv = ("report", "--variety", "Grp", "--structure", "maltsev", "--samples", "builtin:groups", "--sweep", "0")
    assert call(*argv)[1] == call(*argv)[1]


def test_jobs_do_not_change_output():
    argv = ["report", "--variety", "hex3", "--structure", "subtraction", "--samples", "builtin:hex3-small"]
    assert call(*argv)[1] == call(*argv, "--jobs", "2")[1]


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "crystallo.cli", "congruences", "--algebra", "builtin:Z4"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["count"] == 3
