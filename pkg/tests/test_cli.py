import json
import subprocess
import sys
from pathlib import Path

import pytest

from formaldisc import ParseError, UnknownTest, ValidationError
from formaldisc.cli import main
from formaldisc import suite
from formaldisc.suite import (
    MUTANTS,
    REGISTRY,
    SuiteSpec,
    VerificationReport,
    emit_report,
    parse_spec,
    run_suite,
    serialize_spec,
)

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_SPEC = ROOT / "specs" / "default_suite.json"
GOLDEN = ROOT / "specs" / "default_suite.golden.json"
MINIMAL = '{"truncation_order": 8, "grade_cutoff": 12, "seed": 42, "tests": ["group_law"]}'


def write(tmp_path, text, name="spec.json"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# -- parsing ------------------------------------------------------------------

def test_minimal_spec():
    spec = parse_spec(MINIMAL)
    assert spec == SuiteSpec(8, 12, 42, ("group_law",))


def test_zero_linear_coefficient_is_rejected():
    bad = json.dumps({"tests": [], "coordinate_changes": [
        {"coefficients": [[2, "1/1"]], "truncation_order": 8}]})
    with pytest.raises(ValidationError, match="coordinate_changes"):
        parse_spec(bad)


@pytest.mark.parametrize("data, fragment", [
    ({"tests": ["no_such_test"]}, "unknown test"),
    ({"seed": -1}, "seed"),
    ({"seed": 2 ** 64}, "seed"),
    ({"truncation_order": "8"}, "truncation_order"),
    ({"colour": 1}, "unknown field"),
    ({"tests": ["shuffle", "shuffle"]}, "duplicates"),
])
def test_validation_errors(data, fragment):
    with pytest.raises(ValidationError, match=fragment):
        parse_spec(json.dumps(data))


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_spec('{\n  "seed": 42,\n  "tests": [,]\n}')
    assert (info.value.line, info.value.column) == (3, 13)


def test_default_spec_round_trips():
    text = DEFAULT_SPEC.read_text()
    assert serialize_spec(parse_spec(str(DEFAULT_SPEC))) == text
    assert set(parse_spec(text).tests) == set(REGISTRY) | set(MUTANTS)


# -- running and reporting ------------------------------------------------------

def test_unknown_test_at_run_time():
    with pytest.raises(UnknownTest):
        run_suite(SuiteSpec(tests=("bogus",)))


def test_empty_suite():
    report = run_suite(SuiteSpec())
    assert report.ok
    data = json.loads(emit_report(report))
    assert data["tests"] == [] and set(data) == {"tests", "meta"}
    assert data["meta"]["seed"] == 42


def test_negative_controls_pass_by_failing():
    report = run_suite(SuiteSpec(tests=("shuffle", "shuffle:mutant", "pole_bounds:mutant")))
    assert report.ok
    mutant = report.record("shuffle:mutant")
    assert mutant.status == "pass" and mutant.expected_failure and mutant.first_counterexample


def test_text_table_has_one_row_per_record():
    report = VerificationReport([suite.TestRecord("group_law", "pass", 100)], {"seed": 7})
    lines = emit_report(report, "text").decode().splitlines()
    assert len(lines) == 3
    assert lines[1].split() == ["group_law", "pass", "100"]
    assert lines[2].startswith("OK: 1/1 passed")


def test_json_is_canonical():
    report = run_suite(parse_spec(MINIMAL))
    raw = emit_report(report)
    assert raw == (json.dumps(json.loads(raw), sort_keys=True, indent=2) + "\n").encode()
    assert b"wall_time" not in raw
    assert b"wall_time" in emit_report(report, timings=True)


# -- command line -----------------------------------------------------------------

def test_verify_exit_codes(tmp_path, capsys):
    assert main(["verify", write(tmp_path, MINIMAL)]) == 0
    assert json.loads(capsys.readouterr().out)["tests"][0]["status"] == "pass"
    assert main(["verify", write(tmp_path, "{oops", "bad.json")]) == 2
    assert "(line 1, column 2)" in capsys.readouterr().err
    assert main(["verify", write(tmp_path, '{"tests": ["nope"]}', "unknown.json")]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["verify"])
    assert info.value.code == 2


def test_verify_reports_failures(tmp_path, monkeypatch, capsys):
    def broken(spec, rng):
        from formaldisc.report import CheckReport
        return CheckReport("group_law", False, 1, {"trial": 0})

    monkeypatch.setitem(suite.REGISTRY, "group_law", broken)
    assert main(["verify", write(tmp_path, MINIMAL), "--format", "text"]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_seed_environment_override(tmp_path, monkeypatch, capsys):
    path = write(tmp_path, MINIMAL)
    monkeypatch.setenv("FORMALDISC_SEED", "7")
    assert main(["verify", path]) == 0
    assert json.loads(capsys.readouterr().out)["meta"]["seed"] == 7
    monkeypatch.setenv("FORMALDISC_SEED", "seven")
    assert main(["verify", path]) == 2


def test_out_file(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", write(tmp_path, MINIMAL), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["meta"]["version"]


def test_series_commands(capsys):
    assert main(["invert", "--series", '{"coefficients": [[1, "1/1"], [2, "1/1"]], "truncation_order": 6}']) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["coefficients"] == [[1, "1/1"], [2, "-1/1"], [3, "2/1"], [4, "-5/1"], [5, "14/1"]]
    assert main(["exp", "--derivation", '{"coefficients": [[2, "-1/1"]], "truncation_order": 5}']) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["coefficients"] == [[1, "1/1"], [2, "-1/1"], [3, "1/1"], [4, "-1/1"]]
    assert main(["compose", "--outer", '{"coefficients": [[1, "1/1"], [2, "1/1"]], "truncation_order": 8}',
                 "--inner", '{"coefficients": [[1, "2/1"]], "truncation_order": 8}']) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["coefficients"] == [[1, "2/1"], [2, "4/1"]]
    assert main(["invert", "--series", '{"coefficients": [[2, "1/1"]], "truncation_order": 6}']) == 2
    assert main(["invert", "--series", "[1,"]) == 2


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "formaldisc", "invert", "--series",
                           '{"coefficients": [[1, "2/1"]], "truncation_order": 4}'],
                          capture_output=True, text=True, check=True)
    assert json.loads(done.stdout)["coefficients"] == [[1, "1/2"]]


def test_default_suite_matches_golden(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", str(DEFAULT_SPEC), "--out", str(out)]) == 0
    assert out.read_bytes() == GOLDEN.read_bytes()
