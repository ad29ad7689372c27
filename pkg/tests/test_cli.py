import json
import subprocess
import sys

import pytest

from qtype.cli import main

from conftest import EXPECTED_EXIT, FIXTURES


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_clean_program_is_silent(tmp_path, capsys):
    code, out, _ = run_cli(capsys, write(tmp_path, "ok.q", "a: 1 + 2\n"))
    assert (code, out) == (0, "")


def test_symbol_operand_gives_one_error(tmp_path, capsys):
    code, out, _ = run_cli(capsys, write(tmp_path, "bad.q", "a: 1 + `s\n"))
    lines = out.splitlines()
    assert code == 1
    assert len(lines) == 1 and ": error: " in lines[0]


def test_machine_format_declaration_is_clean(tmp_path, capsys):
    path = write(tmp_path, "decl.q", "f: {[x] x>0} //$: int -> boolean\n")
    code, out, _ = run_cli(capsys, "--format", "machine", path)
    assert (code, out) == (0, "")


def test_machine_format_fields(tmp_path, capsys):
    path = write(tmp_path, "bad.q", "a: 1 + `s\n")
    _, out, _ = run_cli(capsys, "--format", "machine", path)
    obj = json.loads(out)
    assert list(obj) == ["file", "line", "col", "end_line", "end_col", "severity", "kind",
                         "node_id", "message", "justification"]
    assert obj["file"] == path and obj["kind"] == "inferred-conflict"


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_fixture_exit_codes(capsys, name):
    code, _, _ = run_cli(capsys, str(FIXTURES / f"{name}.q"))
    assert code == EXPECTED_EXIT[name]


def test_every_fixture_has_an_expected_exit():
    assert {p.stem for p in FIXTURES.glob("*.q")} == set(EXPECTED_EXIT)


def test_output_is_byte_identical_across_runs(capsys):
    paths = [str(p) for p in sorted(FIXTURES.glob("*.q"))]
    first = run_cli(capsys, "--types", *paths)
    second = run_cli(capsys, "--types", *paths)
    assert first == second


def test_multi_file_equals_single_runs(capsys):
    names = ["localize", "sum_ok", "decl_overlap", "unbalanced"]
    paths = [str(FIXTURES / f"{n}.q") for n in names]
    code, out, _ = run_cli(capsys, "--types", *paths)
    singles = [run_cli(capsys, "--types", p) for p in paths]
    assert out == "".join(s[1] for s in singles)
    assert code == 3  # syntax errors outrank type errors and warnings


def test_errors_outrank_warnings(capsys):
    paths = [str(FIXTURES / "decl_overlap.q"), str(FIXTURES / "localize.q")]
    assert run_cli(capsys, *paths)[0] == 1


def test_warnings_ok(capsys):
    assert run_cli(capsys, "--warnings-ok", str(FIXTURES / "decl_overlap.q"))[0] == 0


def test_missing_file_is_an_io_error(tmp_path, capsys):
    code, out, err = run_cli(capsys, str(tmp_path / "nope.q"))
    assert code == 4 and out == "" and "cannot read" in err


@pytest.mark.parametrize("argv", [[], ["--bogus", "x.q"], ["--format", "xml", "x.q"],
                                  ["--max-splits", "0", "x.q"]])
def test_usage_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 4 and err.startswith("qtype: ")


def test_bad_signature_file(tmp_path, capsys):
    sig = write(tmp_path, "bad.sig", "f int\n")
    code, _, err = run_cli(capsys, "--signatures", sig, str(FIXTURES / "sum_ok.q"))
    assert code == 4 and "bad.sig" in err


def test_signature_env_fallback(tmp_path, capsys, monkeypatch):
    sig = write(tmp_path, "mini.sig", "+ : tuple(A, B) -> C ext rel sum\n")
    monkeypatch.setenv("QTYPE_SIGNATURES", sig)
    assert run_cli(capsys, write(tmp_path, "ok.q", "a: 1 + 2\n"))[0] == 0
    code, out, _ = run_cli(capsys, write(tmp_path, "neg.q", "a: neg 1\n"))
    assert code == 0  # without a signature, neg is just an unknown global


def test_unknown_operator_is_a_usage_error(tmp_path, capsys):
    sig = write(tmp_path, "mini.sig", "neg : A -> A ext rel arith1\n")
    code, out, _ = run_cli(capsys, "--signatures", sig, write(tmp_path, "p.q", "a: 1 + 2\n"))
    assert code == 4 and "unknown-builtin" in out


def test_trace_output(tmp_path, capsys):
    path = write(tmp_path, "c.q", "c: 1\nc: c+1\n")
    _, out, _ = run_cli(capsys, "--trace", path)
    assert out.startswith("step 0: FIRED ")
    _, out, _ = run_cli(capsys, "--trace-json", path)
    events = [json.loads(line) for line in out.splitlines()]
    steps = [e["step"] for e in events]
    assert steps and all(a < b for a, b in zip(steps, steps[1:]))  # no-op firings are not traced


def test_type_listing(capsys):
    _, out, _ = run_cli(capsys, "--types", str(FIXTURES / "itemwise.q"))
    assert "variable r :: tuple(tuple(float, float), tuple(float, float))" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qtype", str(FIXTURES / "sum_symbol.q")],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and ": error: inferred-conflict: " in proc.stdout
