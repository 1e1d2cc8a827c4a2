from __future__ import annotations

import subprocess
import sys

import pytest

from conftest import NOTATION, PROGRAMS, RULES
from ucdf.cli import BAD_INPUT, FOUND, OK, USAGE, main


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_clean(capsys):
    assert cli(capsys, "check", RULES / "R-CTL-01.good.ucdf") == (OK, "", "")


def test_check_violation(capsys):
    code, out, _ = cli(capsys, "check", RULES / "R-CTL-01.bad.ucdf")
    assert code == FOUND
    (line,) = out.splitlines()
    assert line.startswith("R-CTL-01 ")


def test_conform_callback(capsys):
    code, out, _ = cli(capsys, "conform", PROGRAMS[0].parent / "callback.fc")
    assert (code, out) == (OK, "")


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check"],
    ["check", "x.ucdf", "--bogus"],
    ["render", "x.ucdf", "--format", "png"],
    ["extract", "x.fc", "--alias-threshold", "1"],
    ["compact", "x.ucdf"],
])
def test_usage_errors(capsys, argv):
    code, _, err = cli(capsys, *argv)
    assert code == USAGE
    assert "usage error" in err


def test_bad_input(capsys, tmp_path):
    bad = tmp_path / "bad.ucdf"
    bad.write_text("process A\nA w> nowhere\n", encoding="utf-8")
    assert cli(capsys, "check", bad)[0] == BAD_INPUT
    assert cli(capsys, "check", tmp_path / "missing.ucdf")[0] == BAD_INPUT
    prog = tmp_path / "bad.fc"
    prog.write_text("void main() { x = 1; }\n", encoding="utf-8")
    code, _, err = cli(capsys, "extract", prog)
    assert code == BAD_INPUT and "undeclared" in err
    assert cli(capsys, "extract", PROGRAMS[0], "--entry", "nope")[0] == BAD_INPUT


def test_runtime_fault_is_bad_input(capsys, tmp_path):
    prog = tmp_path / "throw.fc"
    prog.write_text("void main() { throw 1; }\n", encoding="utf-8")
    assert cli(capsys, "trace", prog)[0] == BAD_INPUT


def test_bad_style_file(capsys, tmp_path, monkeypatch):
    style = tmp_path / "style.txt"
    style.write_text("node.process.shape = blob\n", encoding="utf-8")
    monkeypatch.setenv("UCDF_STYLE", str(style))
    assert cli(capsys, "render", NOTATION[0])[0] == BAD_INPUT


def test_style_override(capsys, tmp_path, monkeypatch):
    style = tmp_path / "style.txt"
    style.write_text("node.process.shape = ellipse\n", encoding="utf-8")
    monkeypatch.setenv("UCDF_STYLE", str(style))
    code, out, _ = cli(capsys, "render", NOTATION[0].parent / "update.ucdf")
    assert code == OK and 'shape="ellipse"' in out and 'shape="box"' not in out


def test_render_refuses_then_forces(capsys):
    bad = RULES / "R-CTL-01.bad.ucdf"
    code, out, err = cli(capsys, "render", bad)
    assert code == FOUND and out == "" and "R-CTL-01" in err
    code, out, _ = cli(capsys, "render", bad, "--force", "--format", "svg")
    assert code == OK and out.startswith("<svg")


def test_fmt_in_place_is_idempotent(capsys, tmp_path):
    f = tmp_path / "messy.ucdf"
    f.write_text("process B\nholder static x\nx r> B\nB w> x\n", encoding="utf-8")
    before = cli(capsys, "render", f)[1]
    assert cli(capsys, "fmt", "-i", f)[0] == OK
    once = f.read_text(encoding="utf-8")
    assert cli(capsys, "fmt", f)[1] == once
    assert cli(capsys, "render", f)[1] == before


def test_extract_trace_compact_files(capsys, tmp_path):
    src = PROGRAMS[0].parent / "return_value.fc"
    out = tmp_path / "rv.ucdf"
    assert cli(capsys, "extract", src, "--granularity", "block", "-o", out)[0] == OK
    assert cli(capsys, "check", out) == (OK, "", "")
    tr = tmp_path / "rv.trace"
    assert cli(capsys, "trace", src, "-o", tr)[0] == OK
    assert tr.read_text(encoding="utf-8").startswith("# symtab ")
    small = tmp_path / "small.ucdf"
    ident = next(line.split()[1] for line in out.read_text(encoding="utf-8").splitlines()
                 if line.startswith("process ") and "functionA" in line)
    assert cli(capsys, "compact", out, "--process", ident, "-o", small)[0] == OK
    assert cli(capsys, "check", small)[0] == OK
    assert cli(capsys, "compact", out, "--process", "nope")[0] == BAD_INPUT


def test_unresolved_indirect_call_warns(capsys, tmp_path):
    prog = tmp_path / "amb.fc"
    prog.write_text("void a(int x) { }\nvoid b(int x) { }\n"
                    "void main() { fn(int) fp; fp = a; fp = b; (*fp)(1); }\n", encoding="utf-8")
    code, _, err = cli(capsys, "extract", prog)
    assert code == OK and "warning" in err


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "ucdf.cli", "check", str(RULES / "R-CTL-01.bad.ucdf")],
                       capture_output=True, text=True)
    assert r.returncode == FOUND and r.stdout.startswith("R-CTL-01 ")
