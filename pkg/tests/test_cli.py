import csv
import math
import subprocess
import sys

import pytest

from singmin.cli import build_parser, execute, main

FLAGS = {
    ("profile", "catenary"): ["--alpha", "--z0", "--xmax", "--tol", "--out"],
    ("profile", "winglike"): ["--alpha", "--lambda", "--c"],
    ("solve", "graph"): ["--alpha", "--R", "--c", "--grid", "--obj", "--verbose"],
    ("mesh", "revolve"): ["--alpha", "--z0", "--r", "--grid", "--obj"],
    ("verify", "height"): ["--alpha", "--z0", "--r"],
    ("threshold", "d0"): ["--alpha", "--R", "--c", "--lambda"],
}


def run(*argv):
    return execute(list(argv))


def test_profile_catenary_csv(tmp_path):
    out = tmp_path / "f.csv"
    code, _ = run("profile", "catenary", "--alpha", "1", "--z0", "1", "--xmax", "3", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "f", "fp"]
    row = next(r for r in rows[1:] if float(r[0]) == 1.0)
    assert abs(float(row[1]) - 1.5430806) < 1e-7
    assert abs(float(row[1]) - math.cosh(1.0)) < 1e-8


def test_threshold_h0_prints_value():
    code, text = run("threshold", "h0", "--m", "2", "--alpha", "1")
    assert code == 0
    assert abs(float(text.splitlines()[0].split("=")[1]) - 1.50880) <= 1e-3


def test_verify_height_passes():
    code, text = run("verify", "height", "--alpha", "1", "--z0", "1", "--r", "2")
    assert code == 0 and "passed=true" in text


def test_failed_bound_exit_code():
    code, text = run("verify", "area-lower", "--grid", "32", "--h", "5")
    assert code == 4 and "passed=false" in text


@pytest.mark.parametrize("argv", [
    ["profile", "catenary", "--bogus", "1"],
    ["profile", "catenary", "--alpha", "0"],
    ["profile", "catenary", "--z0", "-1"],
    ["solve", "graph", "--grid", "8"],
    ["verify", "area-upper", "--alpha", "0.5"],
    ["threshold", "h0", "--m", "abc"],
    ["nothing"],
    [],
])
def test_invalid_parameters_exit_2(argv):
    assert execute(argv)[0] == 2


def test_numerical_failure_exit_3():
    code, text = run("solve", "graph", "--alpha", "0.5", "--R", "3", "--c", "1", "--grid", "16")
    assert code == 3 and "numerical failure" in text


def test_main_returns_code(capsys):
    assert main(["threshold", "h0", "--m", "1", "--alpha", "0.5"]) == 0
    assert capsys.readouterr().out.startswith("h0=")


@pytest.mark.parametrize("cmd", list(FLAGS))
def test_help_lists_flags_with_defaults(cmd, capsys):
    assert execute([*cmd, "--help"])[0] == 0
    out = capsys.readouterr().out
    for flag in FLAGS[cmd]:
        assert flag in out
    assert out.count("(default:") >= len(FLAGS[cmd])


def test_every_subcommand_documents_defaults():
    top = build_parser()
    groups = [a for a in top._actions if a.__class__.__name__ == "_SubParsersAction"][0]
    for name, parser in groups.choices.items():
        subs = [a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction"]
        leaves = subs[0].choices.values() if subs else [parser]
        for leaf in leaves:
            for act in leaf._actions:
                if act.option_strings and act.dest != "help":
                    assert "(default:" in act.help, (name, act.dest)


def test_solve_and_mesh_outputs(tmp_path):
    code, text = run("solve", "graph", "--grid", "32", "--out", str(tmp_path / "u.csv"),
                     "--obj", str(tmp_path / "u.obj"))
    assert code == 0 and "newton_iters=" in text
    assert (tmp_path / "u.csv").read_text().startswith("x,y,u\n")
    assert (tmp_path / "u.obj").read_text().startswith("v ")
    code, _ = run("mesh", "revolve", "--grid", "16,8", "--obj", str(tmp_path / "r.obj"),
                  "--out", str(tmp_path / "h.csv"))
    assert code == 0
    assert (tmp_path / "h.csv").read_text().startswith("vertex_index,value\n")
    assert run("mesh", "extrude", "--alpha", "2", "--xmax", "0.5")[0] == 0
    assert run("mesh", "extrude", "--alpha", "2", "--xmax", "5")[0] == 2


@pytest.mark.parametrize("kind", ["area-upper", "area-lower", "graph-area", "flux", "extrema"])
def test_verify_kinds_pass(kind, tmp_path):
    argv = ["verify", kind, "--out", str(tmp_path / "r.csv")]
    if kind in ("area-lower", "graph-area"):
        argv += ["--grid", "32"]
    if kind == "flux":
        argv += ["--grid", "128,32"]
    code, text = run(*argv)
    assert code == 0, text
    assert (tmp_path / "r.csv").read_text().startswith("name,lhs,rhs,margin,passed")


def test_winglike_and_d0(tmp_path):
    assert run("profile", "winglike", "--out", str(tmp_path / "w.csv"))[0] == 0
    code, text = run("threshold", "d0", "--lambda", "0.5,1,2", "--out", str(tmp_path / "d.csv"))
    assert code == 0 and text.startswith("d0=")
    assert run("threshold", "d0", "--lambda", "5,8")[0] == 3


def test_csv_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run("profile", "meridian", "--alpha", "2", "--xmax", "5",
                   "--out", str(tmp_path / f"{name}.csv"))[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


# -- batch ---------------------------------------------------------------------------

def test_batch_empty(tmp_path):
    (tmp_path / "s.txt").write_text("")
    code, _ = run("batch", str(tmp_path / "s.txt"), "--out", str(tmp_path / "sum.csv"))
    assert code == 0
    assert (tmp_path / "sum.csv").read_text().splitlines() == ["scenario,exit_code,result"]


def test_batch_failing_check(tmp_path):
    (tmp_path / "s.txt").write_text("threshold h0 --m 2 --alpha 1\n"
                                    "verify area-lower --grid 32 --h 5\n")
    code, _ = run("batch", str(tmp_path / "s.txt"), "--out", str(tmp_path / "sum.csv"))
    assert code == 4


def test_batch_unreadable(tmp_path):
    assert run("batch", str(tmp_path / "missing.txt"))[0] == 2


@pytest.mark.parametrize("jobs", ["1", "3"])
def test_batch_order_and_append(tmp_path, jobs):
    lines = [f"threshold h0 --m {m} --alpha 1" for m in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)]
    (tmp_path / "s.txt").write_text("# sweep\n" + "\n".join(lines) + "\n")
    out = tmp_path / "sum.csv"
    for _ in range(2):
        assert run("batch", str(tmp_path / "s.txt"), "--out", str(out), "--jobs", jobs)[0] == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["scenario", "exit_code", "result"]
    assert [r[0] for r in rows[1:]] == lines * 2
    vals = [float(r[2].split("=")[1]) for r in rows[1:11]]
    assert vals == sorted(vals)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "singmin", "threshold", "h0", "--m", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("h0=1.50887956")
