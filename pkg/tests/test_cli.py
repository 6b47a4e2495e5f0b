import json
import subprocess
import sys

import pytest

from cellgroup import bundled_instance_path
from cellgroup.cli import main

EXAMPLE1 = str(bundled_instance_path("example1.cms"))
EXAMPLE2 = str(bundled_instance_path("example2_partial.cms"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_both_match(capsys):
    code, out, err = run(capsys, "solve", "--instance", EXAMPLE1, "--cells", "2", "--cell-cap", "2", "--method", "both")
    assert code == 0
    assert out.count("utilization: 9") == 2
    assert out.count("exceptional elements: 0") == 2
    assert "qap vs heuristic: MATCH" in out
    assert err == ""


def test_solve_golden_qap_table(capsys):
    code, out, _ = run(capsys, "solve", "--instance", EXAMPLE1, "--cells", "2", "--cell-cap", "2", "--method", "qap")
    assert code == 0
    assert out.splitlines()[:9] == [
        "== qap ==",
        "Part  Route  No. | 1 3 | 2 4",
        "----------------------------",
        "   2      2    5 | 1 1 | 0 0",
        "   4      2    9 | 1 1 | 0 0",
        "   5      2   11 | 1 0 | 0 0",
        "----------------------------",
        "   1      2    2 | 0 0 | 1 1",
        "   3      2    7 | 0 0 | 1 1",
    ]


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "--instance", EXAMPLE1, "--format", "json", "--method", "qap")
    assert code == 0
    doc = json.loads(out)
    assert doc["families"] == [[2, 7], [5, 9, 11]]
    assert doc["exceptional_elements"] == 0


def test_solve_json_both(capsys):
    code, out, _ = run(capsys, "solve", "--instance", EXAMPLE1, "--format", "json", "--seed-check")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"qap", "heuristic", "match", "oracle_objective"}
    assert doc["match"] is True
    assert doc["oracle_objective"] == doc["qap"]["objective"] == 2


def test_seed_check_line(capsys):
    code, out, _ = run(capsys, "solve", "--instance", EXAMPLE2, "--seed-check", "--method", "heuristic")
    assert code == 0
    assert out.rstrip().endswith("oracle objective 6, solver objective 6: EQUAL")


def test_missing_instance_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2
    assert capsys.readouterr().out == ""


def test_invalid_instance_file(tmp_path, capsys):
    bad = tmp_path / "bad.cms"
    bad.write_text("machines 2\npart 1\nroute 3\n")
    code, out, err = run(capsys, "solve", "--instance", str(bad))
    assert code == 2
    assert out == ""
    assert "line 3" in err and err.startswith("error: instance:")


def test_missing_file(tmp_path, capsys):
    code, out, err = run(capsys, "solve", "--instance", str(tmp_path / "nope.cms"))
    assert (code, out) == (2, "")
    assert "cannot read" in err


def test_infeasible_cells(capsys):
    code, out, err = run(capsys, "solve", "--instance", EXAMPLE1, "--cells", "1", "--cell-cap", "2")
    assert (code, out) == (2, "")
    assert "cell_formation" in err


def test_timeout_exit_code(capsys):
    code, out, err = run(capsys, "solve", "--instance", EXAMPLE2, "--node-limit", "3")
    assert (code, out) == (3, "")
    assert "node limit" in err


def test_export_network(tmp_path, capsys):
    out_file = tmp_path / "ex1.dimacs"
    code, out, _ = run(capsys, "export-network", "--instance", EXAMPLE1, "--out", str(out_file))
    assert code == 0
    first = out_file.read_bytes()
    assert b"\np min 32 129\n" in first
    run(capsys, "export-network", "--instance", EXAMPLE1, "--out", str(out_file))
    assert out_file.read_bytes() == first


def test_export_smallest(tmp_path, capsys):
    path = tmp_path / "two.cms"
    path.write_text("machines 2\npart 1\nroute 1\npart 2\nroute 2\n")
    code, out, _ = run(capsys, "export-network", "--instance", str(path))
    assert code == 0
    assert "p min 8 8" in out.splitlines()


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "--instance", EXAMPLE1)
    assert code == 0
    assert out.splitlines()[0] == "oracle objective: 2"


def test_oracle_compare(capsys):
    code, out, _ = run(capsys, "oracle", "--instance", EXAMPLE1, "--compare")
    assert code == 0
    assert out.splitlines()[-1] == "EQUAL"


def test_oracle_too_large(tmp_path, capsys):
    lines = ["machines 3"]
    for k in range(1, 13):
        lines += [f"part {k}", "route 1", "route 2", "route 3"]
    path = tmp_path / "big.cms"
    path.write_text("\n".join(lines) + "\n")
    code, out, err = run(capsys, "oracle", "--instance", str(path))
    assert (code, out) == (2, "")
    assert "oracle" in err


def test_module_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "cellgroup.cli", "solve", "--instance", EXAMPLE2, "--format", "json"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["match"] in (True, False)
