import subprocess
import sys

import pytest

from bolmoufang import magma as mg, tables
from bolmoufang.cli import main
from bolmoufang.term import decode_bm, holds


@pytest.fixture
def table_file(tmp_path):
    def write(m, name="t.txt"):
        path = tmp_path / name
        path.write_text(mg.format_table(m))
        return str(path)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_q1(capsys, table_file):
    code, out, _ = run(capsys, "check", table_file(tables.Q1), "--identity", "LA")
    assert code == 0
    assert out.strip().endswith("LA: holds; loop: yes; two-sided inverses: no")


def test_check_failure_reports_counterexample(capsys, table_file):
    code, out, _ = run(capsys, "check", table_file(tables.Q1), "-i", "ASSOC")
    assert code == 1 and "fails at x=" in out


def test_check_structure(capsys, table_file):
    path = table_file(tables.RIGHT_NEUTRAL_LB)
    code, out, _ = run(capsys, "--machine", "check", path, "-i", "LB", "--structure", "--neutral", "right")
    assert code == 0
    assert "identity LB holds" in out
    assert "structure right two-sided neutral=0 inverses=0,1,2" in out
    assert "property is_loop no" in out
    code, _, _ = run(capsys, "check", path, "--structure", "--neutral", "left", "--inverses", "none")
    assert code == 1


def test_check_bad_table(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n0 1\n1 7\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 3 and "out of range" in err
    code, _, _ = run(capsys, "check", str(tmp_path / "missing.txt"))
    assert code == 3


def test_check_bad_identity(capsys, table_file):
    code, _, err = run(capsys, "check", table_file(tables.Q1), "-i", "G12")
    assert code == 3 and "error" in err


def test_search_witness_round_trips_through_check(capsys, tmp_path):
    code, out, _ = run(capsys, "--machine", "search", "--order", "3", "-i", "D23", "-i", "D34", "--workers", "1")
    assert code == 0
    assert "# status witness" in out and "# order 3" in out
    path = tmp_path / "w.txt"
    path.write_text(out)
    m = mg.parse_table(out)
    assert holds(decode_bm("D23"), m) and not mg.is_loop(m)
    code, out, _ = run(capsys, "check", str(path), "-i", "D23", "-i", "D34", "--structure")
    assert code == 0 and "loop: no" in out


def test_search_exhausted(capsys):
    code, out, _ = run(capsys, "search", "--order", "1..5", "-i", "LB", "--workers", "1")
    assert code == 1 and out.startswith("exhausted")


def test_search_budget(capsys):
    code, out, _ = run(capsys, "search", "--order", "1..9", "-i", "E15", "--budget", "0.2", "--workers", "1")
    assert code == 2 and "budget exceeded" in out


def test_search_configuration_error(capsys):
    code, _, err = run(capsys, "search", "--order", "3")
    assert code == 3 and "identity" in err
    code, _, _ = run(capsys, "search", "--order", "x..y", "-i", "LB")
    assert code == 3


def test_usage_error_exit_status(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["search", "--neutral", "sideways"])
    assert exc.value.code == 3


def test_enumerate_groups_of_order_4(capsys):
    code, out, _ = run(capsys, "enumerate", "--order", "4", "-i", "ASSOC", "--inverses", "none",
                       "--up-to-iso", "--latin", "--workers", "1")
    assert code == 0 and out.strip().endswith("# models 2")


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "-i", "C", "--max-order", "4", "--workers", "1")
    assert code == 0 and "status exhausted" in out and out.count("order ") == 4
    code, out, _ = run(capsys, "verify", "-i", "D23", "--max-order", "4", "--workers", "1")
    assert code == 1


def test_decode_and_dual(capsys):
    assert run(capsys, "decode", "C25")[:2] == (0, "x((yy)z) = ((xy)y)z\n")
    assert run(capsys, "dual", "C25")[:2] == (0, "C14\n")
    assert run(capsys, "dual", "B14")[:2] == (0, "E25\n")
    assert run(capsys, "decode", "A21")[0] == 3


def test_lab_fixtures_writes_records(capsys, tmp_path):
    out_path = tmp_path / "rec.jsonl"
    code, out, _ = run(capsys, "lab", "fixtures", "--out", str(out_path))
    assert code == 0 and out.count("ok  ") == 5
    assert len(out_path.read_text().splitlines()) == 5


def test_lab_budget_status(capsys):
    code, _, _ = run(capsys, "lab", "onesided", "--max-order", "9", "--budget", "0.01")
    assert code == 4


def test_b25_resume(capsys, tmp_path):
    ck = str(tmp_path / "b25.ckpt")
    code, out, _ = run(capsys, "b25", "--max-order", "4", "--checkpoint", ck)
    assert code == 0 and "searched orders: 2 3 4" in out
    code, out, _ = run(capsys, "b25", "--max-order", "5", "--checkpoint", ck, "--resume")
    assert code == 0 and "searched orders: 5" in out


def test_b25_corrupt_checkpoint(capsys, tmp_path):
    ck = tmp_path / "bad.ckpt"
    ck.write_text("garbage\n")
    code, _, err = run(capsys, "b25", "--max-order", "4", "--checkpoint", str(ck), "--resume")
    assert code == 3 and "checkpoint" in err


def test_module_entry_point(table_file):
    proc = subprocess.run([sys.executable, "-m", "bolmoufang", "check", table_file(tables.M3M4), "-i", "M3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "M3: holds" in proc.stdout
