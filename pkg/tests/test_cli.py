import csv
import json
import re
import subprocess
import sys

import pytest

from nslm.bench import RUNS_HEADER, TABLE_HEADER
from nslm.cave import load_instance
from nslm.cli import main


def test_generate_round_trips_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.cave", tmp_path / "b.cave"
    assert main(["generate", "--n", "100", "--seed", "1", "--out", str(a)]) == 0
    assert main(["generate", "--n", "100", "--seed", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.n == 100 and inst.seed == 1
    assert "s_min=" in capsys.readouterr().out


def test_n_below_two_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "1", "--out", str(tmp_path / "x.cave")])
    assert exc.value.code == 2
    assert not (tmp_path / "x.cave").exists()


SUMMARY = re.compile(r"^n=(\d+) method=(ilmm-ip|ilmm-ep) it=(\d+) time=[\d.]+ status=(\w+)$", re.M)


@pytest.mark.parametrize("method", ["ilmm-ip", "ilmm-ep"])
def test_solve_prints_summary_and_writes_report(tmp_path, capsys, method):
    inst, out = tmp_path / "i.cave", tmp_path / "r.json"
    main(["generate", "--n", "100", "--seed", "1", "--out", str(inst)])
    code = main(["solve", "--instance", str(inst), "--method", method, "--out", str(out)])
    m = SUMMARY.search(capsys.readouterr().out)
    assert m and m.group(1) == "100" and m.group(2) == method
    report = json.loads(out.read_text())
    assert report["iterations"] == int(m.group(3)) and report["status"] == m.group(4)
    assert code == (0 if report["status"] == "Converged" else 1)
    assert report["status"] == "Converged" and report["final_residual"] < 1e-6


def test_solve_exit_one_when_not_converged(capsys):
    assert main(["solve", "--n", "50", "--seed", "0", "--max-iter", "1", "--quiet"]) == 1
    assert "status=MaxIterations" in capsys.readouterr().out


def test_broken_instance_is_a_parse_error(tmp_path, capsys):
    bad, out = tmp_path / "bad.cave", tmp_path / "r.json"
    bad.write_text('{"format": "nslm-cave", "n": ')
    assert main(["solve", "--instance", str(bad), "--out", str(out)]) == 3
    assert not out.exists()
    assert "parse error" in capsys.readouterr().err


def test_missing_instance_file_is_an_io_error(tmp_path):
    assert main(["solve", "--instance", str(tmp_path / "none.cave")]) == 3


def test_solve_needs_an_instance():
    assert main(["solve"]) == 2


def test_bench_writes_runs_and_table(tmp_path, capsys):
    runs, table = tmp_path / "runs.csv", tmp_path / "table.csv"
    code = main(["bench", "--sizes", "20,30", "--repeats", "2", "--out", str(runs),
                 "--table", str(table), "--plot-dir", str(tmp_path / "fig")])
    with open(runs) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == RUNS_HEADER and len(rows) == 1 + 2 * 2 * 2
    with open(table) as fh:
        trows = list(csv.DictReader(fh))
    assert list(trows[0]) == TABLE_HEADER
    assert len(trows) == 4 + 2 and [r["seed"] for r in trows[-2:]] == ["median", "median"]
    assert (tmp_path / "fig" / "bench_summary.png").stat().st_size > 0
    statuses = {r[5] for r in rows[1:]}
    assert code == (0 if statuses == {"Converged"} else 1)


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NSLM_SEED", "5")
    assert main(["generate", "--n", "10", "--out", str(tmp_path / "e.cave")]) == 0
    assert load_instance(tmp_path / "e.cave").seed == 5


def test_order_reports_target_and_fit(tmp_path, capsys):
    plot = tmp_path / "order.png"
    code = main(["order", "--n", "100", "--seed", "0", "--plot", str(plot)])
    out = capsys.readouterr().out
    assert "theoretical order 1 + sigma/2 = 1.25" in out
    assert code == 0 and "fitted order" in out and plot.exists()


def test_order_prints_target_for_other_sigma(capsys):
    main(["order", "--n", "60", "--seed", "0", "--sigma", "0.9"])
    assert "theoretical order 1 + sigma/2 = 1.45" in capsys.readouterr().out


def test_order_without_planted_solution(tmp_path, capsys):
    inst = tmp_path / "i.cave"
    main(["generate", "--n", "10", "--out", str(inst)])
    payload = json.loads(inst.read_text())
    payload["x_star"] = None
    inst.write_text(json.dumps(payload))
    assert main(["order", "--instance", str(inst)]) == 2
    assert "planted solution" in capsys.readouterr().err


def test_invalid_sigma_is_a_usage_error():
    assert main(["solve", "--n", "10", "--sigma", "1.5"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nslm", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
