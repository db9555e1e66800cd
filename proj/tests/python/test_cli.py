import csv
import json


def test_solve_writes_files(run, tmp_path):
    res = run("solve", "--p", "3", "--out", "out")
    assert res.returncode == 0, res.stderr
    out = tmp_path / "out"
    for name in ("profile_p3.csv", "profile_p3.json", "report_p3.json"):
        assert (out / name).is_file()
    report = json.loads((out / "report_p3.json").read_text())
    assert report["config_hash"]


def test_bad_p_is_usage_error(run):
    res = run("solve", "--p", "1.5")
    assert res.returncode == 2
    assert "p must exceed 2" in res.stderr + res.stdout


def test_empty_p_list_is_usage_error(run):
    res = run("sweep", "--p", ",")
    assert res.returncode == 2


def test_solve_both_reports_cross_distance(run, tmp_path):
    res = run("solve", "--p", "3", "--solver", "both", "--format", "json", "--out", "out")
    assert res.returncode == 0, res.stderr
    report = json.loads((tmp_path / "out" / "report_p3.json").read_text())
    assert "cross" in json.dumps(report)


def test_sweep_rates(run, tmp_path):
    res = run("sweep", "--p", "20,50,100", "--out", "out")
    assert res.returncode == 0, res.stderr
    lines = [l for l in (tmp_path / "out" / "rates.csv").read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert [float(r["p"]) for r in rows] == [20.0, 50.0, 100.0]


def test_spectrum_verdicts(run):
    for p in ("3", "4"):
        res = run("spectrum", "--p", p, "--out", "out")
        assert res.returncode == 0, res.stderr
        assert "STABLE" in res.stdout
    res = run("spectrum", "--p", "6", "--out", "out")
    assert res.returncode == 0, res.stderr
    assert "outside certified range" in res.stdout
