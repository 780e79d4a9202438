import csv
import json
import math
from pathlib import Path

import pytest

from growthlab import cli
from growthlab.reports import Report, config_hash, dumps

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
STANDARD = str(CONFIGS / "standard.ini")


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code, report = cli.run([*argv, "--out", str(out)])
    return code, report, out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- growth -----------------------------------------------------------------

def test_growth_on_free_group(tmp_path):
    code, report, out = run(tmp_path, "growth", "--config", STANDARD)
    assert code == 0 and report.passed
    summary = json.loads((out / "report.json").read_text())["summary"]
    assert abs(summary["delta"] - math.log(3)) < 1e-9
    rows = read_csv(out / "counts.csv")
    assert [int(r["sphere"]) for r in rows[1:]] == [4 * 3 ** (n - 1) for n in range(1, 13)]
    assert (out / "plot.csv").exists() and (out / "manifest.json").exists()


def test_growth_of_trivial_group(tmp_path):
    code, report, _ = run(tmp_path, "growth", "--config", STANDARD, "--radius", "6",
                          "--set", f"presentation={CONFIGS / 'trivial.txt'}", "--set", "method=auto")
    assert code == 0 and report.summary["delta"] == 0


def test_growth_expected_rate_assertion(tmp_path):
    code, report, _ = run(tmp_path, "growth", "--config", STANDARD, "--set", "expect=0.5")
    assert code == cli.EXIT_ASSERTION and report.assertions["expected-rate"] is False


def test_malformed_presentation_exits_2(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("gens a b\nrel a1b\n")
    code, report, _ = run(tmp_path, "growth", "--set", f"presentation={bad}")
    assert code == cli.EXIT_CONFIG and report is None


def test_bad_values_exit_2(tmp_path):
    assert run(tmp_path, "growth", "--radius", "-1")[0] == cli.EXIT_CONFIG
    assert run(tmp_path, "growth", "--set", "radius=ten")[0] == cli.EXIT_CONFIG
    assert run(tmp_path, "growth", "--set", "oops")[0] == cli.EXIT_CONFIG
    assert run(tmp_path, "growth", "--config", str(tmp_path / "missing.ini"))[0] == cli.EXIT_CONFIG


def test_budget_exceeded_exits_3(tmp_path):
    code, report, _ = run(tmp_path, "growth", "--config", STANDARD, "--budget", "1000")
    assert code == cli.EXIT_BUDGET and report is None


# -- quotient sweep ---------------------------------------------------------

def test_sweep_standard_run(tmp_path):
    code, report, out = run(tmp_path, "quotient-sweep", "--config", STANDARD)
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert [r["n"] for r in rows] == ["2", "3", "4", "5", "6", "inf"]
    assert abs(float(rows[0]["delta"]) - math.log(2)) < 1e-9
    assert report.assertions == {"non-decreasing": True, "below-full-rate": True,
                                 "gap-decreasing": True, "oracle-match": True}


def test_sweep_singleton_range(tmp_path):
    code, report, out = run(tmp_path, "quotient-sweep", "--config", STANDARD, "--set", "n=4")
    assert code == 0
    assert [r["n"] for r in read_csv(out / "sweep.csv")] == ["4", "inf"]


def test_sweep_rejects_relator_failing_small_cancellation(tmp_path):
    code, report, _ = run(tmp_path, "quotient-sweep", "--config", STANDARD, "--set", "h=abAB")
    assert code == cli.EXIT_CONFIG


def test_sweep_budget_rows_flagged(tmp_path):
    code, report, out = run(tmp_path, "quotient-sweep", "--set", "n=3", "--set", "counting=bfs",
                            "--radius", "12", "--budget", "5000")
    assert code == cli.EXIT_BUDGET and report.flagged
    assert all(r["flagged"] for r in read_csv(out / "sweep.csv"))


# -- other commands ---------------------------------------------------------

def test_deep_points_with_zero_count(tmp_path):
    code, report, out = run(tmp_path, "deep-points", "--config", STANDARD, "--set", "count=0")
    assert code == 0
    assert read_csv(out / "deep_points.csv") == []


def test_deep_points_small_run(tmp_path):
    code, report, out = run(tmp_path, "deep-points", "--config", STANDARD, "--set", "count=10")
    assert code == 0 and report.assertions["deep-points"]
    rows = read_csv(out / "deep_points.csv")
    assert rows and all(int(r["length"]) >= 6 and int(r["start"]) >= 0 for r in rows)


def test_product_p2(tmp_path):
    code, report, out = run(tmp_path, "product", "--config", STANDARD, "--set", "p=2")
    assert code == 0
    row = read_csv(out / "product.csv")[0]
    assert abs(float(row["measured"]) - math.sqrt(2) * math.log(3)) < 0.05


def test_projcplx_tree_window(tmp_path):
    code, report, out = run(tmp_path, "projcplx", "--set", "h=a", "--radius", "2",
                            "--set", "min_axes=5", "--set", "order_pairs=5")
    assert code == 0 and report.summary["theta"] == 0
    assert (out / "complex.txt").exists()


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit):
        cli.run(["quotient-sweep", "--help"])
    assert "n,radius,N_counts,delta,oracle,gap,flagged" in capsys.readouterr().out


# -- reports ----------------------------------------------------------------

def test_report_is_byte_identical_across_runs(tmp_path):
    argv = ("quotient-sweep", "--config", STANDARD, "--set", "n=2-3", "--radius", "20")
    _, _, a = run(tmp_path, *argv, name="a")
    _, _, b = run(tmp_path, *argv, name="b")
    for name in ("report.json", "sweep.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert "seconds" in json.loads((a / "manifest.json").read_text())


def test_report_json_shape(tmp_path):
    r = Report("growth", {"radius": 3}, summary={"delta": math.inf}, assertions={"x": True})
    body = json.loads(dumps(r.body()))
    assert body["config_hash"] == config_hash({"radius": 3})
    assert body["summary"]["delta"] == "inf" and body["assertions"] == {"x": "pass"}
    r.write(tmp_path / "r")
    assert not list((tmp_path / "r").glob("*.tmp"))
