"""Tests for report records, JSON/CSV emission and the summary table."""

import csv
import json

import pytest

from errors import InvalidConfig, IoFailure
from reports import CSV_COLUMNS, VerificationReport, emit_report, summary_table


@pytest.fixture
def report():
    report = VerificationReport("ke-metric", "round-s4", seed=3, tolerances={"fiber-block": 1e-3})
    report.add("off-block", "g_KE is block diagonal", [1e-9, 4e-8], 1e-6)
    report.add("fiber-block", "fiber block is Fubini-Study", 5e-4, 1e-8, note="signature (6,0)")
    return report


def test_worst_residual_and_override(report):
    assert report.check("off-block").max_residual == pytest.approx(4e-8)
    assert report.check("off-block").samples == 2
    assert report.check("fiber-block").tolerance == 1e-3
    assert report.passed
    with pytest.raises(KeyError):
        report.check("chart-overlap")


def test_nan_residual_fails():
    report = VerificationReport("potential", "flat")
    record = report.add("potential", "r~ o F~ = |pi|^2 x^0", [0.0, float("nan")], 1.0)
    assert not record.passed
    assert not report.passed


def test_json_layout(report, tmp_path):
    path = emit_report([report], "json", str(tmp_path / "out" / "run.json"))[0]
    data = json.loads(path.read_text())
    assert list(data[0]) == ["suite", "geometry", "seed", "deriv", "elapsed_ms", "passed", "checks"]
    assert list(data[0]["checks"][0]) == ["check", "anchor", "samples", "max_residual", "tolerance", "pass"]
    assert data[0]["checks"][1]["note"] == "signature (6,0)"


def test_skipped_report_in_json(tmp_path):
    skipped = VerificationReport("hyperkahler", "flat").skip("Lambda = 0")
    data = json.loads(emit_report([skipped], "json", str(tmp_path / "skip.json"))[0].read_text())
    assert data[0]["skipped"] == "Lambda = 0"
    assert data[0]["checks"] == []
    assert data[0]["passed"] is True


def test_csv_rows(report, tmp_path):
    path = emit_report([report], "csv", str(tmp_path / "run.csv"))[0]
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == CSV_COLUMNS
    assert rows[1][:2] == ["ke-metric", "off-block"]
    assert rows[2][-1] == "true"
    assert len(rows) == 3


def test_default_path_uses_output_dir(report, tmp_path, monkeypatch):
    monkeypatch.setenv("TWISTOR_OUTPUT_DIR", str(tmp_path / "reports"))
    assert emit_report([report]) == [tmp_path / "reports" / "verify.json"]


def test_emit_errors(report, tmp_path):
    with pytest.raises(InvalidConfig):
        emit_report([], "json", str(tmp_path / "empty.json"))
    with pytest.raises(InvalidConfig):
        emit_report([report], "xml", str(tmp_path / "run.xml"))
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(IoFailure):
        emit_report([report], "json", str(blocker / "run.json"))


def test_summary_table(report):
    failing = VerificationReport("asd-einstein", "perturbed-noneinstein")
    failing.add("phi", "Phi = 0", 0.2, 1e-8)
    table = summary_table([report, failing])
    assert "✅ ke-metric on round-s4" in table
    assert "❌ asd-einstein on perturbed-noneinstein" in table
    assert "[signature (6,0)]" in table
    assert len(summary_table([report, failing], quiet=True).splitlines()) == 2


def test_summary_flags_runs_with_no_checks():
    skipped = VerificationReport("flat-oracle", "flat").skip("no compactified model")
    assert "No checks executed" in summary_table([skipped])
    report = VerificationReport("phi", "flat")
    report.add("phi", "Phi = 0", 0.0, 1e-8)
    assert "No checks executed" not in summary_table([report, skipped])
