"""Tests for the verification driver: configuration layering and exit statuses."""

import json

import pytest

from errors import InvalidConfig, UnknownSuite
from verify import SUITE_NAMES, RunConfig, build_config, build_parser, load_config, main


def _args(*argv):
    return build_parser().parse_args(list(argv))


def test_registry_order():
    assert SUITE_NAMES == [
        "asd-einstein", "spin-connection", "integrability", "kahler-potential", "hyperkahler",
        "curvature-formula", "ke-metric", "cheng-yau", "ambient-family", "twistor-cr", "flat-oracle"]
    assert RunConfig(suites=["all"]).suite_list == SUITE_NAMES
    assert RunConfig(suites=["ke-metric", "ke-metric"]).suite_list == ["ke-metric"]


def test_config_validation():
    with pytest.raises(UnknownSuite):
        RunConfig(suites=["ricci-flow"]).validate()
    with pytest.raises(InvalidConfig):
        RunConfig(samples=0).validate()
    with pytest.raises(InvalidConfig):
        RunConfig(tolerances={"phi": -1.0}).validate()


def test_layering(tmp_path, monkeypatch):
    monkeypatch.setenv("TWISTOR_SAMPLES", "5")
    monkeypatch.setenv("TWISTOR_GEOMETRY", "round-s4")
    run_file = tmp_path / "run.env"
    run_file.write_text("suites=asd-einstein,ke-metric\nseed=7\ntol.phi=1e-6\nformat=csv\n")
    config = build_config(_args("--config", str(run_file), "--seed", "9", "--tol", "psi-tilde=2e-6"))
    assert config.geometry == "round-s4"
    assert config.samples == 5
    assert config.suites == ["asd-einstein", "ke-metric"]
    assert config.seed == 9
    assert config.fmt == "csv"
    assert config.tolerances == {"phi": 1e-6, "psi-tilde": 2e-6}


def test_load_config_errors(tmp_path):
    with pytest.raises(InvalidConfig):
        load_config(str(tmp_path / "missing.env"))
    bad = tmp_path / "bad.env"
    bad.write_text("colour=blue\n")
    with pytest.raises(InvalidConfig):
        load_config(str(bad))


@pytest.mark.parametrize("argv", [
    ["--suite", "ricci-flow"],
    ["--geometry", "klein-bottle", "--suite", "asd-einstein"],
    ["--tol", "phi=small"],
    ["--tol", "phi"],
    ["--samples", "0"],
])
def test_bad_input_exits_with_two(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path / "r.json")]) == 2
    assert capsys.readouterr().err.startswith("[Verify] ")


def test_failing_geometry_exits_with_one(tmp_path):
    out = tmp_path / "perturbed.json"
    status = main(["--geometry", "perturbed-noneinstein", "--suite", "asd-einstein", "--samples", "1",
                   "--out", str(out), "--quiet"])
    assert status == 1
    data = json.loads(out.read_text())
    assert data[0]["suite"] == "asd-einstein"
    assert data[0]["passed"] is False


def test_three_manifold_runs_only_twistor_cr(tmp_path):
    out = tmp_path / "r3.json"
    status = main(["--geometry", "flat-r3", "--suite", "asd-einstein", "--suite", "twistor-cr",
                   "--samples", "2", "--out", str(out)])
    assert status == 0
    data = json.loads(out.read_text())
    assert data[0]["skipped"] == "needs a 4-dimensional geometry"
    assert [record["check"] for record in data[1]["checks"]] == ["isotropy", "involutivity", "levi-signature"]


def test_runs_are_deterministic(tmp_path):
    outputs = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        main(["--geometry", "round-s4", "--suite", "asd-einstein", "--samples", "2", "--seed", "4",
              "--out", str(out), "--quiet"])
        outputs.append([
            [record["max_residual"] for record in report["checks"]] for report in json.loads(out.read_text())])
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_flat_oracle_from_hyperbolic(tmp_path):
    assert main(["--geometry", "hyperbolic", "--suite", "flat-oracle", "--samples", "2",
                 "--out", str(tmp_path / "flat.json")]) == 0


def test_all_skipped_run_says_so(tmp_path, capsys):
    status = main(["--geometry", "flat", "--suite", "flat-oracle", "--out", str(tmp_path / "skip.json")])
    assert status == 0
    assert "No checks executed" in capsys.readouterr().out
