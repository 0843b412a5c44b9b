"""
End-to-end tests of the command line, run in-process through ``main``.
"""

import csv

import orjson
import pytest
import yaml

from hawkeshive.adapters.tables import read_metadata
from hawkeshive.core.errors import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE
from hawkeshive.main import main


def _rows(path):
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture
def workdir(tmp_path, monkeypatch, example_one_spec):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "model.txt").write_text(example_one_spec.read_text(encoding="utf-8"), encoding="utf-8")
    return tmp_path


def test_stats(workdir):
    assert main(["--out-dir", "out", "stats", "model.txt", "--max-lag", "5", "--n-lags", "11"]) == EXIT_OK
    out = workdir / "out"
    means = _rows(out / "mean_intensity.csv")
    assert [float(row["mean_intensity"]) for row in means] == pytest.approx([2.0, 2.0])
    assert len(_rows(out / "covariance.csv")) == 11 * 4
    manifest = orjson.loads((out / "stats.manifest.json").read_bytes())
    assert manifest["command"] == "stats"
    assert "mean_intensity.csv" in manifest["outputs"]


def _pipeline(directory, monkeypatch):
    directory.mkdir()
    monkeypatch.chdir(directory)
    (directory / "model.txt").write_text(
        "dimension = 1\nmu = 1.0\nkernel.0.0 = exponential alpha=0.5 beta=1.0\n", encoding="utf-8"
    )
    codes = [
        main(["--out-dir", "sim", "simulate", "model.txt", "--horizon", "300", "--seed", "3", "--burn-in", "10"]),
        main(["--out-dir", "fit", "fit", "sim/events.csv", "--max-iter", "50"]),
        main(["--out-dir", "gof", "gof", "fit/fitted.model", "sim/events.csv"]),
    ]
    return codes, {
        name: (directory / name).read_bytes()
        for name in (
            "sim/events.csv",
            "sim/simulate.manifest.json",
            "fit/fitted.model",
            "fit/parameters.csv",
            "fit/fit.manifest.json",
            "gof/gof.csv",
        )
    }


def test_pipeline_is_reproducible(tmp_path, monkeypatch):
    first_codes, first = _pipeline(tmp_path / "one", monkeypatch)
    second_codes, second = _pipeline(tmp_path / "two", monkeypatch)
    assert first_codes == [EXIT_OK] * 3
    assert second_codes == [EXIT_OK] * 3
    assert first == second
    params = {row["name"]: float(row["value"]) for row in _rows(tmp_path / "one" / "fit" / "parameters.csv")}
    assert set(params) == {"mu.0", "alpha.0.0", "beta.0.0"}


def test_fit_excludes_edge_window_by_default(tmp_path, monkeypatch):
    _pipeline(tmp_path / "run", monkeypatch)
    default = read_metadata(tmp_path / "run" / "fit" / "parameters.csv")
    assert 0.0 < float(default["start"]) < 30.0
    assert main(["--out-dir", "full", "fit", "sim/events.csv", "--max-iter", "50", "--start", "0"]) == EXIT_OK
    assert read_metadata(tmp_path / "run" / "full" / "parameters.csv")["start"] == "0.0"
    assert (tmp_path / "run" / "full" / "parameters.csv").read_bytes() != (
        tmp_path / "run" / "fit" / "parameters.csv"
    ).read_bytes()


def test_paths_and_genealogy(workdir):
    args = ["--out-dir", "out", "simulate", "model.txt", "--horizon", "50", "--paths", "2"]
    assert main(args + ["--algorithm", "cluster", "--genealogy"]) == EXIT_OK
    for name in ("events_0.csv", "events_1.csv", "genealogy_0.csv", "genealogy_1.csv"):
        assert (workdir / "out" / name).is_file()
    counts = _rows(workdir / "out" / "counts.csv")
    assert [(row["path"], row["component"]) for row in counts] == [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    for p in (0, 1):
        events = _rows(workdir / "out" / f"events_{p}.csv")
        per_path = [int(row["count"]) for row in counts if row["path"] == str(p)]
        assert per_path == [sum(row["component"] == str(i) for row in events) for i in (0, 1)]


def test_simulate_same_seed_is_byte_identical(workdir):
    for out in ("a", "b"):
        args = ["--out-dir", out, "simulate", "model.txt", "--horizon", "200", "--seed", "11", "--paths", "2"]
        assert main(args) == EXIT_OK
    for name in ("events_0.csv", "events_1.csv", "counts.csv", "simulate.manifest.json"):
        assert (workdir / "a" / name).read_bytes() == (workdir / "b" / name).read_bytes()
    assert (workdir / "a" / "events_0.csv").read_bytes() != (workdir / "a" / "events_1.csv").read_bytes()


def test_genealogy_needs_cluster(workdir):
    assert main(["simulate", "model.txt", "--horizon", "10", "--genealogy"]) == EXIT_USAGE


def test_missing_input_is_usage_error(workdir):
    assert main(["stats", "absent.txt"]) == EXIT_USAGE


def test_malformed_model_is_data_error(workdir):
    (workdir / "bad.txt").write_text("dimension = 1\nmu = 1.0, 2.0\n", encoding="utf-8")
    assert main(["stats", "bad.txt"]) == EXIT_DATA


def test_unstable_model_is_numerical_error(workdir):
    (workdir / "unstable.txt").write_text(
        "dimension = 1\nmu = 1.0\nkernel.0.0 = exponential alpha=1.2 beta=1.0\n", encoding="utf-8"
    )
    assert main(["stats", "unstable.txt"]) == EXIT_NUMERICAL


def test_ingest(workdir):
    (workdir / "raw.csv").write_text("time,component\n0.5,bid\n1.5,ask\n3.0,bid\n", encoding="utf-8")
    code = main(
        ["--out-dir", "out", "ingest", "raw.csv", "--component", "bid", "--component", "ask", "--horizon", "4"]
    )
    assert code == EXIT_OK
    events = _rows(workdir / "out" / "events.csv")
    assert [row["component"] for row in events] == ["0", "1", "0"]
    assert "# horizon = 4.0" in (workdir / "out" / "events.csv").read_text(encoding="utf-8")


def test_unknown_label_is_data_error(workdir):
    (workdir / "raw.csv").write_text("time,component\n0.5,bid\n1.5,ask\n", encoding="utf-8")
    assert main(["ingest", "raw.csv", "--component", "bid"]) == EXIT_DATA


def test_impact(workdir):
    config = {
        "model": {"kernel": "exponential alpha=0.5 beta=1.0", "mu": 0.5, "contrarian_ratio": 0.5},
        "meta_order": {"rate": 1.0, "duration": 5.0},
        "run": {"paths": 4, "seed": 9},
    }
    (workdir / "impact.yaml").write_text(yaml.safe_dump(config), encoding="utf-8")
    assert main(["--out-dir", "out", "impact", "impact.yaml", "--points", "21"]) == EXIT_OK
    curve = _rows(workdir / "out" / "impact.csv")
    assert len(curve) == 21
    assert float(curve[-1]["grid"]) == pytest.approx(20.0)
    manifest = orjson.loads((workdir / "out" / "impact.manifest.json").read_bytes())
    assert manifest["seed"] == 9


def test_impact_config_needs_sections(workdir):
    (workdir / "impact.yaml").write_text("model: {}\n", encoding="utf-8")
    assert main(["impact", "impact.yaml"]) == EXIT_USAGE


def test_signature_with_model_curve(workdir):
    assert main(["--out-dir", "sim", "simulate", "model.txt", "--horizon", "500", "--seed", "2"]) == EXIT_OK
    code = main(
        ["--out-dir", "out", "signature", "sim/events.csv", "--taus", "1,5,10", "--model", "model.txt"]
    )
    assert code == EXIT_OK
    assert [float(row["tau"]) for row in _rows(workdir / "out" / "signature.csv")] == [1.0, 5.0, 10.0]
    assert len(_rows(workdir / "out" / "signature_model.csv")) == 3


def test_signature_needs_one_scale_option(workdir):
    assert main(["--out-dir", "sim", "simulate", "model.txt", "--horizon", "50"]) == EXIT_OK
    assert main(["signature", "sim/events.csv"]) == EXIT_USAGE
    assert main(["signature", "sim/events.csv", "--taus", "1", "--tau-range", "1", "10", "5"]) == EXIT_USAGE


def test_reflexivity(workdir):
    (workdir / "poisson.txt").write_text("dimension = 1\nmu = 2.0\n", encoding="utf-8")
    assert main(["--out-dir", "sim", "simulate", "poisson.txt", "--horizon", "2000", "--seed", "5"]) == EXIT_OK
    code = main(["--out-dir", "out", "reflexivity", "sim/events.csv", "--method", "variance_ratio", "--windows", "200"])
    assert code == EXIT_OK
    rows = _rows(workdir / "out" / "reflexivity.csv")
    assert [row["method"] for row in rows] == ["variance_ratio"]
    assert float(rows[0]["estimate"]) < 0.2
