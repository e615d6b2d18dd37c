import json

import numpy as np
import pytest

from app.core import storage
from app.core.errors import ConfigError
from app.core.models import (
    ExperimentConfig,
    GeometryRequest,
    MetricConfig,
    TrivializationConfig,
    load_experiment_config,
    load_geometry_request,
    thread_cap,
    validate_model,
)
from app.verify.report import CheckResult, VerificationReport


def test_experiment_defaults():
    cfg = ExperimentConfig()
    assert cfg.engine == "dirac1p1"
    assert cfg.trivialization.kind == "identity"
    assert cfg.outputs == ["norm", "expectation_p"]


@pytest.mark.parametrize(
    "text, kind",
    [("identity", "identity"), ("scalar:{-1.5}", "scalar"), ("scalar: 2", "scalar"), ("random_smooth:{4, 0.1}", "random_smooth")],
)
def test_trivialization_shorthand(text, kind):
    assert TrivializationConfig.model_validate(text).kind == kind


def test_trivialization_rejects_bad_values():
    with pytest.raises(ValueError):
        TrivializationConfig.model_validate("scalar:{0}")
    with pytest.raises(ValueError):
        TrivializationConfig.model_validate("random_smooth:{1, 0.5}")
    with pytest.raises(ValueError):
        TrivializationConfig.model_validate("rotation:{1}")


def test_engine_mass_requirements():
    with pytest.raises(ConfigError, match="cfg.m"):
        validate_model(ExperimentConfig, {"engine": "kg", "cfg": {"m": 0.0}})
    with pytest.raises(ConfigError):
        validate_model(ExperimentConfig, {"engine": "schrodinger"})


def test_potential_length_must_match_lattice():
    with pytest.raises(ConfigError, match="a1"):
        validate_model(ExperimentConfig, {"lattice": {"n": 4}, "cfg": {"a1": [0.0, 0.0]}})


def test_unknown_output_names_the_field():
    with pytest.raises(ConfigError, match="field outputs"):
        validate_model(ExperimentConfig, {"outputs": ["norm", "energy"]})


def test_curved_metric_needs_the_dirac_engine():
    with pytest.raises(ConfigError, match="dirac1p1"):
        validate_model(ExperimentConfig, {"engine": "kg", "cfg": {"m": 1.0}, "metric": {"name": "rindler_1p1"}})
    cfg = validate_model(ExperimentConfig, {"metric": {"name": "frw_1p1", "params": {"epsilon": 0.2}}})
    assert cfg.metric.name == "frw_1p1"


def test_metric_config_validation():
    with pytest.raises(ValueError):
        MetricConfig(name="schwarzschild")
    with pytest.raises(ValueError):
        MetricConfig(name="flat", kind="table", dim=2, params={"g": [[1, 0, 0]]})


def test_geometry_request_checks_points():
    with pytest.raises(ValueError):
        GeometryRequest(metric=MetricConfig(name="polar_flat_2d"), points=[[1.0, 2.0, 3.0]])


def test_load_bare_metric_as_request(tmp_path):
    path = tmp_path / "polar.json"
    path.write_text(json.dumps({"name": "polar_flat_2d"}), encoding="utf-8")
    request = load_geometry_request(path)
    assert request.metric.name == "polar_flat_2d"
    assert request.points == []


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"engine": "kg",\n  "cfg": }', encoding="utf-8")
    with pytest.raises(ConfigError, match="line 2"):
        load_experiment_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "absent.json")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("CLIFFBUNDLE_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("CLIFFBUNDLE_THREADS", "0")
    assert thread_cap() == 1
    monkeypatch.setenv("CLIFFBUNDLE_THREADS", "")
    assert thread_cap(5) == 5
    monkeypatch.setenv("CLIFFBUNDLE_THREADS", "many")
    with pytest.raises(ConfigError):
        thread_cap()


# --- storage and reports -----------------------------------------------------


def test_json_handles_numpy_and_complex(tmp_path):
    path = storage.write_json(tmp_path / "out" / "r.json", {"a": np.arange(3), "z": 1 + 2j, "x": np.float64(0.5)})
    assert storage.read_json(path) == {"a": [0, 1, 2], "x": 0.5, "z": [1.0, 2.0]}


def test_csv_keeps_full_precision(tmp_path):
    path = storage.write_csv(tmp_path / "s.csv", ["t", "v"], [[0.1, 1.0 / 3.0]])
    header, rows = storage.read_csv(path)
    assert header == ["t", "v"]
    assert float(rows[0][1]) == 1.0 / 3.0


def test_field_header_describes_layout(tmp_path):
    data = np.arange(12, dtype=float).reshape(3, 2, 2) * (1 + 1j)
    path, header_path = storage.write_field(tmp_path / "f.bin", data, spacing=[0.1, 0.2], origin=[0.0, 1.0])
    header = storage.read_json(header_path)
    assert header["dims"] == [3, 2]
    assert header["components"] == 2
    assert header["complex"] is True
    back, _ = storage.read_field(path)
    assert np.array_equal(back, data)


def test_report_sorting_and_verdict():
    report = VerificationReport(
        suite="demo",
        seed=3,
        checks=[CheckResult.below("b.second", 1e-3, 1e-6), CheckResult.within("a.first", 2.02, 2.0, 0.1)],
        wall_time=0.5,
    )
    assert [c.name for c in report.checks] == ["a.first", "b.second"]
    assert not report.passed
    assert [c.name for c in report.failed] == ["b.second"]
    payload = report.to_dict()
    assert payload["rng"] == "PCG64"
    assert "wall_time" not in payload
    assert report.to_dict(include_timing=True)["wall_time"] == 0.5
    header, rows = report.csv_rows()
    assert header[0] == "name" and rows[0][3] == 1
