import csv
import json
from unittest.mock import patch

import numpy as np
import pytest

from src.main import main
from src.models.dataset_model import PixelDataset
from src.repositories.cube_repository import CubeRepository
from src.repositories.model_repository import ModelRepository
from src.schemas.classifier_schema import TrainConfig
from src.services.forest_service import train_rf
from src.services.phantom_service import default_phantom_spec


def _write_config(path, **fields):
    path.write_text(json.dumps(fields))
    return str(path)


@pytest.fixture
def small_config(tmp_path):
    return _write_config(
        tmp_path / "config.json",
        seed=3,
        phantom_width=64,
        phantom_height=64,
        train={"n_trees": 8, "per_class_cap": 300},
    )


def test_phantom_writes_28_band_cube(tmp_path, small_config, capsys):
    out = tmp_path / "run"
    assert main(["phantom", "--config", small_config, "--out", str(out)]) == 0

    cube = CubeRepository().load_cube(out / "cubes" / "phantom.json")
    assert cube.n_bands == 28
    assert cube.shape == (64, 64)
    assert (out / "cubes" / "phantom_labels.raw").exists()
    assert json.loads((out / "config.json").read_text())["seed"] == 3
    assert "28 bands" in capsys.readouterr().out


def test_phantom_is_reproducible(tmp_path, small_config):
    for name in ("a", "b"):
        assert main(["phantom", "--config", small_config, "--out", str(tmp_path / name)]) == 0
    for stem in ("phantom.raw", "phantom_labels.raw", "phantom.json"):
        assert (tmp_path / "a" / "cubes" / stem).read_bytes() == (tmp_path / "b" / "cubes" / stem).read_bytes()


def test_seed_flag_overrides_config(tmp_path, small_config):
    assert main(["phantom", "--config", small_config, "--seed", "4", "--out", str(tmp_path / "a")]) == 0
    assert main(["phantom", "--config", small_config, "--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "cubes" / "phantom.raw").read_bytes()
    assert first != (tmp_path / "b" / "cubes" / "phantom.raw").read_bytes()


def test_missing_seed_exits_2(tmp_path):
    assert main(["phantom", "--out", str(tmp_path / "run")]) == 2


def test_zero_class_phantom_exits_2(tmp_path):
    spec = default_phantom_spec(seed=1, width=40, height=40).model_dump()
    spec["classes"] = []
    config = _write_config(tmp_path / "config.json", seed=1, phantom=spec)
    assert main(["phantom", "--config", config, "--out", str(tmp_path / "run")]) == 2


def test_unreadable_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["phantom", "--config", str(bad), "--out", str(tmp_path / "run")]) == 2
    assert main(["phantom", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "run")]) == 2


def test_invalid_cutoff_flag_is_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--seed", "1", "--cutoff", "fine", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_acquire_reports_table_times(tmp_path, small_config, capsys):
    out = tmp_path / "run"
    assert main(["acquire", "--config", small_config, "--out", str(out)]) == 0

    printed = capsys.readouterr().out
    assert "90 min full vs 9 min sparse per band" in printed
    assert "data fraction 10.0%" in printed
    report = json.loads((out / "reports" / "acquisition.json").read_text())
    assert report["factor"] == 10
    assert len(report["sparse_wavenumbers_cm1"]) == 27
    sparse = CubeRepository().load_cube(out / "cubes" / "sparse")
    assert sparse.height == 7
    assert sparse.dy_um == 5.0


def test_acquire_unknown_reference_exits_2(tmp_path, small_config):
    args = ["acquire", "--config", small_config, "--reference-wavenumber", "1234.5", "--out", str(tmp_path / "run")]
    assert main(args) == 2


def test_reconstruct_at_unit_factor_returns_source(tmp_path):
    config = _write_config(
        tmp_path / "config.json", seed=2, phantom_width=48, phantom_height=48, sampling={"dx_um": 0.5, "dy_um": 0.5}
    )
    out = tmp_path / "run"
    assert main(["reconstruct", "--config", config, "--out", str(out)]) == 0
    repo = CubeRepository()
    assert repo.load_cube(out / "cubes" / "reconstructed") == repo.load_cube(out / "cubes" / "phantom")


def test_reconstruct_writes_cube_and_triptychs(tmp_path, small_config):
    out = tmp_path / "run"
    assert main(["acquire", "--config", small_config, "--out", str(out)]) == 0
    assert main(["reconstruct", "--config", small_config, "--out", str(out)]) == 0

    cube = CubeRepository().load_cube(out / "cubes" / "reconstructed")
    assert cube.n_bands == 28
    assert cube.shape == (64, 64)
    assert len(list((out / "plots").glob("triptych_*.png"))) == 27
    first = (out / "cubes" / "reconstructed.raw").read_bytes()

    assert main(["reconstruct", "--config", small_config, "--out", str(out)]) == 0
    assert (out / "cubes" / "reconstructed.raw").read_bytes() == first


def test_sweep_unit_factor_csv(tmp_path, small_config):
    out = tmp_path / "run"
    assert main(["sweep", "--config", small_config, "--factors", "1", "--out", str(out)]) == 0

    with (out / "reports" / "sweep.csv").open() as handle:
        reader = csv.reader(handle)
        assert next(reader) == ["r", "dy_um", "wavenumber_cm1", "mse", "ssim"]
        rows = [row for row in reader if row]
    band_rows = [row for row in rows if row[0] == "1" and len(row) == 5]
    assert len(band_rows) == 27
    assert all(float(row[3]) == 0.0 and float(row[4]) == 1.0 for row in band_rows)
    assert (out / "plots" / "sweep.svg").exists()
    assert json.loads((out / "reports" / "sweep.json").read_text())["reference_wavenumber_cm1"] == 1660.0


def test_classify_outputs(tmp_path):
    spec = default_phantom_spec(seed=5, width=96, height=96, noise_sigma=0.0).model_dump()
    spec["texture_scale"] = None
    config = _write_config(tmp_path / "config.json", seed=5, phantom=spec, train={"n_trees": 10, "per_class_cap": 500})
    out = tmp_path / "run"
    assert main(["classify", "--config", config, "--out", str(out)]) == 0

    metrics = json.loads((out / "reports" / "metrics.json").read_text())
    assert metrics["ground_truth"]["overall_accuracy"] > 0.99
    train, test = metrics["split"]["train_pixels"], metrics["split"]["test_pixels"]
    assert set(train) | set(test) <= {"1", "2", "3"}

    roc_files = sorted(p.name for p in (out / "plots").glob("roc_*.svg") if "reconstructed" not in p.name)
    names = {1: "epithelium", 2: "stroma", 3: "necrosis"}
    assert roc_files == sorted(f"roc_{names[c['class_code']]}.svg" for c in metrics["ground_truth"]["roc"])
    assert len(roc_files) >= 2
    for name in ("class_map_labels.png", "class_map_truth.png", "class_map_reconstructed.png"):
        assert (out / "plots" / name).exists()
    assert (out / "models" / "forest.json").exists()
    with (out / "reports" / "confusion_truth.csv").open() as handle:
        assert next(csv.reader(handle))[0] == "true\\predicted"


def test_pipeline_runs_every_stage(tmp_path):
    config = _write_config(
        tmp_path / "config.json",
        seed=1,
        phantom_width=48,
        phantom_height=48,
        factors=[1, 10],
        train={"n_trees": 5, "per_class_cap": 200},
    )
    out = tmp_path / "run"
    assert main(["pipeline", "--config", config, "--out", str(out)]) == 0
    for relative in (
        "config.json",
        "cubes/phantom.json",
        "cubes/reference.json",
        "cubes/sparse.json",
        "cubes/reconstructed.json",
        "reports/acquisition.json",
        "reports/sweep.csv",
        "reports/metrics.json",
        "plots/sweep.svg",
        "models/forest.json",
    ):
        assert (out / relative).exists(), relative
    rows = np.loadtxt(out / "reports" / "sweep.csv", delimiter=",", skiprows=1, max_rows=27)
    assert rows.shape == (27, 5)


def _same_bytes(first, second, *relative):
    for path in relative:
        assert (first / path).read_bytes() == (second / path).read_bytes(), path


@pytest.fixture
def dense_config(tmp_path):
    return _write_config(
        tmp_path / "dense.json",
        seed=3,
        phantom_width=64,
        phantom_height=64,
        sampling={"dx_um": 0.5, "dy_um": 1.0},
        train={"n_trees": 8, "per_class_cap": 300},
    )


def test_acquire_report_is_byte_reproducible(tmp_path, small_config):
    for name in ("a", "b"):
        assert main(["acquire", "--config", small_config, "--out", str(tmp_path / name)]) == 0
    _same_bytes(tmp_path / "a", tmp_path / "b", "reports/acquisition.json", "cubes/reference.raw", "cubes/sparse.raw")


def test_sweep_reports_are_byte_reproducible(tmp_path, small_config):
    for name in ("a", "b"):
        args = ["sweep", "--config", small_config, "--factors", "1,10", "--out", str(tmp_path / name)]
        assert main(args) == 0
    _same_bytes(tmp_path / "a", tmp_path / "b", "reports/sweep.csv", "reports/sweep.json")


def test_classify_reports_are_byte_reproducible(tmp_path, small_config):
    for name in ("a", "b"):
        assert main(["classify", "--config", small_config, "--out", str(tmp_path / name)]) == 0
    _same_bytes(
        tmp_path / "a",
        tmp_path / "b",
        "reports/metrics.json",
        "reports/confusion_truth.csv",
        "reports/confusion_reconstructed.csv",
        "models/forest.json",
    )


def test_earlier_phantom_with_other_seed_is_not_reused(tmp_path, small_config):
    dirty, fresh = tmp_path / "dirty", tmp_path / "fresh"
    assert main(["phantom", "--config", small_config, "--seed", "1", "--out", str(dirty)]) == 0
    assert main(["acquire", "--config", small_config, "--seed", "2", "--out", str(dirty)]) == 0
    assert main(["acquire", "--config", small_config, "--seed", "2", "--out", str(fresh)]) == 0
    _same_bytes(
        dirty,
        fresh,
        "cubes/phantom.raw",
        "cubes/phantom.json",
        "cubes/reference.raw",
        "cubes/sparse.raw",
        "reports/acquisition.json",
    )


def test_reconstruct_ignores_acquisition_of_other_factor(tmp_path, small_config, dense_config):
    dirty, fresh = tmp_path / "dirty", tmp_path / "fresh"
    assert main(["acquire", "--config", small_config, "--out", str(dirty)]) == 0
    assert main(["reconstruct", "--config", dense_config, "--out", str(dirty)]) == 0
    assert main(["reconstruct", "--config", dense_config, "--out", str(fresh)]) == 0
    _same_bytes(dirty, fresh, "cubes/reconstructed.raw", "cubes/reconstructed.json")


def test_classify_ignores_reconstruction_of_other_factor(tmp_path, small_config, dense_config):
    dirty, fresh = tmp_path / "dirty", tmp_path / "fresh"
    assert main(["reconstruct", "--config", small_config, "--out", str(dirty)]) == 0
    assert main(["classify", "--config", dense_config, "--out", str(dirty)]) == 0
    assert main(["classify", "--config", dense_config, "--out", str(fresh)]) == 0
    _same_bytes(dirty, fresh, "reports/metrics.json", "reports/confusion_reconstructed.csv")


def test_classify_reuses_matching_reconstruction(tmp_path, small_config):
    out = tmp_path / "run"
    assert main(["classify", "--config", small_config, "--out", str(tmp_path / "fresh")]) == 0
    assert main(["reconstruct", "--config", small_config, "--out", str(out)]) == 0
    with patch("src.cli.commands.classify.ReconstructionService") as service:
        assert main(["classify", "--config", small_config, "--out", str(out)]) == 0
    service.assert_not_called()
    _same_bytes(out, tmp_path / "fresh", "reports/metrics.json")


def test_classify_evaluates_saved_forest(tmp_path, small_config):
    trained, reused = tmp_path / "trained", tmp_path / "reused"
    assert main(["classify", "--config", small_config, "--out", str(trained)]) == 0
    forest = str(trained / "models" / "forest.json")
    assert main(["classify", "--config", small_config, "--model", forest, "--out", str(reused)]) == 0

    _same_bytes(trained, reused, "reports/metrics.json", "reports/confusion_truth.csv")
    assert not (reused / "models" / "forest.json").exists()
    assert json.loads((reused / "config.json").read_text())["model_path"] == forest


def test_classify_rejects_forest_of_other_width(tmp_path, small_config):
    features = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.1, 0.0, 0.2], [0.9, 1.0, 0.8]])
    data = PixelDataset(features=features, labels=[1, 2, 1, 2], provenance=[[0, i] for i in range(4)])
    path = tmp_path / "narrow.json"
    ModelRepository().save_model(train_rf(data, TrainConfig(n_trees=2)), path)
    args = ["classify", "--config", small_config, "--model", str(path), "--out", str(tmp_path / "run")]
    assert main(args) == 2
    args = ["classify", "--config", small_config, "--model", str(tmp_path / "absent.json"), "--out", str(tmp_path / "run")]
    assert main(args) == 2
