import re
from pathlib import Path

import pytest

import hetsmcg
from hetsmcg.errors import ConfigurationError, InputError
from hetsmcg.settings import load_settings, matrix_settings


def test_defaults():
    settings = matrix_settings()
    assert settings.epochs == 20
    assert settings.batch_size == 16
    assert settings.learning_rate == 8e-5
    assert settings.setups == [5]
    assert settings.convs == ["hgt"]
    assert settings.folds == 5
    assert settings.categories == ["data", "model", "training", "evaluation", "execution"]
    assert "Default: 20" in settings["epochs"].description
    assert set(settings.get_settings_by_category("evaluation")) == {"alpha", "n_comparisons", "reference"}


def test_values_are_checked():
    settings = matrix_settings()
    settings.epochs = "3"
    assert settings.epochs == 3
    for name, value in [
        ("folds", 1),
        ("epochs", 2.5),
        ("alpha", 2.0),
        ("class_weights", "yes"),
        ("convs", ["gcn"]),
        ("setups", [1, 1]),
        ("graph_modes", []),
        ("activation", "tanh"),
        ("reference", 5),
    ]:
        with pytest.raises(ConfigurationError):
            setattr(settings, name, value)


def test_update_values():
    settings = matrix_settings()
    settings.update_values({"setups": [1, 3], "graph_modes": "homo-pad"})
    assert settings.setups == [1, 3]
    assert settings.graph_modes == ["homo-pad"]
    with pytest.raises(ConfigurationError):
        settings.update_values({"epoch": 3})
    with pytest.raises(AttributeError):
        settings.unknown


def test_load_yaml(tmp_path):
    path = tmp_path / "matrix.yaml"
    path.write_text("setups: [1, 2, 3, 4, 5]\nconvs: [sage, gat, hgt]\nepochs: 2\nlearning_rate: 1.0e-3\n")
    settings = load_settings(path)
    assert settings.setups == [1, 2, 3, 4, 5]
    assert settings.convs == ["sage", "gat", "hgt"]
    assert settings.learning_rate == pytest.approx(1e-3)
    assert settings.to_json()["epochs"] == 2


def test_load_json(tmp_path):
    path = tmp_path / "matrix.json"
    path.write_text('{"feature_modes": ["text", "text+social"], "workers": 2}')
    settings = load_settings(path)
    assert settings.feature_modes == ["text", "text+social"]
    assert settings.workers == 2


def test_load_errors(tmp_path):
    with pytest.raises(InputError):
        load_settings(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("setups: [1, 2\n")
    with pytest.raises(InputError):
        load_settings(broken)
    listed = tmp_path / "list.yaml"
    listed.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_settings(listed)
    unknown = tmp_path / "unknown.yaml"
    unknown.write_text("optimizer: sgd\n")
    with pytest.raises(ConfigurationError):
        load_settings(unknown)


def test_version_matches_pyproject():
    manifest = (Path(__file__).parents[1] / "pyproject.toml").read_text(encoding="utf-8")
    assert re.search(r'^version = "([^"]+)"', manifest, re.MULTILINE).group(1) == hetsmcg.__version__
