"""
Unit tests for the thread-safe model registry.
"""
import threading

import joblib
import numpy as np
import pytest

from core.errors import ParseError
from core.rng import Rng
from models.registry import ModelRegistry, get_registry, load_model, save_model
from models.toy import ToyArchitecture, init_model


@pytest.fixture(autouse=True)
def clean_registry():
    get_registry().clear()
    yield
    get_registry().clear()


@pytest.fixture
def model():
    return init_model(ToyArchitecture(image_size=4, L=2, d=3, K=4, hidden=6), Rng(0))


def test_singleton_pattern():
    """Test that ModelRegistry follows singleton pattern."""
    registry1 = ModelRegistry()
    registry2 = ModelRegistry()

    assert registry1 is registry2
    assert get_registry() is registry1


def test_save_registers_model(tmp_path, model):
    path = tmp_path / "toy.joblib"
    save_model(model, path)

    assert path.exists()
    assert get_registry().model_count() == 1
    assert load_model(path) is model


def test_lazy_load_after_clear(tmp_path, model):
    path = tmp_path / "toy.joblib"
    save_model(model, path)
    get_registry().clear()

    loaded = load_model(path)

    assert loaded is not model
    assert loaded.codebook == model.codebook
    for name, value in model.params.items():
        assert np.array_equal(loaded.params[name], value)
    # Second access comes from the cache
    assert load_model(path) is loaded


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "absent.joblib")


def test_wrong_object_type(tmp_path):
    path = tmp_path / "dict.joblib"
    joblib.dump({"not": "a model"}, path)

    with pytest.raises(ParseError):
        load_model(path)
    assert get_registry().model_count() == 0


def test_corrupt_file(tmp_path):
    path = tmp_path / "corrupt.joblib"
    path.write_bytes(b"")

    with pytest.raises(ParseError):
        load_model(path)


def test_concurrent_loads_share_one_instance(tmp_path, model):
    path = tmp_path / "toy.joblib"
    save_model(model, path)
    get_registry().clear()

    loaded = []
    threads = [threading.Thread(target=lambda: loaded.append(load_model(path))) for _ in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert len(loaded) == 8
    assert all(item is loaded[0] for item in loaded)
