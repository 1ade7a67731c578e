# models/registry.py
"""
Thread-safe registry for toy model artifacts with lazy loading.

Artifacts are joblib files holding a ToyModel. They are loaded on first
access and cached by resolved path, so repeated decode calls on the same
model file do not reload it.
"""
import joblib
import logging
import pickle
import threading
from pathlib import Path
from typing import Dict, Optional, Union

from core.errors import ParseError
from models.toy import ToyModel

logger = logging.getLogger("pivq.models")

PathLike = Union[str, Path]


class ModelRegistry:
    """
    Singleton cache of loaded artifacts.
    Loading is double-checked under a lock so concurrent callers load a file once.
    """
    _instance = None
    _lock = threading.Lock()
    _models: Dict[Path, ToyModel] = {}

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def get_model(self, path: PathLike) -> ToyModel:
        """
        Return the model stored at `path`, loading it on first access.

        Raises:
            OSError: the file cannot be read
            ParseError: the file does not hold a ToyModel
        """
        key = Path(path).resolve()

        # Fast path: already loaded
        if key in self._models:
            return self._models[key]

        with self._lock:
            if key in self._models:
                return self._models[key]
            if not key.exists():
                raise FileNotFoundError(f"Model file not found: {key}")
            logger.info("Lazy loading model: %s", key)
            try:
                model = joblib.load(key)
            except (pickle.UnpicklingError, EOFError, IndexError, ValueError, KeyError, ImportError, AttributeError) as e:
                raise ParseError(f"{key}: not a model artifact ({e})") from e
            if not isinstance(model, ToyModel):
                raise ParseError(f"{key}: expected a ToyModel, found {type(model).__name__}")
            self._models[key] = model
            return model

    def register(self, path: PathLike, model: ToyModel) -> None:
        with self._lock:
            self._models[Path(path).resolve()] = model

    def clear(self) -> None:
        with self._lock:
            self._models.clear()

    def model_count(self) -> int:
        return len(self._models)


# Global singleton instance
_registry = ModelRegistry()


def save_model(model: ToyModel, path: PathLike) -> None:
    """Persist a model with joblib and refresh the cached copy."""
    path = Path(path)
    joblib.dump(model, path)
    _registry.register(path, model)
    logger.info("Saved model to %s", path)


def load_model(path: PathLike) -> ToyModel:
    return _registry.get_model(path)


def get_registry() -> ModelRegistry:
    return _registry
