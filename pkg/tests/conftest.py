"""
Pytest configuration and fixtures shared by the pivq test suite.
"""
import os

import numpy as np
import pytest
from click.testing import CliRunner

# Keep tests single-threaded and quiet unless a test opts in
os.environ.setdefault("PIVQ_THREADS", "1")
os.environ.setdefault("PIVQ_LOG_LEVEL", "WARNING")

from core.rng import Rng
from core.serialization import CodedSample, save_coded_dataset
from core.types import Codebook, CodeSet
from main import cli


@pytest.fixture
def rng():
    """Fresh seeded Rng per test."""
    return Rng(1234)


@pytest.fixture
def runner():
    """Click runner for in-process CLI calls."""
    return CliRunner()


@pytest.fixture
def invoke(runner):
    """Invoke the pivq group with a list of arguments."""

    def _invoke(*args):
        return runner.invoke(cli, [str(a) for a in args])

    return _invoke


@pytest.fixture
def small_codebook():
    return Codebook(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))


@pytest.fixture
def coded_dataset_file(tmp_path):
    """Coded dataset with two overlapping samples a and b."""
    path = tmp_path / "codes.jsonl"
    save_coded_dataset(
        [
            CodedSample("a", CodeSet((1, 2, 3, 4))),
            CodedSample("b", CodeSet((3, 4, 5, 6))),
        ],
        path,
    )
    return path
