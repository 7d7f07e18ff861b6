"""
Pytest configuration for the ``pyTubal`` testing suite.

Notes
-----

Command line options:

- ``--runslow`` also runs the tests marked ``slow`` (64 x 64 x 20 recovery runs and the timing comparison).
- ``--answer_dir`` keeps reference outputs (golden cube files) in the given directory across runs. Without it, a
  temporary directory is used and every reference is written fresh.
- ``--answer_store`` overwrites the stored references instead of comparing against them.
"""
import pathlib as pt
import shutil

import numpy as np
import pytest

from pyTubal.utilities.core import TubalConfiguration, bin_directory


def pytest_addoption(parser):
    group = parser.getgroup("pytubal")
    group.addoption("--runslow", action="store_true", default=False, help="Run slow tests.")
    group.addoption("--answer_dir", default=None, help="Directory of stored reference outputs.")
    group.addoption(
        "--answer_store",
        action="store_true",
        default=False,
        help="Overwrite stored reference outputs instead of checking them.",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running recovery and timing tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return

    skip_slow = pytest.mark.skip(reason="slow; pass --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture()
def answer_store(request) -> bool:
    return request.config.getoption("--answer_store")


@pytest.fixture()
def answer_dir(request, tmp_path_factory) -> pt.Path:
    option = request.config.getoption("--answer_dir")
    if option is None:
        return tmp_path_factory.mktemp("answers")

    directory = pt.Path(option).resolve()
    directory.mkdir(parents=True, exist_ok=True)
    return directory


@pytest.fixture()
def rng() -> np.random.Generator:
    """A fixed-seed generator for building random test instances."""
    return np.random.default_rng(20240601)


@pytest.fixture()
def scratch_config(tmp_path) -> TubalConfiguration:
    """A :py:class:`TubalConfiguration` over a throwaway copy of the packaged configuration file."""
    path = tmp_path / "config.yaml"
    shutil.copyfile(bin_directory / "config.yaml", path)
    return TubalConfiguration(path)
