"""
Testing suite for the :py:mod:`utilities` sub-modules.
"""
import io
import logging

import numpy as np
import pytest

from pyTubal.structures.cube import Cube
from pyTubal.utilities.core import AttrDict, TubalConfiguration, tbconfig
from pyTubal.utilities.errors import ConfigurationError
from pyTubal.utilities.logging import build_logger
from pyTubal.utilities.optimize import map_bands
from pyTubal.utilities.plot import equalize_band, save_band_images


# ============================================================= #
# Configuration                                                 #
# ============================================================= #
class TestAttrDict:
    def test_nested_access(self):
        view = AttrDict({"solver": {"eps": 1e-6, "max_iter": 10}})

        assert view.solver.max_iter == 10
        assert view.lookup("solver.eps") == 1e-6
        assert isinstance(view.lookup("solver"), AttrDict)

    def test_unknown(self):
        view = AttrDict({"solver": {"eps": 1e-6}})

        with pytest.raises(AttributeError):
            view.metrics
        for path in ("metrics", "solver.tol", "solver.eps.value"):
            with pytest.raises(ConfigurationError):
                view.lookup(path)


class TestConfiguration:
    def test_packaged_defaults(self):
        assert tbconfig.get("solver.max_iter") == 100
        assert tbconfig.get("noise.group_count") == [1, 3]
        assert tbconfig.config.metrics.ssim.K2 == 0.03

    def test_set_param(self, scratch_config):
        scratch_config.set_param("solver.max_iter", 250)

        assert scratch_config.get("solver.max_iter") == 250
        assert TubalConfiguration(scratch_config.path).get("solver.max_iter") == 250
        # Comments survive the rewrite.
        assert "# Hard cap on outer iterations." in scratch_config.path.read_text()

    @pytest.mark.parametrize(
        "path,value",
        [("solver", 3), ("solver.tolerance", 3), ("solver.eps", {"a": 1})],
    )
    def test_set_param_rejects(self, scratch_config, path, value):
        before = scratch_config.path.read_text()

        with pytest.raises(ConfigurationError):
            scratch_config.set_param(path, value)
        assert scratch_config.path.read_text() == before

    def test_override(self, scratch_config):
        with scratch_config.override({"system.preferences.threads": 4}):
            assert scratch_config.get("system.preferences.threads") == 4
        assert scratch_config.get("system.preferences.threads") == 1

        with pytest.raises(ConfigurationError):
            with scratch_config.override({"system.threads": 4}):
                pass

    def test_missing_or_invalid_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            TubalConfiguration(tmp_path / "missing.yaml").config

        (tmp_path / "list.yaml").write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            TubalConfiguration(tmp_path / "list.yaml").config


# ============================================================= #
# Logging                                                       #
# ============================================================= #
class TestLogging:
    settings = dict(format="%(levelname)s %(message)s", level="INFO", stream="stderr")

    def test_build_logger(self):
        logger = build_logger("pyTubal-test", self.settings)

        assert logger.level == logging.INFO
        assert not logger.propagate and not logger.disabled
        assert len(logger.handlers) == 1

        # Rebuilding replaces the handler instead of stacking another.
        logger = build_logger("pyTubal-test", dict(self.settings, level="debug", enabled=False))
        assert len(logger.handlers) == 1
        assert logger.level == logging.DEBUG and logger.disabled

    def test_format(self):
        logger = build_logger("pyTubal-format", self.settings)
        buffer = io.StringIO()
        logger.handlers[0].setStream(buffer)

        logger.info("[denoise:read] missing.hsc")
        assert buffer.getvalue() == "INFO [denoise:read] missing.hsc\n"

    @pytest.mark.parametrize("change", [dict(stream="stdlog"), dict(level="LOUD")])
    def test_invalid(self, change):
        with pytest.raises(ConfigurationError):
            build_logger("pyTubal-bad", dict(self.settings, **change))


# ============================================================= #
# Threads                                                       #
# ============================================================= #
@pytest.mark.parametrize("workers", [1, 3])
def test_map_bands(workers):
    out = map_bands(lambda a, b: a * b, range(10), range(10, 20), workers=workers)
    assert out == [a * b for a, b in zip(range(10), range(10, 20))]


def test_map_bands_workers():
    with pytest.raises(ValueError):
        map_bands(abs, [1], workers=0)


# ============================================================= #
# Band images                                                   #
# ============================================================= #
class TestBandImages:
    def test_equalize_band(self, rng):
        band = rng.random((16, 16)) ** 3
        equalized = equalize_band(band)

        assert equalized.min() >= 0.0 and equalized.max() <= 1.0
        # Equalization is monotone in brightness.
        order = np.argsort(band.ravel())
        assert np.all(np.diff(equalized.ravel()[order]) >= 0)
        assert np.all(equalize_band(np.full((4, 4), 2.0)) == 0.0)

    def test_save_band_images(self, rng, tmp_path):
        x = Cube.from_array(rng.random((10, 12, 5)))
        written = save_band_images(x, tmp_path / "bands", bands=[0, 4], equalize=True)

        assert [path.name for path in written] == ["band_0000.png", "band_0004.png"]
        assert all(path.stat().st_size > 0 for path in written)

        with pytest.raises(IndexError):
            save_band_images(x, tmp_path / "partial", bands=[0, 1, 5])
        assert not (tmp_path / "partial").exists()

        # Only finished images are left behind.
        assert sorted(p.name for p in (tmp_path / "bands").iterdir()) == ["band_0000.png", "band_0004.png"]
