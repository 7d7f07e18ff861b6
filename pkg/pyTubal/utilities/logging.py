"""
Logging configuration for ``pyTubal``.

Notes
-----

``pyTubal`` has two loggers, both configured from the ``logging`` section of the configuration file:

- ``mainlog``: solver start and stop, files read and written, and every command line failure (as
  ``[<command>:<stage>] <message>``).
- ``devlog``: per-iteration residuals and ranks, t-BRP restart decisions and slice condition numbers. Disabled unless
  ``logging.devlog.enabled`` is set.

Neither logger propagates to the root logger.
"""
import logging
import sys
from typing import Mapping

from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import ConfigurationError

_STREAMS = {"stdout": sys.stdout, "stderr": sys.stderr}


def build_logger(name: str, settings: Mapping) -> logging.Logger:
    """
    Create (or reset) the logger ``name`` from one section of the logging configuration.

    Parameters
    ----------
    name: str
        The logger name.
    settings: dict
        Mapping with ``format``, ``level`` and ``stream`` and, optionally, ``enabled``.
    """
    stream = str(settings["stream"]).lower()
    if stream not in _STREAMS:
        raise ConfigurationError(
            f"Logger {name} streams to {settings['stream']!r}; use stdout or stderr."
        )

    level = logging.getLevelName(str(settings["level"]).upper())
    if not isinstance(level, int):
        raise ConfigurationError(f"Logger {name} has unknown level {settings['level']!r}.")

    logger = logging.getLogger(name)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(_STREAMS[stream])
    handler.setFormatter(logging.Formatter(settings["format"]))
    logger.addHandler(handler)

    logger.setLevel(level)
    logger.propagate = False
    logger.disabled = not settings.get("enabled", True)

    return logger


mainlog: logging.Logger = build_logger("pyTubal", tbconfig.config.logging.mainlog)
# :py:class:`logging.Logger`: The main logger for ``pyTubal``.
devlog: logging.Logger = build_logger("pyTubal-DEV", tbconfig.config.logging.devlog)
# :py:class:`logging.Logger`: The development logger for ``pyTubal``.
