"""
Configuration access for ``pyTubal``.

Notes
-----

Solver defaults, logging and plotting options are read from ``bin/config.yaml``. Setting the ``PYTUBAL_CONFIG``
environment variable points :py:data:`tbconfig` at another file instead. Options are addressed by dotted paths such as
``solver.max_iter``:

.. code-block:: python

    >>> from pyTubal.utilities.core import tbconfig
    >>> tbconfig.config.solver.max_iter
    100
    >>> tbconfig.get("solver.max_iter")
    100

"""
import os
import pathlib as pt
from contextlib import contextmanager
from typing import Any, Iterator, Mapping

import ruamel.yaml

from pyTubal.utilities.errors import ConfigurationError

bin_directory: pt.Path = pt.Path(__file__).parents[1] / "bin"
# :py:class:`pathlib.Path`: The directory holding the configuration and CLI definitions.
config_directory: pt.Path = pt.Path(
    os.environ.get("PYTUBAL_CONFIG", bin_directory / "config.yaml")
)
# :py:class:`pathlib.Path`: The path to the active configuration file.

# Round-trip loader: comments in config.yaml survive ``set_param``.
yaml = ruamel.yaml.YAML()


class AttrDict(dict):
    """
    Nested mapping whose keys are also readable as attributes.
    """

    def __init__(self, mapping: Mapping):
        super().__init__(
            {
                key: AttrDict(value) if isinstance(value, Mapping) else value
                for key, value in mapping.items()
            }
        )

    def __getattr__(self, name: str) -> Any:
        try:
            return self[name]
        except KeyError as error:
            raise AttributeError(name) from error

    def lookup(self, path: str) -> Any:
        """
        Follow a dotted option path.

        Raises
        ------
        :py:class:`~utilities.errors.ConfigurationError`
            If the path does not name an option or section.
        """
        node = self
        for key in path.split("."):
            if not isinstance(node, Mapping) or key not in node:
                raise ConfigurationError(f"{path} is not a configuration option.")
            node = node[key]
        return node


class TubalConfiguration:
    """
    The ``pyTubal`` configuration file and any in-memory overrides applied on top of it.
    """

    def __init__(self, path: pt.Path | str):
        self.path: pt.Path = pt.Path(path)
        # :py:class:`pathlib.Path`: The underlying YAML file.
        self._raw: ruamel.yaml.CommentedMap | None = None
        self._overrides: dict[str, Any] = {}

    @staticmethod
    def read(path: pt.Path | str) -> ruamel.yaml.CommentedMap:
        """Load a configuration mapping from disk."""
        try:
            with open(path, "r") as handle:
                data = yaml.load(handle)
        except FileNotFoundError as error:
            raise ConfigurationError(f"No configuration file at {path}.") from error
        except ruamel.yaml.YAMLError as error:
            raise ConfigurationError(
                f"Configuration file {path} is not valid YAML: {error}"
            ) from error

        if not isinstance(data, Mapping):
            raise ConfigurationError(f"Configuration file {path} is not a mapping.")
        return data

    @property
    def config(self) -> AttrDict:
        """:py:class:`AttrDict`: The current options, overrides included."""
        if self._raw is None:
            self._raw = self.read(self.path)

        view = AttrDict(self._raw)
        for path, value in self._overrides.items():
            *parents, leaf = path.split(".")
            node = view
            for key in parents:
                node = node[key]
            node[leaf] = value
        return view

    def get(self, path: str) -> Any:
        """The value (or section) at a dotted ``path``."""
        return self.config.lookup(path)

    def _check_leaf(self, path: str, value: Any):
        if isinstance(self.get(path), Mapping):
            raise ConfigurationError(
                f"{path} is a section; give the full path of one option instead."
            )
        if isinstance(value, Mapping):
            raise ConfigurationError(f"{path} cannot be set to a mapping.")

    def set_param(self, path: str, value: Any):
        """
        Change one existing option on disk.

        Parameters
        ----------
        path: str
            Dotted path of the option, e.g. ``solver.max_iter``.
        value: Any
            The new value.

        Raises
        ------
        :py:class:`~utilities.errors.ConfigurationError`
            If ``path`` is unknown or names a whole section. Nothing is written in that case.
        """
        self._check_leaf(path, value)

        data = self.read(self.path)
        *parents, leaf = path.split(".")
        node = data
        for key in parents:
            node = node[key]
        node[leaf] = value

        with open(self.path, "w") as handle:
            yaml.dump(data, handle)
        self.reload()

    def reload(self):
        """Drop the cached file contents; the next access reads the file again."""
        self._raw = None

    @contextmanager
    def override(self, options: Mapping[str, Any]) -> Iterator["TubalConfiguration"]:
        """
        Replace options in memory for the duration of a ``with`` block. The file is not touched.

        .. code-block:: python

            >>> with tbconfig.override({"system.preferences.threads": 4}):
            ...     report = evaluate(ref, test)

        """
        for path, value in options.items():
            self._check_leaf(path, value)

        previous = dict(self._overrides)
        self._overrides.update(options)
        try:
            yield self
        finally:
            self._overrides = previous


tbconfig = TubalConfiguration(config_directory)
