"""
Text output for the ``pytubal`` command line.
"""
from importlib.metadata import PackageNotFoundError, version

from pyTubal.utilities.core import bin_directory


def get_package_version() -> str:
    """The installed ``pytubal`` version, or ``"unknown"`` when running from an uninstalled checkout."""
    try:
        return version("pytubal")
    except PackageNotFoundError:
        return "unknown"


def banner() -> str:
    """The CLI banner with the version filled in."""
    template = (bin_directory / "txt" / "asciilogo.txt").read_text()
    return template % dict(version=get_package_version())


def print_version() -> None:
    print(f"pytubal {get_package_version()}")


def print_cli_header() -> None:
    print(banner())
