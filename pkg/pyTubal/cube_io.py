"""
Reading and writing cubes, raw hyperspectral imagery and parameter files.

Notes
-----

**The HSC1 format.** A cube file is a 20 byte header followed by the payload:

========  ======  ==============================================================
Offset    Size    Content
========  ======  ==============================================================
0         4       The magic bytes ``HSC1``.
4         4       ``n1`` as a little-endian unsigned 32-bit integer.
8         4       ``n2``, same encoding.
12        4       ``n3``, same encoding.
16        1       Sample type: ``1`` = little-endian float32, ``2`` = little-endian float64.
17        3       Reserved, zero.
========  ======  ==============================================================

The payload is frontal-slice major and row major within each slice: the entry ``(i, j, t)`` sits at position
``t * n1 * n2 + i * n2 + j``. This is exactly the in-memory layout of :py:class:`structures.cube.Cube`, so reading and
writing never reorders data. Files are self-describing and round trip bit-exactly at sample type ``2``.

**Raw imagery.** Hyperspectral datasets are usually distributed as headerless binary files in one of three
interleaves: band sequential (``bsq``, one band after another), band interleaved by line (``bil``) and band
interleaved by pixel (``bip``). :py:func:`import_raw` and :py:func:`export_raw` convert between those and cubes.

**Parameter files.** Parameter sets (:py:class:`noise.NoiseSpec`, :py:class:`denoise.DenoiseConfig`) are stored as
line oriented ``key = value`` text with ``#`` comments. Values are parsed as YAML scalars, so ``[1, 3]`` is a list
and ``1e-6`` is a float. Files with a ``.yaml`` / ``.yml`` suffix are read as plain YAML instead.

Every file is written through :py:func:`atomic_write`: a failed write never leaves a partial output behind.
"""
import json
import os
import pathlib as pt
import struct
import tempfile
from contextlib import contextmanager
from typing import IO, Any, Iterator, Mapping

import numpy as np
import ruamel.yaml

from pyTubal.structures.cube import Cube
from pyTubal.utilities.errors import (
    BadDtype,
    BadLayout,
    BadMagic,
    ConfigurationError,
    CubeIOError,
    SizeMismatch,
    TruncatedFile,
)
from pyTubal.utilities.logging import devlog

MAGIC: bytes = b"HSC1"
"""bytes: The leading bytes of every HSC1 file."""
HEADER: struct.Struct = struct.Struct("<4sIIIB3x")
"""struct.Struct: The 20 byte HSC1 header."""
DTYPE_CODES: dict[int, np.dtype] = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
"""dict: HSC1 sample type codes."""

RAW_DTYPES: dict[str, str] = {
    "float32": "f4",
    "float64": "f8",
    "uint16": "u2",
    "int16": "i2",
}
"""dict: Sample types accepted by :py:func:`import_raw` and :py:func:`export_raw`."""

# Axis order of each raw interleave, expressed against the (n3, n1, n2) cube buffer.
_RAW_LAYOUTS: dict[str, tuple[int, int, int]] = {
    "bsq": (0, 1, 2),
    "bil": (1, 0, 2),
    "bip": (1, 2, 0),
}

_param_yaml = ruamel.yaml.YAML(typ="safe")


# ============================================================= #
# Atomic output                                                 #
# ============================================================= #
@contextmanager
def atomic_write(path: str | pt.Path, mode: str = "wb") -> Iterator[IO]:
    """
    Open a temporary file next to ``path`` and move it into place only if the block exits cleanly.

    Parameters
    ----------
    path: str or :py:class:`pathlib.Path`
        The final destination.
    mode: str, optional
        ``"wb"`` (default) or ``"w"``.

    Raises
    ------
    CubeIOError
        If the operating system refuses to create, write or rename the file.
    """
    path = pt.Path(path)
    text = "b" not in mode

    try:
        handle = tempfile.NamedTemporaryFile(
            mode=mode,
            dir=path.parent,
            prefix=f".{path.name}.",
            suffix=".tmp",
            delete=False,
            **(dict(encoding="utf-8", newline="") if text else {}),
        )
    except OSError as error:
        raise CubeIOError(f"Cannot create {path}: {error}.") from error

    try:
        with handle:
            yield handle
        os.replace(handle.name, path)
    except BaseException as error:
        pt.Path(handle.name).unlink(missing_ok=True)
        if isinstance(error, OSError) and not isinstance(error, CubeIOError):
            raise CubeIOError(f"Failed to write {path}: {error}.") from error
        raise

    devlog.debug(f"[io] wrote {path}.")


def _read_bytes(path: str | pt.Path) -> bytes:
    try:
        return pt.Path(path).read_bytes()
    except OSError as error:
        raise CubeIOError(f"Cannot read {path}: {error}.") from error


# ============================================================= #
# HSC1 cubes                                                    #
# ============================================================= #
def write_cube(path: str | pt.Path, x: Cube, dtype: int = 2):
    """
    Write ``x`` as an HSC1 file.

    Parameters
    ----------
    path: str or :py:class:`pathlib.Path`
        The output file.
    x: :py:class:`structures.cube.Cube`
        The cube.
    dtype: int, optional
        Sample type code: ``2`` (float64, default, bit-exact) or ``1`` (float32).
    """
    if dtype not in DTYPE_CODES:
        raise BadDtype(f"HSC1 sample type must be one of {list(DTYPE_CODES)}, got {dtype}.")

    n1, n2, n3 = x.shape
    with atomic_write(path, "wb") as handle:
        handle.write(HEADER.pack(MAGIC, n1, n2, n3, dtype))
        handle.write(x.data.astype(DTYPE_CODES[dtype], copy=False).tobytes(order="C"))


def read_header(raw: bytes) -> tuple[tuple[int, int, int], np.dtype]:
    """
    Parse and validate an HSC1 header.

    Returns
    -------
    tuple of int
        The dimensions ``(n1, n2, n3)``.
    :py:class:`numpy.dtype`
        The payload sample type.
    """
    if len(raw) < HEADER.size:
        raise TruncatedFile(f"File holds {len(raw)} bytes, shorter than the {HEADER.size} byte header.")
    if raw[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"Expected the magic bytes {MAGIC!r}, found {raw[:len(MAGIC)]!r}.")

    _, n1, n2, n3, code = HEADER.unpack_from(raw)
    if code not in DTYPE_CODES:
        raise BadDtype(f"Unknown HSC1 sample type code {code}.")
    if min(n1, n2, n3) < 1:
        raise SizeMismatch(f"HSC1 header declares empty dimensions {(n1, n2, n3)}.")

    return (n1, n2, n3), DTYPE_CODES[code]


def read_cube(path: str | pt.Path) -> Cube:
    """
    Read an HSC1 file.

    Raises
    ------
    CubeIOError
        If the file cannot be read.
    BadMagic, TruncatedFile, BadDtype, SizeMismatch
        If the file is not a well formed HSC1 file.
    """
    raw = _read_bytes(path)
    (n1, n2, n3), dtype = read_header(raw)

    expected = HEADER.size + n1 * n2 * n3 * dtype.itemsize
    if len(raw) != expected:
        raise TruncatedFile(
            f"{path}: header promises {expected} bytes for {(n1, n2, n3)}, file holds {len(raw)}."
        )

    payload = np.frombuffer(raw, dtype=dtype, offset=HEADER.size)
    return Cube(payload.reshape(n3, n1, n2).astype(np.float64))


# ============================================================= #
# Raw imagery                                                   #
# ============================================================= #
def _raw_dtype(dtype: str, byteorder: str) -> np.dtype:
    if dtype not in RAW_DTYPES:
        raise BadDtype(f"Raw sample type must be one of {list(RAW_DTYPES)}, got {dtype!r}.")
    if byteorder not in ("little", "big"):
        raise ConfigurationError(f"Byte order must be 'little' or 'big', got {byteorder!r}.")
    return np.dtype(("<" if byteorder == "little" else ">") + RAW_DTYPES[dtype])


def _raw_axes(layout: str) -> tuple[int, int, int]:
    try:
        return _RAW_LAYOUTS[layout]
    except KeyError:
        raise BadLayout(f"Raw layout must be one of {list(_RAW_LAYOUTS)}, got {layout!r}.")


def import_raw(
    path: str | pt.Path,
    n1: int,
    n2: int,
    n3: int,
    layout: str = "bsq",
    dtype: str = "float32",
    byteorder: str = "little",
) -> Cube:
    """
    Read a headerless raw hyperspectral file.

    Parameters
    ----------
    path: str or :py:class:`pathlib.Path`
        The raw file.
    n1, n2, n3: int
        Lines, samples (columns) and bands.
    layout: str, optional
        ``bsq`` (default), ``bil`` or ``bip``.
    dtype: str, optional
        ``float32`` (default), ``float64``, ``uint16`` or ``int16``. Samples are converted to float64.
    byteorder: str, optional
        ``little`` (default) or ``big``.

    Raises
    ------
    SizeMismatch
        If the file length does not equal ``n1 * n2 * n3`` samples.
    BadLayout, BadDtype
        For unsupported interleaves or sample types.
    """
    axes, sample = _raw_axes(layout), _raw_dtype(dtype, byteorder)
    raw = _read_bytes(path)

    expected = n1 * n2 * n3 * sample.itemsize
    if len(raw) != expected:
        raise SizeMismatch(
            f"{path}: {(n1, n2, n3)} {dtype} samples need {expected} bytes, file holds {len(raw)}."
        )

    # The file shape in raw order, then permuted back to (n3, n1, n2).
    cube_shape = (n3, n1, n2)
    file_shape = tuple(cube_shape[a] for a in axes)
    payload = np.frombuffer(raw, dtype=sample).reshape(file_shape)

    return Cube(np.transpose(payload, np.argsort(axes)).astype(np.float64))


def export_raw(
    path: str | pt.Path,
    x: Cube,
    layout: str = "bsq",
    dtype: str = "float32",
    byteorder: str = "little",
):
    """
    Write ``x`` as a headerless raw file; the inverse of :py:func:`import_raw`.

    Integer sample types are rounded to the nearest integer and clipped to their range.
    """
    axes, sample = _raw_axes(layout), _raw_dtype(dtype, byteorder)
    data = np.transpose(x.data, axes)

    if sample.kind in "iu":
        info = np.iinfo(sample)
        data = np.clip(np.rint(data), info.min, info.max)

    with atomic_write(path, "wb") as handle:
        handle.write(np.ascontiguousarray(data).astype(sample).tobytes(order="C"))


# ============================================================= #
# Parameter files                                               #
# ============================================================= #
def parse_scalar(value: str, where: str) -> Any:
    """Parse ``value`` as a YAML scalar (or flow collection); ``where`` names the source in errors."""
    try:
        return _param_yaml.load(value)
    except ruamel.yaml.YAMLError as error:
        raise ConfigurationError(f"{where}: cannot parse {value!r}: {error}.") from error


def read_parameter_file(path: str | pt.Path) -> dict[str, Any]:
    """
    Read a ``key = value`` parameter file (or a YAML mapping for ``.yaml`` / ``.yml`` files).

    Raises
    ------
    CubeIOError
        If the file cannot be read.
    ConfigurationError
        If a line cannot be interpreted or a key repeats.
    """
    path = pt.Path(path)
    text = _read_bytes(path).decode("utf-8")

    if path.suffix in (".yaml", ".yml"):
        mapping = parse_scalar(text, str(path))
        if not isinstance(mapping, dict):
            raise ConfigurationError(f"{path} does not hold a YAML mapping.")
        return dict(mapping)

    parameters = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue

        key, sep, value = (part.strip() for part in line.partition("="))
        where = f"{path}:{lineno}"
        if not sep or not key or not value:
            raise ConfigurationError(f"{where}: expected 'key = value', got {line!r}.")
        if key in parameters:
            raise ConfigurationError(f"{where}: duplicate key {key!r}.")

        parameters[key] = parse_scalar(value, where)

    return parameters


def write_parameter_file(path: str | pt.Path, mapping: Mapping[str, Any]):
    """
    Write ``mapping`` as a ``key = value`` parameter file readable by :py:func:`read_parameter_file`.
    """
    with atomic_write(path, "w") as handle:
        for key, value in mapping.items():
            handle.write(f"{key} = {json.dumps(value)}\n")
