"""
Field types for the ``pydantic`` models of ``pyTubal``.

Notes
-----

Results carry ``numpy`` vectors (per-band metrics, per-slice ranks) and whole cubes. Neither is a native ``pydantic``
type, so the annotations below tell ``pydantic`` how to check and serialize them:

- :py:data:`PydanticArray` accepts a 1-D numeric array or list and serializes to a list.
- :py:data:`PydanticCube` accepts only a :py:class:`structures.cube.Cube` and serializes to its shape; cube payloads
  are written to ``HSC1`` files, never into JSON reports.
"""
from typing import Any

import numpy as np
from pydantic import Field, PlainSerializer, PlainValidator, WithJsonSchema
from typing_extensions import Annotated


def _as_vector(value: Any) -> np.ndarray:
    array = np.asarray(value)
    if array.ndim != 1:
        raise ValueError(f"Expected a 1-D array, got shape {array.shape}.")
    if array.size and array.dtype.kind not in "iuf":
        raise ValueError(f"Expected numeric entries, got dtype {array.dtype}.")
    return array


def _as_cube(value: Any):
    from pyTubal.structures.cube import Cube

    if not isinstance(value, Cube):
        raise ValueError(f"Expected a Cube, got {type(value).__name__}.")
    return value


PydanticArray = Annotated[
    np.ndarray,
    PlainValidator(_as_vector),
    PlainSerializer(lambda array: array.tolist(), return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "number"}}),
]
"""1-D numeric ``numpy`` array usable as a ``pydantic`` field."""

PydanticCube = Annotated[
    Any,
    PlainValidator(_as_cube),
    PlainSerializer(lambda cube: list(cube.shape), return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3}),
]
""":py:class:`structures.cube.Cube` usable as a ``pydantic`` field."""

RngSeed = Annotated[int, Field(ge=0, lt=2**64)]
"""64-bit unsigned seed. The same seed and dimensions always produce the same random cubes."""
