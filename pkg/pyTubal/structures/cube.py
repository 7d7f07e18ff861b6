r"""
Dense three-way cubes and their Fourier-domain counterparts.

Notes
-----

A :py:class:`Cube` is an :math:`n_1 \times n_2 \times n_3` real array. Every algorithm in ``pyTubal`` treats the
third mode as special: frontal slices :math:`A^{(i)} = A(:,:,i)` are matrices and tubes :math:`A(i,j,:)` are signals
which get transformed with the DFT.

Storage is **frontal-slice major**: the underlying buffer has shape ``(n3, n1, n2)`` in C order, so that each
frontal slice is a contiguous matrix and batched ``numpy`` linear algebra runs directly over the leading axis.
Users never see that ordering unless they ask for :py:attr:`Cube.data`; :py:meth:`Cube.from_array` and
:py:meth:`Cube.to_array` speak the conventional ``(n1, n2, n3)`` shape.

Both classes are immutable. Their buffers are flagged read-only and every operation returns a new object, which
makes them safe to share between threads.
"""
from numbers import Number

import numpy as np

from pyTubal.utilities.errors import DimMismatch, NonFiniteCube

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa


class _BaseCube:
    """
    Shared storage and accessors for :py:class:`Cube` and :py:class:`SpectralCube`.
    """

    __slots__ = ("_data",)
    _dtype: type = np.float64

    def __init__(self, data: np.ndarray, copy: bool = True):
        """
        Initialize the cube from a slice-major buffer.

        Parameters
        ----------
        data: array
            Array of shape ``(n3, n1, n2)``.
        copy: bool, optional
            If ``False`` and ``data`` already has the right dtype, the buffer is adopted without copying. The caller
            must not modify it afterwards.
        """
        if copy:
            data = np.array(data, dtype=self._dtype, order="C")
        else:
            data = np.ascontiguousarray(data, dtype=self._dtype)

        if data.ndim != 3 or min(data.shape) < 1:
            raise DimMismatch(
                f"{self.__class__.__name__} requires a non-empty 3-way array, got shape {data.shape}."
            )
        if not np.isfinite(data).all():
            raise NonFiniteCube(
                f"{self.__class__.__name__} of shape {self._as_user_shape(data.shape)} contains NaN or Inf."
            )

        data.setflags(write=False)
        self._data = data

    @staticmethod
    def _as_user_shape(shape: tuple[int, int, int]) -> tuple[int, int, int]:
        return shape[1], shape[2], shape[0]

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.shape}>"

    # ------------------------------------------------ #
    # Accessors                                        #
    # ------------------------------------------------ #
    @property
    def data(self) -> np.ndarray:
        """array: The read-only slice-major buffer of shape ``(n3, n1, n2)``."""
        return self._data

    @property
    def shape(self) -> tuple[int, int, int]:
        """tuple of int: The cube dimensions ``(n1, n2, n3)``."""
        return self._as_user_shape(self._data.shape)

    @property
    def size(self) -> int:
        return self._data.size

    def frontal_slice(self, i: int) -> np.ndarray:
        """
        Return the (0-based) frontal slice ``i`` as an ``n1 x n2`` matrix.
        """
        return self._data[i]

    def tube(self, i: int, j: int) -> np.ndarray:
        """
        Return the tube ``A(i, j, :)`` as a length ``n3`` vector.
        """
        return self._data[:, i, j]

    def to_array(self) -> np.ndarray:
        """
        Return a writable copy of the cube in the conventional ``(n1, n2, n3)`` layout.
        """
        return np.ascontiguousarray(np.transpose(self._data, (1, 2, 0)))

    def norm(self) -> float:
        """The Frobenius norm of the cube."""
        return float(np.linalg.norm(self._data.ravel()))

    def max_abs(self) -> float:
        """The largest entry magnitude."""
        return float(np.max(np.abs(self._data)))

    def count_nonzero(self) -> int:
        return int(np.count_nonzero(self._data))

    @classmethod
    def from_array(cls, array: np.ndarray) -> Self:
        """
        Build a cube from an array in the conventional ``(n1, n2, n3)`` layout.

        Two dimensional arrays are read as a single frontal slice (``n3 = 1``).
        """
        array = np.asarray(array)
        if array.ndim == 2:
            array = array[:, :, np.newaxis]
        if array.ndim != 3:
            raise DimMismatch(f"Expected a 2 or 3-way array, got shape {array.shape}.")

        return cls(np.transpose(array, (2, 0, 1)))

    @classmethod
    def zeros(cls, n1: int, n2: int, n3: int) -> Self:
        return cls(np.zeros((n3, n1, n2), dtype=cls._dtype), copy=False)

    # ------------------------------------------------ #
    # Arithmetic                                       #
    # ------------------------------------------------ #
    def _check_conformable(self, other: "_BaseCube"):
        if self.shape != other.shape:
            raise DimMismatch(
                f"Cannot combine cubes of shape {self.shape} and {other.shape}."
            )

    def __add__(self, other: Self) -> Self:
        if not isinstance(other, _BaseCube):
            return NotImplemented
        self._check_conformable(other)
        return self.__class__(self._data + other._data, copy=False)

    def __sub__(self, other: Self) -> Self:
        if not isinstance(other, _BaseCube):
            return NotImplemented
        self._check_conformable(other)
        return self.__class__(self._data - other._data, copy=False)

    def __neg__(self) -> Self:
        return self.__class__(-self._data, copy=False)

    def __mul__(self, other: Number) -> Self:
        if not isinstance(other, Number):
            return NotImplemented
        return self.__class__(self._data * other, copy=False)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, _BaseCube):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None


class Cube(_BaseCube):
    r"""
    Dense real three-way tensor :math:`\mathcal{A} \in \mathbb{R}^{n_1 \times n_2 \times n_3}`.

    Notes
    -----

    Cubes house every spatial-domain quantity of the library: observed data :math:`\mathcal{X}`, the low-rank
    estimate :math:`\mathcal{L}`, the sparse estimate :math:`\mathcal{S}`, random projection tensors and the t-SVD
    factors. Values are unitless; hyperspectral data is conventionally normalized to :math:`[0,1]` but this is not
    enforced.
    """

    __slots__ = ()
    _dtype = np.float64


class SpectralCube(_BaseCube):
    r"""
    Complex three-way tensor holding the DFT of a :py:class:`Cube` along the third mode.

    Frontal slice ``i`` is :math:`\bar{A}^{(i)}`, the ``i``-th diagonal block of the block-diagonalized
    block-circulant matrix of :math:`\mathcal{A}`.
    """

    __slots__ = ()
    _dtype = np.complex128

    def is_conjugate_symmetric(self, rtol: float = 1e-10) -> bool:
        """
        Check that slice ``i`` equals the conjugate of slice ``n3 - i`` (0-based), as it must for the transform of
        a real cube.

        Parameters
        ----------
        rtol: float, optional
            Tolerance relative to the largest entry magnitude.
        """
        n3 = self._data.shape[0]
        mirrored = np.conj(self._data[(-np.arange(n3)) % n3])
        scale = max(self.max_abs(), np.finfo(np.float64).tiny)
        return bool(np.max(np.abs(self._data - mirrored)) <= rtol * scale)
