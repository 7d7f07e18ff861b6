r"""
Tensor singular value decomposition and the rank / norm diagnostics built on it.

Notes
-----

Every real cube factors as :math:`\mathcal{X} = \mathcal{U} \ast \mathcal{S} \ast \mathcal{V}^{*}` with
t-orthogonal :math:`\mathcal{U}, \mathcal{V}` and f-diagonal :math:`\mathcal{S}`. The factorization is an ordinary
SVD of every Fourier slice :math:`\bar{X}^{(i)}`, reassembled by the inverse DFT.

From the Fourier-slice singular values follow

- the **multi-rank** :math:`r_i = \mathrm{rank}(\bar{X}^{(i)})`,
- the **tubal rank** :math:`\max_i r_i` (the number of non-zero singular tubes of :math:`\mathcal{S}`),
- the **tensor nuclear norm** :math:`\sum_i \sum_j \sigma_j(\bar{X}^{(i)})`, kept here as a diagnostic only,
- the **truncated t-SVD**, the best tubal-rank-``r`` approximation in Frobenius norm. The randomized solver in
  :py:mod:`brp` approximates exactly this quantity.

Floating point "non-zero" is decided by a per-slice threshold; ``tol = 0`` selects
``max(n1, n2) * eps * sigma_max`` for each slice.
"""
import numpy as np
from pydantic import BaseModel, model_validator

from pyTubal.structures.cube import Cube
from pyTubal.tproduct import (
    from_half_spectrum,
    half_spectrum,
    self_conjugate_slices,
    tprod,
    ttranspose,
)
from pyTubal.utilities.errors import DimMismatch, RankOutOfRange
from pyTubal.utilities.types import PydanticArray, PydanticCube

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa


class TsvdFactors(BaseModel):
    """
    The factors ``(U, S, V)`` of a t-SVD.
    """

    u: PydanticCube
    """:py:class:`structures.cube.Cube`: The ``n1 x n1 x n3`` t-orthogonal left factor."""
    s: PydanticCube
    """:py:class:`structures.cube.Cube`: The ``n1 x n2 x n3`` f-diagonal factor."""
    v: PydanticCube
    """:py:class:`structures.cube.Cube`: The ``n2 x n2 x n3`` t-orthogonal right factor."""

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        (n1, n2, n3) = self.s.shape
        if self.u.shape != (n1, n1, n3) or self.v.shape != (n2, n2, n3):
            raise DimMismatch(
                f"Inconsistent t-SVD factors: u={self.u.shape}, s={self.s.shape}, v={self.v.shape}."
            )
        return self

    def reconstruct(self) -> Cube:
        """Return ``U * S * V^*``."""
        return tprod(tprod(self.u, self.s), ttranspose(self.v))


class MultiRank(BaseModel):
    """
    The ranks of the Fourier-domain frontal slices of a cube.
    """

    ranks: PydanticArray
    """array of int: ``ranks[i]`` is the numerical rank of Fourier slice ``i``; length ``n3``."""
    tolerance: float
    """float: The tolerance that was requested (``0`` means the automatic per-slice rule)."""
    thresholds: PydanticArray
    """array of float: The singular value threshold actually applied to each slice."""

    @property
    def tubal_rank(self) -> int:
        return int(np.max(self.ranks)) if self.ranks.size else 0


# ============================================================= #
# Fourier-slice SVD                                             #
# ============================================================= #
def _half_svd(
    half: np.ndarray, n3: int, full_matrices: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Self-conjugate slices go through a real SVD so that their factors stay real.
    u, s, vh = np.linalg.svd(half, full_matrices=full_matrices)

    for i in self_conjugate_slices(n3):
        u[i], s[i], vh[i] = np.linalg.svd(half[i].real, full_matrices=full_matrices)

    return u, s, vh


def singular_tubes(x: Cube) -> np.ndarray:
    """
    Singular values of every Fourier slice of ``x``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to analyze.

    Returns
    -------
    array
        Array of shape ``(n3, min(n1, n2))``; row ``i`` holds the non-increasing singular values of slice ``i``.
    """
    n3 = x.shape[2]
    s_half = np.linalg.svd(half_spectrum(x), compute_uv=False)
    mirror = np.minimum(np.arange(n3), n3 - np.arange(n3))
    return s_half[mirror]


def _thresholds(sigma: np.ndarray, shape: tuple[int, int, int], tol: float) -> np.ndarray:
    if tol < 0:
        raise ValueError(f"Rank tolerance must be non-negative, got {tol}.")

    if tol == 0:
        return max(shape[0], shape[1]) * np.finfo(np.float64).eps * sigma[:, 0]
    return np.full(sigma.shape[0], float(tol))


# ============================================================= #
# Operations                                                    #
# ============================================================= #
def tsvd(x: Cube) -> TsvdFactors:
    """
    Compute the t-SVD ``x = U * S * V^*``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to factor.

    Returns
    -------
    :py:class:`TsvdFactors`
        Factors whose Fourier slices are the SVDs of the Fourier slices of ``x``; singular values are
        non-negative and non-increasing in every slice.
    """
    n1, n2, n3 = x.shape
    u, s, vh = _half_svd(half_spectrum(x), n3, full_matrices=True)

    s_half = np.zeros((u.shape[0], n1, n2), dtype=np.complex128)
    diag = np.arange(s.shape[1])
    s_half[:, diag, diag] = s

    return TsvdFactors(
        u=from_half_spectrum(u, n3),
        s=from_half_spectrum(s_half, n3),
        v=from_half_spectrum(np.conj(np.swapaxes(vh, 1, 2)), n3),
    )


def multi_rank(x: Cube, tol: float = 0.0) -> MultiRank:
    """
    Numerical ranks of the Fourier slices of ``x``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to analyze.
    tol: float, optional
        Singular values strictly above ``tol`` count. ``0`` (default) selects ``max(n1, n2) * eps * sigma_max``
        separately for each slice.

    Returns
    -------
    :py:class:`MultiRank`
        The per-slice ranks.
    """
    sigma = singular_tubes(x)
    thresholds = _thresholds(sigma, x.shape, tol)

    ranks = np.sum(sigma > thresholds[:, np.newaxis], axis=1)
    return MultiRank(ranks=ranks, tolerance=float(tol), thresholds=thresholds)


def tubal_rank(x: Cube, tol: float = 0.0) -> int:
    """
    The tubal rank of ``x``: the largest entry of its multi-rank.
    """
    return multi_rank(x, tol).tubal_rank


def tnn(x: Cube) -> float:
    """
    The tensor nuclear norm: the sum of the singular values of all Fourier slices.
    """
    return float(np.sum(singular_tubes(x)))


def truncated_tsvd(x: Cube, r: int) -> Cube:
    """
    Best tubal-rank-``r`` approximation of ``x``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to approximate.
    r: int
        The number of leading singular triplets kept in every Fourier slice.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        The truncated reconstruction; its Frobenius error is the root sum of squares of the discarded singular
        values divided by ``sqrt(n3)``.

    Raises
    ------
    RankOutOfRange
        Unless ``1 <= r <= min(n1, n2)``.
    """
    n1, n2, n3 = x.shape
    if not 1 <= r <= min(n1, n2):
        raise RankOutOfRange(f"Truncation rank {r} is outside [1, {min(n1, n2)}] for {x.shape}.")

    u, s, vh = _half_svd(half_spectrum(x), n3, full_matrices=False)
    approx = (u[:, :, :r] * s[:, np.newaxis, :r]) @ vh[:, :r, :]

    return from_half_spectrum(approx, n3)
