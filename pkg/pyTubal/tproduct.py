r"""
The t-product algebra on three-way cubes.

Notes
-----

The block-circulant matrix :math:`\mathrm{bcirc}(\mathcal{A})` built from the frontal slices of a cube is
block-diagonalized by the DFT along the third mode,

.. math::

    (F_{n_3} \otimes I_{n_1})\, \mathrm{bcirc}(\mathcal{A})\, (F_{n_3}^{-1} \otimes I_{n_2})
    = \mathrm{diag}(\bar{A}^{(1)}, \dots, \bar{A}^{(n_3)}),

so the t-product :math:`\mathcal{A} \ast \mathcal{B} = \mathrm{fold}(\mathrm{bcirc}(\mathcal{A})\,
\mathrm{unfold}(\mathcal{B}))` is computed as slice-wise matrix products :math:`\bar{A}^{(i)} \bar{B}^{(i)}` followed
by an inverse DFT. Transpose, identity and inverse are defined the same way.

The forward DFT is unnormalized and the inverse carries :math:`1/n_3`.

For a real cube the transformed slices are conjugate symmetric, :math:`\bar{A}^{(n_3 - i)} = \mathrm{conj}(\bar{A}^{(i)})`
(0-based), so only the first ``n3 // 2 + 1`` slices are ever computed. :py:func:`half_spectrum` and
:py:func:`from_half_spectrum` are the two halves of that economy and every other module in the package routes its
Fourier work through them.
"""
import numpy as np
import scipy.fft

from pyTubal.structures.cube import Cube, SpectralCube
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import DimMismatch, SingularSlice, SymmetryViolation
from pyTubal.utilities.logging import devlog

_symmetry_tol: float = float(tbconfig.config.solver.symmetry_tol)
_singular_factor: float = float(tbconfig.config.solver.singular_factor)


# ============================================================= #
# Half-spectrum helpers                                         #
# ============================================================= #
def self_conjugate_slices(n3: int) -> list[int]:
    """
    The (0-based) Fourier slices which are their own mirror image and therefore real for real input.
    """
    return [0, n3 // 2] if (n3 % 2 == 0 and n3 > 1) else [0]


def half_spectrum(x: Cube) -> np.ndarray:
    """
    Return the first ``n3 // 2 + 1`` Fourier slices of ``x``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to transform.

    Returns
    -------
    array
        Complex array of shape ``(n3 // 2 + 1, n1, n2)``.
    """
    return scipy.fft.rfft(x.data, axis=0)


def from_half_spectrum(half: np.ndarray, n3: int) -> Cube:
    """
    Invert :py:func:`half_spectrum` after checking that the self-conjugate slices are real.

    Parameters
    ----------
    half: array
        Complex array of shape ``(n3 // 2 + 1, a, b)``.
    n3: int
        The tube length of the output.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        The real ``a x b x n3`` cube.

    Raises
    ------
    SymmetryViolation
        If the imaginary part of a self-conjugate slice exceeds the configured relative tolerance.
    """
    scale = np.max(np.abs(half)) if half.size else 0.0

    for i in self_conjugate_slices(n3):
        residue = np.max(np.abs(half[i].imag))
        if residue > _symmetry_tol * scale:
            raise SymmetryViolation(
                f"Fourier slice {i} should be real but carries imaginary residue {residue:.3e} "
                f"(scale {scale:.3e})."
            )

    return Cube(scipy.fft.irfft(half, n=n3, axis=0), copy=False)


def slice_conditions(slices: np.ndarray) -> np.ndarray:
    """
    2-norm condition numbers of a batch of square slices. Singular slices report ``inf``.
    """
    sigma = np.linalg.svd(slices, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = sigma[..., 0] / sigma[..., -1]
    cond[~np.isfinite(cond)] = np.inf
    return cond


def singular_limit() -> float:
    """The condition number above which a slice counts as numerically singular."""
    return 1.0 / (_singular_factor * np.finfo(np.float64).eps)


def check_conditioning(slices: np.ndarray, error: type[SingularSlice] = SingularSlice):
    """
    Raise ``error`` for the first slice whose condition number exceeds :py:func:`singular_limit`.
    """
    cond = slice_conditions(slices)
    devlog.debug(f"[conditioning] max slice condition = {np.max(cond):.3e}.")

    bad = np.flatnonzero(cond > singular_limit())
    if bad.size:
        raise error(int(bad[0]), float(cond[bad[0]]))


# ============================================================= #
# Transforms                                                    #
# ============================================================= #
def dft_tubes(x: Cube) -> SpectralCube:
    """
    Replace every tube of ``x`` with its unnormalized forward DFT.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to transform.

    Returns
    -------
    :py:class:`structures.cube.SpectralCube`
        The full spectral cube; dimensions are preserved.
    """
    return SpectralCube(scipy.fft.fft(x.data, axis=0), copy=False)


def idft_tubes(xf: SpectralCube) -> Cube:
    """
    Inverse DFT (with ``1/n3`` normalization) of every tube of ``xf``.

    Parameters
    ----------
    xf: :py:class:`structures.cube.SpectralCube`
        A conjugate-symmetric spectral cube.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        The real cube. The imaginary residue is discarded once it has been checked.

    Raises
    ------
    SymmetryViolation
        If the largest imaginary magnitude of the inverse exceeds ``symmetry_tol * max|xf|``.
    """
    out = scipy.fft.ifft(xf.data, axis=0)
    residue = np.max(np.abs(out.imag))

    if residue > _symmetry_tol * xf.max_abs():
        raise SymmetryViolation(
            f"Inverse DFT of {xf} left imaginary residue {residue:.3e}; the spectral cube is not conjugate symmetric."
        )

    return Cube(out.real)


# ============================================================= #
# t-product algebra                                             #
# ============================================================= #
def tprod(a: Cube, b: Cube) -> Cube:
    """
    The t-product ``a * b``.

    Parameters
    ----------
    a: :py:class:`structures.cube.Cube`
        Cube of shape ``(n1, n2, n3)``.
    b: :py:class:`structures.cube.Cube`
        Cube of shape ``(n2, l, n3)``.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        Cube of shape ``(n1, l, n3)``.

    Raises
    ------
    DimMismatch
        If the inner dimensions or tube lengths disagree.
    """
    (n1, n2, n3), (m2, _, m3) = a.shape, b.shape
    if n2 != m2 or n3 != m3:
        raise DimMismatch(f"Cannot form the t-product of {a.shape} and {b.shape}.")

    return from_half_spectrum(half_spectrum(a) @ half_spectrum(b), n3)


def ttranspose(a: Cube) -> Cube:
    """
    Conjugate transpose under the t-product.

    Slice 1 is transposed; slices 2..n3 are transposed and taken in reverse order, so that each Fourier slice of
    the result is the Hermitian transpose of the matching Fourier slice of ``a``.
    """
    n3 = a.shape[2]
    return Cube(np.transpose(a.data[(-np.arange(n3)) % n3], (0, 2, 1)))


def identity_tensor(n: int, n3: int) -> Cube:
    """
    The ``n x n x n3`` identity: first frontal slice is the identity matrix, the rest are zero.
    """
    if n < 1 or n3 < 1:
        raise DimMismatch(f"Identity tensor dimensions must be positive, got n={n}, n3={n3}.")

    data = np.zeros((n3, n, n))
    data[0] = np.eye(n)
    return Cube(data, copy=False)


def tinverse(a: Cube) -> Cube:
    """
    The t-product inverse of a square cube, computed slice-wise in the Fourier domain.

    Parameters
    ----------
    a: :py:class:`structures.cube.Cube`
        Cube of shape ``(n, n, n3)``.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        The cube ``a^-1`` with ``a * a^-1 = a^-1 * a = I``.

    Raises
    ------
    DimMismatch
        If ``a`` is not square in its first two modes.
    SingularSlice
        If a Fourier slice's condition number exceeds ``1 / (singular_factor * eps)``.
    """
    n1, n2, n3 = a.shape
    if n1 != n2:
        raise DimMismatch(f"Only square cubes can be inverted, got {a.shape}.")

    half = half_spectrum(a)
    check_conditioning(half)

    return from_half_spectrum(np.linalg.inv(half), n3)
