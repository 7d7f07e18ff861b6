r"""
Synthetic corruption of hyperspectral cubes.

Notes
-----

Real hyperspectral imagery is hit by a mixture of noise processes. This module generates each of them on a
:py:class:`structures.cube.Cube` whose frontal slices are bands (``n1`` lines by ``n2`` columns):

- **Gaussian noise**: dense, i.i.d. zero-mean with standard deviation :math:`\sigma`.
- **Impulse (salt-and-pepper) noise**: a fixed fraction of all entries is replaced by ``0`` or ``1``.
- **Stripes**: groups of adjacent columns in selected bands receive a constant offset.
- **Deadlines**: groups of adjacent columns in selected bands are zeroed.

Everything except the Gaussian component is sparse and is reported through a mask. The two standard corruption
recipes are available from :py:func:`case_preset` and are applied in one call with :py:func:`synthesize`:

- **Case 1**: :math:`\sigma = 0.04` and 20% impulse noise.
- **Case 2**: :math:`\sigma = 0.02`, 20% impulse noise, plus stripes and deadlines of width 1 to 3 columns in 10
  bands each.

Every generator is a pure function of its inputs and seed.
"""
import pathlib as pt

import numpy as np
from pydantic import BaseModel, Field, model_validator

from pyTubal.brp import derive_seed, gaussian_cube
from pyTubal.structures.cube import Cube
from pyTubal.tproduct import tprod
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import RankOutOfRange, SpecExceedsDims
from pyTubal.utilities.logging import devlog, mainlog
from pyTubal.utilities.types import PydanticCube, RngSeed

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa

_noise_defaults = tbconfig.config.noise

# Seed streams used by :py:func:`synthesize`.
_IMPULSE_STREAM, _STRIPE_STREAM, _GAUSSIAN_STREAM = 1, 2, 3


class NoiseSpec(BaseModel):
    """
    A complete description of a synthetic corruption.
    """

    gaussian_sigma: float = Field(default=0.0, ge=0)
    """float: Standard deviation of the dense Gaussian component."""
    impulse_fraction: float = Field(default=0.0, ge=0, le=1)
    """float: Fraction of all entries replaced by salt-and-pepper values."""
    stripe_bands: int = Field(default=0, ge=0)
    """int: Number of bands receiving stripes."""
    stripe_width_range: tuple[int, int] = (1, 3)
    """tuple of int: Inclusive range of stripe widths, in columns."""
    deadline_bands: int = Field(default=0, ge=0)
    """int: Number of bands receiving deadlines."""
    deadline_width_range: tuple[int, int] = (1, 3)
    """tuple of int: Inclusive range of deadline widths, in columns."""
    stripe_amplitude_range: tuple[float, float] = tuple(_noise_defaults.stripe_amplitude)
    """tuple of float: Range of absolute stripe offsets; each stripe gets a random sign."""
    group_count_range: tuple[int, int] = tuple(_noise_defaults.group_count)
    """tuple of int: Inclusive range of stripe (or deadline) groups per affected band."""
    seed: RngSeed = 0
    """int: Seed of the corruption."""

    @model_validator(mode="after")
    def check_ranges(self) -> Self:
        for name in ("stripe_width_range", "deadline_width_range", "group_count_range"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 1 <= min <= max, got {(lo, hi)}.")

        lo, hi = self.stripe_amplitude_range
        if not 0 <= lo <= hi:
            raise ValueError(
                f"stripe_amplitude_range must satisfy 0 <= min <= max, got {(lo, hi)}."
            )
        return self

    def check_fits(self, shape: tuple[int, int, int]):
        """
        Raise :py:class:`~utilities.errors.SpecExceedsDims` if this specification cannot be applied to a cube of
        dimensions ``shape``.
        """
        _, n2, n3 = shape
        if self.stripe_bands > n3 or self.deadline_bands > n3:
            raise SpecExceedsDims(
                f"Cannot corrupt {max(self.stripe_bands, self.deadline_bands)} bands of a cube with n3={n3}."
            )
        if (self.stripe_bands and self.stripe_width_range[1] > n2) or (
            self.deadline_bands and self.deadline_width_range[1] > n2
        ):
            raise SpecExceedsDims(
                f"Stripe / deadline widths {self.stripe_width_range} / {self.deadline_width_range} exceed n2={n2}."
            )

    @classmethod
    def read(cls, path: str | pt.Path) -> Self:
        """
        Read a specification from a ``key = value`` (or YAML) parameter file.
        """
        from pyTubal.cube_io import read_parameter_file

        return cls(**read_parameter_file(path))

    def write(self, path: str | pt.Path):
        """
        Write this specification as a ``key = value`` parameter file.
        """
        from pyTubal.cube_io import write_parameter_file

        write_parameter_file(path, self.model_dump(mode="json"))


class SynthesisResult(BaseModel):
    """
    Output of :py:func:`synthesize`.
    """

    clean: PydanticCube
    """:py:class:`structures.cube.Cube`: The (normalized) input."""
    noisy: PydanticCube
    """:py:class:`structures.cube.Cube`: The corrupted cube."""
    mask: PydanticCube
    """:py:class:`structures.cube.Cube`: ``1`` where sparse noise was placed, ``0`` elsewhere."""
    spec: NoiseSpec

    @property
    def sparse_count(self) -> int:
        """int: Number of entries hit by sparse noise; a natural cardinality budget for denoising."""
        return self.mask.count_nonzero()


# ============================================================= #
# Generators                                                    #
# ============================================================= #
def normalize_bandwise(x: Cube) -> Cube:
    """
    Map every band affinely onto ``[0, 1]``. Constant bands become zero.
    """
    lo = np.min(x.data, axis=(1, 2), keepdims=True)
    span = np.max(x.data, axis=(1, 2), keepdims=True) - lo

    out = np.zeros_like(x.data)
    np.divide(x.data - lo, span, out=out, where=span > 0)
    return Cube(out, copy=False)


def add_gaussian(x: Cube, sigma: float, seed: int) -> Cube:
    """
    Add i.i.d. zero-mean Gaussian noise with standard deviation ``sigma``. No clipping is applied.
    """
    if sigma < 0:
        raise ValueError(f"Gaussian sigma must be non-negative, got {sigma}.")
    if sigma == 0:
        return x

    rng = np.random.default_rng(seed)
    return Cube(x.data + sigma * rng.standard_normal(x.data.shape), copy=False)


def add_impulse(x: Cube, fraction: float, seed: int) -> tuple[Cube, Cube]:
    """
    Replace exactly ``round(fraction * n1 * n2 * n3)`` entries, chosen uniformly without replacement, by ``0`` or
    ``1`` with equal probability.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to corrupt.
    fraction: float
        Fraction of entries to corrupt, in ``[0, 1]``.
    seed: int
        The RNG seed.

    Returns
    -------
    Cube
        The corrupted cube.
    Cube
        Mask with ``1`` at every corrupted position.
    """
    if not 0 <= fraction <= 1:
        raise ValueError(f"Impulse fraction must lie in [0, 1], got {fraction}.")

    count = int(round(fraction * x.size))
    out, mask = x.data.copy().ravel(), np.zeros(x.size)

    if count:
        rng = np.random.default_rng(seed)
        positions = rng.choice(x.size, size=count, replace=False)
        out[positions] = rng.integers(0, 2, size=count)
        mask[positions] = 1.0

    devlog.debug(f"[impulse] corrupted {count} of {x.size} entries.")
    return (
        Cube(out.reshape(x.data.shape), copy=False),
        Cube(mask.reshape(x.data.shape), copy=False),
    )


def _column_groups(
    rng: np.random.Generator, n2: int, width_range: tuple[int, int], group_range: tuple[int, int]
) -> list[slice]:
    groups = []
    for _ in range(rng.integers(group_range[0], group_range[1], endpoint=True)):
        width = int(rng.integers(width_range[0], width_range[1], endpoint=True))
        start = int(rng.integers(0, n2 - width, endpoint=True))
        groups.append(slice(start, start + width))
    return groups


def add_stripes_deadlines(x: Cube, spec: NoiseSpec) -> tuple[Cube, Cube]:
    """
    Add stripes and deadlines to randomly selected bands.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to corrupt.
    spec: :py:class:`NoiseSpec`
        Band counts, widths, amplitudes and seed.

    Returns
    -------
    Cube
        The corrupted cube. Stripes add a constant to every entry of the affected columns; deadlines then set their
        columns to zero.
    Cube
        Mask with ``1`` at every affected entry.

    Raises
    ------
    SpecExceedsDims
        If more bands are requested than exist or a width exceeds ``n2``.
    """
    spec.check_fits(x.shape)
    _, n2, n3 = x.shape
    rng = np.random.default_rng(spec.seed)

    out, mask = x.data.copy(), np.zeros_like(x.data)

    # Stripe and deadline bands are drawn independently and may overlap.
    for band in rng.choice(n3, size=spec.stripe_bands, replace=False):
        for columns in _column_groups(
            rng, n2, spec.stripe_width_range, spec.group_count_range
        ):
            amplitude = rng.uniform(*spec.stripe_amplitude_range) * rng.choice([-1.0, 1.0])
            out[band, :, columns] += amplitude
            mask[band, :, columns] = 1.0

    for band in rng.choice(n3, size=spec.deadline_bands, replace=False):
        for columns in _column_groups(
            rng, n2, spec.deadline_width_range, spec.group_count_range
        ):
            out[band, :, columns] = 0.0
            mask[band, :, columns] = 1.0

    return Cube(out, copy=False), Cube(mask, copy=False)


# ============================================================= #
# Recipes                                                       #
# ============================================================= #
def case_preset(case: int, seed: int = 0) -> NoiseSpec:
    """
    The standard corruption recipes.

    Parameters
    ----------
    case: int
        ``1`` (Gaussian plus impulse) or ``2`` (Gaussian, impulse, stripes and deadlines).
    seed: int, optional
        Seed of the corruption.
    """
    match case:
        case 1:
            return NoiseSpec(gaussian_sigma=0.04, impulse_fraction=0.2, seed=seed)
        case 2:
            return NoiseSpec(
                gaussian_sigma=0.02,
                impulse_fraction=0.2,
                stripe_bands=10,
                stripe_width_range=(1, 3),
                deadline_bands=10,
                deadline_width_range=(1, 3),
                seed=seed,
            )
        case _:
            raise ValueError(f"Unknown corruption case {case}; expected 1 or 2.")


def synthesize(x: Cube, spec: NoiseSpec, normalize: bool = True) -> SynthesisResult:
    """
    Apply a full corruption recipe.

    The order is: band-wise normalization, impulse noise, stripes and deadlines, Gaussian noise. Each stage draws from
    its own seed stream derived from ``spec.seed``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The clean cube.
    spec: :py:class:`NoiseSpec`
        The corruption.
    normalize: bool, optional
        Normalize every band to ``[0, 1]`` first (default).

    Returns
    -------
    :py:class:`SynthesisResult`
        The clean reference, the corrupted cube and the union of the sparse-noise masks.
    """
    spec.check_fits(x.shape)
    mainlog.info(
        f"[synth] Corrupting {x.shape}: sigma={spec.gaussian_sigma}, impulse={spec.impulse_fraction}, "
        f"stripe bands={spec.stripe_bands}, deadline bands={spec.deadline_bands}."
    )

    clean = normalize_bandwise(x) if normalize else x

    noisy, impulse_mask = add_impulse(
        clean, spec.impulse_fraction, derive_seed(spec.seed, _IMPULSE_STREAM)
    )
    noisy, line_mask = add_stripes_deadlines(
        noisy, spec.model_copy(update={"seed": derive_seed(spec.seed, _STRIPE_STREAM)})
    )
    noisy = add_gaussian(noisy, spec.gaussian_sigma, derive_seed(spec.seed, _GAUSSIAN_STREAM))

    mask = Cube(np.maximum(impulse_mask.data, line_mask.data), copy=False)
    return SynthesisResult(clean=clean, noisy=noisy, mask=mask, spec=spec)


def planted_cube(
    n1: int, n2: int, n3: int, r: int, seed: int, nonnegative: bool = False
) -> Cube:
    """
    A random cube of exact tubal rank ``r``, built as the t-product of an ``n1 x r x n3`` and an ``r x n2 x n3``
    factor.

    Parameters
    ----------
    n1, n2, n3: int
        The cube dimensions.
    r: int
        The tubal rank, ``1 <= r <= min(n1, n2)``.
    seed: int
        The RNG seed.
    nonnegative: bool, optional
        Draw the factors uniformly on ``[0, 1)`` and scale the product so that its largest entry is ``1``. Otherwise
        the factors are standard normal.
    """
    if not 1 <= r <= min(n1, n2):
        raise RankOutOfRange(f"Planted rank {r} is outside [1, {min(n1, n2)}].")

    if nonnegative:
        rng = np.random.default_rng(seed)
        left = Cube(rng.random((n3, n1, r)), copy=False)
        right = Cube(rng.random((n3, r, n2)), copy=False)
        product = tprod(left, right)
        return Cube(product.data / product.max_abs(), copy=False)

    return tprod(
        gaussian_cube(n1, r, n3, derive_seed(seed, 1)),
        gaussian_cube(r, n2, n3, derive_seed(seed, 2)),
    )
