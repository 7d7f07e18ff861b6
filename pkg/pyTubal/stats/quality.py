r"""
Full-reference quality metrics for hyperspectral cubes.

Notes
-----

Three indices compare a test cube :math:`\hat{\mathcal{X}}` with a reference :math:`\mathcal{X}`:

- **MPSNR**: the band-wise peak signal-to-noise ratio

  .. math::

      \mathrm{PSNR}_i = 10 \log_{10} \frac{\mathrm{peak}^2}{\mathrm{MSE}(X^{(i)}, \hat{X}^{(i)})},

  averaged over the bands. Identical bands have an infinite PSNR, which is reported at a finite cap (``100`` dB by
  default).
- **MSSIM**: the band-wise structural similarity index averaged over the bands. Each band uses an :math:`11 \times 11`
  Gaussian window (:math:`\sigma = 1.5`) with :math:`K_1 = 0.01, K_2 = 0.03` and a dynamic range of ``1``.
- **SAM**: the spectral angle

  .. math::

      \mathrm{SAM} = \frac{1}{|P|} \sum_{(i,j) \in P} \arccos
      \frac{\langle \mathcal{X}(i,j,:), \hat{\mathcal{X}}(i,j,:) \rangle}
      {\lVert \mathcal{X}(i,j,:) \rVert \, \lVert \hat{\mathcal{X}}(i,j,:) \rVert},

  in degrees, over the pixels :math:`P` where neither spectrum vanishes.
"""
import json
import pathlib as pt

import numpy as np
import pandas as pd
from pydantic import BaseModel, model_validator
from skimage.metrics import structural_similarity

from pyTubal.structures.cube import Cube
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import AllPixelsDegenerate, DimMismatch, TooSmall
from pyTubal.utilities.logging import mainlog
from pyTubal.utilities.optimize import map_bands
from pyTubal.utilities.types import PydanticArray

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa

_metric_settings = tbconfig.config.metrics

SSIM_WINDOW: int = 11
"""int: Side length of the SSIM window; bands must be at least this large in both spatial dimensions."""


class QualityReport(BaseModel):
    """
    The quality of a test cube relative to a reference.
    """

    mpsnr_db: float
    """float: Mean band PSNR in dB."""
    mssim: float
    """float: Mean band SSIM."""
    sam_degrees: float
    """float: Mean spectral angle in degrees."""
    per_band_psnr: PydanticArray
    """array: PSNR of every band; length ``n3``."""
    per_band_ssim: PydanticArray
    """array: SSIM of every band; length ``n3``."""

    @model_validator(mode="after")
    def check_means(self) -> Self:
        if not (
            np.isclose(self.mpsnr_db, np.mean(self.per_band_psnr))
            and np.isclose(self.mssim, np.mean(self.per_band_ssim))
        ):
            raise ValueError("Report means disagree with the per-band values.")
        if not -1 - 1e-12 <= self.mssim <= 1 + 1e-12:
            raise ValueError(f"MSSIM {self.mssim} is outside [-1, 1].")
        return self

    def summary(self) -> str:
        return f"MPSNR = {self.mpsnr_db:.3f} dB, MSSIM = {self.mssim:.4f}, SAM = {self.sam_degrees:.3f} deg"

    def row(self) -> pd.DataFrame:
        """The one-row table ``mpsnr_db, mssim, sam_degrees``."""
        return pd.DataFrame(
            [[self.mpsnr_db, self.mssim, self.sam_degrees]],
            columns=["mpsnr_db", "mssim", "sam_degrees"],
        )

    def to_json(self, path: str | pt.Path):
        """Write the full report (including per-band vectors) as JSON."""
        from pyTubal.cube_io import atomic_write

        with atomic_write(path, mode="w") as handle:
            json.dump(self.model_dump(mode="json"), handle, indent=2)

    def to_csv(self, path: str | pt.Path):
        """Write the header and the single row of :py:meth:`row` as CSV."""
        from pyTubal.cube_io import atomic_write

        with atomic_write(path, mode="w") as handle:
            self.row().to_csv(handle, index=False)


# ============================================================= #
# Band metrics                                                  #
# ============================================================= #
def _check_pair(ref: np.ndarray, test: np.ndarray):
    if ref.shape != test.shape:
        raise DimMismatch(f"Reference {ref.shape} and test {test.shape} differ in shape.")


def psnr_band(ref: np.ndarray, test: np.ndarray, peak: float = 1.0) -> float:
    """
    Peak signal-to-noise ratio of one band, in dB.

    Parameters
    ----------
    ref, test: array
        Matrices of equal shape.
    peak: float, optional
        The peak signal value. ``1`` for normalized data.

    Returns
    -------
    float
        ``10 log10(peak^2 / MSE)``, never above the configured cap (``metrics.psnr_cap_db``).
    """
    _check_pair(ref, test)
    if peak <= 0:
        raise ValueError(f"PSNR peak must be positive, got {peak}.")

    cap = float(_metric_settings.psnr_cap_db)
    mse = float(np.mean((np.asarray(ref, dtype=float) - test) ** 2))
    if mse == 0:
        return cap
    return min(cap, 10 * np.log10(peak**2 / mse))


def ssim_band(ref: np.ndarray, test: np.ndarray) -> float:
    """
    Mean structural similarity of one band.

    Raises
    ------
    DimMismatch
        If the shapes differ.
    TooSmall
        If either spatial dimension is below the 11 pixel window.
    """
    _check_pair(ref, test)
    if min(ref.shape) < SSIM_WINDOW:
        raise TooSmall(
            f"SSIM needs bands of at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {ref.shape}."
        )

    settings = _metric_settings.ssim
    return float(
        structural_similarity(
            np.asarray(ref, dtype=float),
            np.asarray(test, dtype=float),
            gaussian_weights=True,
            sigma=float(settings.sigma),
            use_sample_covariance=False,
            data_range=float(settings.data_range),
            K1=float(settings.K1),
            K2=float(settings.K2),
        )
    )


def sam(ref: Cube, test: Cube) -> float:
    """
    Mean spectral angle between the pixel spectra of two cubes, in degrees.

    Pixels where either spectrum has zero norm are skipped.

    Raises
    ------
    DimMismatch
        If the shapes differ.
    AllPixelsDegenerate
        If every pixel is skipped.
    """
    if ref.shape != test.shape:
        raise DimMismatch(f"Reference {ref.shape} and test {test.shape} differ in shape.")

    dot = np.sum(ref.data * test.data, axis=0)
    norms = np.linalg.norm(ref.data, axis=0) * np.linalg.norm(test.data, axis=0)

    valid = norms > 0
    if not valid.any():
        raise AllPixelsDegenerate(
            f"Every pixel spectrum of the {ref.shape} pair has zero norm; SAM is undefined."
        )

    cosine = np.clip(dot[valid] / norms[valid], -1.0, 1.0)
    return float(np.degrees(np.mean(np.arccos(cosine))))


# ============================================================= #
# Cube evaluation                                               #
# ============================================================= #
def evaluate(ref: Cube, test: Cube, peak: float = 1.0) -> QualityReport:
    """
    Compute MPSNR, MSSIM and SAM of ``test`` against ``ref``.

    Parameters
    ----------
    ref: :py:class:`structures.cube.Cube`
        The reference cube.
    test: :py:class:`structures.cube.Cube`
        The cube being judged.
    peak: float, optional
        PSNR peak value.

    Returns
    -------
    :py:class:`QualityReport`
        The per-band and aggregated indices. Band SSIMs run on ``system.preferences.threads`` worker threads; the
        result does not depend on the thread count.
    """
    if ref.shape != test.shape:
        raise DimMismatch(f"Reference {ref.shape} and test {test.shape} differ in shape.")

    n3 = ref.shape[2]
    mainlog.debug(f"[eval] Scoring {n3} bands of shape {ref.shape[:2]}.")

    psnr = np.array([psnr_band(ref.data[i], test.data[i], peak) for i in range(n3)])
    ssim = np.array(map_bands(ssim_band, list(ref.data), list(test.data), name="ssim"))

    return QualityReport(
        mpsnr_db=float(np.mean(psnr)),
        mssim=float(np.mean(ssim)),
        sam_degrees=sam(ref, test),
        per_band_psnr=psnr,
        per_band_ssim=ssim,
    )
