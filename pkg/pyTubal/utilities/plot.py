"""
Band images of hyperspectral cubes.

Notes
-----

Every figure is drawn under the ``plotting.defaults`` rc settings of the configuration file. Histogram equalization
uses :py:func:`skimage.exposure.equalize_hist`.
"""
import functools
import pathlib as pt
from typing import Sequence

import numpy as np
from matplotlib import pyplot as plt
from skimage import exposure

from pyTubal.cube_io import atomic_write
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.logging import devlog


def _enforce_style(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with plt.rc_context(dict(tbconfig.config.plotting.defaults)):
            return func(*args, **kwargs)

    return wrapper


def equalize_band(band: np.ndarray, bins: int = 256) -> np.ndarray:
    """
    Histogram-equalize one band into ``[0, 1]``. A constant band maps to zeros.
    """
    band = np.asarray(band, dtype=float)
    if np.ptp(band) == 0:
        return np.zeros_like(band)
    return exposure.equalize_hist(band, nbins=bins)


@_enforce_style
def plot_band(
    band: np.ndarray,
    fig: plt.Figure = None,
    ax: plt.Axes = None,
    equalize: bool = False,
    title: str = None,
    **kwargs,
):
    """
    Display one band (an ``n1 x n2`` frontal slice) as an image.

    Parameters
    ----------
    band: array
        The band image.
    fig: :py:class:`matplotlib.Figure`, optional
        The figure to draw in.
    ax: :py:class:`matplotlib.Axes`, optional
        The axes to draw in.
    equalize: bool, optional
        Apply :py:func:`equalize_band` before display.
    title: str, optional
        The axes title.
    kwargs
        Passed on to ``imshow``.

    Returns
    -------
    fig
    ax
    """
    if fig is None:
        fig = plt.figure()
    if ax is None:
        ax = fig.add_subplot(111)

    image = equalize_band(band) if equalize else np.asarray(band)
    kwargs.setdefault("cmap", tbconfig.config.plotting.band_defaults.cmap)
    kwargs.setdefault("vmin", 0.0 if equalize else float(np.amin(image)))
    kwargs.setdefault("vmax", 1.0 if equalize else float(np.amax(image)))

    ax.imshow(image, **kwargs)
    ax.set_xticks([])
    ax.set_yticks([])
    if title is not None:
        ax.set_title(title)

    return fig, ax


def save_band_images(
    cube,
    directory: str | pt.Path,
    bands: Sequence[int] = None,
    equalize: bool = False,
    prefix: str = "band",
) -> list[pt.Path]:
    """
    Write one PNG per band of a :py:class:`structures.cube.Cube`.

    Parameters
    ----------
    cube: :py:class:`structures.cube.Cube`
        The cube to render.
    directory: str or :py:class:`pathlib.Path`
        Output directory; created if missing. Nothing is written unless every requested band exists.
    bands: list of int, optional
        The (0-based) bands to render. Defaults to all of them.
    equalize: bool, optional
        Histogram-equalize every band.
    prefix: str, optional
        File name prefix; files are named ``<prefix>_<band>.png``.

    Returns
    -------
    list of :py:class:`pathlib.Path`
        The files written.
    """
    n3 = cube.shape[2]
    bands = list(range(n3) if bands is None else bands)
    missing = [band for band in bands if not 0 <= band < n3]
    if missing:
        raise IndexError(f"Band(s) {missing} do not exist in a cube with {n3} bands.")

    directory = pt.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    for band in bands:
        fig, _ = plot_band(cube.frontal_slice(band), equalize=equalize, title=f"Band {band}")
        path = directory / f"{prefix}_{band:04d}.png"
        try:
            with atomic_write(path) as handle:
                fig.savefig(handle, format="png", dpi=tbconfig.config.plotting.band_defaults.dpi)
        finally:
            plt.close(fig)

        devlog.debug(f"[slices] wrote {path}.")
        written.append(path)

    return written
