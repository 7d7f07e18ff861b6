"""
Runtime comparison of the randomized t-BRP approximation against the truncated t-SVD.

Notes
-----

For every size ``n`` a planted ``n x n x n3`` cube of tubal rank ``r`` is generated and perturbed with Gaussian noise
whose Frobenius norm is ``noise_level`` times that of the planted cube. Both methods then approximate the noisy cube
at rank ``r``:

- ``tsvd_truncation``: :py:func:`factorization.truncated_tsvd`, one full SVD per Fourier slice.
- ``tbrp``: :py:func:`brp.low_tubal_rank_approx`, two random projections and an ``r x r`` solve per Fourier slice.

Errors are relative to the noisy cube, for which the truncated t-SVD is the optimal rank ``r`` approximation, so the
``rel_error`` ratio of the two methods measures the price of randomization. Wall times and errors are medians over
the trials.
"""
import pathlib as pt
import time
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from tqdm.auto import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from pyTubal.brp import derive_seed, gaussian_cube, low_tubal_rank_approx
from pyTubal.factorization import truncated_tsvd
from pyTubal.noise import planted_cube
from pyTubal.structures.cube import Cube
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.logging import devlog, mainlog

BENCH_COLUMNS: list[str] = ["method", "n1", "n2", "n3", "r", "wall_seconds", "rel_error"]
"""list of str: Column order of the benchmark CSV."""


class BenchRecord(BaseModel):
    """
    The median timing and error of one method at one size.
    """

    method: Literal["tsvd_truncation", "tbrp"]
    n1: int = Field(ge=1)
    n2: int = Field(ge=1)
    n3: int = Field(ge=1)
    r: int = Field(ge=1)
    wall_seconds: float = Field(gt=0)
    rel_error: float = Field(ge=0)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.n1, self.n2, self.n3


def noisy_planted_cube(
    n1: int, n2: int, n3: int, r: int, seed: int, noise_level: float
) -> Cube:
    """
    A planted tubal-rank ``r`` cube plus Gaussian noise of relative Frobenius norm ``noise_level``.
    """
    clean = planted_cube(n1, n2, n3, r, derive_seed(seed, 0))
    if noise_level == 0:
        return clean

    noise = gaussian_cube(n1, n2, n3, derive_seed(seed, 1))
    return clean + (noise_level * clean.norm() / noise.norm()) * noise


def _timed(func, *args, **kwargs) -> tuple[Cube, float]:
    start = time.perf_counter()
    out = func(*args, **kwargs)
    return out, time.perf_counter() - start


def run_benchmark(
    sizes: Sequence[int],
    r: int = 5,
    n3: int = 16,
    trials: int = 3,
    seed: int = 0,
    noise_level: float = 0.5,
) -> list[BenchRecord]:
    """
    Time both rank ``r`` approximations on square planted cubes.

    Parameters
    ----------
    sizes: list of int
        The spatial sizes ``n`` (cubes are ``n x n x n3``).
    r: int, optional
        The tubal rank.
    n3: int, optional
        The tube length.
    trials: int, optional
        Timed repetitions per method and size.
    seed: int, optional
        Seed for the cubes and projections.
    noise_level: float, optional
        Noise Frobenius norm relative to the planted cube.

    Returns
    -------
    list of :py:class:`BenchRecord`
        One record per ``(method, size)``, in size order with ``tsvd_truncation`` first.
    """
    if trials < 1:
        raise ValueError(f"At least one trial is needed, got {trials}.")
    if noise_level < 0:
        raise ValueError(f"Noise level must be non-negative, got {noise_level}.")

    records = []
    mainlog.info(f"[bench] sizes={list(sizes)}, r={r}, n3={n3}, trials={trials}.")

    with logging_redirect_tqdm(loggers=[mainlog]):
        for n in tqdm(
            sizes,
            desc="[bench]",
            disable=tbconfig.config.system.preferences.disable_progress_bars,
            leave=False,
        ):
            x = noisy_planted_cube(n, n, n3, r, derive_seed(seed, n), noise_level)
            x_norm = x.norm()

            timings = {"tsvd_truncation": [], "tbrp": []}
            errors = {"tsvd_truncation": [], "tbrp": []}

            for trial in range(trials):
                approx, elapsed = _timed(truncated_tsvd, x, r)
                timings["tsvd_truncation"].append(elapsed)
                errors["tsvd_truncation"].append((approx - x).norm() / x_norm)

                (approx, _), elapsed = _timed(
                    low_tubal_rank_approx, x, r, derive_seed(seed, n, trial)
                )
                timings["tbrp"].append(elapsed)
                errors["tbrp"].append((approx - x).norm() / x_norm)

            for method in ("tsvd_truncation", "tbrp"):
                record = BenchRecord(
                    method=method,
                    n1=n,
                    n2=n,
                    n3=n3,
                    r=r,
                    wall_seconds=float(np.median(timings[method])),
                    rel_error=float(np.median(errors[method])),
                )
                devlog.debug(
                    f"[bench|n={n}] {method}: {record.wall_seconds:.4f} s, error {record.rel_error:.3e}."
                )
                records.append(record)

    return records


def records_to_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    """The benchmark records as a table with :py:data:`BENCH_COLUMNS`."""
    return pd.DataFrame([record.model_dump() for record in records], columns=BENCH_COLUMNS)


def write_bench_csv(path: str | pt.Path, records: Sequence[BenchRecord]):
    """Write the benchmark records as CSV."""
    from pyTubal.cube_io import atomic_write

    with atomic_write(path, mode="w") as handle:
        records_to_frame(records).to_csv(handle, index=False)
