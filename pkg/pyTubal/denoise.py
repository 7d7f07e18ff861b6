r"""
Constrained low-tubal-rank recovery of hyperspectral cubes (CLTRTR).

Notes
-----

An observed cube is modelled as :math:`\mathcal{X} = \mathcal{L} + \mathcal{S} + \mathcal{N}`: a low-tubal-rank clean
part, a sparse part (impulse noise, stripes, deadlines) and dense Gaussian noise. The recovery problem

.. math::

    \min_{\mathcal{L}, \mathcal{S}} \; \lVert \mathcal{X} - \mathcal{L} - \mathcal{S} \rVert_F^2
    \quad \text{s.t.} \quad \mathrm{rank}_t(\mathcal{L}) \le r, \;\; \mathrm{card}(\mathcal{S}) \le k

is solved by alternating between

- the **L-step** :math:`\mathcal{L}^t = \mathrm{tBRP}_r(\mathcal{X} - \mathcal{S}^{t-1})` (:py:mod:`brp`), and
- the **S-step** :math:`\mathcal{S}^t = \mathcal{H}_k(\mathcal{X} - \mathcal{L}^t)`, entry-wise hard thresholding,

until the relative squared residual :math:`\lVert \mathcal{X} - \mathcal{L}^t - \mathcal{S}^t \rVert_F^2 /
\lVert \mathcal{X} \rVert_F^2` drops below :math:`\epsilon`. The Gaussian part is never materialized; it is whatever
residual remains.

The L-step is randomized, so the objective is not guaranteed to decrease monotonically. The residual of every
iteration is recorded and the solver stops early (returning the best iterate) after ``divergence_patience``
consecutive increases.
"""
import pathlib as pt
import time
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator
from tqdm.auto import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from pyTubal.brp import derive_seed, low_tubal_rank_approx
from pyTubal.factorization import tubal_rank
from pyTubal.structures.cube import Cube
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import DimMismatch, ZeroInput
from pyTubal.utilities.logging import devlog, mainlog
from pyTubal.utilities.types import PydanticCube, RngSeed

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa

_solver_defaults = tbconfig.config.solver


class DenoiseConfig(BaseModel):
    """
    Parameters of a CLTRTR run.
    """

    r: int = Field(ge=1)
    """int: The tubal rank budget of the clean estimate."""
    k: int = Field(ge=0)
    """int: The cardinality budget of the sparse estimate."""
    eps: float = Field(default=float(_solver_defaults.eps), gt=0, lt=1)
    """float: Relative squared residual at which iterations stop."""
    max_iter: int = Field(default=int(_solver_defaults.max_iter), ge=1)
    """int: Hard cap on outer iterations."""
    seed: RngSeed = 0
    """int: Seed from which every random projection of the run is derived."""
    rank_tol: float = Field(default=float(_solver_defaults.rank_tol), ge=0)
    """float: Rank-check tolerance of the t-BRP step (``0`` = automatic)."""
    max_restarts: int = Field(default=int(_solver_defaults.max_restarts), ge=0)
    """int: Shrink-and-retry rounds allowed in each t-BRP step."""
    divergence_patience: int = Field(
        default=int(_solver_defaults.divergence_patience), ge=1
    )
    """int: Consecutive residual increases tolerated before the solver stops."""

    @staticmethod
    def card_from_fraction(fraction: float, shape: tuple[int, ...]) -> int:
        """
        Translate a fraction of the total number of entries into a cardinality budget.

        Parameters
        ----------
        fraction: float
            Fraction in ``[0, 1]``.
        shape: tuple of int
            The cube dimensions.
        """
        if not 0 <= fraction <= 1:
            raise ValueError(f"Cardinality fraction must lie in [0, 1], got {fraction}.")
        return int(round(fraction * int(np.prod(shape))))

    @classmethod
    def read(cls, path: str | pt.Path) -> Self:
        """
        Read a configuration from a ``key = value`` (or YAML) parameter file.
        """
        from pyTubal.cube_io import read_parameter_file

        return cls(**read_parameter_file(path))

    def write(self, path: str | pt.Path):
        """
        Write this configuration as a ``key = value`` parameter file.
        """
        from pyTubal.cube_io import write_parameter_file

        write_parameter_file(path, self.model_dump(mode="json"))


class DenoiseResult(BaseModel):
    """
    Output of :py:func:`denoise`.
    """

    l: PydanticCube  # noqa: E741
    """:py:class:`structures.cube.Cube`: The clean (low-tubal-rank) estimate."""
    s: PydanticCube
    """:py:class:`structures.cube.Cube`: The sparse estimate."""
    iterations: int
    """int: Number of outer iterations run."""
    residual_history: list[float]
    """list of float: Relative squared residual after every iteration."""
    effective_rank_history: list[int]
    """list of int: Effective t-BRP rank used in every iteration."""
    elapsed_seconds: float
    """float: Wall-clock time of the run."""
    stop_reason: Literal["converged", "max_iter", "diverged"]
    """str: Why the iterations stopped."""
    best_iteration: int
    """int: The (1-based) iteration whose iterate is returned."""
    config: DenoiseConfig
    """:py:class:`DenoiseConfig`: The configuration of the run."""

    @model_validator(mode="after")
    def check_constraints(self) -> Self:
        if not np.all(np.isfinite(self.residual_history)):
            raise ValueError("Residual history contains non-finite values.")
        if self.s.count_nonzero() > self.config.k:
            raise ValueError(
                f"Sparse estimate has {self.s.count_nonzero()} entries, more than k={self.config.k}."
            )
        if self.residual_history and not (
            self.residual_history[-1] <= self.config.eps
            or self.iterations == self.config.max_iter
            or self.stop_reason == "diverged"
        ):
            raise ValueError("Solver stopped before convergence without a reason.")
        return self

    @property
    def final_residual(self) -> float:
        return self.residual_history[self.best_iteration - 1]

    def satisfies_constraints(self) -> bool:
        """
        Check both model constraints: ``rank_t(L) <= r`` and ``card(S) <= k``.
        """
        return (
            tubal_rank(self.l, self.config.rank_tol) <= self.config.r
            and self.s.count_nonzero() <= self.config.k
        )

    def report(self) -> dict:
        """
        The JSON report of this run.
        """
        return dict(
            iterations=self.iterations,
            final_residual=self.final_residual,
            residual_history=list(self.residual_history),
            effective_rank_history=list(self.effective_rank_history),
            elapsed_seconds=self.elapsed_seconds,
            stop_reason=self.stop_reason,
            best_iteration=self.best_iteration,
            config=self.config.model_dump(mode="json"),
        )


# ============================================================= #
# Operators                                                     #
# ============================================================= #
def hard_threshold(x: Cube, k: int) -> Cube:
    """
    Keep the ``k`` largest-magnitude entries of ``x`` and zero the rest.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to threshold.
    k: int
        Number of entries kept.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        Cube with exactly ``min(k, count_nonzero(x))`` non-zero entries. Ties at the boundary keep the lower linear
        index (frontal-slice major order).
    """
    if k < 0:
        raise ValueError(f"Cardinality must be non-negative, got {k}.")

    flat = x.data.ravel()
    if k == 0:
        return Cube.zeros(*x.shape)
    if k >= flat.size:
        return x

    magnitude = np.abs(flat)
    kth = np.partition(magnitude, flat.size - k)[flat.size - k]

    above = np.flatnonzero(magnitude > kth)
    ties = np.flatnonzero(magnitude == kth)[: k - above.size]

    out = np.zeros_like(flat)
    keep = np.concatenate([above, ties])
    out[keep] = flat[keep]

    return Cube(out.reshape(x.data.shape), copy=False)


def objective(x: Cube, l: Cube, s: Cube) -> float:  # noqa: E741
    """
    The model objective ``||x - l - s||_F^2``.
    """
    if not x.shape == l.shape == s.shape:
        raise DimMismatch(
            f"Objective requires conformable cubes, got {x.shape}, {l.shape}, {s.shape}."
        )
    return float(np.sum((x.data - l.data - s.data) ** 2))


# ============================================================= #
# Solver                                                        #
# ============================================================= #
def denoise(x: Cube, cfg: DenoiseConfig) -> DenoiseResult:
    """
    Split ``x`` into a low-tubal-rank part and a sparse part.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The observed cube.
    cfg: :py:class:`DenoiseConfig`
        The solver parameters.

    Returns
    -------
    :py:class:`DenoiseResult`
        The estimates and the iteration record.

    Raises
    ------
    ZeroInput
        If ``x`` is the zero cube.
    RestartLimitExceeded
        Propagated from the t-BRP step.
    """
    start = time.perf_counter()

    x_energy = float(np.sum(x.data**2))
    if x_energy == 0:
        raise ZeroInput("CLTRTR needs a non-zero cube; the relative residual is undefined.")

    mainlog.info(
        f"[CLTRTR] Denoising {x.shape} with r={cfg.r}, k={cfg.k}, eps={cfg.eps:.1e}."
    )

    low_rank, sparse = Cube.zeros(*x.shape), Cube.zeros(*x.shape)
    best = (np.inf, 0, low_rank, sparse)
    residual, previous, increases = 1.0, np.inf, 0
    residuals, ranks = [], []
    stop_reason = "max_iter"

    with logging_redirect_tqdm(loggers=[mainlog]):
        pbar = tqdm(
            desc="[CLTRTR]",
            total=cfg.max_iter,
            disable=tbconfig.config.system.preferences.disable_progress_bars,
            leave=False,
        )

        iteration = 0
        while residual > cfg.eps and iteration < cfg.max_iter:
            iteration += 1

            low_rank, effective_r = low_tubal_rank_approx(
                x - sparse,
                cfg.r,
                derive_seed(cfg.seed, iteration),
                tol=cfg.rank_tol,
                max_restarts=cfg.max_restarts,
            )
            sparse = hard_threshold(x - low_rank, cfg.k)

            residual = objective(x, low_rank, sparse) / x_energy
            residuals.append(residual)
            ranks.append(effective_r)
            devlog.debug(
                f"[CLTRTR|it={iteration}] residual={residual:.3e}, effective r={effective_r}."
            )
            pbar.update()
            pbar.set_postfix(residual=f"{residual:.2e}")

            if residual < best[0]:
                best = (residual, iteration, low_rank, sparse)

            increases = increases + 1 if residual > previous else 0
            previous = residual
            if increases >= cfg.divergence_patience:
                stop_reason = "diverged"
                mainlog.warning(
                    f"[CLTRTR] Residual increased {increases} times in a row; "
                    f"returning iteration {best[1]}."
                )
                break

        pbar.close()

    if stop_reason == "diverged":
        _, best_iteration, low_rank, sparse = best
    else:
        best_iteration = iteration
        if residual <= cfg.eps:
            stop_reason = "converged"

    elapsed = time.perf_counter() - start
    mainlog.info(
        f"[CLTRTR] {stop_reason} after {iteration} iteration(s): residual={residuals[best_iteration - 1]:.3e}, "
        f"{elapsed:.2f} s."
    )

    return DenoiseResult(
        l=low_rank,
        s=sparse,
        iterations=iteration,
        residual_history=residuals,
        effective_rank_history=ranks,
        elapsed_seconds=elapsed,
        stop_reason=stop_reason,
        best_iteration=best_iteration,
        config=cfg,
    )
