r"""
Tensor bilateral random projections (t-BRP) and the randomized tubal rank-``r`` approximation.

Notes
-----

Given a cube :math:`\mathcal{X} \in \mathbb{R}^{n_1 \times n_2 \times n_3}` and a random tensor
:math:`\mathcal{A}_1 \in \mathbb{R}^{n_2 \times r \times n_3}`, the two-sided sketch

.. math::

    \mathcal{Y}_1 = \mathcal{X} \ast \mathcal{A}_1, \qquad \mathcal{A}_2 = \mathcal{Y}_1, \qquad
    \mathcal{Y}_2 = \mathcal{X}^{*} \ast \mathcal{A}_2

yields the tubal rank-``r`` approximation

.. math::

    \mathcal{L} = \mathcal{Y}_1 \ast (\mathcal{A}_2^{*} \ast \mathcal{Y}_1)^{-1} \ast \mathcal{Y}_2^{*},

evaluated slice by slice in the Fourier domain as
:math:`\bar{L}^{(i)} = \bar{Y}_1^{(i)} [(\bar{A}_2^{(i)})^{*} \bar{Y}_1^{(i)}]^{-1} (\bar{Y}_2^{(i)})^{*}`.

Setting :math:`\mathcal{A}_2 = \mathcal{Y}_1` is a single power-refinement step; the general construction draws
:math:`\mathcal{A}_2` independently. The cost is dominated by the ``n1 * n2 * n3 * r`` products instead of the
per-slice SVDs of :py:func:`factorization.truncated_tsvd`.

When the requested rank exceeds the numerical rank of the sketch, :py:func:`low_tubal_rank_approx` shrinks ``r`` to
the detected rank, redraws :math:`\mathcal{A}_1` and starts over.
"""
import numpy as np
from pydantic import BaseModel, model_validator

from pyTubal.factorization import singular_tubes, tubal_rank
from pyTubal.structures.cube import Cube
from pyTubal.tproduct import (
    from_half_spectrum,
    half_spectrum,
    singular_limit,
    slice_conditions,
    tprod,
    ttranspose,
)
from pyTubal.utilities.core import tbconfig
from pyTubal.utilities.errors import (
    DimMismatch,
    RankOutOfRange,
    RestartLimitExceeded,
    SingularGram,
)
from pyTubal.utilities.logging import devlog
from pyTubal.utilities.types import PydanticCube

# -- Importing SELF -- #
try:
    from typing import Self  # noqa
except ImportError:
    from typing_extensions import Self as Self  # noqa

_default_max_restarts: int = int(tbconfig.config.solver.max_restarts)


class BrpSketch(BaseModel):
    """
    The projections and random tensors of one t-BRP draw.
    """

    y1: PydanticCube
    """:py:class:`structures.cube.Cube`: ``X * A1``, shape ``n1 x r x n3``."""
    y2: PydanticCube
    """:py:class:`structures.cube.Cube`: ``X^* * A2``, shape ``n2 x r x n3``."""
    a1: PydanticCube
    """:py:class:`structures.cube.Cube`: The Gaussian test tensor, shape ``n2 x r x n3``."""
    a2: PydanticCube
    """:py:class:`structures.cube.Cube`: The left test tensor, shape ``n1 x r x n3``."""
    requested_r: int
    """int: The rank the sketch was drawn for."""
    effective_r: int
    """int: The rank the sketch is used at; never larger than :py:attr:`BrpSketch.requested_r`."""

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        n1, r, n3 = self.y1.shape
        n2 = self.y2.shape[0]

        if (
            self.y2.shape != (n2, r, n3)
            or self.a1.shape != (n2, r, n3)
            or self.a2.shape != (n1, r, n3)
            or r != self.requested_r
        ):
            raise DimMismatch(
                f"Inconsistent t-BRP sketch: y1={self.y1.shape}, y2={self.y2.shape}, "
                f"a1={self.a1.shape}, a2={self.a2.shape}, r={self.requested_r}."
            )
        if self.effective_r > self.requested_r:
            raise RankOutOfRange(
                f"Effective rank {self.effective_r} exceeds the requested rank {self.requested_r}."
            )
        return self

    @property
    def power_refined(self) -> bool:
        """bool: ``True`` when ``A2 = Y1``."""
        return self.a2 is self.y1 or self.a2 == self.y1


# ============================================================= #
# Randomness                                                    #
# ============================================================= #
def derive_seed(seed: int, *keys: int) -> int:
    """
    Deterministically derive a child seed from ``seed`` and a sequence of integer keys.

    Parameters
    ----------
    seed: int
        The parent seed.
    *keys: int
        Stream identifiers such as an iteration or restart counter.

    Returns
    -------
    int
        A 64-bit child seed. Equal inputs always give equal outputs.
    """
    return int(
        np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(
            1, dtype=np.uint64
        )[0]
    )


def gaussian_cube(n1: int, n2: int, n3: int, seed: int) -> Cube:
    """
    A cube of i.i.d. standard normal entries drawn in the spatial domain.

    Parameters
    ----------
    n1, n2, n3: int
        The cube dimensions.
    seed: int
        The RNG seed; the same seed and dimensions give a bitwise identical cube.
    """
    if min(n1, n2, n3) < 1:
        raise DimMismatch(f"Random cube dimensions must be positive, got {(n1, n2, n3)}.")

    rng = np.random.default_rng(seed)
    return Cube(rng.standard_normal((n3, n1, n2)), copy=False)


def _check_rank(x: Cube, r: int):
    n1, n2, _ = x.shape
    if not 1 <= r <= min(n1, n2):
        raise RankOutOfRange(f"Requested rank {r} is outside [1, {min(n1, n2)}] for {x.shape}.")


# ============================================================= #
# t-BRP                                                         #
# ============================================================= #
def brp_sketch(x: Cube, r: int, seed: int) -> BrpSketch:
    """
    Draw a t-BRP sketch of ``x`` at rank ``r``.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to sketch.
    r: int
        The requested tubal rank, ``1 <= r <= min(n1, n2)``.
    seed: int
        Seed for the Gaussian test tensor ``A1``.

    Returns
    -------
    :py:class:`BrpSketch`
        ``Y1 = X * A1``, ``A2 = Y1`` and ``Y2 = X^* * A2``.
    """
    _check_rank(x, r)
    n1, n2, n3 = x.shape

    a1 = gaussian_cube(n2, r, n3, seed)

    x_half = half_spectrum(x)
    y1_half = x_half @ half_spectrum(a1)
    y2_half = np.conj(np.swapaxes(x_half, 1, 2)) @ y1_half

    y1 = from_half_spectrum(y1_half, n3)
    return BrpSketch(
        y1=y1,
        y2=from_half_spectrum(y2_half, n3),
        a1=a1,
        a2=y1,
        requested_r=r,
        effective_r=r,
    )


def brp_rank_check(sketch: BrpSketch, tol: float = 0.0) -> int:
    """
    Tubal rank of the Gram tensor ``A2^* * Y1`` of a sketch.

    Parameters
    ----------
    sketch: :py:class:`BrpSketch`
        The sketch to check.
    tol: float, optional
        Threshold on the Gram tensor's Fourier-slice singular values. ``0`` selects the automatic rule of
        :py:func:`factorization.multi_rank`.

    Returns
    -------
    int
        The detected rank. A value below the requested rank means ``r`` exceeds the numerical rank of the data.

    Notes
    -----

    With ``A2 = Y1`` the Gram tensor is ``Y1^* * Y1`` whose Fourier-slice singular values are the squares of those
    of ``Y1``. Its rank is therefore read off ``Y1`` directly, which avoids squaring the condition number before the
    threshold is applied.
    """
    if not sketch.power_refined:
        return tubal_rank(tprod(ttranspose(sketch.a2), sketch.y1), tol)

    sigma = singular_tubes(sketch.y1)
    if tol == 0:
        n1, r, _ = sketch.y1.shape
        threshold = max(n1, r) * np.finfo(np.float64).eps * sigma[:, :1]
    else:
        threshold, sigma = tol, sigma**2

    return int(np.max(np.sum(sigma > threshold, axis=1)))


def brp_approx(sketch: BrpSketch, pinv_fallback: bool = False) -> Cube:
    """
    The tubal rank-``r`` approximation ``Y1 * (A2^* * Y1)^-1 * Y2^*``.

    Parameters
    ----------
    sketch: :py:class:`BrpSketch`
        The sketch to evaluate.
    pinv_fallback: bool, optional
        If ``True``, numerically singular Gram slices are handled with a pseudo-inverse instead of raising.

    Returns
    -------
    :py:class:`structures.cube.Cube`
        The ``n1 x n2 x n3`` approximation; its tubal rank never exceeds the sketch rank.

    Raises
    ------
    SingularGram
        If a Fourier slice of the Gram tensor is numerically singular and ``pinv_fallback`` is ``False``.
    """
    n3 = sketch.y1.shape[2]
    r = sketch.requested_r

    y1_half = half_spectrum(sketch.y1)
    y2_half = half_spectrum(sketch.y2)
    gram = np.conj(np.swapaxes(half_spectrum(sketch.a2), 1, 2)) @ y1_half
    rhs = np.conj(np.swapaxes(y2_half, 1, 2))

    cond = slice_conditions(gram)
    singular = cond > singular_limit()

    if singular.any() and not pinv_fallback:
        first = int(np.flatnonzero(singular)[0])
        raise SingularGram(first, float(cond[first]))

    # Linear solves (partial pivoting) on the regular slices, pseudo-inverse on the rest.
    core = np.empty_like(rhs)
    regular = ~singular
    if regular.any():
        core[regular] = np.linalg.solve(gram[regular], rhs[regular])
    if singular.any():
        devlog.debug(
            f"[t-BRP] pseudo-inverse on {int(singular.sum())} singular Gram slice(s)."
        )
        core[singular] = (
            np.linalg.pinv(gram[singular], r * np.finfo(np.float64).eps)
            @ rhs[singular]
        )

    return from_half_spectrum(y1_half @ core, n3)


def low_tubal_rank_approx(
    x: Cube,
    r: int,
    seed: int,
    tol: float = 0.0,
    max_restarts: int = None,
) -> tuple[Cube, int]:
    """
    Randomized tubal rank-``r`` approximation of ``x`` with rank-deficiency restarts.

    Parameters
    ----------
    x: :py:class:`structures.cube.Cube`
        The cube to approximate.
    r: int
        The requested tubal rank, ``1 <= r <= min(n1, n2)``.
    seed: int
        Seed of the first draw. Restarts draw from seeds derived from it.
    tol: float, optional
        Rank-check tolerance (see :py:func:`brp_rank_check`).
    max_restarts: int, optional
        Shrink-and-retry rounds allowed. Defaults to the ``solver.max_restarts`` configuration value.

    Returns
    -------
    Cube
        The approximation. The zero cube when the detected rank is ``0``.
    int
        The final effective rank.

    Raises
    ------
    RankOutOfRange
        Unless ``1 <= r <= min(n1, n2)``.
    RestartLimitExceeded
        If the rank keeps shrinking after ``max_restarts`` rounds.
    """
    _check_rank(x, r)
    if max_restarts is None:
        max_restarts = _default_max_restarts

    current_r = r
    for attempt in range(max_restarts + 1):
        final = attempt == max_restarts
        sketch = brp_sketch(x, current_r, seed if attempt == 0 else derive_seed(seed, attempt))
        detected = brp_rank_check(sketch, tol)

        if detected == 0:
            devlog.debug("[t-BRP] detected rank 0; returning the zero cube.")
            return Cube.zeros(*x.shape), 0

        if detected < current_r:
            devlog.debug(
                f"[t-BRP|attempt={attempt}] rank shrinks {current_r} -> {detected}; redrawing A1."
            )
            current_r = detected
            continue

        try:
            return brp_approx(sketch, pinv_fallback=final), current_r
        except SingularGram as error:
            devlog.debug(f"[t-BRP|attempt={attempt}] {error.message} Redrawing A1.")

    raise RestartLimitExceeded(
        f"t-BRP rank did not stabilize within {max_restarts} restarts (last rank {current_r})."
    )
