"""
Testing utilities for pyTubal.

The helpers here are deliberately naive: explicit block-circulant matrices, dense DFT matrices and per-slice loops.
They serve as independent oracles for the vectorized implementations.
"""
import pathlib as pt

import numpy as np

from pyTubal.structures.cube import Cube


def random_cube(rng: np.random.Generator, n1: int, n2: int, n3: int) -> Cube:
    return Cube.from_array(rng.standard_normal((n1, n2, n3)))


def bcirc(a: Cube) -> np.ndarray:
    """The ``n1 n3 x n2 n3`` block-circulant matrix of ``a``; block ``(i, j)`` is frontal slice ``(i - j) mod n3``."""
    n1, n2, n3 = a.shape
    out = np.zeros((n1 * n3, n2 * n3))
    for i in range(n3):
        for j in range(n3):
            out[i * n1 : (i + 1) * n1, j * n2 : (j + 1) * n2] = a.frontal_slice((i - j) % n3)
    return out


def unfold(a: Cube) -> np.ndarray:
    """The frontal slices of ``a`` stacked vertically."""
    return np.vstack([a.frontal_slice(i) for i in range(a.shape[2])])


def fold(matrix: np.ndarray, n1: int, n3: int) -> Cube:
    return Cube(np.stack([matrix[i * n1 : (i + 1) * n1] for i in range(n3)]))


def tprod_oracle(a: Cube, b: Cube) -> Cube:
    """``fold(bcirc(a) @ unfold(b))``."""
    return fold(bcirc(a) @ unfold(b), a.shape[0], a.shape[2])


def dft_matrix(n: int) -> np.ndarray:
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * j * k / n)


def naive_dft_tubes(a: Cube) -> np.ndarray:
    """The DFT of every tube, slice-major, by an explicit matrix product."""
    return np.einsum("jk,kab->jab", dft_matrix(a.shape[2]), a.data)


def slice_svd_ranks(a: Cube, tol: float) -> np.ndarray:
    """Rank of every Fourier slice, one ``numpy.linalg.matrix_rank`` call at a time."""
    spectrum = naive_dft_tubes(a)
    return np.array([np.linalg.matrix_rank(s, tol=tol) for s in spectrum])


def relative_error(approx: Cube, exact: Cube) -> float:
    return (approx - exact).norm() / exact.norm()


def check_bytes(data: bytes, answer_dir, subpath, answer_store):
    """Compare ``data`` with a stored answer file, creating it when missing or when storing answers."""
    path = pt.Path(answer_dir) / subpath
    path.parent.mkdir(parents=True, exist_ok=True)

    if answer_store or not path.exists():
        path.write_bytes(data)
        return None

    assert path.read_bytes() == data, f"There was a change in the answer at {path}."
