"""
Testing suite for the :py:mod:`pyTubal.factorization` module.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from pyTubal.factorization import (
    multi_rank,
    singular_tubes,
    tnn,
    truncated_tsvd,
    tsvd,
    tubal_rank,
)
from pyTubal.noise import planted_cube
from pyTubal.structures.cube import Cube
from pyTubal.tests.utils import naive_dft_tubes, random_cube, relative_error, slice_svd_ranks
from pyTubal.tproduct import dft_tubes, identity_tensor, tprod, ttranspose
from pyTubal.utilities.errors import RankOutOfRange


@pytest.mark.parametrize("seed", range(50))
def test_tsvd_validity(seed):
    rng = np.random.default_rng(seed)
    n1, n2, n3 = int(rng.integers(1, 11)), int(rng.integers(1, 9)), int(rng.integers(1, 7))
    x = random_cube(rng, n1, n2, n3)

    factors = tsvd(x)
    u, s, v = factors.u, factors.s, factors.v

    # -- orthogonality -- #
    assert_allclose(tprod(ttranspose(u), u).data, identity_tensor(n1, n3).data, atol=1e-8)
    assert_allclose(tprod(ttranspose(v), v).data, identity_tensor(n2, n3).data, atol=1e-8)

    # -- f-diagonality -- #
    spectrum = dft_tubes(s).data
    off_diagonal = spectrum * (1 - np.eye(n1, n2))[np.newaxis]
    assert np.max(np.abs(off_diagonal)) <= 1e-8 * max(x.max_abs(), 1.0)

    # -- reconstruction -- #
    assert relative_error(factors.reconstruct(), x) <= 1e-8


def test_singular_values_are_sorted(rng):
    x = random_cube(rng, 6, 4, 5)
    sigma = singular_tubes(x)

    assert sigma.shape == (5, 4)
    assert np.all(sigma >= 0)
    assert np.all(np.diff(sigma, axis=1) <= 1e-12)

    expected = np.array([np.linalg.svd(s, compute_uv=False) for s in naive_dft_tubes(x)])
    assert_allclose(sigma, expected, atol=1e-10)


class TestRank:
    @pytest.mark.parametrize("seed", range(10))
    def test_product_rank_bound(self, seed):
        rng = np.random.default_rng(seed)
        ra, rb = rng.integers(1, 5, size=2).tolist()
        a = planted_cube(6, 7, 4, ra, seed=seed)
        b = planted_cube(7, 5, 4, rb, seed=seed + 100)

        assert tubal_rank(tprod(a, b)) <= min(tubal_rank(a), tubal_rank(b))

    def test_product_of_thin_cubes(self, rng):
        product = tprod(random_cube(rng, 5, 2, 3), random_cube(rng, 2, 5, 3))

        assert product.shape == (5, 5, 3)
        assert np.all(multi_rank(product).ranks <= 2)

    @pytest.mark.parametrize("r", [1, 2, 4])
    def test_planted_multi_rank(self, r):
        x = planted_cube(9, 7, 6, r, seed=r)
        ranks = multi_rank(x)

        assert ranks.ranks.tolist() == [r] * 6
        assert ranks.tubal_rank == r
        assert tubal_rank(x) == r
        assert ranks.ranks.tolist() == slice_svd_ranks(x, tol=1e-8 * x.norm()).tolist()

    def test_zero_cube(self):
        assert tubal_rank(Cube.zeros(3, 4, 2)) == 0

    def test_absolute_tolerance(self):
        data = np.zeros((1, 3, 3))
        data[0] = np.diag([5.0, 1.0, 1e-3])
        x = Cube(data)

        assert tubal_rank(x) == 3
        assert tubal_rank(x, tol=0.01) == 2
        assert tubal_rank(x, tol=2.0) == 1

        with pytest.raises(ValueError):
            multi_rank(x, tol=-1.0)


def test_tnn(rng):
    x = random_cube(rng, 4, 5, 3)
    expected = sum(np.sum(np.linalg.svd(s, compute_uv=False)) for s in naive_dft_tubes(x))
    assert tnn(x) == pytest.approx(expected, rel=1e-12)


class TestTNN:
    @pytest.mark.parametrize("alpha", [-2.5, -1.0, 0.3, 7.0])
    def test_absolute_homogeneity(self, alpha, rng):
        x = random_cube(rng, 5, 4, 6)
        assert abs(tnn(alpha * x) - abs(alpha) * tnn(x)) <= 1e-10 * abs(alpha) * tnn(x)

    @pytest.mark.parametrize("n,n3", [(1, 1), (3, 4), (5, 7)])
    def test_identity(self, n, n3):
        assert tnn(identity_tensor(n, n3)) == pytest.approx(n * n3, rel=1e-12)

    def test_bounds(self, rng):
        x = random_cube(rng, 6, 3, 5)

        assert tnn(x) >= np.max(singular_tubes(x))
        assert tnn(Cube.zeros(3, 3, 2)) == 0.0


class TestTruncation:
    def test_error_matches_discarded_singular_values(self, rng):
        x = random_cube(rng, 8, 6, 5)
        r = 2
        sigma = singular_tubes(x)

        expected = np.sqrt(np.sum(sigma[:, r:] ** 2) / 5)
        approx = truncated_tsvd(x, r)

        assert (approx - x).norm() == pytest.approx(expected, rel=1e-10)
        assert tubal_rank(approx) <= r

    def test_exact_rank_is_preserved(self):
        x = planted_cube(10, 8, 4, 3, seed=0)
        assert relative_error(truncated_tsvd(x, 3), x) <= 1e-10

    def test_full_rank_is_identity(self, rng):
        x = random_cube(rng, 4, 3, 5)
        assert relative_error(truncated_tsvd(x, 3), x) <= 1e-12

    @pytest.mark.parametrize("r", [0, 4])
    def test_rank_out_of_range(self, r, rng):
        with pytest.raises(RankOutOfRange):
            truncated_tsvd(random_cube(rng, 3, 5, 2), r)

    def test_error_is_non_increasing_in_rank(self, rng):
        x = random_cube(rng, 7, 5, 4)
        errors = [(truncated_tsvd(x, r) - x).norm() for r in range(1, 6)]

        assert np.all(np.diff(errors) <= 1e-12 * x.norm())
        assert errors[-1] <= 1e-12 * x.norm()

    @pytest.mark.parametrize("seed", range(5))
    def test_no_rank_r_cube_is_closer(self, seed):
        """Least-squares fits over many random tubal-rank-``r`` column spaces never beat the truncation."""
        rng = np.random.default_rng(seed)
        x, r, n3 = random_cube(rng, 3, 3, 2), 1, 2
        best = (truncated_tsvd(x, r) - x).norm()
        spectrum = naive_dft_tubes(x)

        for _ in range(300):
            basis = naive_dft_tubes(random_cube(rng, 3, r, n3))
            fit = basis @ (np.linalg.pinv(basis) @ spectrum)
            # Parseval: the spatial Frobenius norm is the spectral one over sqrt(n3).
            candidate = np.sqrt(np.sum(np.abs(spectrum - fit) ** 2) / n3)
            assert best <= candidate + 1e-12
