"""
Testing suite for the :py:mod:`pyTubal.bench` module.
"""
import numpy as np
import pandas as pd
import pytest

from pyTubal.bench import (
    BENCH_COLUMNS,
    BenchRecord,
    noisy_planted_cube,
    records_to_frame,
    run_benchmark,
    write_bench_csv,
)
from pyTubal.factorization import truncated_tsvd
from pyTubal.noise import planted_cube
from pyTubal.brp import derive_seed


def test_noisy_planted_cube():
    clean = planted_cube(10, 10, 4, 2, derive_seed(3, 0))
    noisy = noisy_planted_cube(10, 10, 4, 2, seed=3, noise_level=0.5)

    assert (noisy - clean).norm() == pytest.approx(0.5 * clean.norm())
    assert noisy_planted_cube(10, 10, 4, 2, seed=3, noise_level=0.0) == clean


def test_records(tmp_path):
    records = run_benchmark([8, 12, 16], r=2, n3=4, trials=2, seed=1)

    assert [(rec.method, rec.n1) for rec in records] == [
        ("tsvd_truncation", 8),
        ("tbrp", 8),
        ("tsvd_truncation", 12),
        ("tbrp", 12),
        ("tsvd_truncation", 16),
        ("tbrp", 16),
    ]
    for tsvd_record, tbrp_record in zip(records[::2], records[1::2]):
        assert tsvd_record.dims == tbrp_record.dims
        assert tsvd_record.rel_error <= tbrp_record.rel_error + 1e-12
        assert tbrp_record.rel_error <= 5 * tsvd_record.rel_error

    write_bench_csv(tmp_path / "bench.csv", records)
    table = pd.read_csv(tmp_path / "bench.csv")
    assert list(table.columns) == BENCH_COLUMNS
    assert len(table) == 6
    pd.testing.assert_frame_equal(table, records_to_frame(records))


def test_errors_are_relative_to_noisy_cube():
    x = noisy_planted_cube(12, 12, 4, 2, seed=derive_seed(0, 12), noise_level=0.5)
    error = (truncated_tsvd(x, 2) - x).norm() / x.norm()

    record = run_benchmark([12], r=2, n3=4, trials=1, seed=0)[0]
    assert record.method == "tsvd_truncation"
    assert record.rel_error == pytest.approx(error)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        run_benchmark([8], trials=0)
    with pytest.raises(ValueError):
        run_benchmark([8], noise_level=-1.0)
    with pytest.raises(ValueError):
        BenchRecord(method="tbrp", n1=1, n2=1, n3=1, r=1, wall_seconds=0.0, rel_error=0.1)


@pytest.mark.slow
def test_speed_trend():
    """The t-BRP to t-SVD time ratio falls as the cubes grow, and t-BRP wins at n = 256."""
    records = run_benchmark([64, 128, 256], r=5, n3=16, trials=3, seed=0)
    table = records_to_frame(records).pivot(index="n1", columns="method", values="wall_seconds")
    ratio = (table["tbrp"] / table["tsvd_truncation"]).to_numpy()

    assert np.all(np.diff(ratio) < 0)
    assert ratio[-1] < 1.0
