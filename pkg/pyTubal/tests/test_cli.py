"""
Testing suite for the ``pytubal`` command line.
"""
import json

import numpy as np
import pandas as pd
import pytest

from pyTubal._script_commands import EXIT_IO, EXIT_OK, EXIT_USAGE, main
from pyTubal.bench import BENCH_COLUMNS
from pyTubal.cube_io import read_cube


@pytest.fixture()
def planted(tmp_path):
    """A 12 x 12 x 4 non-negative planted cube written by ``pytubal plant``."""
    path = tmp_path / "planted.hsc"
    code = main(["plant", "-o", str(path), "--dims", "12", "12", "4", "-r", "2", "--nonnegative"])
    assert code == EXIT_OK
    return path


def _denoise(source, tmp_path, tag):
    out, report = tmp_path / f"l_{tag}.hsc", tmp_path / f"report_{tag}.json"
    code = main(
        [
            "denoise",
            "-i",
            str(source),
            "-r",
            "2",
            "-k",
            "0.2f",
            "--max-iter",
            "3",
            "--output-l",
            str(out),
            "--report",
            str(report),
        ]
    )
    return code, out, report


# ============================================================= #
# Parsing                                                       #
# ============================================================= #
def test_missing_flag(planted, tmp_path, capsys):
    code = main(["denoise", "-i", str(planted), "-k", "10", "--output-l", str(tmp_path / "l.hsc")])

    assert code == EXIT_USAGE
    assert "usage" in capsys.readouterr().err
    assert not (tmp_path / "l.hsc").exists()


def test_version_and_config(capsys):
    assert main(["version"]) == EXIT_OK
    assert main(["config", "path"]) == EXIT_OK
    assert capsys.readouterr().out.strip()


def test_config_set_rejects_sections():
    assert main(["config", "set", "solver", "3"]) == EXIT_USAGE


def test_no_command(capsys):
    assert main([]) == EXIT_USAGE
    assert "pytubal" in capsys.readouterr().out


# ============================================================= #
# Denoise                                                       #
# ============================================================= #
def test_denoise_report(planted, tmp_path):
    code, out, report_path = _denoise(planted, tmp_path, "a")
    assert code == EXIT_OK

    report = json.loads(report_path.read_text())
    assert report["config"]["k"] == round(0.2 * 12 * 12 * 4)
    assert report["iterations"] <= 3
    assert read_cube(out).shape == (12, 12, 4)


def test_denoise_planted_converges(planted, tmp_path):
    report = tmp_path / "report.json"
    code = main(
        [
            "denoise",
            "-i",
            str(planted),
            "-r",
            "2",
            "-k",
            "0",
            "--eps",
            "1e-6",
            "--output-l",
            str(tmp_path / "l.hsc"),
            "--output-s",
            str(tmp_path / "s.hsc"),
            "--report",
            str(report),
        ]
    )
    assert code == EXIT_OK

    stored = json.loads(report.read_text())
    assert stored["final_residual"] <= 1e-6
    assert read_cube(tmp_path / "s.hsc").count_nonzero() == 0
    np.testing.assert_allclose(
        read_cube(tmp_path / "l.hsc").data, read_cube(planted).data, atol=1e-6
    )


def test_denoise_is_deterministic(planted, tmp_path):
    (_, first, first_report), (_, second, second_report) = (
        _denoise(planted, tmp_path, "a"),
        _denoise(planted, tmp_path, "b"),
    )

    assert first.read_bytes() == second.read_bytes()
    assert (
        json.loads(first_report.read_text())["residual_history"]
        == json.loads(second_report.read_text())["residual_history"]
    )


def test_denoise_bad_input(tmp_path):
    (tmp_path / "bad.hsc").write_bytes(b"NOPE" + bytes(40))

    code, out, _ = _denoise(tmp_path / "bad.hsc", tmp_path, "a")
    assert code == EXIT_IO
    assert not out.exists()

    code, _, _ = _denoise(tmp_path / "missing.hsc", tmp_path, "b")
    assert code == EXIT_IO


def test_denoise_bad_card(planted, tmp_path):
    code = main(
        ["denoise", "-i", str(planted), "-r", "2", "-k", "lots", "--output-l", str(tmp_path / "l.hsc")]
    )
    assert code == EXIT_USAGE


# ============================================================= #
# Synth                                                         #
# ============================================================= #
def test_synth_is_reproducible(planted, tmp_path):
    outputs = []
    for tag in ("a", "b"):
        noisy, mask = tmp_path / f"noisy_{tag}.hsc", tmp_path / f"mask_{tag}.hsc"
        code = main(
            ["synth", "-i", str(planted), "-o", str(noisy), "--mask", str(mask), "--case", "1", "--seed", "7"]
        )
        assert code == EXIT_OK
        outputs.append((noisy.read_bytes(), mask.read_bytes()))

    assert outputs[0] == outputs[1]


def test_synth_exceeds_dims(tmp_path):
    small = tmp_path / "small.hsc"
    assert main(["plant", "-o", str(small), "--dims", "8", "8", "5", "-r", "1"]) == EXIT_OK

    code = main(
        [
            "synth",
            "-i",
            str(small),
            "-o",
            str(tmp_path / "noisy.hsc"),
            "--mask",
            str(tmp_path / "mask.hsc"),
            "--case",
            "2",
            "--seed",
            "0",
        ]
    )
    assert code == EXIT_USAGE
    assert not (tmp_path / "noisy.hsc").exists()
    assert not (tmp_path / "mask.hsc").exists()


def test_synth_conflicting_selection(planted, tmp_path):
    code = main(
        [
            "synth",
            "-i",
            str(planted),
            "-o",
            str(tmp_path / "noisy.hsc"),
            "--mask",
            str(tmp_path / "mask.hsc"),
            "--case",
            "1",
            "--sigma",
            "0.1",
            "--seed",
            "0",
        ]
    )
    assert code == EXIT_USAGE


def test_synth_explicit_flags(planted, tmp_path):
    noisy, mask = tmp_path / "noisy.hsc", tmp_path / "mask.hsc"
    code = main(
        [
            "synth",
            "-i",
            str(planted),
            "-o",
            str(noisy),
            "--mask",
            str(mask),
            "--impulse",
            "0.1",
            "--seed",
            "3",
            "--no-normalize",
        ]
    )
    assert code == EXIT_OK
    assert read_cube(mask).count_nonzero() == round(0.1 * 12 * 12 * 4)


# ============================================================= #
# Eval                                                          #
# ============================================================= #
def test_eval_identical(planted, tmp_path, capsys):
    json_path, csv_path = tmp_path / "report.json", tmp_path / "report.csv"
    code = main(
        ["eval", "--ref", str(planted), "--test", str(planted), "--json", str(json_path), "--csv", str(csv_path)]
    )

    assert code == EXIT_OK
    assert "MPSNR" in capsys.readouterr().out
    assert json.loads(json_path.read_text())["mpsnr_db"] == 100.0
    assert list(pd.read_csv(csv_path).columns) == ["mpsnr_db", "mssim", "sam_degrees"]


def test_eval_failures(planted, tmp_path):
    other = tmp_path / "other.hsc"
    assert main(["plant", "-o", str(other), "--dims", "12", "12", "5", "-r", "2"]) == EXIT_OK

    assert main(["eval", "--ref", str(planted), "--test", str(other)]) == EXIT_USAGE
    assert main(["eval", "--ref", str(planted), "--test", str(tmp_path / "missing.hsc")]) == EXIT_IO


# ============================================================= #
# Import, bench and slices                                      #
# ============================================================= #
def test_import(tmp_path, rng):
    array = rng.random((3, 4, 5)).astype(np.float32)
    (tmp_path / "image.raw").write_bytes(np.ascontiguousarray(array).tobytes())

    code = main(
        [
            "import",
            "-i",
            str(tmp_path / "image.raw"),
            "-o",
            str(tmp_path / "image.hsc"),
            "--lines",
            "3",
            "--samples",
            "4",
            "--bands",
            "5",
            "--layout",
            "bip",
        ]
    )
    assert code == EXIT_OK
    np.testing.assert_array_equal(read_cube(tmp_path / "image.hsc").to_array(), array)


def test_bench(tmp_path):
    csv_path = tmp_path / "bench.csv"
    code = main(
        ["bench", "--sizes", "8,12", "--rank", "2", "--tube", "4", "--trials", "1", "--csv", str(csv_path)]
    )
    assert code == EXIT_OK

    table = pd.read_csv(csv_path)
    assert list(table.columns) == BENCH_COLUMNS
    assert len(table) == 4
    assert set(table["method"]) == {"tsvd_truncation", "tbrp"}

    assert main(["bench", "--sizes", "8,x", "--csv", str(tmp_path / "other.csv")]) == EXIT_USAGE


def test_slices(planted, tmp_path):
    directory = tmp_path / "bands"
    assert main(["slices", "-i", str(planted), "-o", str(directory)]) == EXIT_OK
    assert len(list(directory.glob("*.png"))) == 4

    partial = tmp_path / "partial"
    assert main(["slices", "-i", str(planted), "-o", str(partial), "--bands", "0", "1", "9"]) == EXIT_USAGE
    assert not partial.exists()
