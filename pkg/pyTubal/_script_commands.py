"""
Commands of the ``pytubal`` command line.

Notes
-----

The parser is assembled from ``bin/scripts.yaml`` by :py:meth:`CLIParser.build_recursive`; every leaf names one of the
functions in :py:data:`CLI_FUNCTIONS`. :py:func:`main` runs a command and returns its exit code:

====  ==============================================================================================
Code  Meaning
====  ==============================================================================================
0     Success.
2     Bad flags or values: argparse errors, invalid parameters, noise specifications or ranks which
      do not fit the cube, mismatched cube dimensions.
3     I/O failures: unreadable or unwritable files and malformed cube files.
4     Solver failures: every remaining ``pyTubal`` error (singular slices, exhausted restarts, ...).
====  ==============================================================================================

Failures are logged on ``mainlog`` as ``[<command>:<stage>] <message>``. Outputs are written atomically, so a failing
command never leaves partial files behind.
"""
import json
from argparse import ArgumentParser
from contextlib import contextmanager
from typing import Mapping, Sequence

from pydantic import ValidationError

from pyTubal.utilities.errors import (
    AllPixelsDegenerate,
    ConfigurationError,
    CubeFormatError,
    CubeIOError,
    DimMismatch,
    NonFiniteCube,
    PyTubalError,
    RankOutOfRange,
    SpecExceedsDims,
    TooSmall,
)
from pyTubal.utilities.logging import mainlog
from pyTubal.utilities.text import get_package_version, print_cli_header, print_version

CLI_FUNCTIONS = {f.__name__: f for f in [get_package_version, print_version]}

# ``type`` entries of scripts.yaml.
_ARGUMENT_TYPES = {"int": int, "float": float, "str": str}

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4


class CLIParser(ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)

    @staticmethod
    def _argument_kwargs(argument: Mapping) -> dict:
        kwargs = {k: v for k, v in argument.items() if k != "shortcut"}
        if "type" in kwargs:
            kwargs["type"] = _ARGUMENT_TYPES[kwargs["type"]]
        if "choices" in kwargs:
            kwargs["choices"] = list(kwargs["choices"])
        return kwargs

    @classmethod
    def build_recursive(cls, parser_config: Mapping, base_parser=None):
        if base_parser is None:
            base_parser = cls(
                prog="pytubal",
                description="Mixed-noise removal for hyperspectral cubes.",
            )

            _w = base_parser.add_subparsers(title="commands", help="Available commands")

            cls.build_recursive(parser_config, base_parser=_w)

            return base_parser

        # -- Iterate through the layers -- #
        for k, v in parser_config.items():
            _is_command = "subparsers" not in v.keys()

            if _is_command:
                _s = base_parser.add_parser(name=k, help=v.get("help", None))

                for arg_name, arg_dict in (v.get("args") or {}).items():
                    _s.add_argument(arg_name, **cls._argument_kwargs(arg_dict))
                for kwarg_name, kwarg_dict in (v.get("kwargs") or {}).items():
                    _flags = [f"--{kwarg_name}"]
                    if "shortcut" in kwarg_dict:
                        _flags.append(kwarg_dict["shortcut"])

                    _s.add_argument(*_flags, **cls._argument_kwargs(kwarg_dict))

                _s.set_defaults(operation=v.get("function", "none"))

            else:
                _s = base_parser.add_parser(name=k, help=v.get("help", None))
                _q = _s.add_subparsers(title=v.get("title"), help=v.get("help", None))

                cls.build_recursive(v["subparsers"], base_parser=_q)

        return base_parser


def build_parser() -> CLIParser:
    """Build the ``pytubal`` parser from ``bin/scripts.yaml``."""
    from pyTubal.utilities.core import bin_directory, yaml

    with open(bin_directory / "scripts.yaml", "r") as f:
        return CLIParser.build_recursive(yaml.load(f))


# ============================================================= #
# Failure handling                                              #
# ============================================================= #
class CommandFailure(Exception):
    """Raised inside a command once a failure has been logged; carries the exit code."""

    def __init__(self, code: int):
        self.code = code
        super().__init__(f"Command failed with exit code {code}.")


def _exit_code(error: BaseException, stage: str) -> int | None:
    if isinstance(error, (CubeIOError, CubeFormatError)):
        return EXIT_IO
    if isinstance(error, NonFiniteCube) and stage == "read":
        return EXIT_IO
    if isinstance(
        error,
        (
            ConfigurationError,
            ValidationError,
            SpecExceedsDims,
            DimMismatch,
            RankOutOfRange,
            TooSmall,
            AllPixelsDegenerate,
        ),
    ):
        return EXIT_USAGE
    if isinstance(error, PyTubalError):
        return EXIT_SOLVER
    if isinstance(error, OSError):
        return EXIT_IO
    if isinstance(error, (ValueError, IndexError)):
        return EXIT_USAGE
    return None


@contextmanager
def _stage(command: str, stage: str):
    """Translate errors raised in one stage of a command into a logged :py:class:`CommandFailure`."""
    try:
        yield
    except CommandFailure:
        raise
    except Exception as error:
        code = _exit_code(error, stage)
        if code is None:
            raise

        mainlog.error(f"[{command}:{stage}] {error}")
        raise CommandFailure(code) from error


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the ``pytubal`` command line.

    Parameters
    ----------
    argv: list of str, optional
        The arguments (without the program name). Defaults to ``sys.argv[1:]``.

    Returns
    -------
    int
        The exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)

    if not hasattr(args, "operation"):
        print_cli_header()
        parser.print_help()
        return EXIT_USAGE

    kwargs = {k: v for k, v in vars(args).items() if k != "operation"}
    try:
        CLI_FUNCTIONS[args.operation](**kwargs)
    except CommandFailure as failure:
        return failure.code

    return EXIT_OK


# ============================================================= #
# Configuration commands                                        #
# ============================================================= #
def print_config_path():
    from pyTubal.utilities.core import config_directory

    print(str(config_directory))


def view_config(dictionary_position="all"):
    from pyTubal.utilities.core import tbconfig

    with _stage("config", "view"):
        if dictionary_position == "all":
            print(tbconfig.config)
        else:
            print(tbconfig.get(dictionary_position))


def set_config(dictionary_position=None, value=None):
    from pyTubal.cube_io import parse_scalar
    from pyTubal.utilities.core import tbconfig

    with _stage("config", "set"):
        tbconfig.set_param(dictionary_position, parse_scalar(value, dictionary_position))


# ============================================================= #
# Workflow commands                                             #
# ============================================================= #
def _parse_card(card: str, shape: tuple[int, int, int]) -> int:
    from pyTubal.denoise import DenoiseConfig

    text = str(card).strip()
    try:
        if text.endswith("f"):
            return DenoiseConfig.card_from_fraction(float(text[:-1]), shape)
        return int(text)
    except ValueError as error:
        raise ConfigurationError(
            f"--card expects an integer or a fraction like 0.2f, got {card!r} ({error})."
        ) from error


def cmd_denoise(
    input_path=None,
    rank=None,
    card=None,
    eps=None,
    max_iter=None,
    seed=0,
    output_l=None,
    output_s=None,
    report=None,
):
    from pyTubal.cube_io import atomic_write, read_cube, write_cube
    from pyTubal.denoise import DenoiseConfig, denoise

    with _stage("denoise", "read"):
        x = read_cube(input_path)

    with _stage("denoise", "config"):
        overrides = {
            k: v for k, v in dict(eps=eps, max_iter=max_iter).items() if v is not None
        }
        cfg = DenoiseConfig(r=rank, k=_parse_card(card, x.shape), seed=seed, **overrides)

    with _stage("denoise", "solve"):
        result = denoise(x, cfg)

    with _stage("denoise", "write"):
        write_cube(output_l, result.l)
        if output_s is not None:
            write_cube(output_s, result.s)
        if report is not None:
            with atomic_write(report, "w") as handle:
                json.dump(result.report(), handle, indent=2)

    mainlog.info(
        f"[denoise] {result.stop_reason} in {result.iterations} iteration(s), "
        f"residual {result.final_residual:.3e}; wrote {output_l}."
    )


def _resolve_noise_spec(
    case, config, seed, sigma, impulse, stripe_bands, deadline_bands, width_min, width_max
):
    from pyTubal.cube_io import read_parameter_file
    from pyTubal.noise import NoiseSpec, case_preset

    explicit = {
        k: v
        for k, v in dict(
            gaussian_sigma=sigma,
            impulse_fraction=impulse,
            stripe_bands=stripe_bands,
            deadline_bands=deadline_bands,
        ).items()
        if v is not None
    }
    has_widths = width_min is not None or width_max is not None

    selections = [case is not None, config is not None, bool(explicit) or has_widths]
    if sum(selections) > 1:
        raise ConfigurationError(
            "Choose exactly one of --case, --config or explicit noise flags."
        )

    if case is not None:
        return case_preset(case, seed)
    if config is not None:
        return NoiseSpec.model_validate({**read_parameter_file(config), "seed": seed})
    if not explicit:
        raise ConfigurationError(
            "No corruption selected; use --case, --config or explicit noise flags."
        )

    lo, hi = NoiseSpec.model_fields["stripe_width_range"].default
    widths = (
        width_min if width_min is not None else lo,
        width_max if width_max is not None else hi,
    )
    return NoiseSpec(
        **explicit, stripe_width_range=widths, deadline_width_range=widths, seed=seed
    )


def cmd_synth(
    input_path=None,
    output=None,
    mask=None,
    clean_out=None,
    case=None,
    config=None,
    sigma=None,
    impulse=None,
    stripe_bands=None,
    deadline_bands=None,
    width_min=None,
    width_max=None,
    seed=None,
    no_normalize=False,
):
    from pyTubal.cube_io import read_cube, write_cube
    from pyTubal.noise import synthesize

    with _stage("synth", "config"):
        spec = _resolve_noise_spec(
            case, config, seed, sigma, impulse, stripe_bands, deadline_bands, width_min, width_max
        )
    print(spec.model_dump_json(indent=2))

    with _stage("synth", "read"):
        x = read_cube(input_path)

    with _stage("synth", "corrupt"):
        result = synthesize(x, spec, normalize=not no_normalize)

    with _stage("synth", "write"):
        write_cube(output, result.noisy)
        write_cube(mask, result.mask)
        if clean_out is not None:
            write_cube(clean_out, result.clean)

    mainlog.info(f"[synth] {result.sparse_count} sparse entries; wrote {output} and {mask}.")


def cmd_eval(ref=None, test=None, json_path=None, csv_path=None):
    from pyTubal.cube_io import read_cube
    from pyTubal.stats.quality import evaluate

    with _stage("eval", "read"):
        reference, candidate = read_cube(ref), read_cube(test)

    with _stage("eval", "evaluate"):
        report = evaluate(reference, candidate)
    print(report.summary())

    with _stage("eval", "write"):
        if json_path is not None:
            report.to_json(json_path)
        if csv_path is not None:
            report.to_csv(csv_path)


def _parse_sizes(sizes: str) -> list[int]:
    try:
        values = [int(s) for s in str(sizes).split(",") if s.strip()]
    except ValueError as error:
        raise ConfigurationError(
            f"--sizes expects comma separated integers, got {sizes!r}."
        ) from error

    if not values or min(values) < 1:
        raise ConfigurationError(f"--sizes expects positive integers, got {sizes!r}.")
    return values


def cmd_bench(
    sizes="32,64,128", rank=5, tube=16, trials=3, seed=0, noise_level=0.5, csv_path=None
):
    from pyTubal.bench import records_to_frame, run_benchmark, write_bench_csv

    with _stage("bench", "config"):
        size_list = _parse_sizes(sizes)

    with _stage("bench", "run"):
        records = run_benchmark(
            size_list, r=rank, n3=tube, trials=trials, seed=seed, noise_level=noise_level
        )
    print(records_to_frame(records).to_string(index=False))

    with _stage("bench", "write"):
        write_bench_csv(csv_path, records)


def cmd_import(
    input_path=None,
    output=None,
    lines=None,
    samples=None,
    bands=None,
    layout="bsq",
    dtype="float32",
    byteorder="little",
):
    from pyTubal.cube_io import import_raw, write_cube

    with _stage("import", "read"):
        x = import_raw(input_path, lines, samples, bands, layout, dtype, byteorder)

    with _stage("import", "write"):
        write_cube(output, x)

    mainlog.info(f"[import] {input_path} ({layout}, {dtype}) -> {output} {x.shape}.")


def cmd_plant(output=None, dims=None, rank=None, seed=0, nonnegative=False):
    from pyTubal.cube_io import write_cube
    from pyTubal.noise import planted_cube

    with _stage("plant", "build"):
        x = planted_cube(*dims, rank, seed, nonnegative=nonnegative)

    with _stage("plant", "write"):
        write_cube(output, x)


def cmd_slices(input_path=None, output=None, bands=None, equalize=False):
    from pyTubal.cube_io import read_cube
    from pyTubal.utilities.plot import save_band_images

    with _stage("slices", "read"):
        x = read_cube(input_path)

    with _stage("slices", "render"):
        written = save_band_images(x, output, bands=bands, equalize=equalize)

    mainlog.info(f"[slices] wrote {len(written)} image(s) to {output}.")


CLI_FUNCTIONS["view_config"] = view_config
CLI_FUNCTIONS["set_config"] = set_config
CLI_FUNCTIONS["print_config_path"] = print_config_path
CLI_FUNCTIONS.update(
    {
        f.__name__: f
        for f in [
            cmd_denoise,
            cmd_synth,
            cmd_eval,
            cmd_bench,
            cmd_import,
            cmd_plant,
            cmd_slices,
        ]
    }
)
