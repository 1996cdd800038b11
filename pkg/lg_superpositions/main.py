"""Command-line front end.

Each subcommand loads the run configuration, computes all of its results in
memory and only then writes them below the output directory:

- render-mode: FGRID field plus intensity/phase images of one LG mode
- hologram:    binary and blazed fork-hologram templates
- scan:        displaced-hologram detector traces and their summary
- singularity: predicted vs found singularity positions of u00/u01 superpositions
- interfere:   Mach-Zehnder output field, images and its decomposition
- decompose:   LG decomposition behind one displaced hologram

Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
3 grid-convergence guard failure.
"""

import argparse
import asyncio
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from . import io
from .config import ConfigError, RunConfig, load_config
from .decompose import full_decomposition, truncation_change
from .hologram import apply_hologram, template
from .lg_field import (
    ConvergenceError,
    beam_geometry,
    check_convergence,
    sample_mode,
)
from .logging_config import get_logger, setup_logging
from .scan import run_scan, summarize
from .superpose import mach_zehnder, singularity_sweep

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3


def _tag(value: float) -> str:
    return f"{value:g}".replace("-", "m").replace(".", "p")


async def cmd_render_mode(config: RunConfig, p: int, l: int, z: float) -> list[Path]:
    mode = config.mode(p, l)
    z_r = beam_geometry(mode.w0, mode.wavelength, 0.0).zR
    field = sample_mode(mode, config.grid_spec(z * z_r))
    stem = config.output_dir / f"mode_p{p}_l{_tag(l)}_z{_tag(z)}"
    outputs: dict[Path, str | bytes] = {
        stem.with_suffix(".fgrid.csv"): io.format_fgrid(field),
        stem.with_name(stem.name + "_intensity.pgm"): io.pgm_bytes(
            io.intensity_image(field)
        ),
        stem.with_name(stem.name + "_phase.pgm"): io.pgm_bytes(io.phase_image(field)),
    }
    return await io.save_outputs(outputs)


async def cmd_hologram(config: RunConfig) -> list[Path]:
    grid = config.grid_spec()
    base = config.hologram_spec()
    outputs: dict[Path, str | bytes] = {}
    for profile in ("binary", "blazed"):
        h = base.model_copy(update={"profile": profile})
        image = io.hologram_image(template(h, grid), h.depth)
        outputs[config.output_dir / f"hologram_{profile}.pgm"] = io.pgm_bytes(image)
    logger.info(
        "Hologram templates",
        extra={"dm": base.dm, "period": base.period, "depth": base.depth},
    )
    return await io.save_outputs(outputs)


async def cmd_scan(config: RunConfig) -> list[Path]:
    spec = config.scan_spec()
    check_convergence(spec.input, spec.grid)
    records = await run_scan(spec)
    summary = summarize(records, config.beam.w0)
    outputs: dict[Path, str | bytes] = {
        config.output_dir / "scan.csv": io.format_scan_csv(records, config.beam.w0),
        config.output_dir / "summary.json": io.format_summary_json(summary),
    }
    return await io.save_outputs(outputs)


async def cmd_singularity(
    config: RunConfig,
    gammas: Sequence[float] | None = None,
    phases: Sequence[float] | None = None,
) -> list[Path]:
    rows = await singularity_sweep(
        gammas if gammas is not None else config.singularity.gammas,
        phases if phases is not None else config.singularity.phases,
        config.mode(0, 0),
        config.mode(0, 1),
        config.grid_spec(),
    )
    return await io.save_outputs(
        {config.output_dir / "singularities.csv": io.format_singularity_csv(rows)}
    )


async def cmd_interfere(config: RunConfig) -> list[Path]:
    incoming = sample_mode(config.mode(0, 0), config.grid_spec())
    arm_a = config.arm_spec(config.interferometer.arm_a)
    arm_b = config.arm_spec(config.interferometer.arm_b)
    field = mach_zehnder(incoming, arm_a, arm_b)
    record = full_decomposition(field, w0=config.beam.w0)
    out = config.output_dir
    outputs: dict[Path, str | bytes] = {
        out / "interfere.fgrid.csv": io.format_fgrid(field),
        out / "interfere_intensity.pgm": io.pgm_bytes(io.intensity_image(field)),
        out / "interfere_phase.pgm": io.pgm_bytes(io.phase_image(field)),
        out / "interfere_decomposition.csv": io.format_decomposition_csv(record),
    }
    return await io.save_outputs(outputs)


async def cmd_decompose(config: RunConfig, x0: float, y0: float) -> list[Path]:
    w0 = config.beam.w0
    mode = config.mode(config.scan.input_p, config.scan.input_l)
    grid = config.grid_spec()
    check_convergence(mode, grid)
    hologram = config.hologram_spec().displaced(x0 * w0, y0 * w0)
    field = apply_hologram(sample_mode(mode, grid), hologram, order=1)
    record = full_decomposition(field, w0=w0, displacement=(hologram.x0, hologram.y0))
    truncation_change(field, w0=w0)
    name = f"decomposition_x{_tag(x0)}_y{_tag(y0)}.csv"
    return await io.save_outputs(
        {config.output_dir / name: io.format_decomposition_csv(record)}
    )


def _common_options() -> argparse.ArgumentParser:
    # Defaults are suppressed so the flags work before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=Path, default=argparse.SUPPRESS, help="run config (JSON)"
    )
    common.add_argument(
        "--out", type=Path, default=argparse.SUPPRESS, help="output directory"
    )
    common.add_argument(
        "--grid-n", type=int, default=argparse.SUPPRESS, help="samples per side"
    )
    common.add_argument(
        "--quiet", action="store_true", default=argparse.SUPPRESS, help="warnings only"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="lg-superpositions",
        description="Gaussian/Laguerre-Gaussian superpositions with fork holograms",
        parents=[common],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    render = commands.add_parser("render-mode", parents=[common], help="sample one LG mode")
    render.add_argument("--p", type=int, default=0)
    render.add_argument("--l", type=int, default=1)
    render.add_argument("--z", type=float, default=0.0, help="axial plane in Rayleigh lengths")

    commands.add_parser("hologram", parents=[common], help="binary and blazed templates")
    commands.add_parser("scan", parents=[common], help="displaced-hologram scan")

    singularity = commands.add_parser(
        "singularity", parents=[common], help="singularity position table"
    )
    singularity.add_argument("--gammas", type=float, nargs="+")
    singularity.add_argument("--phases", type=float, nargs="+")

    commands.add_parser("interfere", parents=[common], help="Mach-Zehnder preparation")

    decompose = commands.add_parser(
        "decompose", parents=[common], help="decomposition behind a displaced hologram"
    )
    decompose.add_argument("--x0", type=float, default=0.0, help="in units of w0")
    decompose.add_argument("--y0", type=float, default=0.0, help="in units of w0")
    return parser


async def _dispatch(args: argparse.Namespace, config: RunConfig) -> list[Path]:
    match args.command:
        case "render-mode":
            return await cmd_render_mode(config, args.p, args.l, args.z)
        case "hologram":
            return await cmd_hologram(config)
        case "scan":
            return await cmd_scan(config)
        case "singularity":
            return await cmd_singularity(config, args.gammas, args.phases)
        case "interfere":
            return await cmd_interfere(config)
        case "decompose":
            return await cmd_decompose(config, args.x0, args.y0)
    raise ValueError(f"unknown command {args.command!r}")


async def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(level=logging.INFO, quiet=getattr(args, "quiet", False))

    try:
        config = load_config(
            getattr(args, "config", None),
            {
                "output_dir": getattr(args, "out", None),
                "grid.n": getattr(args, "grid_n", None),
            },
        )
        written = await _dispatch(args, config)
    except ConfigError as e:
        for message in e.messages:
            logger.error(message)
        return EXIT_CONFIG
    except ValidationError as e:
        for error in e.errors():
            where = ".".join(str(part) for part in error["loc"]) or "<root>"
            logger.error(f"{where}: {error['msg']}")
        return EXIT_CONFIG
    except ConvergenceError as e:
        logger.error(f"Convergence guard failed: {e}")
        return EXIT_GUARD
    except Exception as e:
        logger.error(f"Error running {args.command}: {str(e)}", exc_info=True)
        return EXIT_FAILURE

    logger.info(f"{args.command} wrote {len(written)} file(s)")
    return EXIT_OK


def start() -> None:
    sys.exit(asyncio.run(main()))
