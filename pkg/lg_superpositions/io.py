"""Result files: FGRID fields, PGM images, scan/decomposition/singularity CSV
and the scan summary JSON.

Every ``format_*``/``*_image`` function is pure; the async ``save_*``
functions only write what was rendered beforehand. Numbers are written with
17 significant digits so files read back bit-exactly.
"""

import json
import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .decompose import HIGHER_ORDERS
from .logging_config import get_logger, setup_logging
from .models import (
    DecompositionRecord,
    FieldGrid,
    ScanRecord,
    ScanSummary,
    SingularityComparison,
)
from .scan import gauss_trace, lg_trace

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

FGRID_MAGIC = "FGRID v1"
FGRID_HEADER = "n,extent,z,wavelength"

SCAN_COLUMNS = (
    "d_over_w0",
    "i_gauss_raw",
    "i_lg_raw",
    "i_gauss_norm",
    "i_lg_norm",
    "a2_0m1",
    "a2_02",
    "a2_0m2",
)
DECOMPOSITION_COLUMNS = ("p", "L", "re", "im", "abs2")
SINGULARITY_COLUMNS = (
    "gamma",
    "phase_rad",
    "r_pred",
    "theta_pred",
    "r_found",
    "theta_found",
    "winding",
)


def _num(value: float) -> str:
    return f"{value:.17g}"


def _optional(value: float | None) -> str:
    return "" if value is None else _num(value)


def format_fgrid(field: FieldGrid) -> str:
    lines = [
        FGRID_MAGIC,
        FGRID_HEADER,
        ",".join(
            [str(field.n), _num(field.extent), _num(field.z), _num(field.wavelength)]
        ),
    ]
    flat = field.values.ravel()
    lines.extend(
        f"{_num(re)},{_num(im)}"
        for re, im in zip(flat.real.tolist(), flat.imag.tolist(), strict=True)
    )
    return "\n".join(lines) + "\n"


def parse_fgrid(text: str) -> FieldGrid:
    lines = text.splitlines()
    if len(lines) < 3 or lines[0].strip() != FGRID_MAGIC:
        raise ValueError(f"not an {FGRID_MAGIC} file")
    if lines[1].strip() != FGRID_HEADER:
        raise ValueError(f"unexpected FGRID header {lines[1]!r}")
    try:
        n_text, extent, z, wavelength = lines[2].split(",")
        n = int(n_text)
    except ValueError as exc:
        raise ValueError(f"malformed FGRID parameters {lines[2]!r}") from exc

    samples = lines[3:]
    if len(samples) != n * n:
        raise ValueError(f"expected {n * n} samples, found {len(samples)}")
    pairs = np.array(
        [[float(part) for part in line.split(",")] for line in samples],
        dtype=np.float64,
    )
    if pairs.shape != (n * n, 2):
        raise ValueError("every FGRID sample line must hold exactly re,im")
    values = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)
    return FieldGrid(
        n=n,
        extent=float(extent),
        z=float(z),
        wavelength=float(wavelength),
        values=values,
    )


def pgm_bytes(image: NDArray[np.uint8]) -> bytes:
    """Binary 8-bit PGM (P5)."""
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValueError("PGM export takes a 2-D uint8 image")
    rows, cols = image.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + image.tobytes()


def _top_row_first(values: NDArray[np.generic]) -> NDArray[np.generic]:
    # Row index follows +y; images list the top row first.
    return values[::-1, :]


def intensity_image(field: FieldGrid) -> NDArray[np.uint8]:
    """Intensity scaled linearly so the maximum maps to 255."""
    intensity = field.intensity
    peak = intensity.max()
    if peak <= 0:
        return np.zeros(intensity.shape, dtype=np.uint8)
    levels = np.rint(255.0 * intensity / peak)
    return np.ascontiguousarray(_top_row_first(levels.astype(np.uint8)))


def phase_image(field: FieldGrid) -> NDArray[np.uint8]:
    """Phase mapped from [-π, π) onto the 256 grey levels."""
    levels = np.floor((field.phase + np.pi) / (2.0 * np.pi) * 256.0).astype(np.int64)
    return np.ascontiguousarray(_top_row_first((levels % 256).astype(np.uint8)))


def hologram_image(phase: NDArray[np.float64], depth: float) -> NDArray[np.uint8]:
    """Imprinted phase in [0, depth) scaled onto the 256 grey levels."""
    if depth <= 0:
        return np.zeros(phase.shape, dtype=np.uint8)
    levels = np.clip(np.floor(phase / depth * 256.0), 0, 255)
    return np.ascontiguousarray(_top_row_first(levels.astype(np.uint8)))


def _csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _normalized(values: list[float]) -> list[float]:
    peak = max(values, default=0.0)
    if peak <= 0:
        return [0.0 for _ in values]
    return [value / peak for value in values]


def format_scan_csv(records: Sequence[ScanRecord], w0: float = 1.0) -> str:
    gauss = [value for _, value in gauss_trace(records)]
    lg = [value for _, value in lg_trace(records)]
    rows = []
    for record, g_norm, l_norm in zip(
        records, _normalized(gauss), _normalized(lg), strict=True
    ):
        rows.append(
            [
                _num(record.displacement / w0),
                _num(record.i_gauss),
                _num(record.i_lg),
                _num(g_norm),
                _num(l_norm),
                *(_optional(record.higher.get(key)) for key in HIGHER_ORDERS),
            ]
        )
    return _csv(SCAN_COLUMNS, rows)


def format_summary_json(summary: ScanSummary) -> str:
    return json.dumps(summary.model_dump(mode="json"), indent=4) + "\n"


def format_decomposition_csv(record: DecompositionRecord) -> str:
    rows = [
        [str(p), str(L), _num(a.real), _num(a.imag), _num(abs(a) ** 2)]
        for (p, L), a in sorted(record.coefficients.items())
    ]
    return _csv(DECOMPOSITION_COLUMNS, rows)


def format_singularity_csv(rows: Sequence[SingularityComparison]) -> str:
    return _csv(
        SINGULARITY_COLUMNS,
        [
            [
                _num(row.gamma),
                _num(row.phase_rad),
                _num(row.r_pred),
                _num(row.theta_pred),
                _optional(row.r_found),
                _optional(row.theta_found),
                str(row.winding),
            ]
            for row in rows
        ],
    )


async def save_fgrid(field: FieldGrid, path: Path) -> None:
    await save_outputs({path: format_fgrid(field)})


async def load_fgrid(path: Path) -> FieldGrid:
    with path.open("r", encoding="utf-8") as f:
        return parse_fgrid(f.read())


async def save_outputs(outputs: Mapping[Path, str | bytes]) -> list[Path]:
    """Write already-rendered outputs, creating parent directories as needed.

    Everything goes to ``.part`` files first and is renamed into place once
    all writes succeeded; on failure nothing new is left behind.
    """
    staged: list[tuple[Path, Path]] = []
    written: list[Path] = []
    try:
        for path, content in outputs.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            part = path.with_name(path.name + ".part")
            staged.append((part, path))
            if isinstance(content, bytes):
                part.write_bytes(content)
            else:
                with part.open("w", encoding="utf-8", newline="\n") as f:
                    f.write(content)
        for part, path in staged:
            part.replace(path)
            written.append(path)
    except OSError:
        for part, path in staged:
            part.unlink(missing_ok=True)
            if path in written:
                path.unlink(missing_ok=True)
        logger.error(
            "Writing outputs failed, removed partial files",
            extra={"outputs": len(outputs)},
        )
        raise
    for path in written:
        logger.info("Wrote output", extra={"path": str(path)})
    return written
