"""Displaced-hologram scan: detector traces, higher-order content and trace metrics."""

import asyncio
import logging
from collections.abc import Sequence

import numpy as np

from .decompose import (
    HIGHER_ORDERS,
    detector_gauss,
    detector_lg,
    full_decomposition,
    label_mode,
    overlap_coefficient,
)
from .hologram import apply_hologram
from .lg_field import sample_mode
from .logging_config import get_logger, setup_logging
from .models import TWO_PI, HologramSpec, ScanRecord, ScanSpec, ScanSummary

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

Trace = Sequence[tuple[float, float]]

# Each in-flight position holds a handful of full-grid arrays.
MAX_CONCURRENT_POSITIONS = 4

# The detector analyzer: an ideal centered single-dislocation blazed hologram.
ANALYZER = HologramSpec(dm=1, depth=TWO_PI, profile="blazed")


def scan_position(spec: ScanSpec, displacement: float) -> ScanRecord:
    """Detector readings with the hologram dislocation at displacement·axis."""
    ax, ay = spec.axis
    hologram = spec.hologram.displaced(displacement * ax, displacement * ay)
    incoming = sample_mode(spec.input, spec.grid)
    diffracted = apply_hologram(incoming, hologram, order=1)
    w0 = spec.input.w0

    i_gauss = detector_gauss(diffracted, w0) if spec.detectors.gauss else 0.0
    i_lg = detector_lg(diffracted, ANALYZER, w0) if spec.detectors.lg else 0.0
    higher: dict[tuple[int, int], float] = {}
    if spec.detectors.higher:
        for p, L in HIGHER_ORDERS:
            target = label_mode(p, L, w0, spec.input.wavelength)
            higher[(p, L)] = abs(overlap_coefficient(diffracted, target)) ** 2
    unitarity = None
    if spec.detectors.decomposition:
        unitarity = full_decomposition(
            diffracted, w0=w0, displacement=(hologram.x0, hologram.y0)
        ).total_power

    logger.debug(
        "Scan position",
        extra={"d": displacement, "i_gauss": i_gauss, "i_lg": i_lg},
    )
    return ScanRecord(
        displacement=displacement,
        i_gauss=i_gauss,
        i_lg=i_lg,
        higher=higher,
        unitarity=unitarity,
    )


async def run_scan(
    spec: ScanSpec, max_concurrent: int = MAX_CONCURRENT_POSITIONS
) -> list[ScanRecord]:
    """Evaluate every displacement of ``spec``; records come back sorted by displacement."""
    displacements = [float(d) for d in spec.displacements()]
    semaphore = asyncio.Semaphore(max_concurrent)
    # Fill the mode cache before the workers start.
    sample_mode(spec.input, spec.grid)

    async def bounded(d: float) -> ScanRecord:
        async with semaphore:
            return await asyncio.to_thread(scan_position, spec, d)

    logger.info(
        "Starting scan",
        extra={
            "steps": spec.steps,
            "start": spec.start,
            "stop": spec.stop,
            "n": spec.grid.n,
            "extent": spec.grid.extent,
        },
    )
    records = await asyncio.gather(*(bounded(d) for d in displacements))
    logger.info("Scan finished", extra={"records": len(records)})
    return sorted(records, key=lambda record: record.displacement)


def gauss_trace(records: Sequence[ScanRecord]) -> list[tuple[float, float]]:
    return [(r.displacement, r.i_gauss) for r in records]


def lg_trace(records: Sequence[ScanRecord]) -> list[tuple[float, float]]:
    return [(r.displacement, r.i_lg) for r in records]


def normalize(trace: Trace) -> list[tuple[float, float]]:
    """Scale a trace to its own maximum."""
    if not trace:
        raise ValueError("trace is empty")
    peak = max(value for _, value in trace)
    if peak <= 0:
        raise ValueError("trace has no positive sample")
    return [(d, value / peak) for d, value in trace]


def extinction_ratio(trace: Trace) -> float:
    """min/max of a detector trace."""
    if not trace:
        raise ValueError("trace is empty")
    values = [value for _, value in trace]
    peak = max(values)
    if peak <= 0:
        raise ValueError("extinction ratio of an all-zero trace is undefined")
    return min(values) / peak


def crossover(trace_a: Trace, trace_b: Trace) -> float:
    """|d| where the max-normalized traces first meet on the d >= 0 branch.

    The meeting point is linearly interpolated between neighbouring samples.
    """
    a = normalize(trace_a)
    b = normalize(trace_b)
    if [d for d, _ in a] != [d for d, _ in b]:
        raise ValueError("traces must share the displacement axis")

    branch = [
        (d, va - vb) for (d, va), (_, vb) in zip(a, b, strict=True) if d >= 0.0
    ]
    for (d0, g0), (d1, g1) in zip(branch, branch[1:], strict=False):
        if g0 == 0.0:
            return abs(d0)
        if np.sign(g0) != np.sign(g1):
            return abs(d0 + (d1 - d0) * g0 / (g0 - g1))
    if branch and branch[-1][1] == 0.0:
        return abs(branch[-1][0])
    raise ValueError("traces do not intersect on the positive branch")


def _extinction_or_none(trace: Trace, detector: str) -> float | None:
    try:
        return extinction_ratio(trace)
    except ValueError:
        logger.warning("Detector trace is empty or zero", extra={"detector": detector})
        return None


def summarize(records: Sequence[ScanRecord], w0: float = 1.0) -> ScanSummary:
    """Extinction ratios, crossover (in units of w0) and the weakest unitarity sum."""
    gauss = gauss_trace(records)
    lg = lg_trace(records)
    try:
        crossing: float | None = crossover(gauss, lg) / w0
    except ValueError as exc:
        logger.warning("No crossover", extra={"reason": str(exc)})
        crossing = None
    unitarity = [r.unitarity for r in records if r.unitarity is not None]
    summary = ScanSummary(
        extinction_gauss=_extinction_or_none(gauss, "gauss"),
        extinction_lg=_extinction_or_none(lg, "lg"),
        crossover_over_w0=crossing,
        unitarity_min=min(unitarity) if unitarity else None,
    )
    logger.info("Scan summary", extra=summary.model_dump())
    return summary
