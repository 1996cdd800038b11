"""Two-mode superpositions, the interferometric preparation route and
phase-singularity location.

For α·u00 + β·u_{0,l} with l = ±1 the two terms cancel on a single point,
at r = w0/(γ√2) and θ = π + sign(l)·φ where γ = |β/α| and φ = arg β - arg α.
"""

import asyncio
import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .hologram import apply_hologram
from .lg_field import lg_amplitude, sample_mode
from .logging_config import get_logger, setup_logging
from .models import (
    ArmSpec,
    FieldGrid,
    GridSpec,
    LGModeSpec,
    Singularity,
    SingularityComparison,
    SingularityReport,
    SuperpositionSpec,
)

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

# Cells whose corners are all this far below the peak carry no usable phase.
AMPLITUDE_FLOOR = 1e-12

# A zero sitting on a sample closes the circulation of more than one cell;
# refined positions closer than this fraction of a cell are one site.
MERGE_RADIUS = 0.25


def _check_pair(mode0: LGModeSpec, mode1: LGModeSpec) -> None:
    if mode0.l != 0:
        raise ValueError(f"first mode must have l = 0, got l = {mode0.l}")
    if abs(mode1.l) != 1:
        raise ValueError(f"second mode must have l = ±1, got l = {mode1.l}")
    if (mode0.w0, mode0.wavelength) != (mode1.w0, mode1.wavelength):
        raise ValueError(
            "superposed modes must share w0 and wavelength: "
            f"({mode0.w0}, {mode0.wavelength}) vs ({mode1.w0}, {mode1.wavelength})"
        )


def superposition_amplitude(
    spec: SuperpositionSpec,
    mode0: LGModeSpec,
    mode1: LGModeSpec,
    x: ArrayLike,
    y: ArrayLike,
    z: float = 0.0,
) -> NDArray[np.complex128] | complex:
    """α·u0 + β·u1 evaluated at arbitrary points."""
    _check_pair(mode0, mode1)
    x_arr = np.asarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    r = np.hypot(x_arr, y_arr)
    theta = np.arctan2(y_arr, x_arr)
    return spec.alpha * lg_amplitude(mode0, r, theta, z) + spec.beta * lg_amplitude(
        mode1, r, theta, z
    )


def make_superposition(
    spec: SuperpositionSpec, mode0: LGModeSpec, mode1: LGModeSpec, grid: GridSpec
) -> FieldGrid:
    _check_pair(mode0, mode1)
    u0 = sample_mode(mode0, grid)
    u1 = sample_mode(mode1, grid)
    return u0.replace_values(spec.alpha * u0.values + spec.beta * u1.values)


def mixture_intensity(
    spec: SuperpositionSpec, mode0: LGModeSpec, mode1: LGModeSpec, grid: GridSpec
) -> NDArray[np.float64]:
    """|α·u0|² + |β·u1|²: the same weights mixed incoherently."""
    _check_pair(mode0, mode1)
    return (
        abs(spec.alpha) ** 2 * sample_mode(mode0, grid).intensity
        + abs(spec.beta) ** 2 * sample_mode(mode1, grid).intensity
    )


def _wrap(angle: NDArray[np.float64]) -> NDArray[np.float64]:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def _bilinear_root(corners: NDArray[np.complex128]) -> tuple[float, float]:
    """Zero of the bilinear interpolant on the unit cell.

    ``corners`` is [[f(0,0), f(1,0)], [f(0,1), f(1,1)]] indexed [t][s].
    Newton iteration from the cell centre, clipped to the cell.
    """
    a = corners[0, 0]
    b = corners[0, 1] - a
    c = corners[1, 0] - a
    d = a - corners[0, 1] - corners[1, 0] + corners[1, 1]

    s, t = 0.5, 0.5
    for _ in range(20):
        f = a + b * s + c * t + d * s * t
        fs = b + d * t
        ft = c + d * s
        jacobian = np.array([[fs.real, ft.real], [fs.imag, ft.imag]])
        det = np.linalg.det(jacobian)
        if abs(det) < 1e-300:
            break
        step = np.linalg.solve(jacobian, [-f.real, -f.imag])
        ds, dt = float(step[0]), float(step[1])
        s = min(max(s + ds, 0.0), 1.0)
        t = min(max(t + dt, 0.0), 1.0)
        if abs(ds) < 1e-12 and abs(dt) < 1e-12:
            break
    return s, t


def find_singularities(field: FieldGrid) -> SingularityReport:
    """Locate every cell whose corner phases circulate by ±2π.

    Corners are visited counterclockwise (x right, y up), so a field
    ∝ e^{+iθ} reports winding +1. Positions are refined inside the cell to
    the common zero of the bilinear real and imaginary parts.
    """
    values = field.values
    phase = np.angle(values)
    corner_phases = (
        phase[:-1, :-1],
        phase[:-1, 1:],
        phase[1:, 1:],
        phase[1:, :-1],
    )
    circulation = sum(
        _wrap(corner_phases[(k + 1) % 4] - corner_phases[k]) for k in range(4)
    )
    winding = np.rint(circulation / (2.0 * np.pi)).astype(int)

    magnitude = np.abs(values)
    floor = AMPLITUDE_FLOOR * magnitude.max()
    corner_max = np.maximum.reduce(
        [magnitude[:-1, :-1], magnitude[:-1, 1:], magnitude[1:, 1:], magnitude[1:, :-1]]
    )
    candidates = np.argwhere((winding != 0) & (corner_max > floor))

    axis = field.grid.axis()
    spacing = field.grid.spacing
    found: list[Singularity] = []
    for i, j in candidates:
        s, t = _bilinear_root(values[i : i + 2, j : j + 2])
        site = Singularity(
            x=float(axis[j] + s * spacing),
            y=float(axis[i] + t * spacing),
            winding=int(winding[i, j]),
        )
        if any(
            other.winding == site.winding
            and math.hypot(other.x - site.x, other.y - site.y)
            < MERGE_RADIUS * spacing
            for other in found
        ):
            continue
        found.append(site)

    logger.debug("Singularity search", extra={"n": field.n, "found": len(found)})
    return SingularityReport(found=found)


def has_singularity(field: FieldGrid) -> bool:
    return bool(find_singularities(field).found)


def singularity_prediction(
    gamma: float, phase: float, w0: float, l: int = 1
) -> tuple[float, float]:
    """Polar position (r, θ) of the zero of u00 + γ·e^{iφ}·u_{0,l}, l = ±1."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if abs(l) != 1:
        raise ValueError(f"prediction holds for l = ±1 only, got l = {l}")
    r = w0 / (gamma * math.sqrt(2.0))
    theta = math.remainder(math.pi + math.copysign(1.0, l) * phase, 2.0 * math.pi)
    return r, theta


def _arm_output(field: FieldGrid, arm: ArmSpec) -> FieldGrid:
    transformed = (
        apply_hologram(field, arm.hologram, arm.order)
        if arm.hologram is not None
        else field
    )
    weight = arm.attenuation * np.exp(1j * arm.phase)
    return transformed.replace_values(weight * transformed.values)


def mach_zehnder(field: FieldGrid, arm_a: ArmSpec, arm_b: ArmSpec) -> FieldGrid:
    """Field at the superposition port of an ideal 50:50 Mach-Zehnder.

    Each splitter contributes an amplitude factor 1/√2 per pass, so the port
    carries (1/2)·(arm A + arm B).
    """
    out_a = _arm_output(field, arm_a)
    out_b = _arm_output(field, arm_b)
    logger.debug(
        "Mach-Zehnder output",
        extra={
            "t_a": arm_a.attenuation,
            "t_b": arm_b.attenuation,
            "phase_a": arm_a.phase,
            "phase_b": arm_b.phase,
        },
    )
    return field.replace_values(0.5 * (out_a.values + out_b.values))


def compare_with_prediction(
    gamma: float,
    phase: float,
    mode0: LGModeSpec,
    mode1: LGModeSpec,
    grid: GridSpec,
) -> SingularityComparison:
    r_pred, theta_pred = singularity_prediction(gamma, phase, mode0.w0, mode1.l)
    field = make_superposition(
        SuperpositionSpec.from_ratio(gamma, phase), mode0, mode1, grid
    )
    report = find_singularities(field)
    x_pred, y_pred = r_pred * math.cos(theta_pred), r_pred * math.sin(theta_pred)
    nearest = report.nearest(x_pred, y_pred)
    if nearest is None:
        logger.warning(
            "No singularity found",
            extra={"gamma": gamma, "phase": phase, "n": grid.n},
        )
        return SingularityComparison(
            gamma=gamma, phase_rad=phase, r_pred=r_pred, theta_pred=theta_pred
        )
    return SingularityComparison(
        gamma=gamma,
        phase_rad=phase,
        r_pred=r_pred,
        theta_pred=theta_pred,
        r_found=nearest.r,
        theta_found=nearest.theta,
        winding=nearest.winding,
    )


async def singularity_sweep(
    gammas: Sequence[float],
    phases: Sequence[float],
    mode0: LGModeSpec,
    mode1: LGModeSpec,
    grid: GridSpec,
) -> list[SingularityComparison]:
    """Predicted vs found singularity for every (γ, φ) pair, sorted by (γ, φ)."""
    pairs = sorted(itertools.product(gammas, phases))
    # Warm the mode cache once instead of racing for it in every worker.
    sample_mode(mode0, grid)
    sample_mode(mode1, grid)
    rows = await asyncio.gather(
        *(
            asyncio.to_thread(compare_with_prediction, g, ph, mode0, mode1, grid)
            for g, ph in pairs
        )
    )
    logger.info(
        "Singularity sweep finished",
        extra={"pairs": len(rows), "n": grid.n, "extent": grid.extent},
    )
    return sorted(rows, key=lambda row: (row.gamma, row.phase_rad))
