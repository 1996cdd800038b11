"""Projection of sampled fields onto the LG basis and the two detector models.

Coefficients are reported under azimuthal labels L: a field ∝ e^{+iLθ} has
label L, which is the mode index l = -L of the e^{-ilθ} mode formula. The
Gauss detector is a mono-mode fiber (projection onto u00); the LG detector
puts a mirrored fork hologram in front of the same fiber, lowering L by one.
"""

import logging
import math
from collections.abc import Iterable

import numpy as np

from .hologram import apply_hologram
from .lg_field import (
    inner_product,
    midpoint_sum,
    polar,
    power,
    radial_envelope,
    sample_mode,
)
from .logging_config import get_logger, setup_logging
from .models import TWO_PI, DecompositionRecord, FieldGrid, HologramSpec, LGModeSpec

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

# (p, L) entries tracked alongside the two detectors during a scan.
HIGHER_ORDERS: tuple[tuple[int, int], ...] = ((0, -1), (0, 2), (0, -2))

DEFAULT_L_RANGE = range(-3, 4)
DEFAULT_P_RANGE = range(0, 7)


def label_mode(p: int, L: int, w0: float = 1.0, wavelength: float = 1e-3) -> LGModeSpec:
    """Basis mode with spatial factor e^{+iLθ}."""
    return LGModeSpec(p=p, l=-L, w0=w0, wavelength=wavelength)


def overlap_coefficient(
    field: FieldGrid, target: LGModeSpec, carrier_removed: bool = True
) -> complex:
    """⟨u_target, field⟩ on the field's own grid."""
    if not carrier_removed:
        raise ValueError(
            "projection needs a demodulated field; carrier_removed=False is unsupported"
        )
    if field.z != 0.0:
        raise ValueError(f"projections are taken at z = 0, field is at z = {field.z}")
    return inner_product(sample_mode(target, field.grid), field)


def detector_gauss(field: FieldGrid, w0: float = 1.0) -> float:
    gaussian = LGModeSpec(w0=w0, wavelength=field.wavelength)
    return abs(overlap_coefficient(field, gaussian)) ** 2


def _analyzer_mount(analyzer: HologramSpec) -> HologramSpec:
    if not analyzer.centered:
        raise ValueError(
            f"analyzer must be centered, got x0={analyzer.x0}, y0={analyzer.y0}"
        )
    if abs(analyzer.dm) != 1:
        raise ValueError(f"analyzer must carry a single dislocation, got dm={analyzer.dm}")
    if not math.isclose(analyzer.depth, TWO_PI, rel_tol=0.0, abs_tol=1e-12):
        raise ValueError(f"analyzer depth must be 2π, got {analyzer.depth}")
    # Flipped about x, so the +1 order imprints e^{-iθ}.
    return analyzer if analyzer.dm < 0 else analyzer.mirrored()


def detector_lg(field: FieldGrid, analyzer: HologramSpec, w0: float = 1.0) -> float:
    """Fiber-coupled intensity behind the analyzer hologram (+1 order)."""
    converted = apply_hologram(field, _analyzer_mount(analyzer), order=1)
    return detector_gauss(converted, w0)


def _coefficients(
    field: FieldGrid,
    L_values: Iterable[int],
    p_values: Iterable[int],
    w0: float,
) -> dict[tuple[int, int], complex]:
    # At the waist a basis mode is radial_envelope(p, |L|)·e^{+iLθ}. The
    # radial factors of one |L| are shared by +L and -L; only those are held.
    r, theta = polar(field.grid)
    grid = field.grid
    ps = sorted(set(p_values))
    Ls = sorted(set(L_values))
    coefficients: dict[tuple[int, int], complex] = {}
    for abs_L in sorted({abs(L) for L in Ls}):
        envelopes = [radial_envelope(p, abs_L, r, w0) for p in ps]
        for L in (L for L in Ls if abs(L) == abs_L):
            projected = field.values * np.exp(-1j * L * theta)
            for p, envelope in zip(ps, envelopes, strict=True):
                coefficients[(p, L)] = midpoint_sum(envelope * projected, grid)
    return {key: coefficients[key] for key in sorted(coefficients)}


def full_decomposition(
    field: FieldGrid,
    L_range: Iterable[int] = DEFAULT_L_RANGE,
    p_range: Iterable[int] = DEFAULT_P_RANGE,
    w0: float = 1.0,
    displacement: tuple[float, float] = (0.0, 0.0),
) -> DecompositionRecord:
    """All coefficients a(p, L) over the given ranges, keyed and ordered by (p, L)."""
    if field.z != 0.0:
        raise ValueError(f"projections are taken at z = 0, field is at z = {field.z}")
    L_values = list(L_range)
    p_values = list(p_range)
    coefficients = _coefficients(field, L_values, p_values, w0)
    record = DecompositionRecord(
        coefficients=coefficients,
        displacement=displacement,
        field_power=power(field),
    )
    logger.debug(
        "Decomposition",
        extra={
            "modes": len(coefficients),
            "total_power": record.total_power,
            "field_power": record.field_power,
            "x0": displacement[0],
            "y0": displacement[1],
        },
    )
    return record


def truncation_change(
    field: FieldGrid,
    L_range: Iterable[int] = DEFAULT_L_RANGE,
    p_range: Iterable[int] = DEFAULT_P_RANGE,
    w0: float = 1.0,
) -> float:
    """Captured power gained by doubling both truncation ranges.

    The ranges grow to |L| <= 2·max|L| and p <= 2·max p + 1.
    """
    L_values = list(L_range)
    p_values = list(p_range)
    base = full_decomposition(field, L_values, p_values, w0).total_power
    L_max = 2 * max(abs(L) for L in L_values)
    p_max = 2 * max(p_values) + 1
    doubled = full_decomposition(
        field, range(-L_max, L_max + 1), range(0, p_max + 1), w0
    ).total_power
    change = doubled - base
    logger.info(
        "Truncation check",
        extra={"base": base, "doubled": doubled, "change": change},
    )
    return change


def vortex_p_spectrum(p_max: int) -> list[float]:
    """|a_p|² of a Gaussian carrying a centered e^{±iθ} phase, for p = 0..p_max.

    |a_p|² = (π/4)·C_p²/(p + 1) with C_p = binom(2p, p)/4^p, over the matched-waist
    |L| = 1 modes. The spectrum sums to 1 only as p -> infinity.
    """
    if p_max < 0:
        raise ValueError(f"p_max must be >= 0, got {p_max}")
    spectrum = []
    for p in range(p_max + 1):
        c_p = math.comb(2 * p, p) / 4**p
        spectrum.append(math.pi / 4.0 * c_p * c_p / (p + 1))
    return spectrum
