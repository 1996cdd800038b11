"""Fork-hologram transmission, diffraction-order expansion and single-order action.

A hologram with Δm dislocations, period Λ and phase depth δ transmits

    T = exp(i·δ·s/2π),   s = mod(Δm·φ - (2π/Λ)·r·cos φ, 2π)

for the blazed profile; the binary profile thresholds s at π onto the two
phase levels {0, δ/2}. Both are periodic in s, so T = Σ_n c_n·exp(i·n·s) and
order n carries the azimuthal factor exp(i·n·Δm·φ) on top of the linear
carrier. ``apply_hologram`` keeps one order and drops its carrier.
"""

import logging
import math
from collections.abc import Iterable
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .lg_field import cartesian
from .logging_config import get_logger, setup_logging
from .models import FieldGrid, GridSpec, HologramSpec, OrderCoefficients, Profile

setup_logging(level=logging.INFO)
logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi
QUADRATURE_NODES = 4096


def sawtooth_argument(
    h: HologramSpec, x: ArrayLike, y: ArrayLike
) -> NDArray[np.float64]:
    """s = mod(Δm·φ - (2π/Λ)·r·cos φ, 2π) about the displaced dislocation."""
    dx = np.asarray(x, dtype=np.float64) - h.x0
    dy = np.asarray(y, dtype=np.float64) - h.y0
    phi = np.arctan2(dy, dx)
    # r·cos φ is just the shifted x coordinate
    return np.mod(h.dm * phi - h.carrier_wavenumber * dx, TWO_PI)


def phase_profile(h: HologramSpec, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """Imprinted phase in [0, δ) (blazed) or {0, δ/2} (binary)."""
    s = sawtooth_argument(h, x, y)
    if h.profile == "blazed":
        return h.depth * s / TWO_PI
    return np.where(s >= math.pi, h.depth / 2.0, 0.0)


def transmission(
    h: HologramSpec, x: ArrayLike, y: ArrayLike
) -> NDArray[np.complex128] | complex:
    """Phase-only transmission T(x, y); |T| = 1 everywhere."""
    t = np.exp(1j * phase_profile(h, x, y))
    if t.ndim == 0:
        return complex(t)
    return t


def _profile_samples(depth: float, profile: Profile, nodes: int) -> NDArray[np.complex128]:
    t = (np.arange(nodes) + 0.5) * (TWO_PI / nodes)
    if profile == "blazed":
        return np.exp(1j * depth * t / TWO_PI)
    return np.exp(1j * (depth / 2.0) * (t >= math.pi))


def grating_orders(
    depth: float,
    n_range: Iterable[int],
    profile: Profile = "blazed",
    nodes: int = QUADRATURE_NODES,
) -> OrderCoefficients:
    """c_n = (1/2π)·∫ T(s)·exp(-i·n·s) ds over one period.

    Midpoint quadrature on ``nodes`` points; all orders come from one FFT of
    the sampled profile, with the half-cell shift of the midpoints restored.
    """
    if profile not in ("binary", "blazed"):
        raise ValueError(f"unknown hologram profile {profile!r}")
    orders = sorted(set(n_range))
    if orders and max(abs(n) for n in orders) >= nodes // 2:
        raise ValueError(f"orders must satisfy |n| < {nodes // 2}")

    spectrum = np.fft.fft(_profile_samples(depth, profile, nodes)) / nodes
    coefficients = {
        n: complex(np.exp(-1j * math.pi * n / nodes) * spectrum[n % nodes])
        for n in orders
    }
    return OrderCoefficients(depth=depth, profile=profile, orders=coefficients)


@lru_cache(maxsize=256)
def order_coefficient(depth: float, profile: Profile, order: int) -> complex:
    return grating_orders(depth, [order], profile)[order]


def apply_hologram(field: FieldGrid, h: HologramSpec, order: int) -> FieldGrid:
    """Keep diffraction order ``order`` of ``h`` acting on ``field``, demodulated.

    out = c_order · exp(i·order·Δm·φ') · in, with φ' the azimuth about the
    displaced dislocation. The hologram sits at the beam waist, so the field
    must be sampled at z = 0.
    """
    if field.z != 0.0:
        raise ValueError(
            f"holograms act at the waist plane z = 0, field is at z = {field.z}"
        )
    coefficient = order_coefficient(h.depth, h.profile, order)
    x, y = cartesian(field.grid)
    phi = np.arctan2(y - h.y0, x - h.x0)
    logger.debug(
        "Applying hologram",
        extra={
            "dm": h.dm,
            "order": order,
            "x0": h.x0,
            "y0": h.y0,
            "efficiency": abs(coefficient) ** 2,
        },
    )
    return field.replace_values(
        coefficient * np.exp(1j * (order * h.dm) * phi) * field.values
    )


def template(h: HologramSpec, grid: GridSpec) -> NDArray[np.float64]:
    """Phase pattern of ``h`` over ``grid`` for image export."""
    x, y = cartesian(grid)
    return phase_profile(h, x, y)
