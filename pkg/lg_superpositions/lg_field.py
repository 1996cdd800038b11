"""Laguerre-Gaussian mode amplitudes, Gaussian beam geometry and the discrete
inner product on sampled fields.

All lengths share one arbitrary unit; the defaults are w0 = 1 and
wavelength = w0/1000 (paraxial regime).
"""

import logging
import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .logging_config import get_logger, setup_logging
from .models import BeamGeometry, FieldGrid, GridSpec, LGModeSpec

setup_logging(level=logging.INFO)
logger = get_logger(__name__)


class ConvergenceError(RuntimeError):
    """A grid-doubling check moved a result by more than its tolerance."""


def laguerre(p: int, alpha: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Generalized Laguerre polynomial L_p^alpha(x).

    Uses the three-term recurrence
    (n+1)·L_{n+1} = (2n + 1 + alpha - x)·L_n - (n + alpha)·L_{n-1}.
    Scalars in, scalar out; arrays are evaluated elementwise.
    """
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    x_arr = np.asarray(x, dtype=np.float64)

    previous = np.ones_like(x_arr)
    if p == 0:
        result = previous
    else:
        current = 1.0 + alpha - x_arr
        for n in range(1, p):
            previous, current = (
                current,
                ((2 * n + 1 + alpha - x_arr) * current - (n + alpha) * previous)
                / (n + 1),
            )
        result = current

    if result.ndim == 0:
        return float(result)
    return result


def beam_geometry(w0: float, wavelength: float, z: float) -> BeamGeometry:
    if w0 <= 0 or wavelength <= 0:
        raise ValueError(
            f"w0 and wavelength must be positive, got w0={w0}, wavelength={wavelength}"
        )
    zR = math.pi * w0 * w0 / wavelength
    return BeamGeometry(
        w0=w0,
        wavelength=wavelength,
        z=z,
        zR=zR,
        w=w0 * math.sqrt(1.0 + (z / zR) ** 2),
        curvature=z / (z * z + zR * zR),
        gouy=math.atan2(z, zR),
        k=2.0 * math.pi / wavelength,
    )


def _normalization(p: int, abs_l: int) -> float:
    return math.sqrt(2.0 * math.factorial(p) / (math.pi * math.factorial(p + abs_l)))


def radial_envelope(
    p: int, abs_l: int, r: ArrayLike, w: float
) -> NDArray[np.float64]:
    """Real radial factor of u_{p,l} for a beam of radius ``w``."""
    r_arr = np.asarray(r, dtype=np.float64)
    rho = r_arr * math.sqrt(2.0) / w
    return (
        _normalization(p, abs_l)
        / w
        * rho**abs_l
        * laguerre(p, abs_l, rho * rho)
        * np.exp(-r_arr * r_arr / (w * w))
    )


def lg_amplitude(
    mode: LGModeSpec, r: ArrayLike, theta: ArrayLike, z: float
) -> NDArray[np.complex128] | complex:
    """Closed-form u_{p,l}(r, θ, z), normalized to unit power."""
    r_arr = np.asarray(r, dtype=np.float64)
    theta_arr = np.asarray(theta, dtype=np.float64)
    if np.any(r_arr < 0):
        raise ValueError("r must be non-negative")

    geo = beam_geometry(mode.w0, mode.wavelength, z)
    abs_l = abs(mode.l)
    envelope = radial_envelope(mode.p, abs_l, r_arr, geo.w)
    phase = (
        -geo.k * r_arr * r_arr * geo.curvature / 2.0
        - (2 * mode.p + abs_l + 1) * geo.gouy
        - mode.l * theta_arr
    )
    amplitude = envelope * np.exp(1j * phase)

    if amplitude.ndim == 0:
        return complex(amplitude)
    return amplitude


@lru_cache(maxsize=8)
def cartesian(grid: GridSpec) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Read-only (x, y) sample coordinates; rows follow y."""
    axis = grid.axis()
    x, y = np.meshgrid(axis, axis)
    x.flags.writeable = False
    y.flags.writeable = False
    return x, y


@lru_cache(maxsize=8)
def polar(grid: GridSpec) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    x, y = cartesian(grid)
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    r.flags.writeable = False
    theta.flags.writeable = False
    return r, theta


@lru_cache(maxsize=16)
def sample_mode(mode: LGModeSpec, grid: GridSpec) -> FieldGrid:
    """Evaluate ``mode`` at every cell centre of ``grid``.

    Results are cached; the returned values are read-only.
    """
    r, theta = polar(grid)
    logger.debug(
        "Sampling mode",
        extra={"p": mode.p, "l": mode.l, "n": grid.n, "extent": grid.extent},
    )
    values = lg_amplitude(mode, r, theta, grid.z)
    return FieldGrid.on_grid(grid, np.asarray(values), wavelength=mode.wavelength)


def _check_same_grid(a: FieldGrid, b: FieldGrid) -> None:
    if (a.n, a.extent, a.z) != (b.n, b.extent, b.z):
        raise ValueError(
            "fields live on different grids: "
            f"(n={a.n}, extent={a.extent}, z={a.z}) vs "
            f"(n={b.n}, extent={b.extent}, z={b.z})"
        )


def inner_product(a: FieldGrid, b: FieldGrid) -> complex:
    """Midpoint-rule ⟨a, b⟩ = Σ conj(a)·b·Δx·Δy, conjugate-linear in ``a``.

    Rows are reduced first and the row partials are then added in row order,
    so the result does not depend on how the per-row work is scheduled.
    """
    _check_same_grid(a, b)
    return midpoint_sum(np.conj(a.values) * b.values, a.grid)


def midpoint_sum(integrand: NDArray[np.complex128], grid: GridSpec) -> complex:
    """Σ integrand·Δx·Δy with row partials added in row order."""
    row_partials = np.sum(integrand, axis=1)
    total = sum(row_partials.tolist(), 0j)
    return complex(total * grid.spacing * grid.spacing)


def power(field: FieldGrid) -> float:
    return inner_product(field, field).real


def check_convergence(mode: LGModeSpec, grid: GridSpec, tol: float = 1e-6) -> float:
    """Compare the discrete power of ``mode`` on ``grid`` and on the doubled grid.

    Returns the absolute change; raises ConvergenceError above ``tol``.
    """
    coarse = power(sample_mode(mode, grid))
    fine = power(sample_mode(mode, grid.refined()))
    change = abs(fine - coarse)
    logger.info(
        "Grid convergence check",
        extra={"n": grid.n, "power": coarse, "change": change, "tol": tol},
    )
    if change > tol:
        raise ConvergenceError(
            f"power changed by {change:.3e} when doubling n={grid.n} (tol {tol:.1e})"
        )
    return change
