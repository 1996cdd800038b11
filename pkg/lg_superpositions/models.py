import cmath
import math
import sys
from typing import Any, Literal

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from .logging_config import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi

Profile = Literal["binary", "blazed"]


class LGModeSpec(BaseModel):
    """One Laguerre-Gaussian basis mode.

    ``l`` is the azimuthal index of the e^{-ilθ} mode formula; orbital angular
    momentum is ``l`` in units of ħ per photon.
    """

    model_config = ConfigDict(frozen=True)

    p: int = Field(default=0, ge=0)
    l: int = 0
    w0: float = Field(default=1.0, gt=0)
    wavelength: float = Field(default=1e-3, gt=0)

    @property
    def oam(self) -> int:
        return self.l

    def with_indices(self, p: int, l: int) -> "LGModeSpec":
        return self.model_copy(update={"p": p, "l": l})


class BeamGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    w0: float
    wavelength: float
    z: float
    zR: float
    w: float
    curvature: float  # 1/R(z), zero at the waist
    gouy: float  # arctan(z/zR)
    k: float


class GridSpec(BaseModel):
    """Square sampling window at a fixed axial plane.

    Sample (i, j) sits at x = x_j, y = y_i with cell-centred coordinates
    x_j = -extent + 2·extent·(j + 0.5)/n.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(default=1024, ge=2)
    extent: float = Field(default=8.0, gt=0)
    z: float = 0.0

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.n

    def axis(self) -> np.ndarray:
        # Half-integer offsets keep the axis exactly antisymmetric.
        return self.spacing * (np.arange(self.n) - (self.n - 1) / 2.0)

    def refined(self) -> "GridSpec":
        return self.model_copy(update={"n": 2 * self.n})


class FieldGrid(BaseModel):
    """Complex scalar field sampled on a ``GridSpec`` window (row index = y)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2)
    extent: float = Field(gt=0)
    z: float = 0.0
    wavelength: float = Field(default=1e-3, gt=0)
    values: np.ndarray

    @field_validator("values")
    @classmethod
    def _complex_and_finite(cls, values: Any) -> np.ndarray:
        array = np.array(values, dtype=np.complex128)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"field values must be square, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("field values must be finite")
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _shape_matches_n(self) -> Self:
        if self.values.shape != (self.n, self.n):
            raise ValueError(
                f"values shape {self.values.shape} does not match n={self.n}"
            )
        return self

    @classmethod
    def on_grid(
        cls, grid: GridSpec, values: np.ndarray, wavelength: float = 1e-3
    ) -> "FieldGrid":
        return cls(
            n=grid.n,
            extent=grid.extent,
            z=grid.z,
            wavelength=wavelength,
            values=values,
        )

    @property
    def grid(self) -> GridSpec:
        return GridSpec(n=self.n, extent=self.extent, z=self.z)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def replace_values(self, values: np.ndarray) -> "FieldGrid":
        return FieldGrid(
            n=self.n,
            extent=self.extent,
            z=self.z,
            wavelength=self.wavelength,
            values=values,
        )


class HologramSpec(BaseModel):
    """Fork grating: Δm dislocations, period Λ, phase depth δ, displacement."""

    model_config = ConfigDict(frozen=True)

    dm: int = 1
    period: float = Field(default=0.25, gt=0)
    depth: float = Field(default=TWO_PI, ge=0)
    profile: Profile = "blazed"
    x0: float = 0.0
    y0: float = 0.0

    @model_validator(mode="after")
    def _flag_deep_modulation(self) -> Self:
        if self.depth > TWO_PI + 1e-12:
            logger.warning(
                "Phase depth exceeds 2π",
                extra={"depth": self.depth, "profile": self.profile},
            )
        return self

    @property
    def carrier_wavenumber(self) -> float:
        """kx = 2π/Λ of the plane reference wave."""
        return TWO_PI / self.period

    @property
    def centered(self) -> bool:
        return self.x0 == 0.0 and self.y0 == 0.0

    def tilt(self, wavelength: float) -> float:
        """Reference-wave angle ξ = arctan(kx/kz) that records this grating."""
        k = TWO_PI / wavelength
        kx = self.carrier_wavenumber
        if kx >= k:
            raise ValueError(
                f"period {self.period} is below the wavelength {wavelength}; "
                "no propagating reference wave records it"
            )
        return math.atan2(kx, math.sqrt(k * k - kx * kx))

    def displaced(self, x0: float, y0: float) -> "HologramSpec":
        return self.model_copy(update={"x0": x0, "y0": y0})

    def mirrored(self) -> "HologramSpec":
        """The same element flipped about the x axis (y -> -y)."""
        return self.model_copy(update={"dm": -self.dm, "y0": -self.y0})


class OrderCoefficients(BaseModel):
    model_config = ConfigDict(frozen=True)

    depth: float
    profile: Profile = "blazed"
    orders: dict[int, complex]

    def __getitem__(self, order: int) -> complex:
        return self.orders[order]

    @property
    def total_power(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.orders.values())


class SuperpositionSpec(BaseModel):
    """Normalized pair (α, β) weighting the Gaussian and the l = ±1 mode."""

    model_config = ConfigDict(frozen=True)

    alpha: complex
    beta: complex

    @model_validator(mode="after")
    def _normalized(self) -> Self:
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}")
        return self

    @classmethod
    def from_ratio(cls, gamma: float, phase: float) -> "SuperpositionSpec":
        """(1 + γ²)^(-1/2)·[u00 + γ·e^{iφ}·u01]."""
        if gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {gamma}")
        scale = 1.0 / math.sqrt(1.0 + gamma * gamma)
        return cls(alpha=complex(scale), beta=gamma * scale * cmath.exp(1j * phase))

    @classmethod
    def from_coefficients(cls, a0: complex, a1: complex) -> "SuperpositionSpec":
        norm = math.hypot(abs(a0), abs(a1))
        if norm == 0:
            raise ValueError("cannot normalize a vanishing coefficient pair")
        return cls(alpha=a0 / norm, beta=a1 / norm)

    @property
    def gamma(self) -> float:
        if self.alpha == 0:
            return math.inf
        return abs(self.beta) / abs(self.alpha)

    @property
    def phase(self) -> float:
        return cmath.phase(self.beta) - cmath.phase(self.alpha)


class Singularity(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    winding: int

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def theta(self) -> float:
        return math.atan2(self.y, self.x)


class SingularityReport(BaseModel):
    found: list[Singularity] = Field(default_factory=list)

    @property
    def total_winding(self) -> int:
        return sum(s.winding for s in self.found)

    def nearest(self, x: float, y: float) -> Singularity | None:
        if not self.found:
            return None
        return min(self.found, key=lambda s: math.hypot(s.x - x, s.y - y))


class ArmSpec(BaseModel):
    """One interferometer arm: attenuation, phase plate, optional hologram."""

    model_config = ConfigDict(frozen=True)

    attenuation: float = Field(default=1.0, ge=0.0, le=1.0)
    phase: float = 0.0
    hologram: HologramSpec | None = None
    order: int = 1


class DecompositionRecord(BaseModel):
    """Coefficients keyed by (p, L) with L the reported azimuthal label."""

    model_config = ConfigDict(frozen=True)

    coefficients: dict[tuple[int, int], complex]
    displacement: tuple[float, float] = (0.0, 0.0)
    field_power: float = 1.0

    @model_validator(mode="after")
    def _flag_unitarity_excess(self) -> Self:
        if self.total_power > self.field_power + 1e-6:
            logger.warning(
                "Decomposition exceeds field power",
                extra={"total": self.total_power, "field_power": self.field_power},
            )
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def total_power(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.coefficients.values())

    def coefficient(self, p: int, L: int) -> complex:
        return self.coefficients.get((p, L), 0j)

    def power_in(self, L: int) -> float:
        """Σ_p |a(p, L)|²."""
        return math.fsum(
            abs(a) ** 2 for (_, label), a in self.coefficients.items() if label == L
        )


class DetectorFlags(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gauss: bool = True
    lg: bool = True
    higher: bool = True
    decomposition: bool = False


class ScanSpec(BaseModel):
    """Displacement sweep of the hologram across a fixed input beam."""

    model_config = ConfigDict(frozen=True)

    axis: tuple[float, float] = (1.0, 0.0)
    start: float = -2.0
    stop: float = 2.0
    steps: int = Field(default=81, ge=2)
    hologram: HologramSpec = Field(default_factory=HologramSpec)
    input: LGModeSpec = Field(default_factory=LGModeSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    detectors: DetectorFlags = Field(default_factory=DetectorFlags)
    metrics: bool = True

    @field_validator("axis")
    @classmethod
    def _unit_axis(cls, axis: tuple[float, float]) -> tuple[float, float]:
        length = math.hypot(*axis)
        if length == 0:
            raise ValueError("scan axis must be non-zero")
        return (axis[0] / length, axis[1] / length)

    @model_validator(mode="after")
    def _covers_origin(self) -> Self:
        if self.stop <= self.start:
            raise ValueError(f"stop ({self.stop}) must exceed start ({self.start})")
        if self.metrics and not (self.start <= 0.0 <= self.stop):
            raise ValueError("crossover metrics need a scan range that covers 0")
        return self

    def displacements(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


class ScanRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    displacement: float
    i_gauss: float = Field(ge=0.0, le=1.0 + 1e-6)
    i_lg: float = Field(ge=0.0, le=1.0 + 1e-6)
    higher: dict[tuple[int, int], float] = Field(default_factory=dict)
    unitarity: float | None = None


class SingularityComparison(BaseModel):
    """One row of the predicted-vs-found singularity table."""

    model_config = ConfigDict(frozen=True)

    gamma: float
    phase_rad: float
    r_pred: float
    theta_pred: float
    r_found: float | None = None
    theta_found: float | None = None
    winding: int = 0


class ScanSummary(BaseModel):
    extinction_gauss: float | None = None
    extinction_lg: float | None = None
    crossover_over_w0: float | None = None
    unitarity_min: float | None = None
