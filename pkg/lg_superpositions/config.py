"""Run configuration: one JSON document, validated before anything is computed.

Lengths in the document are given in units of the beam waist (``*_over_w0``)
and converted to absolute lengths by the ``*_spec`` accessors.
"""

import json
import logging
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .logging_config import get_logger, setup_logging
from .models import (
    TWO_PI,
    ArmSpec,
    DetectorFlags,
    GridSpec,
    HologramSpec,
    LGModeSpec,
    Profile,
    ScanSpec,
)

setup_logging(level=logging.INFO)
logger = get_logger(__name__)


class ConfigError(ValueError):
    """Invalid run configuration; ``messages`` holds one line per problem."""

    def __init__(self, messages: list[str]) -> None:
        super().__init__("\n".join(messages))
        self.messages = messages


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GridConfig(_Section):
    n: int = Field(default=1024, ge=2)
    extent_over_w0: float = Field(default=8.0, gt=0)


class BeamConfig(_Section):
    w0: float = Field(default=1.0, gt=0)
    wavelength: float = Field(default=1e-3, gt=0)


class HologramConfig(_Section):
    dm: int = 1
    period_over_w0: float = Field(default=0.25, gt=0)
    depth: float = Field(default=TWO_PI, ge=0)
    profile: Profile = "blazed"
    x0_over_w0: float = 0.0
    y0_over_w0: float = 0.0


class ScanConfig(_Section):
    axis: tuple[float, float] = (1.0, 0.0)
    start_over_w0: float = -2.0
    stop_over_w0: float = 2.0
    steps: int = Field(default=81, ge=2)
    input_p: int = Field(default=0, ge=0)
    input_l: int = 0
    detectors: DetectorFlags = Field(
        default_factory=lambda: DetectorFlags(decomposition=True)
    )


class SingularityConfig(_Section):
    gammas: list[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    phases: list[float] = Field(
        default_factory=lambda: [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    )


class ArmConfig(_Section):
    attenuation: float = Field(default=1.0, ge=0.0, le=1.0)
    phase: float = 0.0
    hologram: bool = False
    order: int = 1


class InterferometerConfig(_Section):
    arm_a: ArmConfig = Field(default_factory=ArmConfig)
    arm_b: ArmConfig = Field(default_factory=lambda: ArmConfig(hologram=True))


class RunConfig(_Section):
    grid: GridConfig = Field(default_factory=GridConfig)
    beam: BeamConfig = Field(default_factory=BeamConfig)
    hologram: HologramConfig = Field(default_factory=HologramConfig)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    singularity: SingularityConfig = Field(default_factory=SingularityConfig)
    interferometer: InterferometerConfig = Field(default_factory=InterferometerConfig)
    output_dir: Path = Path("output")

    def grid_spec(self, z: float = 0.0) -> GridSpec:
        return GridSpec(
            n=self.grid.n, extent=self.grid.extent_over_w0 * self.beam.w0, z=z
        )

    def mode(self, p: int = 0, l: int = 0) -> LGModeSpec:
        return LGModeSpec(p=p, l=l, w0=self.beam.w0, wavelength=self.beam.wavelength)

    def hologram_spec(self) -> HologramSpec:
        w0 = self.beam.w0
        h = self.hologram
        return HologramSpec(
            dm=h.dm,
            period=h.period_over_w0 * w0,
            depth=h.depth,
            profile=h.profile,
            x0=h.x0_over_w0 * w0,
            y0=h.y0_over_w0 * w0,
        )

    def arm_spec(self, arm: ArmConfig) -> ArmSpec:
        return ArmSpec(
            attenuation=arm.attenuation,
            phase=arm.phase,
            hologram=self.hologram_spec() if arm.hologram else None,
            order=arm.order,
        )

    def scan_spec(self) -> ScanSpec:
        w0 = self.beam.w0
        s = self.scan
        return ScanSpec(
            axis=s.axis,
            start=s.start_over_w0 * w0,
            stop=s.stop_over_w0 * w0,
            steps=s.steps,
            hologram=self.hologram_spec().displaced(0.0, 0.0),
            input=self.mode(s.input_p, s.input_l),
            grid=self.grid_spec(),
            detectors=s.detectors,
        )


def _line_of(text: str, loc: tuple[int | str, ...]) -> int | None:
    """Line of the innermost key in ``loc`` that appears in ``text``."""
    for part in reversed(loc):
        if not isinstance(part, str):
            continue
        needle = json.dumps(part)
        for number, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return number
    return None


def _validation_messages(
    exc: ValidationError, text: str, source: str
) -> list[str]:
    messages = []
    for error in exc.errors():
        loc = tuple(error["loc"])
        where = ".".join(str(part) for part in loc) or "<root>"
        line = _line_of(text, loc) if text else None
        prefix = f"{source}:{line}" if line is not None else source
        messages.append(f"{prefix}: {where}: {error['msg']}")
    return messages


def _apply_override(data: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = data
    for key in parents:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError([f"<override>: {dotted}: '{key}' is not a section"])
        node = child
    node[leaf] = value


def load_config(
    path: Path | None = None, overrides: Mapping[str, Any] | None = None
) -> RunConfig:
    """Read ``path`` (defaults only when None) and apply dotted-key overrides.

    Raises ConfigError with one ``file:line: location: message`` entry per problem.
    """
    source = str(path) if path is not None else "<defaults>"
    text = ""
    data: Any = {}
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"{source}: cannot read config: {exc.strerror}"]) from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{source}:{exc.lineno}: invalid JSON: {exc.msg}"]) from exc
        if not isinstance(data, dict):
            raise ConfigError([f"{source}:1: config must be a JSON object"])

    for dotted, value in (overrides or {}).items():
        if value is not None:
            _apply_override(data, dotted, value)

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_validation_messages(exc, text, source)) from exc

    logger.debug(
        "Loaded config",
        extra={"source": source, "n": config.grid.n, "output_dir": str(config.output_dir)},
    )
    return config
