"""Quasi-static displacement of a stacked electrohydraulic pouch actuator.

Each cell is a liquid-filled pouch of width ``L0`` holding ``V0`` of oil. The
zipped electrodes pressurise the liquid; the free part of the pouch bulges to
a circular cross section of diameter ``H`` while a flat contact patch of
length ``S`` carries the load.  Volume conservation and force balance give a
quadratic in ``H``.

Units are SI throughout. Loads enter as forces so that plate masses and
spring forces can be combined by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from sehasel.errors import DomainError, RangeError, ValidationError

EPS0 = 8.854e-12
GRAVITY = 9.81


@dataclass(frozen=True)
class FilmInterface:
    """Dielectric shell of the pouch.

    ``thickness`` is the single-film thickness; the zipped interface consists
    of two folds, so the pressure law uses ``d_film = 2 * thickness``.
    """

    eps_rel: float = 3.4
    thickness: float = 50e-6

    def __post_init__(self):
        if not self.eps_rel >= 1:
            raise ValidationError("eps_rel", f"must be >= 1, got {self.eps_rel!r}")
        if not self.thickness > 0:
            raise ValidationError("thickness", f"must be > 0, got {self.thickness!r}")

    @property
    def d_film(self) -> float:
        return 2.0 * self.thickness


@dataclass(frozen=True)
class EaPad:
    eps_rel: float
    gap: float
    area: float

    def __post_init__(self):
        for name in ("eps_rel", "gap", "area"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")


@dataclass(frozen=True)
class ActuatorConfig:
    """Geometry of one pouch and the number of pouches stacked in series.

    ``cell_height`` is the stack pitch used to turn displacement into strain.
    ``overlap_length`` optionally caps the contact length (full-zip clamp);
    ``None`` leaves the ideal model unclamped.
    """

    width: float = 0.06
    oil_volume: float = 3.2e-6
    film: FilmInterface = field(default_factory=FilmInterface)
    stack_count: int = 11
    cell_height: float = 0.016
    overlap_length: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValidationError("width", "must be > 0")
        if not self.oil_volume > 0:
            raise ValidationError("oil_volume", "must be > 0")
        if not (isinstance(self.stack_count, int) and self.stack_count >= 1):
            raise ValidationError("stack_count", "must be an integer >= 1")
        if not self.cell_height > 0:
            raise ValidationError("cell_height", "must be > 0")
        if self.overlap_length is not None and not self.overlap_length > 0:
            raise ValidationError("overlap_length", "must be > 0 when given")

    @property
    def h_max(self) -> float:
        """Free-bulge (zero load) height of one cell."""
        return 2.0 * math.sqrt(self.oil_volume / (math.pi * self.width))

    @property
    def stroke_max(self) -> float:
        return self.stack_count * self.h_max


class VoltageSolution(NamedTuple):
    voltage: float
    degenerate: bool


def ea_force(pad: EaPad, voltage: float) -> float:
    """Parallel-plate electrostatic adhesion force."""
    return 0.5 * pad.eps_rel * EPS0 * pad.area * voltage ** 2 / pad.gap ** 2


def ea_pressure(film: FilmInterface, voltage: float) -> float:
    """Liquid pressure balanced by the Maxwell stress of the zipped films."""
    return 0.5 * film.eps_rel * EPS0 * voltage ** 2 / film.d_film ** 2


def _height(q: float, c: float) -> float:
    # Positive root of (pi/4) H^2 + q H - c/pi = 0 written without cancellation,
    # with c = pi V0 / L0 and q = F / (L0 Pe).
    return (2.0 / math.pi) * c / (math.sqrt(q * q + c) + q)


def _height_dq(q: float, c: float) -> float:
    return (2.0 / math.pi) * (q / math.sqrt(q * q + c) - 1.0)


def _clamped_height(config: ActuatorConfig, q: float) -> float:
    c = math.pi * config.oil_volume / config.width
    s_max = config.overlap_length
    if s_max is not None and q > s_max:
        return _height(s_max, c)
    return _height(q, c)


def cell_displacement(config: ActuatorConfig, pressure: float, load_force: float) -> float:
    """Height of one cell under liquid pressure ``pressure`` and load ``load_force``."""
    if load_force < 0:
        raise DomainError("load_force must be >= 0; the actuator only pushes")
    if pressure < 0:
        raise DomainError("pressure must be >= 0")
    if pressure == 0:
        return 0.0
    q = load_force / (config.width * pressure)
    return _clamped_height(config, q)


def contact_length(config: ActuatorConfig, h: float) -> float:
    """Flat contact length that conserves the oil volume at cell height ``h``."""
    if not 0 < h <= config.h_max * (1 + 1e-12):
        raise DomainError(f"h must lie in (0, {config.h_max:.6g}], got {h!r}")
    return max(config.oil_volume / (config.width * h) - math.pi * h / 4.0, 0.0)


def stack_displacement(config: ActuatorConfig, pressure: float, load_force: float) -> float:
    """Displacement of the series stack; every cell carries the same force."""
    return config.stack_count * cell_displacement(config, pressure, load_force)


def strain(config: ActuatorConfig, displacement: float) -> float:
    return displacement / (config.stack_count * config.cell_height)


def voltage_for_displacement(config: ActuatorConfig, h_target: float,
                             load_force: float) -> VoltageSolution:
    """Electrode voltage that lifts ``load_force`` to stack displacement ``h_target``.

    At zero load every positive voltage gives the full free bulge, so the
    infimum 0 is returned with ``degenerate=True``.
    """
    if load_force < 0:
        raise DomainError("load_force must be >= 0")
    if not 0 < h_target < config.stroke_max:
        raise RangeError(f"h_target must lie in (0, {config.stroke_max:.6g}), got {h_target!r}",
                         attained=config.stroke_max)
    if load_force == 0:
        return VoltageSolution(0.0, True)
    h = h_target / config.stack_count
    s = contact_length(config, h)
    if config.overlap_length is not None and s > config.overlap_length:
        raise RangeError("h_target lies below the full-zip floor", attained=s)
    pressure = load_force / (config.width * s)
    film = config.film
    voltage = film.d_film * math.sqrt(2.0 * pressure / (film.eps_rel * EPS0))
    return VoltageSolution(voltage, False)
