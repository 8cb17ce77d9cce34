"""PI magnitude controller and AC square-wave modulator.

The controller decides only the *magnitude* of the drive; the modulator turns
it into a signed square wave whose polarity flips on a fixed global clock.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from sehasel.errors import ValidationError

log = logging.getLogger(__name__)

TIME_BASES = ("seconds", "cycles")


@dataclass(frozen=True)
class PiGains:
    """PI gains in SI units.

    ``kp`` is in V/m. With ``integral_time_base == "seconds"`` ``ki`` is in
    V/(m*s); with ``"cycles"`` it is in V/m per control cycle, i.e. the error
    is summed once per cycle without multiplying by ``cycle_dt``.
    """

    kp: float = 2e4
    ki: float = 2e5
    cycle_dt: float = 1e-3
    u_min: float = 0.0
    u_max: float = 8000.0
    integral_time_base: str = "seconds"

    def __post_init__(self):
        if not self.kp >= 0:
            raise ValidationError("kp", "must be >= 0")
        if not self.ki >= 0:
            raise ValidationError("ki", "must be >= 0")
        if not self.cycle_dt > 0:
            raise ValidationError("cycle_dt", "must be > 0")
        if self.u_min != 0:
            raise ValidationError("u_min", "must be 0 (unidirectional actuator)")
        if not self.u_max > self.u_min:
            raise ValidationError("u_max", "must exceed u_min")
        if self.integral_time_base not in TIME_BASES:
            raise ValidationError("integral_time_base", f"must be one of {TIME_BASES}")

    @property
    def ki_per_second(self) -> float:
        if self.integral_time_base == "cycles":
            return self.ki / self.cycle_dt
        return self.ki

    @classmethod
    def from_kv_per_mm(cls, kp: float, ki: float, **kwargs) -> "PiGains":
        """Gains given in kV/mm, integral summed per control cycle.

        ``from_kv_per_mm(0.8, 0.005)`` gives kp = 8e5 V/m and ki = 5e3 V/m
        per cycle.
        """
        kwargs.setdefault("integral_time_base", "cycles")
        return cls(kp=kp * 1e6, ki=ki * 1e6, **kwargs)


@dataclass(frozen=True)
class ControllerState:
    integral: float = 0.0
    last_magnitude: float = 0.0
    t: float = 0.0
    fault: bool = False


def pi_step(gains: PiGains, state: ControllerState, target: float,
            measured: float) -> tuple[float, ControllerState]:
    """One control cycle: error -> AC magnitude, with freeze-on-saturation anti-windup."""
    t_next = state.t + gains.cycle_dt
    if not (math.isfinite(target) and math.isfinite(measured)):
        log.warning("controller fault at t=%.6g: non-finite input", state.t)
        return state.last_magnitude, replace(state, t=t_next, fault=True)

    ki = gains.ki_per_second
    e = target - measured
    integral = state.integral + e * gains.cycle_dt
    raw = gains.kp * e + ki * integral
    if (raw > gains.u_max and e > 0) or (raw < gains.u_min and e < 0):
        integral = state.integral
    if ki > 0:
        # integral term kept within the actuator's range
        integral = min(max(integral, gains.u_min / ki), gains.u_max / ki)
    magnitude = min(max(gains.kp * e + ki * integral, gains.u_min), gains.u_max)
    return magnitude, ControllerState(integral=integral, last_magnitude=magnitude,
                                      t=t_next, fault=False)


def modulate(magnitude: float, t: float, frequency: float) -> float:
    """Signed square wave; polarity flips at every multiple of 1/(2 f)."""
    if not frequency > 0:
        raise ValidationError("frequency", "must be > 0")
    if magnitude == 0:
        return 0.0
    if math.floor(2.0 * frequency * t) % 2:
        return -magnitude
    return magnitude
