"""Series-elastic mechanism: actuator stack, spring, and loaded output plate.

Plate B sits on the actuator stack and is solved quasi-statically every step.
Plate A (the output, carrying the load) is coupled to plate B through the
series spring and damped by its slider. Gravity on plate A is carried by the
spring preload, so the rest state ``x_a = x_b = 0`` is an equilibrium at zero
voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sehasel.actuator import (
    GRAVITY,
    ActuatorConfig,
    _height,
    _height_dq,
    ea_pressure,
)
from sehasel.errors import ConfigError, NumericalError, ValidationError

MAX_PLANT_DT = 1e-4
FIXED_POINT_TOL = 1e-12
_MAX_ITER = 50


def default_damping(spring_k: float = 14.0, mass: float = 0.08, zeta: float = 0.5) -> float:
    return 2.0 * zeta * math.sqrt(spring_k * mass)


@dataclass(frozen=True)
class PlantParams:
    spring_k: float = 14.0
    damping_c: float = default_damping()
    mass_a: float = 0.08
    mass_b: float = 0.03
    play_width: float = 0.0
    sensor_noise_sd: float = 0.0
    rng_seed: int = 0
    rigid: bool = False

    def __post_init__(self):
        if not self.spring_k > 0:
            raise ValidationError("spring_k", "must be > 0")
        if not self.damping_c >= 0:
            raise ValidationError("damping_c", "must be >= 0")
        if not self.mass_a > 0:
            raise ValidationError("mass_a", "must be > 0")
        if not self.mass_b >= 0:
            raise ValidationError("mass_b", "must be >= 0")
        if not self.play_width >= 0:
            raise ValidationError("play_width", "must be >= 0")
        if not self.sensor_noise_sd >= 0:
            raise ValidationError("sensor_noise_sd", "must be >= 0")

    @property
    def preload(self) -> float:
        """Force on the stack at rest."""
        return (self.mass_a + self.mass_b) * GRAVITY


@dataclass(frozen=True)
class PlantState:
    x_a: float = 0.0
    v_a: float = 0.0
    x_b: float = 0.0
    play_state: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class DisturbanceProfile:
    """Extra downward force on plate A.

    ``steps`` is a list of ``(t_start, force)``: from ``t_start`` on the
    extra force equals ``force`` until the next entry. ``resistance`` is an
    optional ``(x_a, force)`` table interpolated linearly in ``x_a`` and held
    constant outside its range.
    """

    steps: Sequence[tuple[float, float]] = ()
    resistance: Sequence[tuple[float, float]] = ()
    _times: tuple = field(init=False, repr=False, compare=False)
    _forces: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = [float(s[0]) for s in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("steps", "t_start must be strictly increasing")
        xs = [float(r[0]) for r in self.resistance]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("resistance", "positions must be strictly increasing")
        object.__setattr__(self, "_times", tuple(times))
        object.__setattr__(self, "_forces", tuple(float(s[1]) for s in self.steps))

    def step_force(self, t: float) -> float:
        force = 0.0
        for t_start, f in zip(self._times, self._forces):
            if t >= t_start:
                force = f
            else:
                break
        return force

    def resistance_force(self, x_a: float) -> float:
        if not self.resistance:
            return 0.0
        xs = [r[0] for r in self.resistance]
        fs = [r[1] for r in self.resistance]
        return float(np.interp(x_a, xs, fs))

    def __call__(self, t: float, x_a: float) -> float:
        return self.step_force(t) + self.resistance_force(x_a)


NO_DISTURBANCE = DisturbanceProfile()


def play(input: float, width: float, state: float) -> tuple[float, float]:
    """Rate-independent play (backlash) operator."""
    output = min(max(state, input - width), input + width)
    return output, output


class StackSolver:
    """Quasi-static solve for plate B given plate A and the electrode voltage.

    Finds ``x_b = play(N * H(Pe, F_b(x_b)))`` with
    ``F_b = max(0, k (x_b - x_a) + (m_a + m_b) g)`` (or the preload plus the
    disturbance in rigid mode).
    """

    def __init__(self, params: PlantParams, config: ActuatorConfig):
        self.params = params
        self.config = config
        self._n = config.stack_count
        self._c = math.pi * config.oil_volume / config.width
        self._s_max = config.overlap_length

    def stack_height(self, pressure: float, force: float) -> float:
        if pressure <= 0:
            return 0.0
        q = force / (self.config.width * pressure)
        if self._s_max is not None and q > self._s_max:
            q = self._s_max
        return self._n * _height(q, self._c)

    def _stack_height_dforce(self, pressure: float, force: float) -> float:
        if pressure <= 0:
            return 0.0
        q = force / (self.config.width * pressure)
        if self._s_max is not None and q > self._s_max:
            return 0.0
        return self._n * _height_dq(q, self._c) / (self.config.width * pressure)

    def force_on_stack(self, x_b: float, x_a: float, extra: float = 0.0) -> float:
        p = self.params
        if p.rigid:
            return max(0.0, p.preload + extra)
        return max(0.0, p.spring_k * (x_b - x_a) + p.preload)

    def residual(self, x_b: float, x_a: float, pressure: float, play_state: float,
                 extra: float = 0.0) -> float:
        y = self.stack_height(pressure, self.force_on_stack(x_b, x_a, extra))
        return x_b - play(y, self.params.play_width, play_state)[0]

    def solve(self, x_a: float, pressure: float, play_state: float, guess: float,
              extra: float = 0.0) -> float:
        p = self.params
        w = p.play_width
        if pressure <= 0:
            return play(0.0, w, play_state)[0]
        if p.rigid:
            y = self.stack_height(pressure, self.force_on_stack(0.0, x_a, extra))
            return play(y, w, play_state)[0]

        k = p.spring_k
        x = max(guess, 0.0)
        for _ in range(_MAX_ITER):
            force = self.force_on_stack(x, x_a)
            y = self.stack_height(pressure, force)
            lo, hi = y - w, y + w
            if play_state < lo:
                target, slope = lo, 1
            elif play_state > hi:
                target, slope = hi, 1
            else:
                target, slope = play_state, 0
            g = x - target
            if abs(g) <= FIXED_POINT_TOL:
                return target
            dy = self._stack_height_dforce(pressure, force) * (k if force > 0 else 0.0)
            x_new = x - g / (1.0 - slope * dy)
            if not math.isfinite(x_new) or x_new < 0:
                break
            x = x_new
        return self._bisect(x_a, pressure, play_state)

    def _bisect(self, x_a: float, pressure: float, play_state: float) -> float:
        lo = 0.0
        hi = max(self.config.stroke_max + self.params.play_width, play_state) * (1 + 1e-9) + 1e-12
        r_lo = self.residual(lo, x_a, pressure, play_state)
        r_hi = self.residual(hi, x_a, pressure, play_state)
        if r_lo > 0 or r_hi < 0:
            raise NumericalError("stack fixed point not bracketed",
                                 state=dict(x_a=x_a, pressure=pressure, play_state=play_state))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.residual(mid, x_a, pressure, play_state) > 0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= FIXED_POINT_TOL:
                break
        else:
            raise NumericalError("stack bisection did not converge",
                                 state=dict(x_a=x_a, pressure=pressure, play_state=play_state))
        return 0.5 * (lo + hi)


def plant_step(params: PlantParams, state: PlantState, applied_voltage: float,
               actuator_cfg: ActuatorConfig, dt: float,
               disturbance: DisturbanceProfile = NO_DISTURBANCE,
               solver: StackSolver | None = None) -> PlantState:
    """Advance the mechanism by ``dt`` with the electrode voltage held constant.

    Plate B is solved at the start of the step; plate A is then integrated
    with RK4 against that plate B position. The returned state carries
    ``x_b`` at the step start and ``x_a``, ``v_a`` at ``t + dt``.
    """
    if not 0 < dt <= MAX_PLANT_DT:
        raise ConfigError(f"plant dt must lie in (0, {MAX_PLANT_DT}], got {dt!r}")
    if solver is None:
        solver = StackSolver(params, actuator_cfg)
    pressure = ea_pressure(actuator_cfg.film, abs(applied_voltage))
    t = state.t

    if params.rigid:
        extra = disturbance(t, state.x_b)
        x_b = solver.solve(state.x_b, pressure, state.play_state, state.x_b, extra)
        return PlantState(x_a=x_b, v_a=(x_b - state.x_b) / dt if t > 0 else 0.0,
                          x_b=x_b, play_state=x_b, t=t + dt)

    x_b = solver.solve(state.x_a, pressure, state.play_state, state.x_b)
    k, c, m = params.spring_k, params.damping_c, params.mass_a

    def accel(tt, x, v):
        return (k * (x_b - x) - c * v - disturbance(tt, x)) / m

    x, v = state.x_a, state.v_a
    h = dt
    a1 = accel(t, x, v)
    x2, v2 = x + 0.5 * h * v, v + 0.5 * h * a1
    a2 = accel(t + 0.5 * h, x2, v2)
    x3, v3 = x + 0.5 * h * v2, v + 0.5 * h * a2
    a3 = accel(t + 0.5 * h, x3, v3)
    x4, v4 = x + h * v3, v + h * a3
    a4 = accel(t + h, x4, v4)
    x_new = x + h * (v + 2 * v2 + 2 * v3 + v4) / 6.0
    v_new = v + h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0
    if not (math.isfinite(x_new) and math.isfinite(v_new)):
        raise NumericalError("plate A integration diverged", state=state)
    return PlantState(x_a=x_new, v_a=v_new, x_b=x_b, play_state=x_b, t=t + dt)


def make_rng(params: PlantParams) -> np.random.Generator:
    return np.random.default_rng(params.rng_seed)


def sample_sensor(state: PlantState, params: PlantParams, rng: np.random.Generator) -> float:
    """Laser reading of plate A with additive Gaussian noise."""
    if params.sensor_noise_sd == 0:
        return state.x_a
    return state.x_a + float(rng.normal(0.0, params.sensor_noise_sd))


def mechanical_energy(params: PlantParams, state: PlantState) -> float:
    return 0.5 * params.mass_a * state.v_a ** 2 + 0.5 * params.spring_k * (state.x_a - state.x_b) ** 2
