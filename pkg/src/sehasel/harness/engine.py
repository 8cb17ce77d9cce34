"""Time-stepping of circuit, controller and plant.

Timing: the controller runs once per ``cycle_dt``; within a cycle the plant is
advanced in ``plant_dt`` substeps, each holding the electrode voltage of its
start. Substep ``i`` starts at ``i * plant_dt`` exactly, so the modulator
polarity and disturbance steps do not depend on accumulated rounding. A row is
recorded at the start of every ``record_dt`` with the signals at that instant
(in rigid mode plate A moves with the just-solved plate B).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

from sehasel.actuator import EPS0
from sehasel.circuit import CircuitStepper
from sehasel.control import ControllerState, modulate, pi_step
from sehasel.errors import NumericalError
from sehasel.harness.config import ScenarioConfig, ScenarioKind, TargetSection
from sehasel.harness.traceio import COLUMNS, SimTrace
from sehasel.plant import PlantState, StackSolver, make_rng, plant_step, sample_sensor


def target_function(section: TargetSection):
    wave = section.wave
    if wave == "none":
        return lambda t: 0.0
    if wave == "constant":
        return lambda t: section.offset
    if wave == "square":
        def square(t):
            high = math.floor(2.0 * section.frequency * t) % 2 == 0
            return section.offset + (section.amplitude if high else -section.amplitude)
        return square
    if wave == "sine":
        return lambda t: section.offset + section.amplitude * math.sin(2 * math.pi * section.frequency * t)
    times = [s[0] for s in section.steps]
    values = [s[1] for s in section.steps]

    def steps(t):
        out = 0.0
        for ts, v in zip(times, values):
            if t >= ts:
                out = v
            else:
                break
        return out
    return steps


def magnitude_schedule(cfg: ScenarioConfig):
    """Open-loop drive magnitude versus time."""
    if cfg.kind is ScenarioKind.HYSTERESIS_SWEEP:
        v_max, duration = cfg.sweep.v_max, cfg.scenario.duration
        return lambda t: v_max * max(0.0, 1.0 - abs(2.0 * t / duration - 1.0))
    magnitude = cfg.drive.magnitude
    return lambda t: magnitude


def _drive(cfg: ScenarioConfig):
    if cfg.drive.wave == "dc":
        return lambda mag, t: mag
    f = cfg.drive.frequency
    return lambda mag, t: modulate(mag, t, f)


def _counts(cfg: ScenarioConfig):
    s = cfg.scenario
    sub = int(round(cfg.control.cycle_dt / s.plant_dt))
    rec = int(round(s.record_dt / cfg.control.cycle_dt))
    n_cycles = int(round(s.duration / cfg.control.cycle_dt))
    return sub, rec, n_cycles


def simulate(cfg: ScenarioConfig) -> SimTrace:
    """Run one scenario's time-domain simulation and return its recorded trace."""
    if (cfg.plant.rigid and not cfg.closed_loop and not cfg.disturbance.resistance):
        return _simulate_rigid_open_loop(cfg)
    return _simulate_loop(cfg)


def _simulate_loop(cfg: ScenarioConfig) -> SimTrace:
    sub, rec, n_cycles = _counts(cfg)
    plant_dt = cfg.scenario.plant_dt
    params = cfg.plant_params()
    actuator = cfg.actuator_config()
    solver = StackSolver(params, actuator)
    disturbance = cfg.disturbance_profile()
    circuit = CircuitStepper(cfg.circuit_params(), plant_dt)
    gains = cfg.gains()
    rng = make_rng(params)
    target = target_function(cfg.target)
    schedule = magnitude_schedule(cfg)
    drive = _drive(cfg)
    closed = cfg.closed_loop

    n_rec = n_cycles // rec + 1
    out = np.empty((n_rec, len(COLUMNS)))
    state = PlantState()
    ctrl = ControllerState()
    row = 0
    for kc in range(n_cycles + 1):
        t = kc * sub * plant_dt
        tgt = target(t)
        if closed:
            mag, ctrl = pi_step(gains, ctrl, tgt, sample_sensor(state, params, rng))
        else:
            mag = schedule(t)
        recording = kc % rec == 0
        for j in range(sub):
            ts = (kc * sub + j) * plant_dt
            u_i = drive(mag, ts)
            u_o = circuit.apply(u_i)
            x_a = state.x_a
            start = PlantState(x_a, state.v_a, state.x_b, state.play_state, ts)
            try:
                state = plant_step(params, start, u_o, actuator, plant_dt, disturbance, solver)
            except NumericalError as exc:
                raise NumericalError(f"{exc} at t={ts:.9g}", state=dict(
                    last_state=start, u_o=u_o, partial=_as_trace(out[:row]))) from None
            circuit.advance()
            if recording and j == 0:
                extra = disturbance(ts, x_a)
                load = solver.force_on_stack(state.x_b, x_a, extra)
                if params.rigid:
                    x_a = state.x_b
                out[row] = (t, u_i, u_o, mag, state.x_b, x_a, tgt, load, extra)
                row += 1
    return _as_trace(out[:row])


def _as_trace(data: np.ndarray) -> SimTrace:
    return SimTrace({c: data[:, i].copy() for i, c in enumerate(COLUMNS)})


def stack_height_array(solver: StackSolver, pressure: np.ndarray, force: np.ndarray) -> np.ndarray:
    """Vectorised ``solver.stack_height``."""
    cfg = solver.config
    c = math.pi * cfg.oil_volume / cfg.width
    with np.errstate(divide="ignore", invalid="ignore"):
        q = force / (cfg.width * pressure)
        if cfg.overlap_length is not None:
            q = np.minimum(q, cfg.overlap_length)
        h = (2.0 / math.pi) * c / (np.sqrt(q * q + c) + q)
    return np.where(pressure > 0, cfg.stack_count * h, 0.0)


def _simulate_rigid_open_loop(cfg: ScenarioConfig) -> SimTrace:
    """Same model as the loop for a rigid, open-loop plant, evaluated array-wise."""
    sub, rec, n_cycles = _counts(cfg)
    plant_dt = cfg.scenario.plant_dt
    params = cfg.plant_params()
    actuator = cfg.actuator_config()
    solver = StackSolver(params, actuator)
    circuit = cfg.circuit_params()
    CircuitStepper(circuit, plant_dt)  # resolution guard
    target = target_function(cfg.target)
    schedule = magnitude_schedule(cfg)

    n = (n_cycles + 1) * sub
    idx = np.arange(n)
    ts = idx * plant_dt
    cycle_t = (idx // sub) * sub * plant_dt
    if cfg.kind is ScenarioKind.HYSTERESIS_SWEEP:
        mag = np.array([schedule(t) for t in cycle_t[::sub]]).repeat(sub)
    else:
        mag = np.full(n, cfg.drive.magnitude)
    if cfg.drive.wave == "dc":
        u_i = mag.copy()
    else:
        flip = np.floor(2.0 * cfg.drive.frequency * ts) % 2 == 1
        u_i = np.where(flip, -mag, mag)
        u_i[mag == 0] = 0.0
    jumps = np.diff(u_i, prepend=0.0)
    u_o = lfilter([circuit.k], [1.0, -math.exp(circuit.p * plant_dt)], jumps)

    extra = step_force_array(cfg.disturbance.steps, ts)
    force = np.maximum(0.0, params.preload + extra)
    film = actuator.film
    pressure = 0.5 * film.eps_rel * EPS0 * u_o ** 2 / film.d_film ** 2
    y = stack_height_array(solver, pressure, force)
    if params.play_width > 0:
        w = params.play_width
        x_b = np.empty(n)
        s = 0.0
        for i, yi in enumerate(y.tolist()):
            s = min(max(s, yi - w), yi + w)
            x_b[i] = s
    else:
        x_b = y

    rows = idx[::sub * rec]
    tgt = np.array([target(t) for t in cycle_t[rows]])
    return SimTrace({
        "t": cycle_t[rows], "u_i": u_i[rows], "u_o": u_o[rows], "mag_cmd": mag[rows],
        "x_b": x_b[rows], "x_a": x_b[rows], "target": tgt,
        "load_force": force[rows], "disturbance": extra[rows],
    })


def step_force_array(steps, t: np.ndarray) -> np.ndarray:
    """Vectorised ``DisturbanceProfile.step_force``."""
    if not steps:
        return np.zeros(len(t))
    times = np.array([s[0] for s in steps])
    forces = np.concatenate([[0.0], [s[1] for s in steps]])
    return forces[np.searchsorted(times, t, side="right")]
