"""Experiment scenarios: simulation, per-kind metrics, sweeps and persistence."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from sehasel.actuator import ea_pressure
from sehasel.circuit import envelope, steady_state_output
from sehasel.harness import engine
from sehasel.harness.config import ScenarioConfig, ScenarioKind
from sehasel.harness.crank import CrankSlider, crank_angle, default_geometry
from sehasel.harness.metrics import MetricsReport, metrics, moving_average, recovery_time
from sehasel.harness.traceio import SimTrace, write_csv
from sehasel.plant import StackSolver

# tracking RMSE measured on hardware at 0.05 Hz and 0.5 Hz; reported for comparison only
HARDWARE_RMSE = {0.05: 0.077e-3, 0.5: 0.211e-3}


def crank_geometry(cfg: ScenarioConfig) -> CrankSlider:
    c = cfg.crank
    if c.crank_radius:
        return CrankSlider(c.crank_radius, c.rod_length, c.zero_angle)
    return default_geometry(c.rod_length, c.stroke, c.span_deg, c.zero_angle)


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> tuple[SimTrace, MetricsReport]:
    """Simulate ``cfg`` and compute its metrics; write trace and report into ``out_dir`` if given."""
    kind = cfg.kind
    if kind is ScenarioKind.FREQ_SWEEP:
        trace, report = _run_freq_sweep(cfg)
    else:
        trace = engine.simulate(cfg)
        report = _METRICS[kind](cfg, trace)
    report.extra = {"kind": kind.value, "seed": cfg.scenario.seed, **report.extra}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(trace, os.path.join(out_dir, cfg.output.trace))
        with open(os.path.join(out_dir, cfg.output.report), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.format())
    return trace, report


def _ripple_window(cfg, trace):
    t0 = min(cfg.scenario.window_start, float(trace.t[-1]))
    return trace.window(t0)


def _half_period_samples(cfg):
    f = cfg.drive.frequency if cfg.drive.wave == "ac_square" else 1.0
    return max(1, int(round(0.5 / f / cfg.scenario.record_dt)))


def _total_height(cfg):
    return cfg.actuator.stack_count * cfg.actuator.cell_height


def _dc_decay(cfg, trace):
    w = _ripple_window(cfg, trace)
    x0, x1 = float(trace.x_b[0]), float(trace.x_b[-1])
    report = MetricsReport(peak_to_peak=float(np.ptp(w.x_b)))
    report.extra.update(horizon=float(trace.t[-1]), x_b_initial=x0, x_b_final=x1,
                        drop_fraction=1.0 - x1 / x0 if x0 > 0 else math.nan)
    return report


def _ac_hold(cfg, trace):
    w = _ripple_window(cfg, trace)
    report = MetricsReport(peak_to_peak=float(np.ptp(w.x_b)))
    report.max_output_strain = float(np.max(w.x_b)) / _total_height(cfg)
    if cfg.drive.wave == "ac_square":
        env = envelope(cfg.circuit_params(), cfg.drive.frequency)
        mag = cfg.drive.magnitude
        report.extra.update(u_o_abs_max=float(np.max(np.abs(w.u_o))),
                            u_o_abs_min=float(np.min(np.abs(w.u_o))),
                            envelope_upper=mag * env.k1, envelope_lower=mag * env.k2)
    report.extra.update(x_b_mean=float(np.mean(w.x_b)), x_a_peak_to_peak=float(np.ptp(w.x_a)))
    return report


def _isolation(cfg, trace):
    w = _ripple_window(cfg, trace)
    ripple_a, ripple_b = float(np.ptp(w.x_a)), float(np.ptp(w.x_b))
    report = MetricsReport(peak_to_peak=ripple_a)
    report.extra.update(ripple_x_a=ripple_a, ripple_x_b=ripple_b,
                        ripple_ratio=ripple_a / ripple_b if ripple_b > 0 else math.nan,
                        x_a_mean=float(np.mean(w.x_a)))
    return report


def _tracking(cfg, trace):
    w0 = cfg.scenario.window_start
    report = metrics(trace.t, trace.x_a, trace.target, (w0, math.inf))
    ref = HARDWARE_RMSE.get(cfg.target.frequency)
    if cfg.target.wave == "square" and ref is not None:
        report.extra["hardware_rmse"] = ref
    w = trace.window(w0)
    if cfg.target.wave in ("square", "sine"):
        report.extra.update(_attenuation(cfg, w))
    return report


def _attenuation(cfg, w):
    """Amplitude ratio and plateau shortfall over the complete periods after the first."""
    period = 1.0 / cfg.target.frequency
    t = w.t
    start = t[0] + period
    n = int((t[-1] - start) // period)
    if n < 1:
        return {}
    keep = (t >= start) & (t < start + n * period)
    x, tgt = w.x_a[keep], w.target[keep]
    hi, lo = float(np.max(tgt)), float(np.min(tgt))
    return {
        "amplitude_ratio": float(np.ptp(x)) / (hi - lo) if hi > lo else math.nan,
        "upper_plateau_shortfall": hi - float(np.max(x)),
        "lower_plateau_shortfall": float(np.min(x)) - lo,
    }


def _impact(cfg, trace):
    setpoint = cfg.target.offset
    band = 0.05 * setpoint
    # half-period mean removes the AC ripple that plate A carries while the spring is loaded
    avg = moving_average(trace.x_a, _half_period_samples(cfg))
    steps = cfg.disturbance.steps
    t_apply = next((t for t, f in steps if f != 0), None)
    t_remove = next((t for t, f in steps if t_apply is not None and t > t_apply and f == 0), math.inf)
    # step metrics describe the approach to the setpoint before the first load
    end = t_apply - 1e-9 if t_apply is not None else math.inf
    report = metrics(trace.t, trace.x_a, trace.target, (cfg.scenario.window_start, end))
    t_last = float(trace.t[-1])
    if t_apply is not None and t_apply < t_last:
        report.extra["recovery_after_load"] = recovery_time(trace.t, avg, setpoint, t_apply, band, t_remove)
        report.extra["recovery_after_load_raw"] = recovery_time(trace.t, trace.x_a, setpoint, t_apply,
                                                                band, t_remove)
        during = (trace.t >= t_apply) & (trace.t < t_remove)
        report.extra["max_dip_after_load"] = setpoint - float(np.min(trace.x_a[during]))
    if t_remove < t_last:
        report.extra["recovery_after_removal"] = recovery_time(trace.t, avg, setpoint, t_remove, band)
        after = trace.t >= t_remove
        report.extra["max_rise_after_removal"] = float(np.max(trace.x_a[after])) - setpoint
    tail = trace.window(trace.t[-1] - 1.0)
    report.extra["final_ripple_x_a"] = float(np.ptp(tail.x_a))
    return report


def _rotary(cfg, trace):
    report = _tracking(cfg, trace)
    geom = crank_geometry(cfg)
    reach = geom.max_displacement
    angles = np.array([crank_angle(geom, min(max(h, 0.0), reach)) for h in trace.x_a])
    report.extra.update(crank_radius=geom.crank_radius,
                        angle_span_deg=math.degrees(float(np.max(angles)) - geom.zero_angle),
                        stroke_span_deg=math.degrees(crank_angle(geom, cfg.crank.stroke) - geom.zero_angle))
    return report


def _biopsy(cfg, trace):
    report = _tracking(cfg, trace)
    steps = cfg.target.steps
    for i, (t0, value) in enumerate(steps):
        t1 = steps[i + 1][0] if i + 1 < len(steps) else math.inf
        # skip the approach: score the second half of each plateau
        t_end = min(t1, float(trace.t[-1]))
        seg = trace.window(0.5 * (t0 + t_end), t1 - 1e-9)
        if len(seg):
            report.extra[f"plateau_{i}_rmse"] = float(np.sqrt(np.mean((seg.x_a - value) ** 2)))
    return report


def _hysteresis(cfg, trace):
    result = hysteresis_sweep(cfg, cfg.sweep.v_max, cfg.sweep.steps)
    report = MetricsReport(peak_to_peak=float(np.ptp(trace.x_b)),
                           max_hysteresis_strain=result.mhs, max_output_strain=result.mos)
    report.extra.update(mhs_to_mos=result.mhs / result.mos if result.mos > 0 else math.nan,
                        play_width=cfg.plant.play_width)
    return report


_METRICS = {
    ScenarioKind.DC_DECAY: _dc_decay,
    ScenarioKind.AC_HOLD: _ac_hold,
    ScenarioKind.HYSTERESIS_SWEEP: _hysteresis,
    ScenarioKind.ISOLATION: _isolation,
    ScenarioKind.TRACK: _tracking,
    ScenarioKind.IMPACT: _impact,
    ScenarioKind.ROTARY: _rotary,
    ScenarioKind.BIOPSY: _biopsy,
}


# -- frequency sweep -----------------------------------------------------------

def _sweep_point(cfg: ScenarioConfig) -> float:
    trace = engine.simulate(cfg)
    return float(np.ptp(_ripple_window(cfg, trace).x_b))


def sweep_config(cfg: ScenarioConfig, frequency: float, load: float) -> ScenarioConfig:
    return cfg.updated(scenario={"kind": ScenarioKind.AC_HOLD.value},
                       drive={"wave": "ac_square", "frequency": frequency},
                       plant={"load_mass": load})


def frequency_sweep(cfg: ScenarioConfig, freqs, loads, workers: int = 1) -> np.ndarray:
    """Peak-to-peak ``x_b`` on the steady window, ``table[i_load, i_freq]``.

    Points are independent; with ``workers > 1`` they run in separate
    processes and are collected in input order.
    """
    points = [sweep_config(cfg, f, m) for m in loads for f in freqs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_sweep_point, points))
    else:
        values = [_sweep_point(p) for p in points]
    return np.array(values).reshape(len(loads), len(freqs))


def _run_freq_sweep(cfg):
    freqs, loads = cfg.sweep.frequencies, cfg.sweep.loads
    table = frequency_sweep(cfg, freqs, loads)
    trace = engine.simulate(sweep_config(cfg, freqs[0], loads[0]))
    report = MetricsReport(peak_to_peak=float(table[0, 0]))
    for i, m in enumerate(loads):
        for j, f in enumerate(freqs):
            report.extra[f"amplitude_{m:g}kg_{f:g}hz"] = float(table[i, j])
    return trace, report


# -- hysteresis sweep ----------------------------------------------------------

@dataclass(frozen=True)
class HysteresisResult:
    magnitudes: np.ndarray
    strain_up: np.ndarray
    strain_down: np.ndarray
    mhs: float
    mos: float

    def table(self) -> str:
        rows = ["magnitude,strain_up,strain_down"]
        for v, a, b in zip(self.magnitudes, self.strain_up, self.strain_down):
            rows.append("%.9g,%.9g,%.9g" % (v, a, b))
        return "\n".join(rows) + "\n"


def quasi_static_displacement(cfg: ScenarioConfig, magnitude: float, samples: int = 200) -> float:
    """Stack height averaged over one steady half period of the AC drive, without play."""
    params, actuator = cfg.plant_params(), cfg.actuator_config()
    solver = StackSolver(replace(params, play_width=0.0), actuator)
    force = params.preload
    circuit = cfg.circuit_params()
    if cfg.drive.wave == "dc":
        return solver.stack_height(ea_pressure(actuator.film, magnitude * circuit.k), force)
    a = 0.5 / cfg.drive.frequency
    heights = [solver.stack_height(ea_pressure(actuator.film, steady_state_output(
        circuit, magnitude, cfg.drive.frequency, (i + 0.5) * a / samples)), force)
        for i in range(samples)]
    return float(np.mean(heights))


def hysteresis_sweep(cfg: ScenarioConfig, v_max: float, steps: int,
                     play_width: float | None = None) -> HysteresisResult:
    """Quasi-static 0 -> v_max -> 0 sweep through the play operator."""
    w = cfg.plant.play_width if play_width is None else play_width
    levels = np.linspace(0.0, v_max, steps)
    y = np.array([quasi_static_displacement(cfg, v) for v in levels])
    state = 0.0
    up = np.empty(steps)
    for i, yi in enumerate(y):
        state = min(max(state, yi - w), yi + w)
        up[i] = state
    down = np.empty(steps)
    down[-1] = up[-1]
    for i in range(steps - 2, -1, -1):
        state = min(max(state, y[i] - w), y[i] + w)
        down[i] = state
    height = _total_height(cfg)
    s_up, s_down = up / height, down / height
    mhs = float(np.max(np.abs(s_down - s_up)))
    mos = float(max(np.max(s_up), np.max(s_down)))
    return HysteresisResult(levels, s_up, s_down, mhs, mos)


def calibrate_play_width(cfg: ScenarioConfig, ratio: float = 0.30, tol: float = 1e-12) -> float:
    """Play width for which the default sweep gives MHS/MOS = ``ratio``."""
    v_max, steps = cfg.sweep.v_max, cfg.sweep.steps
    y_max = quasi_static_displacement(cfg, v_max)

    def r(w):
        res = hysteresis_sweep(cfg, v_max, steps, play_width=w)
        return res.mhs / res.mos

    lo, hi = 0.0, 0.5 * y_max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if r(mid) < ratio:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * y_max:
            break
    return 0.5 * (lo + hi)
