"""Tracking and amplitude metrics over a time window."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sehasel.errors import DataError

BAND = 0.05


@dataclass
class MetricsReport:
    """Metrics in SI units; percentages are dimensionless ratios times 100."""

    rmse: float = 0.0
    overshoot_pct: float = 0.0
    peak_to_peak: float = 0.0
    settling_time: float = 0.0
    max_hysteresis_strain: float = 0.0
    max_output_strain: float = 0.0
    extra: dict = field(default_factory=dict)

    def format(self) -> str:
        lines = [
            f"rmse: {self.rmse:.9g}",
            f"overshoot_pct: {self.overshoot_pct:.9g}",
            f"peak_to_peak: {self.peak_to_peak:.9g}",
            f"settling_time: {self.settling_time:.9g}",
            f"max_hysteresis_strain: {self.max_hysteresis_strain:.9g}",
            f"max_output_strain: {self.max_output_strain:.9g}",
        ]
        for key, value in self.extra.items():
            if isinstance(value, float):
                value = f"{value:.9g}"
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StepResponse:
    t_step: float
    start: float
    final: float
    overshoot_pct: float
    settling_time: float
    steady_error_pct: float

    @property
    def height(self) -> float:
        return self.final - self.start

    @property
    def rising(self) -> bool:
        return self.final > self.start


def _settling(t, x, final, band):
    """Time from ``t[0]`` after which ``|x - final|`` stays within ``band``."""
    err = np.abs(x - final)
    outside = np.nonzero(err > band)[0]
    if len(outside) == 0:
        return 0.0
    j = outside[-1]
    if j == len(x) - 1:
        return math.nan
    # linear interpolation of the band crossing between samples j and j+1
    e0, e1 = err[j], err[j + 1]
    frac = (e0 - band) / (e0 - e1) if e0 != e1 else 0.0
    return float(t[j] + frac * (t[j + 1] - t[j]) - t[0])


def step_responses(t, x, target, settle_fraction: float = 0.2):
    """Split a piecewise-constant target into steps and characterise each one.

    The first segment starts from the measured value. The steady-state error
    uses the mean over the last ``settle_fraction`` of each segment.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    edges = np.nonzero(np.diff(target) != 0)[0] + 1
    bounds = [0, *edges.tolist(), len(t)]
    out = []
    for i, (a, b) in enumerate(zip(bounds, bounds[1:])):
        final = float(target[a])
        start = float(x[a]) if i == 0 else float(target[a - 1])
        height = final - start
        if height == 0 or b - a < 2:
            continue
        seg_t, seg_x = t[a:b], x[a:b]
        sign = 1.0 if height > 0 else -1.0
        beyond = float(np.max(sign * (seg_x - final)))
        overshoot = max(0.0, beyond) / abs(height) * 100.0
        settle = _settling(seg_t, seg_x, final, BAND * abs(height))
        tail = seg_x[int(len(seg_x) * (1 - settle_fraction)):]
        sse = abs(float(np.mean(tail)) - final) / abs(height) * 100.0
        out.append(StepResponse(float(seg_t[0]), start, final, overshoot, settle, sse))
    return out


def metrics(trace_t, x, target, window=(0.0, math.inf)) -> MetricsReport:
    """RMSE, overshoot, peak-to-peak and settling time of ``x`` against ``target``.

    Overshoot and settling time are taken over the rising steps of the target
    inside the window (the first step starts from the measured value).
    """
    t = np.asarray(trace_t, dtype=float)
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float)
    if not len(t) == len(x) == len(target):
        raise DataError("series must have equal length")
    keep = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    if not keep.any():
        raise DataError(f"empty window {window}")
    t, x, target = t[keep], x[keep], target[keep]
    err = x - target
    report = MetricsReport(
        rmse=float(np.sqrt(np.mean(err ** 2))),
        peak_to_peak=float(np.ptp(x)),
    )
    steps = step_responses(t, x, target)
    rising = [s for s in steps if s.rising]
    falling = [s for s in steps if not s.rising]
    if rising:
        report.overshoot_pct = max(s.overshoot_pct for s in rising)
        report.settling_time = max(s.settling_time for s in rising)
    if falling:
        report.extra["falling_overshoot_pct"] = max(s.overshoot_pct for s in falling)
    if steps:
        report.extra["steady_state_error_pct"] = max(s.steady_error_pct for s in steps)
    return report


def moving_average(x, n: int) -> np.ndarray:
    """Trailing mean over ``n`` samples (shorter at the start)."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - n, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def recovery_time(t, x, setpoint, t_event, band, t_end=math.inf) -> float:
    """Time after ``t_event`` until ``x`` stays within ``band`` of ``setpoint`` up to ``t_end``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    keep = (t >= t_event) & (t < t_end)
    if not keep.any():
        raise DataError("no samples after the event")
    return _settling(t[keep], x[keep], setpoint, band)
