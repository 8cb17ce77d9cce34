import math

import numpy as np
import pytest

from sehasel.errors import DataError
from sehasel.harness.metrics import metrics, moving_average, recovery_time, step_responses

T = np.arange(0, 10, 1e-3)


def test_identical_trace():
    target = np.where(T < 5, 1.0, 2.0)
    report = metrics(T, target, target)
    assert report.rmse == 0 and report.overshoot_pct == 0


def test_sinusoidal_ripple():
    amp = 0.3
    x = 2.0 + amp * np.sin(2 * math.pi * 5 * T)  # peaks fall on samples
    report = metrics(T, x, np.full_like(T, 2.0), (1.0, 9.0))
    assert report.rmse == pytest.approx(amp / math.sqrt(2), rel=1e-3)
    assert report.peak_to_peak == pytest.approx(2 * amp, rel=1e-6)


def test_exponential_settling():
    x = 1 - np.exp(-T)
    report = metrics(T, x, np.ones_like(T))
    assert report.settling_time == pytest.approx(-math.log(0.05), abs=1e-6)
    assert report.overshoot_pct == 0


def test_overshoot_and_steady_error_per_step():
    target = np.where(T < 5, 1.0, 0.5)
    x = target + np.where(T < 5, 0.2 * np.exp(-T) * np.sin(5 * T), 0.0)
    x[T < 0.5] = np.linspace(0, 1, (T < 0.5).sum())
    steps = step_responses(T, x, target)
    assert len(steps) == 2
    rising, falling = steps
    assert rising.rising and not falling.rising
    assert rising.overshoot_pct == pytest.approx(100 * np.max(x[T < 5] - 1.0), rel=1e-12)
    assert falling.steady_error_pct == 0
    report = metrics(T, x, target)
    assert report.overshoot_pct == rising.overshoot_pct
    assert report.extra["falling_overshoot_pct"] == 0


def test_never_settling_is_nan():
    x = np.sin(T)
    assert math.isnan(metrics(T, x, np.ones_like(T)).settling_time)


def test_empty_window_and_length_mismatch():
    with pytest.raises(DataError):
        metrics(T, T, T, (20.0, 30.0))
    with pytest.raises(DataError):
        metrics(T, T[:-1], T)


def test_moving_average_and_recovery():
    x = np.tile([1.0, -1.0], 50)
    avg = moving_average(x, 2)
    assert avg[0] == 1.0 and np.all(avg[1:] == 0.0)
    t = np.arange(100) * 0.1
    y = np.where(t < 3, 0.0, 1 - np.exp(-(t - 3)))
    assert recovery_time(t, y, 1.0, 3.0, 0.05) == pytest.approx(-math.log(0.05), abs=0.01)


def test_report_format_is_key_value():
    report = metrics(T, np.ones_like(T), np.ones_like(T))
    report.extra["note"] = "x"
    lines = report.format().splitlines()
    assert lines[0] == "rmse: 0"
    assert all(": " in line for line in lines)
