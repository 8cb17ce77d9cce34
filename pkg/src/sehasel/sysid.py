"""Identification of leakage-circuit constants from decay recordings."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sehasel.actuator import ActuatorConfig, ea_pressure, stack_displacement
from sehasel.circuit import CircuitParams
from sehasel.errors import DataError, DomainError, RangeError, RankError, ValidationError

P_BRACKET = (-100.0, 0.0)


class TraceKind(enum.Enum):
    VOLTAGE = "voltage"
    DISPLACEMENT = "displacement"
    CURRENT = "current"


@dataclass(frozen=True)
class DecayTrace:
    dt: float
    values: np.ndarray
    kind: TraceKind = TraceKind.VOLTAGE

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt", "must be > 0")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) < 10:
            raise ValidationError("values", "need at least 10 samples")
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.dt


@dataclass(frozen=True)
class FitResult:
    """Exponential fit ``amplitude * exp(p_hat * t)``.

    ``identifiable`` records which of the individual circuit constants
    (``c1``, ``c2``, ``r_leak``) follow from this fit alone.
    """

    kind: TraceKind
    amplitude: float
    k_hat: float
    p_hat: float
    residual_rms: float
    identifiable: dict = field(default_factory=lambda: {"c1": False, "c2": False, "r_leak": False})
    c1_hat: float | None = None


def _irls_l1(design, y, iterations=100, eps=1e-12):
    coef = np.linalg.lstsq(design, y, rcond=None)[0]
    for _ in range(iterations):
        w = 1.0 / np.maximum(np.abs(y - design @ coef), eps)
        sw = np.sqrt(w)
        new = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)[0]
        if np.allclose(new, coef, rtol=1e-13, atol=1e-15):
            return new
        coef = new
    return coef


def fit_exponential(trace: DecayTrace, magnitude: float = 1.0, k_known: float | None = None,
                    robust: bool = False) -> FitResult:
    """Log-linear least squares on ``ln|v| = ln(A) + p t``.

    For a VOLTAGE trace ``A = K U`` so ``k_hat = A / magnitude``. For a CURRENT
    trace ``A = c1 K |p| U``; with ``k_known`` this yields ``c1``.
    ``robust=True`` minimises absolute log deviations instead of squares.
    """
    if trace.kind is TraceKind.DISPLACEMENT:
        raise DataError("displacement decays are not exponential; use calibrate_p_from_displacement_drop")
    v = np.abs(trace.values)
    if np.any(~np.isfinite(v)) or np.any(trace.values <= 0):
        raise DataError("all samples must be finite and strictly positive")
    if np.ptp(v) == 0:
        raise RankError("constant trace: decay rate is not identifiable")
    t = trace.t
    design = np.column_stack([np.ones_like(t), t])
    y = np.log(v)
    if robust:
        ln_a, p_hat = _irls_l1(design, y)
    else:
        (ln_a, p_hat), *_ = np.linalg.lstsq(design, y, rcond=None)
    if not p_hat < 0:
        raise DataError(f"trace does not decay (fitted rate {p_hat:.6g} >= 0)")
    amplitude = math.exp(ln_a)
    residual = v - amplitude * np.exp(p_hat * t)
    rms = float(np.sqrt(np.mean(residual ** 2)))

    if trace.kind is TraceKind.VOLTAGE:
        return FitResult(trace.kind, amplitude, amplitude / magnitude, float(p_hat), rms)

    c1_hat = None
    k_hat = math.nan
    ident = {"c1": False, "c2": False, "r_leak": False}
    if k_known is not None:
        k_hat = k_known
        c1_hat = amplitude / (k_known * abs(p_hat) * magnitude)
        ident["c1"] = True
    return FitResult(trace.kind, amplitude, k_hat, float(p_hat), rms, ident, c1_hat)


def identify_circuit(voltage_fit: FitResult, current_fit: FitResult,
                     magnitude: float) -> tuple[CircuitParams, dict]:
    """Combine a voltage and a current fit of the same DC step into all three constants."""
    if voltage_fit.kind is not TraceKind.VOLTAGE or current_fit.kind is not TraceKind.CURRENT:
        raise DataError("need one VOLTAGE fit and one CURRENT fit")
    k = voltage_fit.k_hat
    p = voltage_fit.p_hat
    c1 = current_fit.amplitude / (k * abs(p) * magnitude)
    params = CircuitParams.from_constants(k, p, c1=c1)
    return params, {"c1": True, "c2": True, "r_leak": True}


@dataclass(frozen=True)
class DecayScenario:
    """DC hold of an actuator stack under a constant load."""

    actuator: ActuatorConfig
    load_force: float
    magnitude: float = 6000.0
    k: float = 0.5


def displacement_drop(p: float, horizon: float, scenario: DecayScenario) -> float:
    """Fractional displacement loss between t = 0+ and ``horizon`` for decay rate ``p``."""
    u0 = scenario.magnitude * scenario.k
    cfg = scenario.actuator
    h0 = stack_displacement(cfg, ea_pressure(cfg.film, u0), scenario.load_force)
    if h0 == 0:
        raise DomainError("no displacement at t = 0+")
    h1 = stack_displacement(cfg, ea_pressure(cfg.film, u0 * math.exp(p * horizon)), scenario.load_force)
    return 1.0 - h1 / h0


def calibrate_p_from_displacement_drop(drop_fraction: float, horizon: float,
                                       scenario: DecayScenario, tol: float = 1e-12) -> float:
    """Decay rate that reproduces a measured displacement drop through the full model."""
    if not 0 < drop_fraction < 1:
        raise DomainError("drop_fraction must lie in (0, 1)")
    if not horizon > 0:
        raise DomainError("horizon must be > 0")
    lo, hi = P_BRACKET
    grid = np.linspace(lo, hi, 41)
    drops = [displacement_drop(p, horizon, scenario) for p in grid]
    if any(b > a for a, b in zip(drops, drops[1:])):
        raise RangeError("drop is not monotone in |P| over the bracket")
    attained = drops[0]
    if drop_fraction >= attained:
        raise RangeError(f"drop {drop_fraction:.6g} unreachable; at P={lo} the model drops {attained:.6g}",
                         attained=attained)
    # drop(hi) == 0 < drop_fraction < drop(lo)
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if displacement_drop(mid, horizon, scenario) > drop_fraction:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def fill_gaps(values: Sequence[float], max_gap: int = 3) -> np.ndarray:
    """Linearly interpolate runs of up to ``max_gap`` missing (NaN) samples."""
    v = np.asarray(values, dtype=float).copy()
    missing = np.isnan(v)
    if not missing.any():
        return v
    if missing[0] or missing[-1]:
        raise DataError("trace starts or ends with missing samples")
    run = 0
    for m in missing:
        run = run + 1 if m else 0
        if run > max_gap:
            raise DataError(f"more than {max_gap} consecutive missing samples")
    idx = np.arange(len(v))
    v[missing] = np.interp(idx[missing], idx[~missing], v[~missing])
    return v


def format_fit_report(result: FitResult) -> str:
    lines = [
        f"kind: {result.kind.value}",
        f"amplitude: {result.amplitude:.9g}",
        f"k_hat: {result.k_hat:.9g}",
        f"p_hat: {result.p_hat:.9g}",
        f"time_constant: {-1.0 / result.p_hat:.9g}",
        f"residual_rms: {result.residual_rms:.9g}",
    ]
    if result.c1_hat is not None:
        lines.append(f"c1_hat: {result.c1_hat:.9g}")
    for name in ("c1", "c2", "r_leak"):
        lines.append(f"identifiable_{name}: {str(result.identifiable[name]).lower()}")
    return "\n".join(lines) + "\n"
