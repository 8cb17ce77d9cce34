"""Leakage circuit of an electrostatic-adhesion actuator.

A series capacitor ``c1`` (cable/film) feeds the electrode pair ``c2`` which
leaks through ``r_leak``. The electrode voltage ``u_o`` therefore decays under
a DC input and settles into a bounded oscillation under an AC square input.

All voltages are in volts, times in seconds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from sehasel.errors import ConfigError, DomainError, ValidationError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CircuitParams:
    c1: float = 1e-9
    c2: float = 1e-9
    r_leak: float = 1e9

    def __post_init__(self):
        for name in ("c1", "c2", "r_leak"):
            value = getattr(self, name)
            if not value > 0:
                raise ValidationError(name, f"must be > 0, got {value!r}")

    @property
    def k(self) -> float:
        return self.c1 / (self.c1 + self.c2)

    @property
    def p(self) -> float:
        if math.isinf(self.r_leak):
            return -0.0
        return -1.0 / (self.r_leak * (self.c1 + self.c2))

    @classmethod
    def from_constants(cls, k: float, p: float, c1: float = 1e-9) -> "CircuitParams":
        """Build params with the given divider ratio ``k`` and decay rate ``p``."""
        if not 0 < k < 1:
            raise ValidationError("k", f"must lie in (0, 1), got {k!r}")
        if not p < 0:
            raise ValidationError("p", f"must be < 0, got {p!r}")
        c2 = c1 * (1.0 - k) / k
        return cls(c1=c1, c2=c2, r_leak=-1.0 / (p * (c1 + c2)))

    def with_decay_rate(self, p: float) -> "CircuitParams":
        """Same capacitors, leak resistance chosen to give decay rate ``p``."""
        if not p < 0:
            raise ValidationError("p", f"must be < 0, got {p!r}")
        return CircuitParams(self.c1, self.c2, -1.0 / (p * (self.c1 + self.c2)))


class WaveKind(enum.Enum):
    DC_STEP = "dc"
    AC_SQUARE = "ac_square"


@dataclass(frozen=True)
class DriveWaveform:
    kind: WaveKind
    magnitude: float
    frequency: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise ValidationError("magnitude", f"must be >= 0, got {self.magnitude!r}")
        if self.kind is WaveKind.AC_SQUARE and not self.frequency > 0:
            raise ValidationError("frequency", f"must be > 0 for AC drive, got {self.frequency!r}")

    @property
    def half_period(self) -> float:
        if self.kind is not WaveKind.AC_SQUARE:
            return math.inf
        return 0.5 / self.frequency

    def sample(self, t: ArrayLike) -> ArrayLike:
        """Input voltage at time ``t`` (zero for ``t < 0``)."""
        t = np.asarray(t, dtype=float)
        if self.kind is WaveKind.DC_STEP:
            out = np.where(t >= 0, self.magnitude, 0.0)
        else:
            n = np.floor(t / self.half_period)
            out = np.where(t >= 0, self.magnitude * (1.0 - 2.0 * np.mod(n, 2)), 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class VoltageTrace:
    dt: float
    u_i: np.ndarray
    u_o: np.ndarray
    i_in: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt", "must be > 0")
        if len(self.u_o) == 0:
            raise ValidationError("samples", "trace is empty")

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.u_o)) * self.dt

    def __len__(self):
        return len(self.u_o)


class Constants(NamedTuple):
    k: float
    p: float


class Envelope(NamedTuple):
    k1: float
    k2: float


def derive_constants(params: CircuitParams) -> Constants:
    return Constants(params.k, params.p)


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("time must be >= 0")
    return t


def _check_frequency(frequency):
    if not frequency > 0:
        raise DomainError(f"frequency must be > 0, got {frequency!r}")


def dc_output(params: CircuitParams, magnitude: float, t: ArrayLike) -> ArrayLike:
    """Electrode voltage after a DC step of ``magnitude`` applied at t=0."""
    t = _check_time(t)
    out = magnitude * params.k * np.exp(params.p * t)
    return out if out.ndim else float(out)


def ac_square_output(params: CircuitParams, magnitude: float, frequency: float,
                     t: ArrayLike) -> ArrayLike:
    """Electrode voltage under a square wave of +/-``magnitude`` starting positive at t=0.

    Uses the collapsed geometric sum, so the cost does not grow with the
    number of elapsed half periods.
    """
    _check_frequency(frequency)
    t = _check_time(t)
    k, p = params.k, params.p
    a = 0.5 / frequency
    n = np.floor(t / a)
    dt_in = t - n * a
    sign = 1.0 - 2.0 * np.mod(n, 2)
    epa = math.exp(p * a)
    # K e^{Pt} - 2K e^{Pt}/(1+e^{Pa}) folded into one term to avoid cancellation.
    transient = k * np.exp(p * t) * (epa - 1.0) / (1.0 + epa)
    periodic = sign * 2.0 * k * np.exp(p * dt_in) / (1.0 + epa)
    out = magnitude * (transient + periodic)
    return out if out.ndim else float(out)


def steady_state_output(params: CircuitParams, magnitude: float, frequency: float,
                        delta_t: float, n_parity: str = "even") -> float:
    """Periodic part of the AC response, ``delta_t`` into a half period."""
    _check_frequency(frequency)
    a = 0.5 / frequency
    if not 0 <= delta_t < a:
        raise DomainError(f"delta_t must lie in [0, {a}), got {delta_t!r}")
    if n_parity not in ("even", "odd"):
        raise DomainError(f"n_parity must be 'even' or 'odd', got {n_parity!r}")
    sign = 1.0 if n_parity == "even" else -1.0
    k, p = params.k, params.p
    return sign * 2.0 * k * math.exp(p * delta_t) / (1.0 + math.exp(p * a)) * magnitude


def envelope(params: CircuitParams, frequency: float) -> Envelope:
    """Upper and lower bounds of the steady |u_o| per volt of input magnitude."""
    _check_frequency(frequency)
    a = 0.5 / frequency
    # 2/(1+e^x) = 1 - tanh(x/2); keeps k1 + k2 == 2k to rounding.
    th = math.tanh(params.p * a / 2.0)
    return Envelope(params.k * (1.0 - th), params.k * (1.0 + th))


def transfer_magnitude(params: CircuitParams, omega: float) -> float:
    """|T(j omega)| of the high-pass divider formed by the leakage network."""
    if not omega >= 0:
        raise DomainError(f"omega must be >= 0, got {omega!r}")
    if math.isinf(omega):
        return params.k
    num = params.r_leak * params.c1 * omega
    den = math.hypot(params.r_leak * (params.c1 + params.c2) * omega, 1.0)
    return num / den


def _rk4_decay(u: float, p: float, h: float) -> float:
    # Between input edges du_i/dt = 0, so Kirchhoff's law reduces to du_o/dt = p*u_o.
    k1 = p * u
    k2 = p * (u + 0.5 * h * k1)
    k3 = p * (u + 0.5 * h * k2)
    k4 = p * (u + h * k3)
    return u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def simulate_ode(params: CircuitParams,
                 waveform: Union[DriveWaveform, Sequence[float], np.ndarray],
                 dt: float,
                 duration: float | None = None,
                 method: str = "exponential") -> VoltageTrace:
    """Integrate the leakage circuit from rest (u_o = 0 before t = 0).

    ``waveform`` is either a :class:`DriveWaveform` (edges are located exactly,
    also between samples) or an array of input samples held constant over each
    ``dt``. Input discontinuities move ``u_o`` by ``k`` times the input jump;
    between edges the decay is advanced either exactly (``"exponential"``) or
    with classical RK4 (``"rk4"``).
    """
    if method not in ("exponential", "rk4"):
        raise ConfigError(f"unknown integration method {method!r}")
    k, p = params.k, params.p
    if not dt > 0 or dt > 0.01 / abs(p):
        raise ConfigError(f"dt={dt!r} violates resolution guard 0 < dt <= 0.01/|P| = {0.01 / abs(p):.6g}")

    if method == "exponential":
        def advance(u, h):
            return u * math.exp(p * h)
    else:
        def advance(u, h):
            return _rk4_decay(u, p, h)

    if isinstance(waveform, DriveWaveform):
        if duration is None:
            raise ConfigError("duration is required for a DriveWaveform input")
        n_samples = int(round(duration / dt)) + 1
        t = np.arange(n_samples) * dt
        u_in = np.asarray(waveform.sample(t), dtype=float)
        u_o = np.empty(n_samples)
        u = k * u_in[0]
        u_o[0] = u
        if waveform.kind is WaveKind.AC_SQUARE:
            a = waveform.half_period
            edges = np.floor(t / a).astype(np.int64)
            for i in range(1, n_samples):
                t_prev = t[i - 1]
                for j in range(edges[i - 1] + 1, edges[i] + 1):
                    t_edge = j * a
                    u = advance(u, t_edge - t_prev)
                    # sign flips from (-1)^(j-1) to (-1)^j
                    u += k * 2.0 * waveform.magnitude * (1.0 if j % 2 == 0 else -1.0)
                    t_prev = t_edge
                u = advance(u, t[i] - t_prev)
                u_o[i] = u
        else:
            # one uniform-step factor keeps the exponential path bit-stable
            if method == "exponential":
                factor = math.exp(p * dt)
                for i in range(1, n_samples):
                    u *= factor
                    u_o[i] = u
            else:
                for i in range(1, n_samples):
                    u = advance(u, dt)
                    u_o[i] = u
    else:
        u_in = np.asarray(waveform, dtype=float)
        if u_in.ndim != 1 or len(u_in) == 0:
            raise ConfigError("sampled waveform must be a non-empty 1-D sequence")
        u_o = np.empty(len(u_in))
        u = k * u_in[0]
        u_o[0] = u
        for i in range(1, len(u_in)):
            u = advance(u, dt) + k * (u_in[i] - u_in[i - 1])
            u_o[i] = u

    i_in = -params.c1 * p * u_o
    return VoltageTrace(dt=dt, u_i=u_in, u_o=u_o, i_in=i_in)


class CircuitStepper:
    """Step-by-step exponential integrator for a zero-order-held input.

    ``apply(u_i)`` applies the divider jump for a change of input at the start
    of a step and returns the electrode voltage there; ``advance()`` decays it
    across the step.
    """

    def __init__(self, params: CircuitParams, dt: float):
        if not dt > 0 or dt > 0.01 / abs(params.p):
            raise ConfigError(f"dt={dt!r} violates resolution guard 0 < dt <= 0.01/|P|")
        self.params = params
        self.k = params.k
        self.decay = math.exp(params.p * dt)
        self.u_i = 0.0
        self.u_o = 0.0

    def apply(self, u_i: float) -> float:
        if u_i != self.u_i:
            self.u_o += self.k * (u_i - self.u_i)
            self.u_i = u_i
        return self.u_o

    def advance(self) -> float:
        self.u_o *= self.decay
        return self.u_o

    @property
    def current(self) -> float:
        """Input current ``c1 * d(u_i - u_o)/dt`` between edges."""
        return -self.params.c1 * self.params.p * self.u_o
