"""Scenario configuration files.

Format: UTF-8 text, ``[section]`` headers, ``key = value`` lines, ``#``
comments. Values are SI unless the key says otherwise. Lists are comma
separated; pair lists are written ``a:b, c:d``. Unknown sections or keys are
errors.

Per-key units
-------------
[scenario]   kind, duration [s], record_dt [s], plant_dt [s], seed,
             window_start [s] (start of the steady window for ripple metrics)
[circuit]    c1 [F], c2 [F], r_leak [ohm]
[actuator]   width [m], oil_volume [m^3], eps_rel, film_thickness [m] (single
             film), stack_count, cell_height [m], overlap_length [m] (0: off)
[plant]      spring_k [N/m], damping_c [N s/m], load_mass [kg], slider_mass
             [kg], mass_b [kg], play_width [m], sensor_noise_sd [m], rigid
[control]    kp [V/m], ki [V/(m s)] or [V/m per cycle], cycle_dt [s],
             u_max [V], integral_time_base (seconds|cycles)
[drive]      wave (dc|ac_square), magnitude [V], frequency [Hz]
[target]     wave (none|constant|square|sine|steps), offset [m],
             amplitude [m], frequency [Hz], steps (t [s]:value [m] pairs)
[disturbance] steps (t [s]:extra downward force [N] pairs),
             resistance (x_a [m]:force [N] pairs)
[sweep]      frequencies [Hz], loads [kg], v_max [V], steps
[crank]      rod_length [m], crank_radius [m] (0: solve from stroke/span),
             zero_angle [rad], stroke [m], span_deg [deg]
[output]     trace, report (file names, relative to the output directory)
"""

from __future__ import annotations

import configparser
import enum
import math
import typing
from dataclasses import dataclass, field, fields, replace

from sehasel.actuator import GRAVITY, ActuatorConfig, FilmInterface
from sehasel.circuit import CircuitParams
from sehasel.control import PiGains
from sehasel.errors import ConfigError, ValidationError
from sehasel.plant import DisturbanceProfile, PlantParams, default_damping

Pairs = typing.Tuple[typing.Tuple[float, float], ...]
Floats = typing.Tuple[float, ...]


class ScenarioKind(enum.Enum):
    DC_DECAY = "dc_decay"
    AC_HOLD = "ac_hold"
    FREQ_SWEEP = "freq_sweep"
    HYSTERESIS_SWEEP = "hysteresis_sweep"
    TRACK = "track"
    IMPACT = "impact"
    ISOLATION = "isolation"
    ROTARY = "rotary"
    BIOPSY = "biopsy"


CLOSED_LOOP = frozenset({ScenarioKind.TRACK, ScenarioKind.IMPACT, ScenarioKind.ROTARY,
                         ScenarioKind.BIOPSY})

# Leak resistances matched by calibrate_p_from_displacement_drop (c1 = c2 = 1 nF,
# 6 kV DC, 50 g on a 3-cell stack) to the measured displacement drops:
# 25 um PI 6.5 % in 80 s, pre-coated BOPP 96.3 % in 10 s, 50 um PI 71 % in 10 s.
R_LEAK_PI25 = 4.1819147e10
R_LEAK_BOPP = 1.50006435e9
R_LEAK_PI50 = 2.79538559e9
BOPP_EPS_REL = 3.4 / 1.5

# Play width that gives MHS/MOS = 0.30 on the default 0 -> 8 kV -> 0 sweep.
PLAY_WIDTH_SWEEP = 0.0111020346


@dataclass(frozen=True)
class ScenarioSection:
    kind: str = "track"
    duration: float = 30.0
    record_dt: float = 1e-3
    plant_dt: float = 1e-4
    seed: int = 0
    window_start: float = 60.0


@dataclass(frozen=True)
class CircuitSection:
    c1: float = 1e-9
    c2: float = 1e-9
    r_leak: float = R_LEAK_PI50


@dataclass(frozen=True)
class ActuatorSection:
    width: float = 0.06
    oil_volume: float = 3.2e-6
    eps_rel: float = 3.4
    film_thickness: float = 50e-6
    stack_count: int = 11
    cell_height: float = 0.016
    overlap_length: float = 0.0


@dataclass(frozen=True)
class PlantSection:
    spring_k: float = 14.0
    damping_c: float = default_damping(14.0, 0.08, 0.5)
    load_mass: float = 0.05
    slider_mass: float = 0.03
    mass_b: float = 0.03
    play_width: float = 0.0
    sensor_noise_sd: float = 0.0
    rigid: bool = False


@dataclass(frozen=True)
class ControlSection:
    kp: float = 2e4
    ki: float = 2e5
    cycle_dt: float = 1e-3
    u_max: float = 8000.0
    integral_time_base: str = "seconds"


@dataclass(frozen=True)
class DriveSection:
    wave: str = "ac_square"
    magnitude: float = 6000.0
    frequency: float = 2.0


@dataclass(frozen=True)
class TargetSection:
    wave: str = "none"
    offset: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0
    steps: Pairs = ()


@dataclass(frozen=True)
class DisturbanceSection:
    steps: Pairs = ()
    resistance: Pairs = ()


@dataclass(frozen=True)
class SweepSection:
    frequencies: Floats = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
    loads: Floats = (0.05, 0.08, 0.13)
    v_max: float = 8000.0
    steps: int = 81


@dataclass(frozen=True)
class CrankSection:
    rod_length: float = 0.04
    crank_radius: float = 0.0
    zero_angle: float = math.pi / 2
    stroke: float = 0.008
    span_deg: float = 48.1


@dataclass(frozen=True)
class OutputSection:
    trace: str = "trace.csv"
    report: str = "report.txt"


SECTIONS = {
    "scenario": ScenarioSection,
    "circuit": CircuitSection,
    "actuator": ActuatorSection,
    "plant": PlantSection,
    "control": ControlSection,
    "drive": DriveSection,
    "target": TargetSection,
    "disturbance": DisturbanceSection,
    "sweep": SweepSection,
    "crank": CrankSection,
    "output": OutputSection,
}

TARGET_WAVES = ("none", "constant", "square", "sine", "steps")
DRIVE_WAVES = ("dc", "ac_square")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    circuit: CircuitSection = field(default_factory=CircuitSection)
    actuator: ActuatorSection = field(default_factory=ActuatorSection)
    plant: PlantSection = field(default_factory=PlantSection)
    control: ControlSection = field(default_factory=ControlSection)
    drive: DriveSection = field(default_factory=DriveSection)
    target: TargetSection = field(default_factory=TargetSection)
    disturbance: DisturbanceSection = field(default_factory=DisturbanceSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    crank: CrankSection = field(default_factory=CrankSection)
    output: OutputSection = field(default_factory=OutputSection)

    @property
    def kind(self) -> ScenarioKind:
        return ScenarioKind(self.scenario.kind)

    @property
    def closed_loop(self) -> bool:
        return self.kind in CLOSED_LOOP

    def circuit_params(self) -> CircuitParams:
        c = self.circuit
        return CircuitParams(c.c1, c.c2, c.r_leak)

    def actuator_config(self) -> ActuatorConfig:
        a = self.actuator
        return ActuatorConfig(width=a.width, oil_volume=a.oil_volume,
                              film=FilmInterface(a.eps_rel, a.film_thickness),
                              stack_count=a.stack_count, cell_height=a.cell_height,
                              overlap_length=a.overlap_length or None)

    def plant_params(self) -> PlantParams:
        p = self.plant
        return PlantParams(spring_k=p.spring_k, damping_c=p.damping_c,
                           mass_a=p.load_mass + p.slider_mass, mass_b=p.mass_b,
                           play_width=p.play_width, sensor_noise_sd=p.sensor_noise_sd,
                           rng_seed=self.scenario.seed, rigid=p.rigid)

    def gains(self) -> PiGains:
        c = self.control
        return PiGains(kp=c.kp, ki=c.ki, cycle_dt=c.cycle_dt, u_max=c.u_max,
                       integral_time_base=c.integral_time_base)

    def disturbance_profile(self) -> DisturbanceProfile:
        d = self.disturbance
        return DisturbanceProfile(steps=d.steps, resistance=d.resistance)

    def with_load(self, load_mass: float) -> "ScenarioConfig":
        return replace(self, plant=replace(self.plant, load_mass=load_mass))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, scenario=replace(self.scenario, seed=seed))

    def updated(self, **sections) -> "ScenarioConfig":
        """Copy with individual keys replaced: ``updated(plant={"rigid": True})``."""
        changes = {name: replace(getattr(self, name), **values) for name, values in sections.items()}
        return replace(self, **changes)


def _weight(grams: float) -> float:
    return grams * 1e-3 * GRAVITY


def default_config(kind: ScenarioKind | str) -> ScenarioConfig:
    """Defaults for each scenario kind, modelled on the corresponding experiment."""
    kind = ScenarioKind(kind)
    base = ScenarioConfig(scenario=ScenarioSection(kind=kind.value))
    K = ScenarioKind
    if kind is K.DC_DECAY:
        return base.updated(
            scenario={"duration": 80.0, "window_start": 0.0},
            circuit={"r_leak": R_LEAK_PI25},
            actuator={"film_thickness": 25e-6, "stack_count": 3},
            plant={"rigid": True, "load_mass": 0.02, "mass_b": 0.0},
            drive={"wave": "dc"},
        )
    if kind is K.AC_HOLD:
        return base.updated(scenario={"duration": 70.0}, plant={"rigid": True})
    if kind is K.FREQ_SWEEP:
        return base.updated(scenario={"duration": 80.0}, plant={"rigid": True})
    if kind is K.HYSTERESIS_SWEEP:
        return base.updated(
            scenario={"duration": 40.0, "window_start": 0.0},
            plant={"rigid": True, "load_mass": 0.06, "play_width": PLAY_WIDTH_SWEEP},
            drive={"magnitude": 8000.0},
        )
    if kind is K.ISOLATION:
        return base.updated(scenario={"duration": 20.0, "window_start": 15.0},
                            plant={"load_mass": 0.1})
    if kind is K.TRACK:
        return base.updated(
            scenario={"duration": 40.0, "window_start": 0.0},
            target={"wave": "square", "offset": 0.003, "amplitude": 0.001, "frequency": 0.05},
        )
    if kind is K.IMPACT:
        return base.updated(
            scenario={"duration": 14.0, "window_start": 0.0},
            target={"wave": "constant", "offset": 0.005},
            disturbance={"steps": ((4.0, _weight(50)), (9.0, 0.0))},
        )
    if kind is K.ROTARY:
        ramp = tuple((5.0 * i, 0.002 * min(i, 8 - i)) for i in range(9))
        return base.updated(scenario={"duration": 45.0, "window_start": 0.0},
                            target={"wave": "steps", "steps": ramp})
    if kind is K.BIOPSY:
        return base.updated(
            scenario={"duration": 16.0, "window_start": 0.0},
            target={"wave": "steps", "steps": ((0.0, 0.002), (8.0, 0.0035))},
            # muscle layer, then a stiffer liver surface past 3 mm
            disturbance={"resistance": ((0.0, 0.0), (0.002, 0.05), (0.003, 0.05), (0.0035, 0.12))},
        )
    raise AssertionError(kind)


# -- parsing -----------------------------------------------------------------

def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(x) for x in text.split(","))


def _parse_pairs(text):
    text = text.strip()
    if not text:
        return ()
    out = []
    for item in text.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise ValueError(f"expected 'a:b', got {item.strip()!r}")
        out.append((float(a), float(b)))
    return tuple(out)


def _parse_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


_PARSERS = {float: float, int: _parse_int, bool: _parse_bool, str: str.strip,
            Floats: _parse_floats, Pairs: _parse_pairs}


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{a!r}:{b!r}" for a, b in value)
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def _hints(cls):
    return typing.get_type_hints(cls)


def parse_config(text: str) -> ScenarioConfig:
    """Parse config text on top of the defaults for its scenario kind."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       comment_prefixes=("#", ";"), empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"syntax: {exc}") from None

    problems = []
    for name in parser.sections():
        if name not in SECTIONS:
            problems.append(f"[{name}]: unknown section")
    kind_text = parser.get("scenario", "kind", fallback=None)
    if kind_text is None:
        raise ConfigError(problems + ["[scenario] kind: required"])
    try:
        cfg = default_config(kind_text.strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in ScenarioKind)
        raise ConfigError(problems + [f"[scenario] kind: unknown {kind_text!r} (one of {valid})"]) from None

    changes = {}
    for name in parser.sections():
        cls = SECTIONS.get(name)
        if cls is None:
            continue
        hints = _hints(cls)
        values = {}
        for key, raw in parser.items(name):
            if key not in hints:
                problems.append(f"[{name}] {key}: unknown key")
                continue
            try:
                values[key] = _PARSERS[hints[key]](raw)
            except (ValueError, KeyError) as exc:
                problems.append(f"[{name}] {key}: {exc}")
        if name == "scenario":
            values["kind"] = kind_text.strip().lower()
        changes[name] = replace(getattr(cfg, name), **values)
    cfg = replace(cfg, **changes)
    try:
        validate(cfg)
    except ConfigError as exc:
        problems.extend(exc.problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for name in SECTIONS:
        section = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(section):
            lines.append(f"{f.name} = {_format(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def validate(cfg: ScenarioConfig) -> None:
    """Check every sub-config; raise one ConfigError listing all violations."""
    problems = []

    def check(label, build):
        try:
            build()
        except ValidationError as exc:
            problems.append(f"[{label}] {exc}")

    s = cfg.scenario
    if not s.duration > 0:
        problems.append("[scenario] duration: must be > 0")
    if not s.plant_dt > 0:
        problems.append("[scenario] plant_dt: must be > 0")
    if not s.window_start >= 0:
        problems.append("[scenario] window_start: must be >= 0")
    cycle = cfg.control.cycle_dt
    if cycle > 0 and s.plant_dt > 0:
        ratio = cycle / s.plant_dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            problems.append("[scenario] plant_dt: must divide control cycle_dt")
        rec = s.record_dt / cycle
        if abs(rec - round(rec)) > 1e-9 or round(rec) < 1:
            problems.append("[scenario] record_dt: must be a multiple of control cycle_dt")
    check("circuit", cfg.circuit_params)
    check("actuator", cfg.actuator_config)
    check("plant", cfg.plant_params)
    check("control", cfg.gains)
    check("disturbance", cfg.disturbance_profile)
    if cfg.plant.load_mass < 0 or cfg.plant.slider_mass < 0:
        problems.append("[plant] load_mass/slider_mass: must be >= 0")

    d = cfg.drive
    if d.wave not in DRIVE_WAVES:
        problems.append(f"[drive] wave: must be one of {DRIVE_WAVES}")
    if not d.magnitude >= 0:
        problems.append("[drive] magnitude: must be >= 0")
    if d.wave == "ac_square" and not d.frequency > 0:
        problems.append("[drive] frequency: must be > 0 for ac_square")

    t = cfg.target
    if t.wave not in TARGET_WAVES:
        problems.append(f"[target] wave: must be one of {TARGET_WAVES}")
    if t.wave in ("square", "sine") and not t.frequency > 0:
        problems.append("[target] frequency: must be > 0 for periodic targets")
    if t.wave == "steps":
        times = [p[0] for p in t.steps]
        if not times:
            problems.append("[target] steps: required for wave = steps")
        elif any(b <= a for a, b in zip(times, times[1:])):
            problems.append("[target] steps: times must be strictly increasing")

    kind = cfg.kind
    if kind in CLOSED_LOOP and t.wave == "none":
        problems.append(f"[target] wave: required for {kind.value}")
    if kind is ScenarioKind.IMPACT and not cfg.disturbance.steps:
        problems.append("[disturbance] steps: required for impact")
    if kind is ScenarioKind.FREQ_SWEEP:
        if not cfg.sweep.frequencies or not cfg.sweep.loads:
            problems.append("[sweep] frequencies/loads: required for freq_sweep")
        elif not all(0.1 <= f <= 10 for f in cfg.sweep.frequencies):
            problems.append("[sweep] frequencies: must lie in [0.1, 10] Hz")
        if d.wave != "ac_square":
            problems.append("[drive] wave: freq_sweep needs ac_square")
    if kind is ScenarioKind.HYSTERESIS_SWEEP:
        if not cfg.sweep.v_max > 0 or cfg.sweep.steps < 2:
            problems.append("[sweep] v_max/steps: need v_max > 0 and steps >= 2")
    if kind is ScenarioKind.ROTARY:
        c = cfg.crank
        if not (c.rod_length > 0 and c.stroke > 0 and 0 < c.span_deg < 180):
            problems.append("[crank] rod_length/stroke/span_deg: invalid geometry")
        if c.crank_radius and not c.rod_length > c.crank_radius > 0:
            problems.append("[crank] crank_radius: need rod_length > crank_radius > 0")
    if problems:
        raise ConfigError(problems)
