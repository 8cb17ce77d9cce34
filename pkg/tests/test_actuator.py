import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from sehasel.actuator import (
    GRAVITY,
    ActuatorConfig,
    EaPad,
    FilmInterface,
    cell_displacement,
    contact_length,
    ea_force,
    ea_pressure,
    stack_displacement,
    strain,
    voltage_for_displacement,
)
from sehasel.errors import DomainError, RangeError, ValidationError

CFG = ActuatorConfig()
FILM = FilmInterface()
LOAD_50G = 0.05 * GRAVITY
# evaluated with mpmath at 40 digits from the closed forms
PRESSURE_6KV = 54186.48
H_ZERO_LOAD = 0.0082405163098280443806
H_50G_6KV = 0.0081450305261579695438


def quadratic(h, pressure, force, cfg=CFG):
    return math.pi / 4 * h * h + force / (cfg.width * pressure) * h - cfg.oil_volume / cfg.width


def test_ea_force():
    pad = EaPad(3.4, 100e-6, 36e-4)
    assert ea_force(pad, 0.0) == 0.0
    assert ea_force(pad, 2000.0) == pytest.approx(4 * ea_force(pad, 1000.0), rel=1e-15)
    assert ea_force(pad, 6000.0) == pytest.approx(195.071328, rel=1e-12)


def test_ea_pressure():
    assert ea_pressure(FILM, 0.0) == 0.0
    assert FILM.d_film == pytest.approx(100e-6)
    assert ea_pressure(FILM, 6000.0) == pytest.approx(PRESSURE_6KV, rel=1e-12)
    assert ea_pressure(FILM, 8000.0) == pytest.approx((8 / 6) ** 2 * PRESSURE_6KV, rel=1e-12)


def test_zero_load_closed_form_is_exact():
    assert cell_displacement(CFG, 1234.0, 0.0) == 2 * math.sqrt(CFG.oil_volume / (math.pi * CFG.width))
    assert cell_displacement(CFG, 1234.0, 0.0) == pytest.approx(H_ZERO_LOAD, rel=1e-15)
    assert CFG.h_max == cell_displacement(CFG, 1.0, 0.0)


def test_loaded_height_against_bisection():
    h = cell_displacement(CFG, PRESSURE_6KV, LOAD_50G)
    oracle = brentq(quadratic, 0.0, CFG.h_max, args=(PRESSURE_6KV, LOAD_50G), xtol=1e-15, rtol=1e-15)
    assert abs(h - oracle) <= 1e-9
    assert h == pytest.approx(H_50G_6KV, rel=1e-13)
    assert h == pytest.approx(8.14e-3, abs=0.01e-3)


def test_vanishing_pressure_collapses_cell():
    heights = [cell_displacement(CFG, p, LOAD_50G) for p in (1e2, 1e0, 1e-2, 1e-4)]
    assert all(b < a for a, b in zip(heights, heights[1:]))
    assert heights[-1] < 1e-6
    assert cell_displacement(CFG, 0.0, LOAD_50G) == 0.0


def test_negative_inputs_rejected():
    with pytest.raises(DomainError):
        cell_displacement(CFG, 1e4, -1.0)
    with pytest.raises(DomainError):
        cell_displacement(CFG, -1.0, 1.0)


def test_contact_length_and_balances():
    assert contact_length(CFG, CFG.h_max) == pytest.approx(0.0, abs=1e-15)
    s = contact_length(CFG, 8.144e-3)
    assert s == pytest.approx(0.00015250583142346649367, rel=1e-12)
    assert CFG.width * PRESSURE_6KV * s == pytest.approx(LOAD_50G, rel=0.02)
    half = ActuatorConfig(oil_volume=CFG.oil_volume / 2)
    h = 5e-3
    assert contact_length(CFG, h) - contact_length(half, h) == pytest.approx(
        CFG.oil_volume / (2 * CFG.width * h), rel=1e-12)
    with pytest.raises(DomainError):
        contact_length(CFG, 0.0)
    with pytest.raises(DomainError):
        contact_length(CFG, 2 * CFG.h_max)


@settings(max_examples=300, deadline=None)
@given(pressure=st.floats(1.0, 1e6), force=st.floats(1e-4, 50.0))
def test_root_satisfies_model_relations(pressure, force):
    h = cell_displacement(CFG, pressure, force)
    assert 0 < h <= CFG.h_max
    scale = CFG.oil_volume / CFG.width
    # quadratic residual
    assert abs(quadratic(h, pressure, force)) <= 1e-10 * scale
    # volume: L0 h (S + pi h / 4) = V0
    s = contact_length(CFG, h)
    assert CFG.width * h * (s + math.pi * h / 4) == pytest.approx(CFG.oil_volume, rel=1e-10)
    # force: L0 Pe S = F
    if s > 1e-6 * h:
        assert CFG.width * pressure * s == pytest.approx(force, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(p1=st.floats(10.0, 1e6), p2=st.floats(10.0, 1e6), f=st.floats(1e-3, 10.0))
def test_height_monotone_in_pressure(p1, p2, f):
    lo, hi = sorted((p1, p2))
    assert cell_displacement(CFG, lo, f) <= cell_displacement(CFG, hi, f)


def test_stack_sums_cells_and_strain_is_count_invariant():
    one = ActuatorConfig(stack_count=1)
    assert stack_displacement(one, 3e4, 0.5) == cell_displacement(one, 3e4, 0.5)
    assert stack_displacement(CFG, 3e4, 0.5) == pytest.approx(11 * cell_displacement(CFG, 3e4, 0.5), rel=1e-15)
    strains = [strain(ActuatorConfig(stack_count=n), stack_displacement(ActuatorConfig(stack_count=n), 3e4, 0.5))
               for n in (1, 3, 11, 40)]
    np.testing.assert_allclose(strains, strains[0], rtol=1e-14)


def test_voltage_inverse_round_trip():
    for h_target in np.linspace(0.005, 0.95 * CFG.stroke_max, 25):
        sol = voltage_for_displacement(CFG, h_target, LOAD_50G)
        assert not sol.degenerate
        h = stack_displacement(CFG, ea_pressure(FILM, sol.voltage), LOAD_50G)
        assert abs(h - h_target) <= 1e-9


def test_voltage_inverse_monotone_and_degenerate():
    targets = np.linspace(0.01, 0.09, 30)
    volts = [voltage_for_displacement(CFG, h, LOAD_50G).voltage for h in targets]
    assert all(b > a for a, b in zip(volts, volts[1:]))
    assert voltage_for_displacement(CFG, 0.05, 0.0) == (0.0, True)
    with pytest.raises(RangeError):
        voltage_for_displacement(CFG, CFG.stroke_max * 1.01, LOAD_50G)


def test_overlap_clamp_sets_a_floor():
    clamped = ActuatorConfig(overlap_length=0.01)
    floor = cell_displacement(clamped, 1e-3, 1.0)
    assert floor > 0
    assert cell_displacement(clamped, 1e-6, 1.0) == floor
    with pytest.raises(RangeError):
        voltage_for_displacement(clamped, 0.5 * clamped.stack_count * floor, 1.0)


def test_config_validation():
    with pytest.raises(ValidationError):
        ActuatorConfig(width=0.0)
    with pytest.raises(ValidationError):
        ActuatorConfig(stack_count=0)
    with pytest.raises(ValidationError):
        FilmInterface(eps_rel=0.5)
