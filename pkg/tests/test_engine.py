import numpy as np
import pytest

from sehasel.errors import DataError, NumericalError
from sehasel.harness import engine
from sehasel.harness.config import default_config
from sehasel.harness.traceio import COLUMNS, SimTrace, format_csv, read_csv, write_csv
from sehasel.plant import StackSolver


@pytest.mark.parametrize("kind,extra", [
    ("ac_hold", {}),
    ("dc_decay", {}),
    ("hysteresis_sweep", {}),
    ("ac_hold", {"disturbance": {"steps": ((0.5, 0.2), (1.2, 0.0))}}),
    ("ac_hold", {"plant": {"play_width": 0.004}, "drive": {"frequency": 0.7}}),
])
def test_vector_path_matches_step_loop(kind, extra):
    cfg = default_config(kind).updated(scenario={"duration": 2.0}, **extra)
    loop = engine._simulate_loop(cfg)
    fast = engine._simulate_rigid_open_loop(cfg)
    for c in COLUMNS:
        np.testing.assert_allclose(fast.columns[c], loop.columns[c], rtol=1e-12, atol=1e-15, err_msg=c)


def test_record_rate_and_columns():
    cfg = default_config("isolation").updated(scenario={"duration": 0.5, "record_dt": 5e-3})
    trace = engine.simulate(cfg)
    assert list(trace.columns) == list(COLUMNS)
    assert len(trace) == 101
    np.testing.assert_allclose(np.diff(trace.t), 5e-3, rtol=1e-9)
    assert all(np.isfinite(v).all() for v in trace.columns.values())


def test_square_target_and_modulated_drive():
    cfg = default_config("track").updated(scenario={"duration": 2.0},
                                          target={"frequency": 1.0, "offset": 0.003, "amplitude": 0.001})
    trace = engine.simulate(cfg)
    assert trace.at(0.2, "target") == pytest.approx(0.004)
    assert trace.at(0.7, "target") == pytest.approx(0.002)
    # input polarity follows the 2 Hz clock regardless of the magnitude
    on = trace.mag_cmd > 0
    polarity = np.where(np.floor(4.0 * trace.t) % 2 == 0, 1.0, -1.0)
    np.testing.assert_array_equal(np.sign(trace.u_i[on]), polarity[on])
    np.testing.assert_allclose(np.abs(trace.u_i), trace.mag_cmd)


def test_numerical_failure_carries_last_state(monkeypatch):
    calls = {"n": 0}
    original = StackSolver.solve

    def failing(self, *args, **kwargs):
        calls["n"] += 1
        if calls["n"] > 500:
            raise NumericalError("injected")
        return original(self, *args, **kwargs)

    monkeypatch.setattr(StackSolver, "solve", failing)
    cfg = default_config("track").updated(scenario={"duration": 1.0})
    with pytest.raises(NumericalError) as info:
        engine.simulate(cfg)
    state = info.value.state
    assert state["last_state"].t == pytest.approx(0.05)
    assert len(state["partial"]) == 50


def test_csv_format(tmp_path):
    cfg = default_config("ac_hold").updated(scenario={"duration": 0.01})
    trace = engine.simulate(cfg)
    path = tmp_path / "t.csv"
    write_csv(trace, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,u_i,u_o,mag_cmd,x_b,x_a,target,load_force,disturbance"
    assert lines[1].split(",")[:3] == ["0", "6000", "3000"]
    assert len(lines) == len(trace) + 1
    back = read_csv(path)
    for c in COLUMNS:
        np.testing.assert_allclose(back.columns[c], trace.columns[c], rtol=1e-8)


def test_csv_gaps(tmp_path):
    data = {c: np.arange(8, dtype=float) for c in COLUMNS}
    path = tmp_path / "g.csv"
    text = format_csv(SimTrace(data)).splitlines()
    text[3] = ",".join(["2"] + [""] * 8)
    text[4] = ",".join(["3"] + ["nan"] * 8)
    path.write_text("\n".join(text) + "\n")
    back = read_csv(path)
    np.testing.assert_allclose(back.x_a, np.arange(8))
    text[5] = text[6] = ",".join(["x"] * 9).replace("x", "")
    path.write_text("\n".join(text[:2] + [",,,,,,,,"] * 4 + text[6:]) + "\n")
    with pytest.raises(DataError):
        read_csv(path)


def test_trace_validation():
    with pytest.raises(DataError):
        SimTrace({"t": [0.0]})
    cols = {c: [0.0, 1.0] for c in COLUMNS}
    cols["u_o"] = [0.0]
    with pytest.raises(DataError):
        SimTrace(cols)
