import json

import numpy as np
import pytest

from quadprop import cli
from quadprop.classical import locate_caustics
from quadprop.propagator import gaussian_packet
from quadprop.serialize import (
    format_value, read_chart, read_csv, read_packet, write_chart, write_csv, write_packet,
)

MATHIEU = ["--profile", "mathieu", "--param", "a=2", "--param", "q=1"]


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(np.inf) == "" and format_value(np.nan) == ""
    assert format_value(True) == "1" and format_value(np.int64(3)) == "3"
    assert float(format_value(np.pi)) == np.pi


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 2, True), (np.nan, -1, False)]
    write_csv(tmp_path / "t.csv", ("a", "b", "c"), rows, {"note": "x", "tol": 1e-10})
    meta, cols, data = read_csv(tmp_path / "t.csv")
    assert meta == {"note": "x", "tol": "1e-10"} and cols == ["a", "b", "c"]
    assert data[0, 0] == 0.1 and np.isnan(data[1, 0]) and data[1, 1] == -1


def test_packet_round_trip(tmp_path):
    psi = gaussian_packet(np.linspace(-5, 5, 101), 0.3, 0.9, 1.2, time=0.5, hbar=0.7)
    back = read_packet(write_packet(tmp_path / "p.csv", psi))
    assert np.array_equal(back.amplitudes, psi.amplitudes) and back.time == 0.5 and back.hbar == 0.7


def test_chart_round_trip(tmp_path, mathieu_sol):
    chart = locate_caustics(mathieu_sol)
    assert read_chart(write_chart(tmp_path / "c.json", chart)) == chart


def test_emp_trivial(tmp_path):
    code, out = run(tmp_path, "emp", "--profile", "constant", "--param", "omega0=1", "--grid", "11")
    _, cols, data = read_csv(out)
    assert code == 0 and cols == ["t", "rho", "rho_dot", "tau", "tau_dot"]
    assert np.all(data[:, 1] == 1.0)


def test_emp_damped_report(tmp_path, capsys):
    code, out = run(tmp_path, "emp", "--profile", "caldirola_kanai", "--param", "omega0=2", "--param", "lambda0=1")
    meta, _, data = read_csv(out)
    assert code == 0 and "omega_bar_sq_mean=3.75" in meta["invariants"]
    assert np.max(np.abs(data[:, 1] - np.exp(-data[:, 0] / 2))) < 1e-8
    assert "3.75" in capsys.readouterr().out


def test_emp_json(tmp_path):
    code, out = run(tmp_path, "emp", *MATHIEU, "--format", "json", "--grid", "5", name="e.json")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["columns"][0] == "t" and len(doc["rows"]) == 5 and doc["meta"]["invariants"]["ok"]


def test_caustics(tmp_path):
    code, out = run(tmp_path, "caustics", *MATHIEU, name="c.json")
    chart = read_chart(out)
    assert code == 0
    assert np.allclose(chart.caustic_times[1:], [1.92, 4.80, 7.83], atol=0.02)
    assert np.allclose(chart.boundary_times, [1.52, 4.49, 6.75, 8.44], atol=0.02)


def test_caustics_unit_oscillator(tmp_path):
    code, out = run(tmp_path, "caustics", name="c.json")
    assert np.allclose(read_chart(out).caustic_times, np.pi * np.arange(4), atol=1e-9)


def test_density_sentinel(tmp_path):
    code, out = run(tmp_path, "density", "--t-max", "6.283185307179586", "--grid", "5")
    _, cols, data = read_csv(out)
    assert cols == ["t", "density", "at_caustic"]
    assert np.isnan(data[0, 1]) and data[0, 2] == 1 and np.isnan(data[2, 1]) and data[2, 2] == 1
    assert abs(data[1, 1] - 1 / (2 * np.pi)) < 1e-9 and data[1, 2] == 0


def test_phase_zero_slope(tmp_path):
    code, out = run(tmp_path, "phase", "--a", "0", "--t-max", "3", "--grid", "7")
    _, cols, data = read_csv(out)
    assert cols == ["t", "re_P", "im_P", "maslov_index"]
    p = data[1:, 1] + 1j * data[1:, 2]
    assert np.allclose(p, np.exp(-1j * np.pi / 4), atol=1e-9) and np.isnan(data[0, 1])


def test_phase_mathieu_jumps(tmp_path):
    code, out = run(tmp_path, *["phase", *MATHIEU, "--a", "1"])
    _, _, data = read_csv(out)
    assert code == 0 and sorted(set(data[:, 3].astype(int))) == [0, 1, 2, 3]


def test_trajectory(tmp_path):
    code, out = run(tmp_path, "trajectory", "--a", "1", "--b", "0", "--grid", "21", "--t-max", "3")
    _, cols, data = read_csv(out)
    assert cols == ["t", "x", "x_dot", "X", "T", "s"]
    t = data[:, 0]
    assert np.allclose(data[:, 1], np.sin(t), atol=1e-9)
    assert np.allclose(data[:, 5], -np.sin(2 * t) / 4, atol=1e-9)


def test_evolve(tmp_path, capsys):
    code, out = run(tmp_path, "evolve", "--profile", "constant", "--param", "omega0=0", "--omega-bar", "1",
                    "--t-max", "2", "--t2", "1", "--n-x", "512", "--x-max", "10")
    assert code == 0 and (tmp_path / "out_initial.csv").exists()
    psi = read_packet(out)
    ref = np.exp(-psi.positions**2 / 2) / np.sqrt(2 * np.pi)
    assert np.max(np.abs(psi.density - ref)) < 1e-8
    assert "drift" in capsys.readouterr().out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("profile = mathieu\nparam.a = 2\nparam.q = 1\ngrid = 3\n")
    code, out = run(tmp_path, "emp", "--config", str(cfg), "--grid", "4")
    _, _, data = read_csv(out)
    assert code == 0 and data.shape[0] == 4


def test_deterministic_output(tmp_path):
    _, a = run(tmp_path, "phase", *MATHIEU, name="a.csv")
    _, b = run(tmp_path, "phase", *MATHIEU, name="b.csv")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["emp", "--profile", "mathieu", "--param", "a=2"],
    ["emp", "--t-min", "3", "--t-max", "1"],
    ["emp", "--grid", "1"],
    ["emp", "--rtol", "0"],
    ["emp", "--profile", "bogus"],
    ["evolve", "--t2", "3", "--n-x", "32"],
])
def test_bad_input_exit_1(tmp_path, argv, capsys):
    assert cli.main([*argv, "--out", str(tmp_path / "x.csv")]) == 1


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("colour = blue\n")
    assert cli.main(["emp", "--config", str(cfg)]) == 1


def test_invariant_failure_exit_2(tmp_path, monkeypatch):
    real = cli.invariant_report

    def failing(sol):
        rep = real(sol)
        rep["ok"] = False
        return rep
    monkeypatch.setattr(cli, "invariant_report", failing)
    code, out = run(tmp_path, "emp", "--grid", "3")
    assert code == 2 and "WARNING" in read_csv(out)[0]
