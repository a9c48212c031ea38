import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadprop import make_profile, solve_emp
from quadprop.classical import (
    CausticChart, arnold_map, bargmann_lift, classical_action, fundamental_pair, locate_caustics,
    niederer_forward, niederer_inverse, tau_inverse, trajectory,
)
from quadprop.emp import DomainBoundaryError
from quadprop.integrators import QuadratureError, integrate_ivp
from quadprop.profiles import remove_driving_force


def direct(p, x0, v0, t):
    rhs = lambda s, y: (y[1], p.force(s) - p.lam_dot(s) * y[1] - p.omega_sq(s) * y[0])  # noqa: E731
    sol = integrate_ivp(rhs, (x0, v0), (0.0, float(np.max(t))), rtol=1e-12, atol=1e-14)
    return sol(t)[:, 0], sol(t)[:, 1]


@pytest.fixture(scope="module")
def chart(mathieu_sol):
    return locate_caustics(mathieu_sol)


def test_fundamental_pair_initial_conditions(mathieu_sol):
    u1, u2, u1d, u2d = fundamental_pair(mathieu_sol).values(0.0)
    assert np.allclose([u1, u2, u1d, u2d], [0, 1, 1, 0], atol=1e-15)


def test_fundamental_pair_against_direct(mathieu, mathieu_sol):
    t = np.linspace(0, 10, 301)
    pair = fundamental_pair(mathieu_sol)
    assert np.max(np.abs(pair.u1(t) - direct(mathieu, 0.0, 1.0, t)[0])) < 1e-6
    assert np.max(np.abs(pair.u2(t) - direct(mathieu, 1.0, 0.0, t)[0])) < 1e-6


def test_nonstandard_start_is_renormalized(mathieu):
    sol = solve_emp(mathieu, 1.7, (0.0, 6.0), rho0=2.0, rho_dot0=0.3, tau0=0.5)
    pair = fundamental_pair(sol)
    t = np.linspace(0, 6, 101)
    assert np.max(np.abs(pair.u1(t) - direct(mathieu, 0.0, 1.0, t)[0])) < 1e-6
    assert np.max(np.abs(pair.u2(t) - direct(mathieu, 1.0, 0.0, t)[0])) < 1e-6


def test_wronskian_abel(mathieu_sol, ck_sol):
    t = np.linspace(0, 10, 50)
    assert np.max(np.abs(fundamental_pair(mathieu_sol).wronskian(t) - 1.0)) < 1e-9
    # Abel: W = exp(-lam) for the damped equation
    assert np.max(np.abs(fundamental_pair(ck_sol).wronskian(t) - np.exp(-0.2 * t))) < 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_trajectory_against_direct(mathieu, mathieu_sol, seed):
    a = np.random.default_rng(seed).uniform(-2, 2)
    t = np.linspace(0, 10, 1001)
    x, xd = trajectory(mathieu_sol, a, 0.3, t)
    xr, vr = direct(mathieu, 0.3, a, t)
    assert np.max(np.abs(x - xr)) < 1e-6 and np.max(np.abs(xd - vr)) < 1e-6


def test_unit_oscillator_path(osc_sol):
    t = np.linspace(0, 10, 50)
    x, xd = trajectory(osc_sol, 1.5, 0.0, t)
    assert np.max(np.abs(x - 1.5 * np.sin(t))) < 1e-9


def test_arnold_equals_niederer(mathieu_sol):
    pair = fundamental_pair(mathieu_sol)
    for t in (0.7, 3.0, 5.5, 9.0):
        X1, T1 = arnold_map(pair, 0.4, t)
        X2, T2 = niederer_forward(mathieu_sol, 0.4, t)
        assert abs(X1 - X2) < 1e-9 * max(1, abs(X1)) and abs(T1 - T2) < 1e-9 * max(1, abs(T1))


def test_paths_become_straight_lines(mathieu_sol, chart):
    a, b = 0.8, -0.3
    t = np.linspace(0.01, 9.99, 400)
    t = t[np.min(np.abs(t[:, None] - chart.boundary_times[None, :]), axis=1) > 1e-3]
    x, _ = trajectory(mathieu_sol, a, b, t)
    X, T = niederer_forward(mathieu_sol, x, t)
    assert np.max(np.abs(X - (a * T + b)) / (1 + np.abs(X))) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 9.95), st.floats(-3, 3))
def test_niederer_round_trip(mathieu_sol, t, x):
    tau = float(mathieu_sol.tau(t))
    if abs(np.cos(tau)) < 1e-3:
        return
    X, T = niederer_forward(mathieu_sol, x, t)
    k = int(np.floor(tau / np.pi + 0.5))
    x2, t2 = niederer_inverse(mathieu_sol, X, T, k)
    assert abs(t2 - t) < 1e-9 and abs(x2 - x) < 1e-8 * max(1, abs(x))


def test_inverse_branch_limits(mathieu_sol, chart):
    # branch k spans (r_{k-1}, r_k)
    for k in (1, 2, 3):
        _, hi = niederer_inverse(mathieu_sol, 0.0, 1e9, k)
        _, lo = niederer_inverse(mathieu_sol, 0.0, -1e9, k)
        assert abs(hi - chart.boundary(k)) < 1e-6 and abs(lo - chart.boundary(k - 1)) < 1e-6
        _, mid = niederer_inverse(mathieu_sol, 0.0, 0.0, k)
        assert abs(mid - chart.caustic(k)) < 1e-9


def test_boundary_raises(mathieu_sol, chart):
    r = chart.boundary(1)
    with pytest.raises(DomainBoundaryError):
        niederer_forward(mathieu_sol, 1.0, r)
    with pytest.raises(DomainBoundaryError):
        arnold_map(fundamental_pair(mathieu_sol), 1.0, r)


def test_cos_sign_per_interval(mathieu_sol, chart):
    r = chart.boundary_times
    for k in range(len(r) - 1):
        t = np.linspace(r[k], r[k + 1], 102)[1:-1]
        c = np.cos(mathieu_sol.omega_bar * mathieu_sol.tau(t))
        assert np.all(np.sign(c) == (-1) ** (k + 1))


def test_caustics_of_unit_oscillator(osc_sol):
    ch = locate_caustics(osc_sol)
    assert np.allclose(ch.caustic_times, np.pi * np.arange(4), atol=1e-9)
    assert np.allclose(ch.boundary_times, np.pi * (np.arange(3) + 0.5), atol=1e-9)


def test_mathieu_caustics_and_interlacing(chart):
    t = chart.caustic_times[1:]
    r = chart.boundary_times
    assert np.allclose(t, [1.92, 4.80, 7.83], atol=0.02)
    assert np.allclose(r, [1.52, 4.49, 6.75, 8.44], atol=0.02)
    assert np.all(r[:-1] < t) and np.all(t < r[1:])


def test_chart_round_trip(chart):
    again = CausticChart.from_dict(chart.to_dict())
    assert again == chart


def test_interlacing_warning_is_silent_on_good_data(mathieu_sol):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        locate_caustics(mathieu_sol)


def test_tau_inverse_out_of_range(mathieu_sol):
    with pytest.raises(ValueError):
        tau_inverse(mathieu_sol, 100.0)


def test_action_of_sine_path():
    p = make_profile("constant", {"omega0": 1.0})
    got = classical_action(p, lambda t: (np.sin(t), np.cos(t)), 0.0, np.pi / 4)
    assert abs(got - 0.25) < 1e-12


def test_action_free_particle():
    p = make_profile("constant", {"omega0": 0.0})
    # x = 1 + 2t on [0, 3]: A = 4 * 3 / 2
    assert abs(classical_action(p, lambda t: (1 + 2 * t, 2 + 0 * t), 0.0, 3.0) - 6.0) < 1e-12


def test_action_quadrature_failure():
    p = make_profile("constant", {"omega0": 1.0})
    with pytest.raises(QuadratureError):
        classical_action(p, lambda t: (np.sin(400 * t), 400 * np.cos(400 * t)), 0.0, 10.0, panels=2, order=4)


def test_bargmann_lift(osc_sol):
    t = np.linspace(0, 6, 13)
    x, tt, s = bargmann_lift(osc_sol, 1.3, 0.0, 0.5, t)
    assert np.max(np.abs(s - (0.5 - 1.3**2 / 4 * np.sin(2 * t)))) < 1e-9
    assert bargmann_lift(osc_sol, 1.3, 0.0, 0.5, 0.0)[2] == 0.5


def test_bargmann_lift_unsorted(osc_sol):
    t = np.array([3.0, 1.0, 2.0])
    _, _, s = bargmann_lift(osc_sol, 1.0, 0.0, 0.0, t)
    assert np.allclose(s, -np.sin(2 * t) / 4, atol=1e-9)


def test_forced_arnold_map_straightens_forced_paths():
    p = make_profile("mathieu", {"a": 2.0, "q": 1.0, "F0": 0.3, "F1": 0.2, "nu": 1.5})
    hom, h = remove_driving_force(p, 0.0, 6.0)
    sol = solve_emp(hom, 1.0, (0.0, 6.0))
    pair = fundamental_pair(sol, h)
    t = np.array([0.5, 1.0, 3.0, 5.5])
    x, _ = direct(p, 0.4, -0.7, t)
    X, T = arnold_map(pair, x, t)
    assert np.max(np.abs(X - (-0.7 * T + 0.4))) < 1e-6
