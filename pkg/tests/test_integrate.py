"""Integrator accuracy, dense output, Taylor jets, and event location."""

from __future__ import annotations

import math

import numpy as np
import pytest

from synclab.integrate import (
    IntegrationError,
    dense_eval,
    first_zero,
    integrate,
    taylor_jet,
)
from synclab.model import PhaseState, SystemParams
from synclab.tikhonov import propagation_bounds_check


def single_oscillator_solution(m, nu, theta0, omega0, t):
    theta = theta0 + nu * t + m * (omega0 - nu) * (1.0 - math.exp(-t / m))
    omega = nu + (omega0 - nu) * math.exp(-t / m)
    return theta, omega


def test_single_oscillator_closed_form():
    p = SystemParams(1, 0.1, 1.0, [1.0])
    tol = 1e-10
    traj = integrate(p, PhaseState(0.0, [0.0], [2.0]), 2.0, tol)
    for t in (0.02, 0.15, 0.8, 2.0):
        st = dense_eval(traj, t)
        th, om = single_oscillator_solution(0.1, 1.0, 0.0, 2.0, t)
        assert st.theta[0] == pytest.approx(th, abs=tol)
        assert st.omega[0] == pytest.approx(om, abs=10 * tol)


def test_identical_pair_stays_identical():
    p = SystemParams(2, 0.3, 1.0, [0.5, 0.5])
    traj = integrate(p, PhaseState(0.0, [1.2, 1.2], [0.7, 0.7]), 5.0, 1e-10)
    assert np.abs(traj.theta_grid[:, 0] - traj.theta_grid[:, 1]).max() < 1e-12


def test_first_order_pair_diameter_contracts():
    p = SystemParams(2, 0.0, 1.0, [0.0, 0.0])
    traj = integrate(p, PhaseState(0.0, [0.0, math.pi - 0.1], [0.0, 0.0]), 12.0, 1e-9)
    d = traj.theta_grid[:, 1] - traj.theta_grid[:, 0]
    assert np.all(np.diff(d) < 1e-12)
    assert d[-1] < 1e-3


def test_dense_eval_trivials():
    p = SystemParams(2, 0.2, 1.0, [0.1, -0.1])
    init = PhaseState(0.0, [0.4, 1.0], [0.2, 0.0])
    traj = integrate(p, init, 1.0, 1e-9)
    st0 = dense_eval(traj, 0.0)
    assert np.array_equal(st0.theta, init.theta)
    k = len(traj.grid) // 2
    st = dense_eval(traj, float(traj.grid[k]))
    assert np.abs(st.theta - traj.theta_grid[k]).max() < 1e-12
    assert np.abs(st.omega - traj.omega_grid[k]).max() < 1e-12
    with pytest.raises(ValueError):
        dense_eval(traj, 1.5)


def test_dense_eval_linear_drift_midpoint():
    p = SystemParams(1, 0.0, 1.0, [0.7])
    traj = integrate(p, PhaseState(0.0, [0.2], [0.0]), 1.0, 1e-10)
    st = dense_eval(traj, 0.5)
    assert st.theta[0] == pytest.approx(0.2 + 0.7 * 0.5, abs=1e-12)
    assert st.omega[0] == pytest.approx(0.7, abs=1e-12)


def test_integrate_validation():
    p = SystemParams(1, 0.1, 1.0, [0.0])
    init = PhaseState(0.0, [0.0], [0.0])
    with pytest.raises(ValueError):
        integrate(p, init, -1.0, 1e-9)
    with pytest.raises(ValueError):
        integrate(p, init, 1.0, 1e-2)
    with pytest.raises(ValueError):
        integrate(p, init, 1.0, 1e-14)
    with pytest.raises(IntegrationError):
        integrate(p, init, 1.0, 1e-9, max_steps=3)


def test_first_order_omega_slaved_to_phases():
    p = SystemParams(3, 0.0, 1.3, [0.4, 0.0, -0.4])
    init = PhaseState(0.0, [0.0, 1.0, 2.0], [9.9, 9.9, 9.9])  # omega0 ignored
    traj = integrate(p, init, 1.0, 1e-9)
    from synclab.model import rhs_first_order

    for k in (0, len(traj.grid) // 2, -1):
        expect = rhs_first_order(p, traj.theta_grid[k])
        assert np.abs(traj.omega_grid[k] - expect).max() < 1e-12


def test_taylor_jet_first_coefficients_match_rhs():
    rng = np.random.default_rng(4)
    p = SystemParams(3, 0.4, 1.0, rng.normal(0, 0.3, 3))
    state = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 3), rng.normal(0, 0.3, 3))
    jet = taylor_jet(p, state, 3)
    assert np.array_equal(jet.coeffs[0], state.theta)
    assert np.array_equal(jet.coeffs[1], state.omega)
    from synclab.model import rhs_second_order

    _, dom = rhs_second_order(p, state)
    assert jet.coeffs[2] == pytest.approx(dom, rel=1e-13)

    p0 = SystemParams(3, 0.0, 1.0, p.nat_freq)
    jet0 = taylor_jet(p0, state, 2)
    from synclab.model import rhs_first_order

    assert jet0.coeffs[1] == pytest.approx(rhs_first_order(p0, state.theta), rel=1e-13)


def test_taylor_jet_single_oscillator_geometric():
    p = SystemParams(1, 0.2, 1.0, [1.0])
    jet = taylor_jet(p, PhaseState(0.0, [0.0], [3.0]), 8)
    for k in range(2, 9):
        assert jet.coeffs[k][0] == pytest.approx((-1 / 0.2) ** (k - 1) * 2.0, rel=1e-12)


def test_taylor_jet_against_finite_difference():
    rng = np.random.default_rng(17)
    p = SystemParams(3, 0.5, 1.0, rng.normal(0, 0.2, 3))
    init = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 3), rng.normal(0, 0.2, 3))
    traj = integrate(p, init, 2.0, 1e-12)
    t0 = 1.0
    jet = taylor_jet(p, traj.state_at_time(t0), 2)
    h = 1e-5
    _, om_p = traj.eval_many(np.array([t0 + h]))
    _, om_m = traj.eval_many(np.array([t0 - h]))
    fd = (om_p[0] - om_m[0]) / (2 * h)
    assert np.abs(fd - jet.coeffs[2]).max() / np.abs(jet.coeffs[2]).max() < 1e-6


def test_taylor_jet_order_guard():
    p = SystemParams(1, 0.5, 1.0, [0.0])
    with pytest.raises(ValueError):
        taylor_jet(p, PhaseState(0.0, [0.0], [0.0]), 13)


def test_taylor_remainder_order():
    rng = np.random.default_rng(2)
    p = SystemParams(3, 0.5, 1.0, [0.3, 0.0, -0.3])
    init = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 3), [0.4, 0.0, -0.4])
    traj = integrate(p, init, 2.0, 1e-12)
    t0, order = 1.0, 3
    jet = taylor_jet(p, traj.state_at_time(t0), order)
    hs = np.geomspace(0.02, 0.2, 8)
    rem = []
    for h in hs:
        th_d, _ = traj.eval_many(np.array([t0 + h]))
        taylor = sum(jet.coeffs[k] * h**k / math.factorial(k) for k in range(order + 1))
        rem.append(np.abs(th_d[0] - taylor).max())
    slope = np.polyfit(np.log(hs), np.log(rem), 1)[0]
    assert abs(slope - (order + 1)) < 0.25


def test_first_zero_uniform_rotation():
    p = SystemParams(1, 0.0, 1.0, [1.0])
    traj = integrate(p, PhaseState(0.0, [0.0], [0.0]), 3.0, 1e-11)
    z = first_zero(traj, lambda st: math.cos(st.theta[0]), (0.0, 3.0))
    assert z == pytest.approx(math.pi / 2, abs=1e-9)


def test_first_zero_requires_sign_change():
    p = SystemParams(1, 0.0, 1.0, [1.0])
    traj = integrate(p, PhaseState(0.0, [0.0], [0.0]), 1.0, 1e-9)
    with pytest.raises(ValueError):
        first_zero(traj, lambda st: 1.0 + st.theta[0] * 0, (0.0, 1.0))


def test_first_zero_linearized_pendulum_value():
    # tiny opening angle: the first zero approaches the linearized value
    from synclab.reconstruct import first_relative_zero, pendulum_relative

    traj = pendulum_relative(1.0, 1.0, 1e-4, 4.0, 1e-11)
    z = first_relative_zero(traj)
    assert z == pytest.approx(4 * math.pi / (3 * math.sqrt(3)), abs=1e-6)


def test_self_convergence():
    rng = np.random.default_rng(2)
    p = SystemParams(3, 0.5, 1.0, [0.3, 0.0, -0.3])
    init = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 3), [0.4, 0.0, -0.4])
    for tol in (1e-7, 1e-9):
        t1 = integrate(p, init, 2.0, tol)
        t2 = integrate(p, init, 2.0, tol / 2)
        diff = max(
            np.abs(t1.theta_grid[-1] - t2.theta_grid[-1]).max(),
            np.abs(t1.omega_grid[-1] - t2.omega_grid[-1]).max(),
        )
        assert diff <= 10 * tol


def test_propagation_bounds_along_trajectory():
    rng = np.random.default_rng(31)
    p = SystemParams(4, 0.3, 1.0, rng.normal(0, 0.3, 4))
    init = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 4), rng.normal(0, 0.5, 4))
    tol = 1e-9
    traj = integrate(p, init, 4.0, tol)
    for check in propagation_bounds_check(traj, slack=10 * tol):
        assert check.passed, check.summary()


def test_exp_branch_matches_rk_branch():
    rng = np.random.default_rng(0)
    p = SystemParams(2, 0.01, 1.0, [0.025, -0.025])
    init = PhaseState(0.0, rng.uniform(0, 2 * np.pi, 2), [0.02, -0.03])
    long = integrate(p, init, 200.0, 1e-8)  # m < 1e-4 * horizon
    short = integrate(p, init, 2.0, 1e-10)
    assert long.method == "exp" and short.method == "rk45"
    ts = np.array([0.5, 1.0, 2.0])
    tha, oma = long.eval_many(ts)
    thb, omb = short.eval_many(ts)
    assert np.abs(tha - thb).max() < 1e-7
    assert np.abs(oma - omb).max() < 1e-7


def test_trajectory_states_and_grid_alignment():
    p = SystemParams(2, 0.2, 1.0, [0.1, -0.1])
    traj = integrate(p, PhaseState(0.0, [0.0, 1.0], [0.0, 0.0]), 1.0, 1e-9)
    assert np.all(np.diff(traj.grid) > 0)
    states = traj.states
    assert states[0].t == 0.0
    assert states[-1].t == pytest.approx(1.0)
    assert np.array_equal(states[3].theta, traj.theta_grid[3])
