import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from missile_gnc.actuation import (DEG, ActuatorCommandState, ActuatorLimits, ActuatorModel, actuator_dynamics,
                                   integrate_and_mix, map_action, mix, unmix)

four = st.lists(st.floats(-3, 3), min_size=4, max_size=4).map(np.array)


def test_map_action_examples():
    np.testing.assert_array_equal(map_action(np.zeros(4)), np.zeros(4))
    np.testing.assert_allclose(np.degrees(map_action([1, -1, 0, 0])), [20, -20, 0, 0])
    np.testing.assert_allclose(np.degrees(map_action([5, 0, 0, 0])), [20, 0, 0, 0])
    np.testing.assert_allclose(np.degrees(map_action([0, 0, 1, -0.5])), [0, 0, 0.1, -0.05])


def test_map_action_rejects_bad_input():
    with pytest.raises(ValueError):
        map_action([np.nan, 0, 0, 0])
    with pytest.raises(ValueError):
        map_action([0, 0, 0])


def test_mixing_example():
    fins = mix(np.radians([0.0, 5.0, 0.0, 0.1]))
    np.testing.assert_allclose(np.degrees(fins[:2]), [4.9, 5.1])


@given(four)
def test_mix_unmix_inverse(theta):
    np.testing.assert_allclose(unmix(mix(theta)), theta, atol=1e-12)


def test_symmetric_channel_saturates():
    cmd = ActuatorCommandState()
    for _ in range(100):
        integrate_and_mix(cmd, map_action([1, -1, 0, 0]), 0.02)
    np.testing.assert_allclose(np.degrees(cmd.theta_cmd[:2]), [20, -20])


def test_differential_channel_clipped():
    cmd = ActuatorCommandState()
    for _ in range(250):   # 10 s at the maximum rate
        integrate_and_mix(cmd, map_action([0, 0, 1, 1]), 0.04)
    np.testing.assert_allclose(np.degrees(cmd.theta_cmd[2:]), [0.1, 0.1])


def test_anti_windup():
    cmd = ActuatorCommandState()
    for _ in range(200):
        integrate_and_mix(cmd, map_action([1, 0, 0, 0]), 0.04)
    integrate_and_mix(cmd, map_action([-1, 0, 0, 0]), 0.04)
    # one step back from the clamp, not from a wound-up integrator
    assert np.degrees(cmd.theta_cmd[0]) == pytest.approx(20 - 0.8)


@settings(max_examples=50)
@given(st.lists(four, min_size=1, max_size=30))
def test_rate_and_deflection_limits(actions):
    lim = ActuatorLimits()
    cmd = ActuatorCommandState()
    for u in actions:
        before = cmd.theta_cmd.copy()
        integrate_and_mix(cmd, map_action(u), 0.04)
        assert np.all(np.abs(cmd.theta_cmd - before) <= np.array(lim.rate_max) * 0.04 + 1e-15)
        assert np.all(np.abs(cmd.theta_cmd) <= np.array(lim.defl_max))


def test_integrate_requires_positive_dt():
    with pytest.raises(ValueError):
        integrate_and_mix(ActuatorCommandState(), np.zeros(4), 0.0)


def test_first_order_time_constant():
    pos, _ = actuator_dynamics(ActuatorModel("first_order"), np.ones(4), np.zeros(4), np.zeros(4), 0.02)
    np.testing.assert_allclose(pos, 1 - np.exp(-1), rtol=1e-12)
    assert pos[0] == pytest.approx(0.632, rel=0.01)


def test_second_order_overshoot():
    model = ActuatorModel("second_order")
    t = np.linspace(0.0, 0.1, 2001)
    pos = np.array([actuator_dynamics(model, np.ones(4), np.zeros(4), np.zeros(4), tk)[0][0] for tk in t[1:]])
    expected = np.exp(-np.pi * 0.7 / np.sqrt(1 - 0.49))
    assert pos.max() - 1 == pytest.approx(expected, rel=1e-3)
    assert expected == pytest.approx(0.046, abs=0.001)


def test_second_order_matches_numerical_solution():
    # brute-force integration of x'' + 2 zeta w x' + w^2 x = w^2 u
    model = ActuatorModel("second_order")
    z, w = model.zeta, model.omega
    x, v, dt = 0.3, -5.0, 1e-6
    for _ in range(20000):
        a = w * w * (1.0 - x) - 2 * z * w * v
        v += a * dt
        x += v * dt
    pos, rate = actuator_dynamics(model, np.ones(4), np.full(4, 0.3), np.full(4, -5.0), 0.02)
    assert pos[0] == pytest.approx(x, abs=1e-4)
    assert rate[0] == pytest.approx(v, abs=1e-2)


@pytest.mark.parametrize("mode", ["ideal", "first_order", "second_order"])
def test_zero_in_zero_out(mode):
    pos, rate = actuator_dynamics(ActuatorModel(mode), np.zeros(4), np.zeros(4), np.zeros(4), 0.5)
    assert np.all(pos == 0) and np.all(rate == 0)


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(0.001, 0.2))
def test_first_order_contraction(a, b, t):
    model = ActuatorModel("first_order")
    pa, _ = actuator_dynamics(model, np.full(4, 0.1), np.full(4, a), np.zeros(4), t)
    pb, _ = actuator_dynamics(model, np.full(4, 0.1), np.full(4, b), np.zeros(4), t)
    assert abs(pa[0] - pb[0]) == pytest.approx(abs(a - b) * np.exp(-t / model.tau), abs=1e-15)


def test_second_order_bound_on_full_deflection():
    model = ActuatorModel("second_order")
    cmd = np.full(4, 20 * DEG)
    peak = max(actuator_dynamics(model, cmd, np.zeros(4), np.zeros(4), t)[0][0] for t in np.linspace(0, 0.1, 500))
    assert peak <= 20 * DEG * (1 + 0.05)


def test_invalid_modes():
    with pytest.raises(ValueError):
        ActuatorModel("third_order")
    with pytest.raises(ValueError):
        ActuatorModel("second_order", zeta=1.2)
