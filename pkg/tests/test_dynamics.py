import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from missile_gnc.aero import AeroPerturbation, MissileGeometry
from missile_gnc.dynamics import (COARSE_DT, FINE_DT, GRAVITY, RHO0, SCALE_HEIGHT, RigidBodyState, SixDof,
                                  TargetState, atmosphere, body_velocity, density, missile_derivatives, pack,
                                  rk4, select_timestep, unpack, wind_angles)
from missile_gnc.rotations import axis_angle_quat, euler321_to_quat, ned_to_engagement, quat_mult, quat_to_dcm

FREE = dict(aero=False, gravity=False)
FP0 = np.zeros(16)
TP0 = np.zeros(4)


def make_body(aero=True, gravity=True):
    return SixDof(MissileGeometry(), AeroPerturbation(), aero=aero, gravity=gravity)


def propagate(body, x, dt, t_end, tp=TP0, gp=None):
    n = int(round(t_end / dt))
    for k in range(n):
        x = body.step(x, 0.0, dt, FP0, tp, gp)
    return x


def test_timestep_selection():
    assert select_timestep(160.0) == FINE_DT
    assert select_timestep(160.001) == COARSE_DT
    assert select_timestep(0.0) == FINE_DT
    with pytest.raises(ValueError):
        select_timestep(-1.0)


def test_atmosphere():
    assert density(0.0) == RHO0
    assert density(SCALE_HEIGHT) == pytest.approx(RHO0 / np.e)
    assert density(-100.0) == RHO0
    rho, mach, q = atmosphere(0.0, 340.294)
    assert mach == pytest.approx(1.0, rel=1e-4)
    assert q == pytest.approx(0.5 * RHO0 * 340.294**2)
    # stratosphere is isothermal
    assert atmosphere(12000.0, 300.0)[1] == pytest.approx(atmosphere(14000.0, 300.0)[1])


@given(st.floats(100, 2000), st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_wind_angle_round_trip(speed, alpha, beta):
    a, b = wind_angles(body_velocity(speed, alpha, beta))
    assert a == pytest.approx(alpha, abs=1e-12) and b == pytest.approx(beta, abs=1e-12)


def test_wind_angles_zero_speed():
    with pytest.raises(ValueError):
        wind_angles(np.zeros(3))


def test_pack_unpack_round_trip():
    m = RigidBodyState(np.array([1.0, 2, 3]), np.array([4.0, 5, 6]), np.array([1.0, 0, 0, 0]), np.array([7.0, 8, 9]))
    t = TargetState(np.array([10.0, 11, 12]), np.array([13.0, 14, 15]))
    x = pack(m, t)
    m2, t2 = unpack(x)
    np.testing.assert_array_equal(pack(m2, t2), x)
    assert x.shape == (23,)


def test_gravity_in_body_axes():
    # level, nose north: gravity appears along body +z (down)
    s = RigidBodyState(np.zeros(3), np.array([300.0, 0, 0]), np.array([1.0, 0, 0, 0]))
    r_dot, v_dot, q_dot, w_dot = missile_derivatives(s, np.zeros(3), np.zeros(3), np.eye(3), 1.0)
    np.testing.assert_allclose(v_dot, [0, 0, GRAVITY])
    np.testing.assert_allclose(r_dot, [300.0, 0, 0])
    np.testing.assert_allclose(q_dot, 0)


def test_free_fall_exact():
    body = make_body(aero=False, gravity=True)
    q = euler321_to_quat(0.4, 0.2, -0.3)
    v_b = np.array([250.0, 10.0, -5.0])
    x0 = pack(RigidBodyState(np.array([0.0, 0.0, 9000.0]), v_b, q), TargetState(np.zeros(3), np.zeros(3)))
    x = propagate(body, x0, COARSE_DT, 10.0)
    v_e = ned_to_engagement(quat_to_dcm(q) @ v_b)
    expect = x0[0:3] + v_e * 10.0 - 0.5 * GRAVITY * 100.0 * np.array([0, 0, 1.0])
    assert np.linalg.norm(x[0:3] - expect) < 1e-6


def _rotation_error(dt, t_end=1.0):
    w = np.array([0.0, 1.5, 2.0])   # constant: transverse rotation of an axisymmetric body
    q0 = euler321_to_quat(0.1, 0.2, 0.3)
    x0 = pack(RigidBodyState(np.zeros(3), np.array([500.0, 0, 0]), q0, w), TargetState(np.zeros(3), np.zeros(3)))
    x = propagate(make_body(**FREE), x0, dt, t_end)
    exact = quat_mult(q0, axis_angle_quat(w, np.linalg.norm(w) * t_end))
    return np.linalg.norm(x[6:10] - exact)


def test_rk4_order_on_rotation():
    e1, e2 = _rotation_error(0.1), _rotation_error(0.05)
    assert 3.7 <= np.log2(e1 / e2) <= 4.3


def test_torque_free_rotation_keeps_inertial_velocity():
    w = np.array([0.0, 0.4, -0.3])
    q0 = euler321_to_quat(0.0, 0.1, 0.0)
    v_b = np.array([600.0, 20.0, 30.0])
    x0 = pack(RigidBodyState(np.zeros(3), v_b, q0, w), TargetState(np.zeros(3), np.zeros(3)))
    x = propagate(make_body(**FREE), x0, COARSE_DT, 5.0)
    v0 = quat_to_dcm(q0) @ v_b
    np.testing.assert_allclose(quat_to_dcm(x[6:10]) @ x[3:6], v0, atol=1e-6)
    np.testing.assert_allclose(x[10:13], w, atol=1e-12)


@settings(max_examples=20)
@given(st.floats(-100, 100), st.floats(200, 600))
def test_target_turn_keeps_speed(mag, speed):
    tp = np.array([mag, 0.0, 0.0, 1.0])
    x0 = pack(RigidBodyState(np.zeros(3), np.array([500.0, 0, 0]), np.array([1.0, 0, 0, 0])),
              TargetState(np.array([5000.0, 0, 5000]), np.array([-speed, 0, 0])))
    x = propagate(make_body(**FREE), x0, COARSE_DT, 4.0, tp=tp)
    assert np.linalg.norm(x[16:19]) == pytest.approx(speed, rel=1e-8)
    assert x[18] == pytest.approx(0.0, abs=1e-9)   # turn stays in the plane normal to z


def test_strapdown_increment_composes_to_attitude():
    w = np.array([0.3, 0.5, -0.4])
    q0 = euler321_to_quat(0.5, -0.1, 0.2)
    x0 = pack(RigidBodyState(np.zeros(3), np.array([500.0, 0, 0]), q0, w), TargetState(np.zeros(3), np.zeros(3)))
    x = propagate(make_body(**FREE), x0, COARSE_DT, 2.0, gp=np.zeros(6))
    np.testing.assert_allclose(quat_mult(q0, x[19:23]), x[6:10], atol=1e-12)


def test_step_rejects_bad_dt():
    body = make_body()
    x = pack(RigidBodyState(np.array([0, 0, 5000.0]), np.array([900.0, 0, 0]), np.array([1.0, 0, 0, 0])),
             TargetState(np.zeros(3), np.zeros(3)))
    with pytest.raises(ValueError):
        body.step(x, 0.0, 0.0, FP0, TP0)


def test_generic_rk4_exponential():
    f = lambda x, t: -x  # noqa: E731
    x = np.array([1.0])
    for _ in range(10):
        x = rk4(f, x, 0.0, 0.1)
    assert x[0] == pytest.approx(np.exp(-1.0), rel=1e-6)
