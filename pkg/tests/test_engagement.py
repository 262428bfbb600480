import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from missile_gnc.dynamics import GRAVITY, density
from missile_gnc.engagement import (DEG, PRESETS, TABLE_ROWS, InfeasibleGeometry, ManeuverSchedule,
                                    PathConstraints, ScenarioBounds, accel_limit, apply_heading_error,
                                    check_constraints, get_preset, initial_states, lead_velocity,
                                    maneuver_magnitude, rotate_off_axis, sample_maneuver, sample_scenario,
                                    target_accel)
from missile_gnc.rotations import euler321_to_quat, ned_to_engagement, quat_to_dcm

vec = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1).map(np.array)


def closest_approach(r_m, v_m, r_t, v_t):
    d, w = r_t - r_m, v_t - v_m
    s = max(0.0, -(d @ w) / (w @ w))
    return np.linalg.norm(d + s * w)


def test_stationary_target_lead_is_los():
    v = lead_velocity([3000.0, 4000.0, 0.0], np.zeros(3), 900.0)
    np.testing.assert_allclose(v, [540.0, 720.0, 0.0])


@settings(max_examples=200)
@given(vec, vec, st.floats(100, 600), st.floats(700, 1000), st.floats(1000, 10000))
def test_lead_velocity_closes_triangle(los, vt_dir, vt, vm, rng_m):
    r_tm = rng_m * los / np.linalg.norm(los)
    v_t = vt * vt_dir / np.linalg.norm(vt_dir)
    v_m = lead_velocity(r_tm, v_t, vm)
    assert np.linalg.norm(v_m) == pytest.approx(vm, rel=1e-12)
    # straight-line flights meet
    assert closest_approach(np.zeros(3), v_m, r_tm, v_t) < 1e-6


def test_planar_lead_angle():
    # target crossing at 90 deg to the LOS: sin L = vt / vm
    v_m = lead_velocity([5000.0, 0, 0], [0.0, 300.0, 0], 900.0)
    assert np.arcsin(v_m[1] / 900.0) == pytest.approx(np.arcsin(300 / 900))


def test_infeasible_lead():
    with pytest.raises(InfeasibleGeometry):
        lead_velocity([5000.0, 0, 0], [0.0, 1000.0, 0], 900.0)


def test_heading_error_zero_unchanged():
    v = np.array([800.0, 100.0, -50.0])
    out, he = apply_heading_error(v, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(out, v)
    assert he == 0.0


@given(vec, st.floats(0, 2 * np.pi))
def test_off_axis_angle_exact(v, az):
    out = rotate_off_axis(900 * v, 5 * DEG, az)
    cosang = out @ v / (np.linalg.norm(out) * np.linalg.norm(v))
    assert np.arccos(np.clip(cosang, -1, 1)) == pytest.approx(5 * DEG, abs=1e-9)
    assert np.linalg.norm(out) == pytest.approx(900 * np.linalg.norm(v))


def test_heading_error_angle_and_azimuth_uniform():
    rng = np.random.default_rng(7)
    v = np.array([700.0, 200.0, 100.0])
    u = v / np.linalg.norm(v)
    e1 = np.cross(u, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    az = []
    for _ in range(10000):
        out, he = apply_heading_error(v, 5 * DEG, rng)
        assert 0 <= he <= 5 * DEG
        ang = np.arccos(np.clip(out @ v / (np.linalg.norm(out) * np.linalg.norm(v)), -1, 1))
        assert ang == pytest.approx(he, abs=1e-7)
        perp = out - (out @ u) * u
        az.append(np.arctan2(perp @ e2, perp @ e1))
    counts, _ = np.histogram(az, bins=20, range=(-np.pi, np.pi))
    chi2 = np.sum((counts - 500.0) ** 2 / 500.0)
    assert chi2 < 36.19   # 99th percentile of chi-square with 19 degrees of freedom


def test_maneuver_sampling_frequencies():
    rng = np.random.default_rng(11)
    b = ScenarioBounds()
    sched = [sample_maneuver(rng, np.array([-300.0, 0, 0]), b) for _ in range(10000)]
    assert np.mean([s.kind == "bang_bang" for s in sched]) == pytest.approx(0.5, abs=0.02)
    accels = np.array([s.accel for s in sched])
    assert np.all(accels <= 10 * GRAVITY)
    assert np.mean(accels == 10 * GRAVITY) == pytest.approx(0.5, abs=0.02)
    for s in sched[:200]:
        assert b.bang_duration[0] <= s.duration <= b.bang_duration[1]
        assert b.weave_period[0] <= s.period <= b.weave_period[1]
        assert abs(s.plane_normal @ np.array([-1.0, 0, 0])) < 1e-12


def test_bang_bang_levels():
    s = ManeuverSchedule("bang_bang", accel=50.0, start=1.0, duration=2.0, sign=-1.0)
    assert s.level(0.5) == 0.0
    assert s.level(1.5) == -50.0 and s.level(3.5) == 50.0 and s.level(5.5) == -50.0


def test_long_period_bang_bang_is_step():
    flight = 10.0
    s = ManeuverSchedule("bang_bang", accel=30.0, start=0.0, duration=2 * flight)
    levels = {s.level(t) for t in np.linspace(0, flight, 101)}
    assert levels == {30.0}


def test_weave_level():
    s = ManeuverSchedule("weave", accel=40.0, period=4.0, offset=1.0)
    assert s.level(1.0) == pytest.approx(0.0, abs=1e-12)
    assert s.level(2.0) == pytest.approx(40.0)


def test_accel_limit_scaling():
    b = ScenarioBounds()
    assert accel_limit(0.0, 600.0, b.target_max_accel, b.target_max_speed) == pytest.approx(10 * GRAVITY)
    expect = 10 * GRAVITY * density(10000.0) * 300**2 / (density(0.0) * 600**2)
    assert accel_limit(10000.0, 300.0, b.target_max_accel, b.target_max_speed) == pytest.approx(expect)
    s = ManeuverSchedule("bang_bang", accel=10 * GRAVITY, start=0.0, duration=5.0)
    assert maneuver_magnitude(s, 1.0, 10000.0, 300.0, b) == pytest.approx(expect)


@given(vec, vec, st.floats(0, 20))
def test_target_accel_orthogonal(v_dir, n_dir, t):
    v_t = 400 * v_dir / np.linalg.norm(v_dir)
    n = np.cross(v_t, n_dir)
    if np.linalg.norm(n) < 1e-3:
        return
    s = ManeuverSchedule("weave", accel=60.0, period=3.0, offset=1.0, plane_normal=n / np.linalg.norm(n))
    a = target_accel(s, np.array([0, 0, 3000.0]), v_t, t)
    assert abs(a @ v_t) < 1e-9 * 400 * max(1.0, np.linalg.norm(a))


def test_scenarios_within_bounds():
    pre = get_preset("nominal")
    b = pre.scenario
    rng = np.random.default_rng(0)
    for _ in range(3000):
        sc = sample_scenario(rng, pre)
        assert b.range_m[0] <= sc.range_m <= b.range_m[1]
        assert b.elevation[0] <= sc.elevation <= b.elevation[1]
        assert b.missile_speed[0] <= sc.missile_speed <= b.missile_speed[1]
        assert b.target_speed[0] <= sc.target_speed <= b.target_speed[1]
        assert 0 <= sc.heading_error <= b.heading_error[1]
        assert b.alpha[0] <= sc.alpha <= b.alpha[1] and b.beta[0] <= sc.beta <= b.beta[1]
        assert b.roll[0] <= sc.roll <= b.roll[1]
        assert b.missile_altitude[0] <= sc.altitude <= b.missile_altitude[1]
        los = (sc.r_t - [0, 0, sc.altitude]) / sc.range_m
        cone = np.arccos(np.clip(-sc.v_t @ los / sc.target_speed, -1, 1))
        assert cone <= b.target_cone + 1e-9
        assert np.linalg.norm(sc.v_m) == pytest.approx(sc.missile_speed)
        assert sc.perturb.within(pre.perturbation)


def test_presets():
    assert set(TABLE_ROWS) <= set(PRESETS)
    sc = sample_scenario(np.random.default_rng(1), get_preset("high_altitude"))
    assert sc.altitude == 15000.0
    assert get_preset("tacc_20").scenario.target_max_accel == pytest.approx(20 * GRAVITY)
    assert get_preset("peak_radome_0.05").radome.amp == 0.05
    assert get_preset("pv_40_5").perturbation.force == pytest.approx(0.4)
    with pytest.raises(ValueError):
        get_preset("nope")


def test_initial_state_velocity_and_wind_angles():
    rng = np.random.default_rng(4)
    for _ in range(50):
        sc = sample_scenario(rng, get_preset("nominal"))
        m, t = initial_states(sc)
        v_e = ned_to_engagement(quat_to_dcm(m.q) @ m.v_b)
        np.testing.assert_allclose(v_e, sc.v_m, atol=1e-9)
        alpha, beta = np.arctan2(m.v_b[2], m.v_b[0]), np.arcsin(m.v_b[1] / np.linalg.norm(m.v_b))
        assert alpha == pytest.approx(sc.alpha) and beta == pytest.approx(sc.beta)


def _check(speed=900.0, q=None, omega=None, look=0.1, force=None):
    q = euler321_to_quat(0.0, 0.0, 0.0) if q is None else q
    return check_constraints(np.array([speed, 0, 0]), q, np.zeros(3) if omega is None else omega,
                             np.zeros(3) if force is None else force, look, 455.0)


def test_constraint_examples():
    assert _check() == []
    assert [v.name for v in _check(speed=399.0)] == ["min_speed"]
    assert [v.name for v in _check(look=81 * DEG)] == ["look_angle"]
    assert [v.name for v in _check(omega=np.array([7 * DEG, 0, 0]))] == ["roll_rate"]
    assert [v.name for v in _check(q=euler321_to_quat(0, 86 * DEG, 0))] == ["pitch"]
    assert [v.name for v in _check(q=euler321_to_quat(86 * DEG, 0, 0))] == ["yaw"]
    assert [v.name for v in _check(q=euler321_to_quat(0, 0, 101 * DEG))] == ["roll"]
    assert [v.name for v in _check(force=np.array([0, 0, 36 * 455 * GRAVITY]))] == ["load"]
    assert _check(force=np.array([0, 20 * 455 * GRAVITY, 20 * 455 * GRAVITY])) == []


@given(st.floats(1e-6, 0.1))
def test_constraint_monotone(eps):
    lim = PathConstraints()
    for kw in ({"look": lim.max_look_angle}, {"omega": np.array([lim.max_roll_rate, 0, 0])}):
        one = {k: v + eps for k, v in kw.items()}
        two = {k: v + 2 * eps for k, v in kw.items()}
        if _check(**one):
            assert _check(**two)
    if _check(speed=lim.min_speed - eps):
        assert _check(speed=lim.min_speed - 2 * eps)
