import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from missile_gnc.dynamics import GRAVITY, density
from missile_gnc.engagement import ScenarioBounds, get_preset, lead_velocity, sample_maneuver, sample_scenario
from missile_gnc.env import segment_min_distance
from missile_gnc.pn3dof import (A_REF, ManeuverArrays, Pn3dofParams, accel_bound, drag_update, limit_and_filter,
                                perpendicular, pn_command, run_benchmark, segment_min_distances, simulate)

vec = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1).map(np.array)


def test_collinear_gives_zero():
    a = pn_command(np.array([1000.0, 0, 0]), np.array([-900.0, 0, 0]))
    np.testing.assert_array_equal(a, 0.0)
    with pytest.raises(ValueError):
        pn_command(np.zeros(3), np.ones(3))


def test_planar_closed_form():
    # target crossing in the x-y plane: |a| = N v_c lambda_dot, directed towards the LOS motion
    r, v = np.array([4000.0, 0, 0]), np.array([-1000.0, 200.0, 0])
    a = pn_command(r, v, 3.0)
    lam_dot, v_c = 200.0 / 4000.0, 1000.0
    np.testing.assert_allclose(a, [0.0, 3.0 * v_c * lam_dot, 0.0], atol=1e-12)


@given(vec, vec, st.floats(100, 500))
def test_constant_bearing_course(los, vt_dir, vt):
    r_tm = 6000 * los / np.linalg.norm(los)
    v_t = vt * vt_dir / np.linalg.norm(vt_dir)
    v_m = lead_velocity(r_tm, v_t, 900.0)
    assert np.linalg.norm(pn_command(r_tm, v_t - v_m)) < 1e-9


def test_rows_match_single_calls():
    rng = np.random.default_rng(0)
    r, v = rng.normal(size=(5, 3)) * 1000, rng.normal(size=(5, 3)) * 300
    stacked = pn_command(r, v)
    for i in range(5):
        np.testing.assert_allclose(stacked[i], pn_command(r[i], v[i]), atol=1e-12)


def test_accel_bound_by_hand():
    assert accel_bound(0.0, 1000.0) == pytest.approx(74 * GRAVITY)
    expect = 74 * GRAVITY * density(15000.0) * 800**2 / (density(0.0) * 1000**2)
    assert accel_bound(15000.0, 800.0) == pytest.approx(expect)


def test_parallel_command_removed():
    e = np.array([1.0, 0, 0])
    a, filt = limit_and_filter(np.array([50.0, 0, 0]), e, 5000.0, 900.0, np.zeros(3), 0.02, tau_g=0.0)
    np.testing.assert_array_equal(a, 0.0)


@settings(max_examples=200)
@given(vec, vec, vec, st.floats(0, 1e4), st.floats(0, 15000), st.floats(300, 1100),
       st.one_of(st.just(0.0), st.floats(1e-3, 0.5)))
def test_filter_output_perpendicular_and_bounded(cmd, e, prev, scale, alt, speed, tau):
    e = e / np.linalg.norm(e)
    a, filt = limit_and_filter(scale * cmd, e, alt, speed, 500 * prev, 0.02, tau_g=tau)
    assert abs(a @ e) < 1e-9 * max(1.0, np.linalg.norm(a))
    assert np.linalg.norm(a) <= accel_bound(alt, speed) * (1 + 1e-12)


def test_filter_first_order_response():
    e = np.array([1.0, 0, 0])
    cmd = np.array([0.0, 10.0, 0])
    filt = np.zeros(3)
    for _ in range(15):   # 0.3 s, one time constant
        a, filt = limit_and_filter(cmd, e, 0.0, 1000.0, filt, 0.02, tau_g=0.3)
    assert a[1] == pytest.approx(10.0 * (1 - np.exp(-1)), rel=1e-12)


def test_drag_update_examples():
    assert drag_update(900.0, 0.0, 1.0) == 900.0
    assert drag_update(900.0, 10 * GRAVITY, 1.0, k=4.0) == pytest.approx(900.0 - 392.4)
    assert drag_update(900.0, 10 * GRAVITY, 1.0, k=4.0, accel_unit=GRAVITY) == pytest.approx(860.0)


def test_segment_distances_match_scalar_version():
    rng = np.random.default_rng(1)
    d0, d1 = rng.normal(size=(50, 3)) * 100, rng.normal(size=(50, 3)) * 100
    d1[0] = d0[0]
    out = segment_min_distances(d0, d1)
    for i in range(50):
        assert out[i] == pytest.approx(segment_min_distance(d0[i], d1[i]), abs=1e-12)


def test_stationary_target_no_drag_hits():
    rng = np.random.default_rng(0)
    n = 20
    los = rng.normal(size=(n, 3))
    los /= np.linalg.norm(los, axis=1, keepdims=True)
    r_m = np.tile([0.0, 0.0, 8000.0], (n, 1))
    r_t = r_m + 6000 * los
    v_m = 900 * los
    out = simulate(r_m, v_m, r_t, np.zeros((n, 3)), params=Pn3dofParams(drag_k=0.0))
    assert np.all(out["miss"] < 0.1)
    np.testing.assert_allclose(out["final_speed"], 900.0)


def test_speed_never_increases_and_accel_bounded():
    pre = get_preset("nominal")
    rng = np.random.default_rng(5)
    sc = [sample_scenario(rng, pre) for _ in range(30)]
    v0 = np.array([s.missile_speed for s in sc])
    out = simulate(np.array([[0.0, 0.0, s.altitude] for s in sc]), [s.v_m for s in sc], [s.r_t for s in sc],
                   [s.v_t for s in sc], ManeuverArrays.from_schedules([s.maneuver for s in sc]), pre.scenario)
    assert np.all(out["final_speed"] <= v0)
    assert np.all(out["final_speed"] < v0)     # every engagement manoeuvres, so every one bleeds speed
    assert np.all(out["accel_norms"] <= A_REF * (1 + 1e-12))


def test_benchmark_reproducible():
    a, _ = run_benchmark("nominal", 10, seed=9)
    b, _ = run_benchmark("nominal", 10, seed=9)
    assert a == b


def test_maneuver_arrays_match_schedules():
    rng = np.random.default_rng(2)
    scheds = [sample_maneuver(rng, np.array([-300.0, 10, 0]), ScenarioBounds()) for _ in range(40)]
    arr = ManeuverArrays.from_schedules(scheds)
    for t in (0.0, 0.7, 3.3, 9.1):
        np.testing.assert_allclose(arr.level(np.full(40, t)), [s.level(t) for s in scheds], atol=1e-12)


def test_perpendicular():
    np.testing.assert_allclose(perpendicular(np.array([3.0, 4.0, 0]), np.array([1.0, 0, 0])), [0, 4, 0])
