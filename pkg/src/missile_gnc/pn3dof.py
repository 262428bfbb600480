"""Point-mass proportional-navigation benchmark.

The missile flies with speed ``V`` along a unit direction ``e``. PN demands
are made perpendicular to the velocity, clipped by a dynamic-pressure scaled
limit, lagged by a first-order guidance filter, and bleed speed through an
induced-drag law ``dV/dt = -k |a_M|``. Episodes are integrated side by side
as numpy arrays, each with its own coarse/fine timestep.

By default ``|a_M|`` enters the drag law in g, which reproduces the reference
final-speed statistics; set ``drag_unit=1`` for the law in SI units.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import COARSE_DT, FINE_DT, FINE_RANGE, GRAVITY, density
from .engagement import accel_limit, get_preset, sample_scenario
from .evaluation import summarize

A_REF = 74.0 * GRAVITY
V_REF = 1000.0


@dataclass(frozen=True)
class Pn3dofParams:
    nav_gain: float = 3.0
    tau_g: float = 0.3
    a_ref: float = A_REF
    drag_k: float = 4.0
    drag_unit: float = GRAVITY   # |a_M| enters the drag law in units of g
    max_time: float = 40.0


def pn_command(r_tm, v_tm, nav_gain=3.0):
    """``-N v_c (r_hat x Omega)`` with ``Omega = r x v / (r . r)``; works on stacked rows."""
    r_tm = np.asarray(r_tm, dtype=float)
    v_tm = np.asarray(v_tm, dtype=float)
    rr = np.sum(r_tm * r_tm, axis=-1, keepdims=True)
    if np.any(rr <= 0):
        raise ValueError("zero range: the engagement is already over")
    rng_m = np.sqrt(rr)
    omega = np.cross(r_tm, v_tm) / rr
    v_c = -np.sum(r_tm * v_tm, axis=-1, keepdims=True) / rng_m
    return -nav_gain * v_c * np.cross(r_tm / rng_m, omega)


def perpendicular(a, e):
    """Remove the component of ``a`` along the unit vector ``e``."""
    return a - np.sum(a * e, axis=-1, keepdims=True) * e


def accel_bound(altitude, speed, a_ref=A_REF):
    """Achievable lateral acceleration scaled by dynamic pressure."""
    return a_ref * density(altitude) * np.asarray(speed) ** 2 / (density(0.0) * V_REF**2)


def clip_norm(a, bound):
    n = np.linalg.norm(a, axis=-1, keepdims=True)
    bound = np.reshape(bound, n.shape)
    scale = np.where(n > bound, bound / np.where(n > 0, n, 1.0), 1.0)
    return a * scale


def limit_and_filter(a_com, e, altitude, speed, a_filt, dt, tau_g=0.3, a_ref=A_REF):
    """One guidance-filter update; returns ``(a_applied, a_filt_new)``.

    The demand is made perpendicular to the velocity direction ``e`` and
    clipped; the filter then lags it (exact first-order discretisation with
    the input held over ``dt``) and the output is re-projected and re-clipped.
    """
    bound = accel_bound(altitude, speed, a_ref)
    a_in = clip_norm(perpendicular(a_com, e), bound)
    gain = 1.0 - np.exp(-np.asarray(dt, dtype=float) / tau_g) if tau_g > 0 else 1.0
    a_filt = a_filt + np.reshape(gain, (-1, 1) if np.ndim(a_filt) == 2 else ()) * (a_in - a_filt)
    return clip_norm(perpendicular(a_filt, e), bound), a_filt


def drag_update(speed, a_norm, dt, k=4.0, accel_unit=1.0):
    """Speed after ``dt`` of ``dV/dt = -k |a_M| / accel_unit`` with ``|a_M|`` held."""
    return speed - k * a_norm / accel_unit * dt


def segment_min_distances(d0, d1):
    """Row-wise closest approach along straight segments ``d0 -> d1``."""
    seg = d1 - d0
    den = np.sum(seg * seg, axis=-1)
    s = np.clip(-np.sum(d0 * seg, axis=-1) / np.where(den > 0, den, 1.0), 0.0, 1.0)
    s = np.where(den > 0, s, 0.0)
    return np.linalg.norm(d0 + s[:, None] * seg, axis=-1)


def _rates(e, speed, a_m, k):
    # a_m is held over the step; its perpendicular part turns e, its norm bleeds speed
    a_perp = perpendicular(a_m, e)
    s = speed[:, None]
    return speed[:, None] * e, a_perp / s, -k * np.linalg.norm(a_perp, axis=-1)


def _step_missile(r, e, speed, a_m, dt, k):
    d = dt[:, None]
    k1 = _rates(e, speed, a_m, k)
    k2 = _rates(e + 0.5 * d * k1[1], speed + 0.5 * dt * k1[2], a_m, k)
    k3 = _rates(e + 0.5 * d * k2[1], speed + 0.5 * dt * k2[2], a_m, k)
    k4 = _rates(e + d * k3[1], speed + dt * k3[2], a_m, k)
    r = r + d / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    e = e + d / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    speed = speed + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return r, e / np.linalg.norm(e, axis=-1, keepdims=True), speed


def _step_target(r, v, mag, normal, dt):
    # constant-magnitude turn in the manoeuvre plane, exact for a held level
    d = dt[:, None]
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    moving = speed > 0
    u = v / np.where(moving, speed, 1.0)
    w = np.cross(normal, u)
    # a stationary target cannot turn
    rate = np.where(moving, mag[:, None] / np.where(moving, speed, 1.0), 0.0)
    th = rate * d
    small = np.abs(rate) < 1e-12
    safe = np.where(small, 1.0, rate)
    c, s = np.cos(th), np.sin(th)
    r_new = r + speed * np.where(small, u * d, (s * u + (1 - c) * w) / safe)
    v_new = speed * (c * u + s * w)
    return r_new, v_new


@dataclass
class ManeuverArrays:
    """Column form of a list of :class:`ManeuverSchedule` for vectorised evaluation."""
    kind: np.ndarray
    accel: np.ndarray
    start: np.ndarray
    duration: np.ndarray
    period: np.ndarray
    offset: np.ndarray
    sign: np.ndarray
    normal: np.ndarray

    @classmethod
    def from_schedules(cls, schedules):
        codes = {"none": 0, "bang_bang": 1, "weave": 2}
        col = lambda name: np.array([getattr(s, name) for s in schedules], dtype=float)  # noqa: E731
        return cls(np.array([codes[s.kind] for s in schedules]), col("accel"), col("start"), col("duration"),
                   col("period"), col("offset"), col("sign"), np.array([s.plane_normal for s in schedules]))

    def level(self, t, idx=slice(None)):
        """Signed levels at per-episode times ``t`` for the episodes ``idx``."""
        start, accel = self.start[idx], self.accel[idx]
        k = np.floor((t - start) / self.duration[idx])
        bang = np.where(t < start, 0.0, self.sign[idx] * accel * np.where(k % 2 == 0, 1.0, -1.0))
        weave = accel * np.sin(2 * np.pi * (t - self.offset[idx]) / self.period[idx])
        kind = self.kind[idx]
        return np.select([kind == 1, kind == 2], [bang, weave], 0.0)


def simulate(r_m, v_m, r_t, v_t, maneuvers=None, bounds=None, params=Pn3dofParams()):
    """Fly a batch of engagements to closest approach.

    Positions and velocities are ``(n, 3)`` engagement-frame arrays (z up).
    Returns a dict of per-episode ``miss``, ``final_speed``, ``time`` and the
    pooled ``accel_norms`` sampled at the coarse step.
    """
    r_m, r_t = np.array(r_m, dtype=float), np.array(r_t, dtype=float)
    v_m, v_t = np.asarray(v_m, dtype=float), np.array(v_t, dtype=float)
    n = r_m.shape[0]
    speed = np.linalg.norm(v_m, axis=-1)
    e = v_m / speed[:, None]
    a_filt = np.zeros((n, 3))
    t = np.zeros(n)
    miss = np.linalg.norm(r_t - r_m, axis=-1)
    active = np.ones(n, dtype=bool)
    accel_samples = []
    while active.any():
        idx = np.flatnonzero(active)
        d0 = r_t[idx] - r_m[idx]
        dv = v_t[idx] - speed[idx, None] * e[idx]
        rng_m = np.linalg.norm(d0, axis=-1)
        dt = np.where(rng_m <= FINE_RANGE, FINE_DT, COARSE_DT)
        dt = np.minimum(dt, params.max_time - t[idx])
        a_com = pn_command(d0, dv, params.nav_gain)
        a_m, a_filt[idx] = limit_and_filter(a_com, e[idx], r_m[idx, 2], speed[idx], a_filt[idx], dt,
                                            params.tau_g, params.a_ref)
        coarse = dt >= COARSE_DT - 1e-12
        accel_samples.append(np.linalg.norm(a_m[coarse], axis=-1))
        if maneuvers is not None:
            lvl = maneuvers.level(t[idx], idx)
            lim = accel_limit(r_t[idx, 2], np.linalg.norm(v_t[idx], axis=-1), bounds.target_max_accel,
                              bounds.target_max_speed)
            mag, normal = np.clip(lvl, -lim, lim), maneuvers.normal[idx]
        else:
            mag, normal = np.zeros(idx.size), np.tile([0.0, 0.0, 1.0], (idx.size, 1))
        r_m[idx], e[idx], speed[idx] = _step_missile(r_m[idx], e[idx], speed[idx], a_m, dt, params.drag_k / params.drag_unit)
        r_t[idx], v_t[idx] = _step_target(r_t[idx], v_t[idx], mag, normal, dt)
        t[idx] += dt
        d1 = r_t[idx] - r_m[idx]
        miss[idx] = np.minimum(miss[idx], segment_min_distances(d0, d1))
        separating = np.sum(d1 * (v_t[idx] - speed[idx, None] * e[idx]), axis=-1) > 0
        done = separating | (t[idx] >= params.max_time - 1e-9) | (speed[idx] <= 0)
        active[idx[done]] = False
    return {"miss": miss, "final_speed": speed, "time": t,
            "accel_norms": np.concatenate(accel_samples) if accel_samples else np.zeros(0)}


def run_benchmark(preset="nominal", n_episodes=2000, seed=0, params=Pn3dofParams()):
    """Table-style statistics for PN over a preset's engagement ensemble.

    Scenarios are drawn exactly as for the 6-DOF evaluation (one spawned
    seed per episode), so the two are comparable episode by episode.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    pre = get_preset(preset) if isinstance(preset, str) else preset
    scenarios = [sample_scenario(np.random.default_rng(s), pre)
                 for s in np.random.SeedSequence(seed).spawn(n_episodes)]
    r_m = np.array([[0.0, 0.0, sc.altitude] for sc in scenarios])
    out = simulate(r_m, [sc.v_m for sc in scenarios], [sc.r_t for sc in scenarios], [sc.v_t for sc in scenarios],
                   ManeuverArrays.from_schedules([sc.maneuver for sc in scenarios]), pre.scenario, params)
    stats = summarize(pre.name, out["miss"], out["final_speed"], out["accel_norms"], np.zeros(n_episodes, bool))
    return stats, out
