"""Engagement ensemble: initial conditions, target manoeuvres, path constraints.

The missile starts at ``[0, 0, h]`` in the engagement frame (x north, y west,
z up) with the target along the +x half-plane at the sampled elevation. The
target velocity lies in a cone about the target-to-missile direction (a
skewed head-on geometry).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .aero import AeroPerturbation, PerturbationBounds, sample_perturbation
from .dynamics import GRAVITY, RigidBodyState, TargetState, body_velocity, density
from .rotations import dcm_to_euler321, dcm_to_quat, euler321_to_dcm, ned_to_engagement, quat_to_dcm
from .sensors import RadomeBounds, RadomeParams, SensorErrors, sample_radome

DEG = np.pi / 180.0


class InfeasibleGeometry(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioBounds:
    range_m: tuple = (5000.0, 10000.0)
    elevation: tuple = (-30 * DEG, 30 * DEG)
    missile_speed: tuple = (800.0, 1000.0)
    target_speed: tuple = (250.0, 600.0)
    target_cone: float = 45 * DEG
    heading_error: tuple = (0.0, 5 * DEG)
    alpha: tuple = (-10 * DEG, 10 * DEG)
    beta: tuple = (-5 * DEG, 5 * DEG)
    roll: tuple = (-30 * DEG, 30 * DEG)
    missile_altitude: tuple = (5000.0, 15000.0)
    target_max_accel: float = 10 * GRAVITY
    target_max_speed: float = 600.0  # sets the sea-level reference dynamic pressure
    maneuvers: bool = True
    bang_duration: tuple = (1.0, 8.0)
    bang_start: tuple = (0.0, 6.0)
    weave_period: tuple = (1.0, 8.0)
    weave_offset: tuple = (1.0, 5.0)


@dataclass(frozen=True)
class Preset:
    name: str
    scenario: ScenarioBounds = ScenarioBounds()
    perturbation: PerturbationBounds = PerturbationBounds()
    radome: RadomeBounds = RadomeBounds()
    sensors: SensorErrors = SensorErrors()


def _presets():
    nom = ScenarioBounds()
    out = {
        "nominal": Preset("nominal"),
        "high_altitude": Preset("high_altitude", replace(nom, missile_altitude=(15000.0, 15000.0))),
    }
    for g in (10, 15, 20):
        out[f"tacc_{g}"] = Preset(f"tacc_{g}", replace(nom, target_max_accel=g * GRAVITY))
    for amp in ("0.02", "0.05"):
        out[f"peak_radome_{amp}"] = Preset(f"peak_radome_{amp}", radome=RadomeBounds(amp=float(amp)))
    for f, c in ((20, 0), (40, 0), (20, 5), (40, 5)):
        out[f"pv_{f}_{c}"] = Preset(f"pv_{f}_{c}", perturbation=PerturbationBounds(f / 100, f / 100, c / 100))
    # reduced envelope used for desk-scale training runs
    smoke = ScenarioBounds(
        range_m=(3000.0, 5000.0), elevation=(-10 * DEG, 10 * DEG), target_speed=(250.0, 300.0),
        target_cone=15 * DEG, heading_error=(0.0, 1 * DEG), alpha=(0.0, 0.0), beta=(0.0, 0.0),
        roll=(-10 * DEG, 10 * DEG), missile_altitude=(5000.0, 5000.0), maneuvers=False)
    smoke_pv = PerturbationBounds(force=0.005, axial=0.1, cp=0.0005)
    out["smoke"] = Preset("smoke", smoke, smoke_pv)
    out["smoke_pv2x"] = Preset("smoke_pv2x", smoke,
                               PerturbationBounds(2 * smoke_pv.force, 2 * smoke_pv.axial, 2 * smoke_pv.cp))
    return out


PRESETS = _presets()
TABLE_ROWS = ("nominal", "high_altitude", "tacc_10", "tacc_15", "tacc_20", "peak_radome_0.02",
              "peak_radome_0.05", "pv_20_0", "pv_40_0", "pv_20_5", "pv_40_5")


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# --- collision-triangle geometry ------------------------------------------------

def lead_velocity(r_tm, v_t, missile_speed):
    """Missile velocity of magnitude ``missile_speed`` on a collision triangle.

    Works in the plane spanned by the LOS and the target velocity: the
    missile matches the target's velocity component across the LOS and
    spends the rest of its speed closing along it. This is the planar lead
    angle ``L = asin(|v_T| sin(target_heading_angle) / |v_M|)`` rotated back
    into 3D.
    """
    r_tm = np.asarray(r_tm, dtype=float)
    v_t = np.asarray(v_t, dtype=float)
    los = r_tm / np.linalg.norm(r_tm)
    v_cross = v_t - (v_t @ los) * los
    if np.linalg.norm(v_cross) > missile_speed:
        raise InfeasibleGeometry("target crossing speed exceeds missile speed")
    along = np.sqrt(missile_speed**2 - v_cross @ v_cross)
    return along * los + v_cross


def _perpendicular_basis(v):
    v = v / np.linalg.norm(v)
    seed = np.array([0.0, 0.0, 1.0]) if abs(v[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(v, seed)
    e1 /= np.linalg.norm(e1)
    return v, e1, np.cross(v, e1)


def rotate_off_axis(v, angle, azimuth):
    """Tilt ``v`` by ``angle`` towards the perpendicular direction at ``azimuth``."""
    axis, e1, e2 = _perpendicular_basis(np.asarray(v, dtype=float))
    perp = np.cos(azimuth) * e1 + np.sin(azimuth) * e2
    return np.linalg.norm(v) * (np.cos(angle) * axis + np.sin(angle) * perp)


def apply_heading_error(v_m, he_max, rng):
    if he_max < 0:
        raise ValueError("he_max must be non-negative")
    if he_max == 0:
        return np.array(v_m, dtype=float), 0.0
    he = rng.uniform(0.0, he_max)
    return rotate_off_axis(v_m, he, rng.uniform(0.0, 2 * np.pi)), he


# --- target manoeuvres ----------------------------------------------------------

@dataclass
class ManeuverSchedule:
    kind: str = "none"  # "none" | "bang_bang" | "weave"
    accel: float = 0.0
    start: float = 0.0
    duration: float = 1.0
    period: float = 1.0
    offset: float = 0.0
    sign: float = 1.0
    plane_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def level(self, t):
        """Signed commanded acceleration level at time ``t`` (before limiting)."""
        if self.kind == "bang_bang":
            if t < self.start:
                return 0.0
            k = np.floor((t - self.start) / self.duration)
            return self.sign * self.accel * (1.0 if k % 2 == 0 else -1.0)
        if self.kind == "weave":
            return self.accel * np.sin(2 * np.pi * (t - self.offset) / self.period)
        return 0.0


def sample_maneuver(rng, v_t, bounds: ScenarioBounds = ScenarioBounds()):
    """Bang-bang or weave with equal probability; full capability half the time."""
    kind = "bang_bang" if rng.random() < 0.5 else "weave"
    a_max = bounds.target_max_accel
    accel = a_max if rng.random() < 0.5 else rng.uniform(0.0, a_max)
    # manoeuvre plane contains v_t; its normal is any direction perpendicular to v_t
    _, e1, e2 = _perpendicular_basis(np.asarray(v_t, dtype=float))
    phi = rng.uniform(0.0, 2 * np.pi)
    normal = np.cos(phi) * e1 + np.sin(phi) * e2
    return ManeuverSchedule(
        kind=kind,
        accel=float(accel),
        start=float(rng.uniform(*bounds.bang_start)),
        duration=float(rng.uniform(*bounds.bang_duration)),
        period=float(rng.uniform(*bounds.weave_period)),
        offset=float(rng.uniform(*bounds.weave_offset)),
        sign=float(rng.choice([-1.0, 1.0])),
        plane_normal=normal,
    )


def accel_limit(altitude, speed, a_max, v_max):
    """Maximum target acceleration scaled by dynamic pressure."""
    return a_max * density(altitude) * speed**2 / (density(0.0) * v_max**2)


def maneuver_magnitude(schedule: ManeuverSchedule, t, altitude, speed, bounds: ScenarioBounds):
    if t < 0:
        raise ValueError("time must be non-negative")
    lim = accel_limit(altitude, speed, bounds.target_max_accel, bounds.target_max_speed)
    return float(np.clip(schedule.level(t), -lim, lim))


def target_accel(schedule, r_t, v_t, t, bounds: ScenarioBounds = ScenarioBounds()):
    v_t = np.asarray(v_t, dtype=float)
    speed = np.linalg.norm(v_t)
    mag = maneuver_magnitude(schedule, t, r_t[2], speed, bounds)
    return mag * np.cross(schedule.plane_normal, v_t / speed)


# --- scenario sampling ----------------------------------------------------------

@dataclass
class EngagementScenario:
    range_m: float
    elevation: float
    missile_speed: float
    target_speed: float
    heading_error: float
    alpha: float
    beta: float
    roll: float
    altitude: float
    r_t: np.ndarray
    v_t: np.ndarray
    v_m: np.ndarray          # engagement-frame launch velocity
    maneuver: ManeuverSchedule
    radome: RadomeParams
    perturb: AeroPerturbation


def sample_scenario(rng, preset: Preset, max_tries=20):
    b = preset.scenario
    for _ in range(max_tries):
        rng_m = rng.uniform(*b.range_m)
        elev = rng.uniform(*b.elevation)
        vm = rng.uniform(*b.missile_speed)
        vt = rng.uniform(*b.target_speed)
        h = rng.uniform(*b.missile_altitude)
        los = np.array([np.cos(elev), 0.0, np.sin(elev)])
        # uniform over the spherical cap around the target-to-missile direction
        cone = np.arccos(rng.uniform(np.cos(b.target_cone), 1.0))
        v_t = rotate_off_axis(-vt * los, cone, rng.uniform(0.0, 2 * np.pi))
        try:
            v_lead = lead_velocity(rng_m * los, v_t, vm)
        except InfeasibleGeometry:
            continue
        v_m, he = apply_heading_error(v_lead, b.heading_error[1], rng)
        maneuver = sample_maneuver(rng, v_t, b) if b.maneuvers else ManeuverSchedule()
        return EngagementScenario(
            range_m=rng_m, elevation=elev, missile_speed=vm, target_speed=vt, heading_error=he,
            alpha=rng.uniform(*b.alpha), beta=rng.uniform(*b.beta), roll=rng.uniform(*b.roll),
            altitude=h, r_t=np.array([0.0, 0.0, h]) + rng_m * los, v_t=v_t, v_m=v_m,
            maneuver=maneuver, radome=sample_radome(rng, preset.radome),
            perturb=sample_perturbation(rng, preset.perturbation),
        )
    raise InfeasibleGeometry(f"no feasible engagement after {max_tries} draws")


def launch_attitude(v_m, alpha, beta, roll):
    """Body-to-NED quaternion for a launch velocity and wind angles."""
    v_ned = ned_to_engagement(np.asarray(v_m, dtype=float))
    speed = np.linalg.norm(v_ned)
    heading = np.arctan2(v_ned[1], v_ned[0])
    gamma = np.arcsin(-v_ned[2] / speed)
    c_nw = euler321_to_dcm(heading, gamma, roll)
    ca, sa, cb, sb = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta)
    c_bw = np.array([[ca * cb, -ca * sb, -sa], [sb, cb, 0.0], [sa * cb, -sa * sb, ca]])
    return dcm_to_quat(c_nw @ c_bw.T)


def initial_states(sc: EngagementScenario):
    q = launch_attitude(sc.v_m, sc.alpha, sc.beta, sc.roll)
    missile = RigidBodyState(
        r_m=np.array([0.0, 0.0, sc.altitude]),
        v_b=body_velocity(sc.missile_speed, sc.alpha, sc.beta),
        q=q,
    )
    return missile, TargetState(sc.r_t.copy(), sc.v_t.copy())


# --- path constraints -----------------------------------------------------------

@dataclass(frozen=True)
class PathConstraints:
    min_speed: float = 400.0
    max_pitch: float = 85 * DEG
    max_yaw: float = 85 * DEG
    max_roll: float = 100 * DEG
    max_roll_rate: float = 6 * DEG
    max_look_angle: float = 80 * DEG
    max_load_g: float = 35.0


@dataclass(frozen=True)
class Violation:
    name: str
    value: float
    limit: float


def check_constraints(v_b, q, omega, force_b, look_angle, mass, limits=PathConstraints()):
    """All path-constraint violations for one state (empty list if none)."""
    out = []
    speed = float(np.linalg.norm(v_b))
    if speed < limits.min_speed:
        out.append(Violation("min_speed", speed, limits.min_speed))
    yaw, pitch, roll = dcm_to_euler321(quat_to_dcm(np.asarray(q, dtype=float)))
    if abs(pitch) > limits.max_pitch:
        out.append(Violation("pitch", float(pitch), limits.max_pitch))
    if abs(yaw) > limits.max_yaw:
        out.append(Violation("yaw", float(yaw), limits.max_yaw))
    if abs(roll) > limits.max_roll:
        out.append(Violation("roll", float(roll), limits.max_roll))
    if abs(omega[0]) > limits.max_roll_rate:
        out.append(Violation("roll_rate", float(omega[0]), limits.max_roll_rate))
    if look_angle > limits.max_look_angle:
        out.append(Violation("look_angle", float(look_angle), limits.max_look_angle))
    load = float(np.hypot(force_b[1], force_b[2]) / (mass * GRAVITY))
    if load > limits.max_load_g:
        out.append(Violation("load", load, limits.max_load_g))
    return out
