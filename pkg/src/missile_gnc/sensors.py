"""Strapdown seeker with radome refraction, rate gyro and accelerometer models."""

from dataclasses import dataclass, field

import numpy as np

from .rotations import euler321_to_dcm, ned_to_engagement, quat_rate, quat_to_dcm


@dataclass(frozen=True)
class RadomeBounds:
    amp: float = 1e-2
    k_min: float = 1.0
    k_max: float = 3.0


@dataclass(frozen=True)
class RadomeParams:
    a_u: float = 0.0
    a_v: float = 0.0
    k_u: float = 2.0
    k_v: float = 2.0


def sample_radome(rng, bounds=RadomeBounds()):
    a_u, a_v = rng.uniform(-bounds.amp, bounds.amp, size=2)
    k_u, k_v = rng.uniform(bounds.k_min, bounds.k_max, size=2)
    return RadomeParams(float(a_u), float(a_v), float(k_u), float(k_v))


def refraction_angles(look_angle, p: RadomeParams):
    def one(amp, k):
        return amp * (0.75 * look_angle / (np.pi / 2) + 0.25 * np.cos(2 * np.pi / k * look_angle))

    return one(p.a_u, p.k_u), one(p.a_v, p.k_v)


def look_angle(los_b):
    return float(np.arccos(np.clip(los_b[0], -1.0, 1.0)))


def radome_refract(los_b, p: RadomeParams):
    """Apparent body-frame LOS after refraction through the radome."""
    los_b = np.asarray(los_b, dtype=float)
    if p.a_u == 0.0 and p.a_v == 0.0:
        return los_b.copy()
    th_u, th_v = refraction_angles(look_angle(los_b), p)
    out = euler321_to_dcm(th_u, th_v, 0.0) @ los_b
    return out / np.linalg.norm(out)


def aberration_angle(los_b, p: RadomeParams):
    return float(np.arccos(np.clip(radome_refract(los_b, p) @ los_b, -1.0, 1.0)))


def integrate_dq(dq, omega, dt):
    """RK4 advance of the gyro-derived attitude change with ``omega`` held."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    k1 = quat_rate(dq, omega)
    k2 = quat_rate(dq + 0.5 * dt * k1, omega)
    k3 = quat_rate(dq + 0.5 * dt * k2, omega)
    k4 = quat_rate(dq + dt * k3, omega)
    out = dq + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return out / np.linalg.norm(out)


@dataclass(frozen=True)
class SensorErrors:
    gyro_scale: float = 1e-3
    gyro_noise: float = 1e-3
    accel_scale: float = 1e-3


@dataclass
class SeekerOutput:
    lam: np.ndarray     # stabilised LOS unit vector
    omega: np.ndarray   # surrogate LOS rotation rate, rad/s
    v_c: float          # closing speed, m/s
    r: float            # range, m


@dataclass
class SensorState:
    errors: SensorErrors = SensorErrors()
    gyro_scale: np.ndarray = field(default_factory=lambda: np.zeros(3))
    accel_scale: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dq_obs: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    lambda_prev: np.ndarray = None

    @classmethod
    def reset(cls, rng, errors=SensorErrors()):
        return cls(
            errors=errors,
            gyro_scale=rng.uniform(-errors.gyro_scale, errors.gyro_scale, size=3),
            accel_scale=rng.uniform(-errors.accel_scale, errors.accel_scale, size=3),
        )


def gyro_measure(omega_gt, sensor: SensorState, rng):
    noise = rng.normal(0.0, sensor.errors.gyro_noise, size=3) if sensor.errors.gyro_noise > 0 else 0.0
    return np.asarray(omega_gt) * (1.0 + sensor.gyro_scale) + noise


def accel_measure(a_gt_b, sensor: SensorState):
    return np.asarray(a_gt_b) * (1.0 + sensor.accel_scale)


def body_relative_geometry(r_m, v_b, q, r_t, v_t):
    """Relative position and velocity of the target in missile body axes."""
    c_bn = quat_to_dcm(q)
    r_tm_b = c_bn.T @ ned_to_engagement(np.asarray(r_t) - np.asarray(r_m))
    v_tm_b = c_bn.T @ ned_to_engagement(np.asarray(v_t)) - np.asarray(v_b)
    return r_tm_b, v_tm_b


def seeker_frame(r_m, v_b, q, r_t, v_t, sensor: SensorState, radome: RadomeParams, dt_nav):
    """One seeker sample; updates ``sensor.lambda_prev``.

    ``sensor.dq_obs`` must already be advanced to the current time.
    """
    r_tm_b, v_tm_b = body_relative_geometry(r_m, v_b, q, r_t, v_t)
    rng_m = float(np.linalg.norm(r_tm_b))
    if not rng_m > 0:
        raise ValueError("seeker undefined at zero range")
    apparent = radome_refract(r_tm_b / rng_m, radome)
    lam = quat_to_dcm(sensor.dq_obs) @ apparent
    lam /= np.linalg.norm(lam)
    if sensor.lambda_prev is None:
        omega = np.zeros(3)
    else:
        omega = np.cross(lam, sensor.lambda_prev) / dt_nav
    sensor.lambda_prev = lam
    return SeekerOutput(lam, omega, float(-apparent @ v_tm_b), rng_m)
