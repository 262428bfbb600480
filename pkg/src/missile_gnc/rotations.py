"""Quaternion and direction-cosine helpers.

Conventions used throughout the package:

* quaternions are scalar-first ``[q0, q1, q2, q3]`` (Hamilton product);
* the missile attitude ``q`` rotates body-frame vectors into NED, i.e.
  ``v_ned = quat_to_dcm(q) @ v_body``;
* the engagement frame is x north, y west, z up, so that a NED vector maps
  to it by negating the last two components (``ned_to_engagement``). The
  map is its own inverse.
"""

import numpy as np

from ._jit import njit


@njit
def skew(a):
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


@njit
def quat_mult(p, q):
    return np.array([
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ])


@njit
def quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


@njit
def quat_rate(q, omega):
    """Attitude kinematics ``q_dot = 0.5 * q (x) [0, omega]`` with body rates."""
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    w0, w1, w2 = omega[0], omega[1], omega[2]
    return 0.5 * np.array([
        -q1 * w0 - q2 * w1 - q3 * w2,
        q0 * w0 - q3 * w1 + q2 * w2,
        q3 * w0 + q0 * w1 - q1 * w2,
        -q2 * w0 + q1 * w1 + q0 * w2,
    ])


@njit
def quat_to_dcm(q):
    """DCM that rotates body-frame vectors into the reference frame."""
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    return np.array([
        [q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2)],
        [2 * (q1 * q2 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * (q2 * q3 - q0 * q1)],
        [2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3],
    ])


def dcm_to_quat(C):
    """Inverse of :func:`quat_to_dcm` (Shepperd's method); returns ``q0 >= 0``."""
    C = np.asarray(C, dtype=float)
    tr = np.trace(C)
    cand = np.array([tr, C[0, 0], C[1, 1], C[2, 2]])
    i = int(np.argmax(cand))
    if i == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = np.array([0.25 * s, (C[2, 1] - C[1, 2]) / s, (C[0, 2] - C[2, 0]) / s, (C[1, 0] - C[0, 1]) / s])
    elif i == 1:
        s = 2.0 * np.sqrt(1.0 + C[0, 0] - C[1, 1] - C[2, 2])
        q = np.array([(C[2, 1] - C[1, 2]) / s, 0.25 * s, (C[0, 1] + C[1, 0]) / s, (C[0, 2] + C[2, 0]) / s])
    elif i == 2:
        s = 2.0 * np.sqrt(1.0 - C[0, 0] + C[1, 1] - C[2, 2])
        q = np.array([(C[0, 2] - C[2, 0]) / s, (C[0, 1] + C[1, 0]) / s, 0.25 * s, (C[1, 2] + C[2, 1]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 - C[0, 0] - C[1, 1] + C[2, 2])
        q = np.array([(C[1, 0] - C[0, 1]) / s, (C[0, 2] + C[2, 0]) / s, (C[1, 2] + C[2, 1]) / s, 0.25 * s])
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def euler321_to_dcm(yaw, pitch, roll):
    """Body-to-reference DCM for a yaw-pitch-roll (3-2-1) sequence."""
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    return np.array([
        [cp * cy, sr * sp * cy - cr * sy, cr * sp * cy + sr * sy],
        [cp * sy, sr * sp * sy + cr * cy, cr * sp * sy - sr * cy],
        [-sp, sr * cp, cr * cp],
    ])


def dcm_to_euler321(C):
    """Return (yaw, pitch, roll) in radians from a body-to-reference DCM."""
    pitch = -np.arcsin(np.clip(C[2, 0], -1.0, 1.0))
    roll = np.arctan2(C[2, 1], C[2, 2])
    yaw = np.arctan2(C[1, 0], C[0, 0])
    return yaw, pitch, roll


def euler321_to_quat(yaw, pitch, roll):
    return dcm_to_quat(euler321_to_dcm(yaw, pitch, roll))


@njit
def ned_to_engagement(v):
    return np.array([v[0], -v[1], -v[2]])


def axis_angle_quat(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([[np.cos(0.5 * angle)], np.sin(0.5 * angle) * axis])


def quat_angle(q):
    """Rotation angle (rad, in [0, pi]) represented by a unit quaternion."""
    return 2.0 * np.arccos(np.clip(abs(q[0]), 0.0, 1.0))
