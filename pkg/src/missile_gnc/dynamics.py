"""Rigid-body missile and point-mass target equations of motion.

The coupled state vector integrated by :func:`rk4_coupled` is laid out as::

    [r_m(3), v_b(3), q(4), omega(3), r_t(3), v_t(3), dq_obs(4)]

with ``r_m``, ``r_t`` and ``v_t`` in the engagement frame (z up) and ``v_b``
and ``omega`` in missile body axes. ``dq_obs`` is the strapdown attitude
change since launch, driven by the gyro output (true rate times the scale
error plus the sample-held noise), so it integrates at the same substep
rate as the airframe. Fin deflections are not part of the state:
within one guidance period the actuator input is constant, so fin positions
come from the closed-form actuator response (see :mod:`missile_gnc.actuation`).
"""

from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .aero import _loads
from .rotations import ned_to_engagement, quat_rate, quat_to_dcm

RHO0 = 1.225
SCALE_HEIGHT = 7018.00344
GRAVITY = 9.81
GAMMA_AIR = 1.4
R_AIR = 287.053
T0 = 288.15
LAPSE = 0.0065
TROPOPAUSE = 11000.0
T_STRAT = 216.65

COARSE_DT = 0.02
FINE_DT = 0.0002
FINE_RANGE = 160.0

N_STATE = 23


class SimulationFault(RuntimeError):
    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


@njit
def _density(h):
    return RHO0 * np.exp(-max(h, 0.0) / SCALE_HEIGHT)


@njit
def _sound_speed(h):
    h = max(h, 0.0)
    temp = T0 - LAPSE * h if h <= TROPOPAUSE else T_STRAT
    return np.sqrt(GAMMA_AIR * R_AIR * temp)


def atmosphere(h, speed):
    """Return ``(rho, mach, q_dyn)``; negative altitude is treated as sea level."""
    rho = _density(float(h))
    return rho, speed / _sound_speed(float(h)), 0.5 * rho * speed**2


def density(h):
    return RHO0 * np.exp(-np.maximum(h, 0.0) / SCALE_HEIGHT)


def wind_angles(v_b):
    v_b = np.asarray(v_b, dtype=float)
    speed = np.linalg.norm(v_b)
    if not speed > 0:
        raise ValueError("wind angles undefined at zero airspeed")
    return np.arctan2(v_b[2], v_b[0]), np.arcsin(v_b[1] / speed)


def body_velocity(speed, alpha, beta):
    """Inverse of :func:`wind_angles`."""
    return speed * np.array([np.cos(alpha) * np.cos(beta), np.sin(beta), np.sin(alpha) * np.cos(beta)])


def select_timestep(rng_m):
    if rng_m < 0:
        raise ValueError("range must be non-negative")
    return FINE_DT if rng_m <= FINE_RANGE else COARSE_DT


@dataclass
class RigidBodyState:
    r_m: np.ndarray
    v_b: np.ndarray
    q: np.ndarray
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fins: np.ndarray = field(default_factory=lambda: np.zeros(4))
    fin_rates: np.ndarray = field(default_factory=lambda: np.zeros(4))


@dataclass
class TargetState:
    r_t: np.ndarray
    v_t: np.ndarray


def pack(missile: RigidBodyState, target: TargetState, dq_obs=None):
    dq = np.array([1.0, 0.0, 0.0, 0.0]) if dq_obs is None else np.asarray(dq_obs, dtype=float)
    return np.concatenate([missile.r_m, missile.v_b, missile.q, missile.omega, target.r_t, target.v_t, dq])


def unpack(x, fins=None, fin_rates=None):
    m = RigidBodyState(x[0:3].copy(), x[3:6].copy(), x[6:10].copy(), x[10:13].copy(),
                       np.zeros(4) if fins is None else np.array(fins, dtype=float),
                       np.zeros(4) if fin_rates is None else np.array(fin_rates, dtype=float))
    return m, TargetState(x[13:16].copy(), x[16:19].copy())


@njit
def _rigid_body_rates(v_b, q, omega, force, torque, mass, j_diag, gravity_on):
    c_bn = quat_to_dcm(q)
    j_w = j_diag * omega
    omega_dot = (torque - np.cross(omega, j_w)) / j_diag
    q_dot = quat_rate(q, omega)
    v_dot = -np.cross(omega, v_b) + force / mass
    if gravity_on:
        v_dot += c_bn.T @ np.array([0.0, 0.0, GRAVITY])
    r_dot = ned_to_engagement(c_bn @ v_b)
    return r_dot, v_dot, q_dot, omega_dot


def missile_derivatives(state: RigidBodyState, force, torque, inertia, mass, gravity=True):
    """Time derivatives ``(r_dot, v_b_dot, q_dot, omega_dot)`` of the missile.

    ``inertia`` must be diagonal (principal body axes).
    """
    return _rigid_body_rates(np.asarray(state.v_b, float), np.asarray(state.q, float),
                             np.asarray(state.omega, float), np.asarray(force, float),
                             np.asarray(torque, float), float(mass), np.diag(inertia).astype(float),
                             bool(gravity))


@njit
def fin_response(fp, t):
    """Fin positions and rates ``t`` seconds into a guidance period.

    ``fp`` = [mode, tau, zeta, wn, cmd(4), pos0(4), rate0(4)]; mode 0 is an
    ideal actuator, 1 a first-order lag, 2 the second-order model (zeta < 1).
    """
    mode = int(fp[0])
    cmd = fp[4:8]
    p0 = fp[8:12]
    r0 = fp[12:16]
    if mode == 0:
        return cmd.copy(), np.zeros(4)
    if mode == 1:
        decay = np.exp(-t / fp[1])
        return cmd + (p0 - cmd) * decay, -(p0 - cmd) * decay / fp[1]
    zeta, wn = fp[2], fp[3]
    wd = wn * np.sqrt(1.0 - zeta * zeta)
    e0 = p0 - cmd
    b = (r0 + zeta * wn * e0) / wd
    env = np.exp(-zeta * wn * t)
    c, s = np.cos(wd * t), np.sin(wd * t)
    pos = cmd + env * (e0 * c + b * s)
    rate = env * ((-zeta * wn) * (e0 * c + b * s) + (-e0 * wd * s + b * wd * c))
    return pos, rate


@njit
def _target_accel(v_t, tp):
    # tp = [magnitude, plane normal(3)]; acceleration lies in the manoeuvre
    # plane, perpendicular to the current target velocity
    if tp[0] == 0.0:
        return np.zeros(3)
    speed = np.sqrt(v_t @ v_t)
    return tp[0] * np.cross(tp[1:4], v_t / speed)


@njit
def coupled_rates(x, t, aero_on, gravity_on, consts, cp_n, cp_y, eps_n, eps_y, eps_a, mass, j_diag, fp, tp, gp):
    v_b = x[3:6]
    q = x[6:10]
    omega = x[10:13]
    force = np.zeros(3)
    torque = np.zeros(3)
    if aero_on:
        speed = np.sqrt(v_b @ v_b)
        h = x[2]
        rho = _density(h)
        mach = speed / _sound_speed(h)
        eta = np.sqrt(max(mach * mach - 1.0, 1e-6))
        alpha = np.arctan2(v_b[2], v_b[0])
        beta = np.arcsin(v_b[1] / speed)
        fins, _ = fin_response(fp, t)
        force, torque = _loads(consts, cp_n, cp_y, eps_n, eps_y, eps_a, 0.5 * rho * speed * speed,
                               alpha, beta, eta, fins, omega, speed)
    r_dot, v_dot, q_dot, w_dot = _rigid_body_rates(v_b, q, omega, force, torque, mass, j_diag, gravity_on)
    dx = np.empty(N_STATE)
    dx[0:3] = r_dot
    dx[3:6] = v_dot
    dx[6:10] = q_dot
    dx[10:13] = w_dot
    dx[13:16] = x[16:19]
    dx[16:19] = _target_accel(x[16:19], tp)
    # gp = [gyro scale error(3), held gyro noise(3)]
    dx[19:23] = quat_rate(x[19:23], omega * (1.0 + gp[0:3]) + gp[3:6])
    return dx


@njit
def rk4_coupled(x, t, dt, aero_on, gravity_on, consts, cp_n, cp_y, eps_n, eps_y, eps_a, mass, j_diag, fp, tp, gp):
    """One classical RK4 step of the coupled missile/target system.

    ``t`` is the time since the start of the current guidance period (used
    by the actuator response). Both quaternions are renormalised afterwards.
    """
    args = (aero_on, gravity_on, consts, cp_n, cp_y, eps_n, eps_y, eps_a, mass, j_diag, fp, tp, gp)
    k1 = coupled_rates(x, t, *args)
    k2 = coupled_rates(x + 0.5 * dt * k1, t + 0.5 * dt, *args)
    k3 = coupled_rates(x + 0.5 * dt * k2, t + 0.5 * dt, *args)
    k4 = coupled_rates(x + dt * k3, t + dt, *args)
    out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[6:10] /= np.sqrt(out[6:10] @ out[6:10])
    out[19:23] /= np.sqrt(out[19:23] @ out[19:23])
    return out


def rk4(f, x, t, dt):
    """Generic classical RK4 step for ``x' = f(x, t)``."""
    k1 = f(x, t)
    k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(x + dt * k3, t + dt)
    return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


class SixDof:
    """Per-episode airframe: geometry constants, perturbation and inertia.

    ``step`` advances the coupled missile/target state by ``dt``.
    """

    def __init__(self, geom, perturb, aero=True, gravity=True):
        from .aero import inertia_tensor, perturbed_centers_of_pressure

        self.geom = geom
        self.perturb = perturb
        self.mass = geom.mass
        self.inertia = inertia_tensor(geom)
        self.j_diag = np.diag(self.inertia).copy()
        self.consts = geom.constants()
        self.cp_n, self.cp_y = perturbed_centers_of_pressure(geom, perturb)
        self.eps_n = np.ascontiguousarray(perturb.eps_force_n, dtype=float)
        self.eps_y = np.ascontiguousarray(perturb.eps_force_y, dtype=float)
        self.eps_a = float(perturb.eps_force_a)
        self.aero = aero
        self.gravity = gravity

    def _args(self, fp, tp, gp):
        gp = np.zeros(6) if gp is None else gp
        return (self.aero, self.gravity, self.consts, self.cp_n, self.cp_y, self.eps_n, self.eps_y,
                self.eps_a, self.mass, self.j_diag, fp, tp, gp)

    def rates(self, x, t, fp, tp, gp=None):
        return coupled_rates(x, t, *self._args(fp, tp, gp))

    def step(self, x, t, dt, fp, tp, gp=None):
        if not dt > 0:
            raise ValueError("dt must be positive")
        out = rk4_coupled(x, t, dt, *self._args(fp, tp, gp))
        if not np.all(np.isfinite(out)):
            raise SimulationFault(f"non-finite state after RK4 step at t={t}", state=x.copy())
        return out

    def loads(self, x, fins):
        """Aerodynamic force/torque at state ``x`` with fins held at ``fins``."""
        v_b = x[3:6]
        speed = float(np.linalg.norm(v_b))
        rho = _density(x[2])
        mach = speed / _sound_speed(x[2])
        alpha, beta = wind_angles(v_b)
        eta = np.sqrt(max(mach * mach - 1.0, 1e-6))
        return _loads(self.consts, self.cp_n, self.cp_y, self.eps_n, self.eps_y, self.eps_a,
                      0.5 * rho * speed * speed, alpha, beta, eta, np.asarray(fins, float),
                      x[10:13].copy(), speed)
