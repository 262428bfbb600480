"""Episodic guidance environment stepped at the 25 Hz navigation rate.

Observation layout (20 numbers)::

    [0:3]   stabilised LOS unit vector
    [3:6]   LOS rotation-rate surrogate (rad/s)
    [6:10]  attitude estimate q_init * dq_obs
    [10:13] measured body rates (rad/s)
    [13:16] measured specific force (m/s^2, body axes)
    [16:20] integrated deflection commands V, H, dV, dH (rad)
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .actuation import ActuatorCommandState, ActuatorLimits, ActuatorModel, integrate_and_mix, map_action, response_params
from .aero import MissileGeometry
from .dynamics import FINE_RANGE, SimulationFault, SixDof, fin_response, pack, select_timestep
from .engagement import (PathConstraints, Preset, check_constraints, get_preset, initial_states,
                         maneuver_magnitude, sample_scenario)
from .rotations import ned_to_engagement, quat_mult, quat_to_dcm
from .sensors import (SensorState, accel_measure, body_relative_geometry, gyro_measure,
                      look_angle, seeker_frame)

NAV_DT = 0.04
OBS_DIM = 20
ACT_DIM = 4
OBS_FIELDS = (
    ["lam_x", "lam_y", "lam_z", "Om_x", "Om_y", "Om_z", "q0", "q1", "q2", "q3",
     "w_x", "w_y", "w_z", "a_x", "a_y", "a_z", "th_V", "th_H", "th_dV", "th_dH"]
)
REWARD_KEYS = ("shaping", "roll_rate", "control", "bonus", "penalty")


class UsageError(RuntimeError):
    pass


@dataclass(frozen=True)
class RewardParams:
    alpha: float = 1.0
    beta: float = -0.05      # per deg/s of roll rate
    delta: float = 0.0
    sigma_omega: float = 0.02
    bonus: float = 10.0
    miss_limit: float = 3.0
    penalty: float = -10.0


def reward(omega_los, omega_x, u, done, miss, violated, p: RewardParams = RewardParams()):
    """Total reward and its components; ``omega_x`` is in rad/s."""
    parts = {
        "shaping": p.alpha * float(np.exp(-(omega_los @ omega_los) / p.sigma_omega**2)),
        "roll_rate": p.beta * abs(float(np.rad2deg(omega_x))),
        "control": p.delta * float(np.linalg.norm(u)),
        "bonus": p.bonus if (done and not violated and miss is not None and miss < p.miss_limit) else 0.0,
        "penalty": p.penalty if violated else 0.0,
    }
    return sum(parts.values()), parts


def segment_min_distance(d0, d1):
    """Smallest norm on the segment from relative position ``d0`` to ``d1``."""
    seg = d1 - d0
    den = seg @ seg
    s = 0.0 if den == 0 else float(np.clip(-(d0 @ seg) / den, 0.0, 1.0))
    return float(np.linalg.norm(d0 + s * seg))


@dataclass
class StepResult:
    obs: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


class GncEnv:
    """One engagement at a time; instances share no mutable state.

    ``reset(seed)`` draws every random quantity of the episode from a single
    generator seeded with ``seed``; the same seed and action sequence
    reproduce the episode bit for bit.
    """

    def __init__(self, preset="nominal", actuator=ActuatorModel("first_order"), geom=MissileGeometry(),
                 constraints=PathConstraints(), reward_params=RewardParams(), limits=ActuatorLimits(),
                 max_time=40.0, gravity=True, log=False):
        self.preset = preset if isinstance(preset, Preset) else get_preset(preset)
        self.actuator = actuator
        self.geom = geom
        self.constraints = constraints
        self.reward_params = reward_params
        self.limits = limits
        self.max_time = max_time
        self.gravity = gravity
        self.log = log
        self.done = True
        self.records = []

    # -- helpers ---------------------------------------------------------------

    def _specific_force(self):
        force, _ = self.airframe.loads(self.x, self.cmd.fins)
        return force, force / self.geom.mass

    def _observe(self):
        q_est = quat_mult(self.q_init, self.sensor.dq_obs)
        return np.concatenate([self.seeker.lam, self.seeker.omega, q_est, self.omega_obs,
                               self.accel_obs, self.cmd.theta_cmd])

    def _measure(self, dt_nav):
        self.omega_obs = gyro_measure(self.x[10:13], self.sensor, self.rng)
        # noise of this sample is held until the next one
        self.gyro_noise = self.omega_obs - self.x[10:13] * (1.0 + self.sensor.gyro_scale)
        force, a_b = self._specific_force()
        self.accel_obs = accel_measure(a_b, self.sensor)
        self.seeker = seeker_frame(self.x[0:3], self.x[3:6], self.x[6:10], self.x[13:16], self.x[16:19],
                                   self.sensor, self.scenario.radome, dt_nav)
        return force

    def truth(self):
        """Ground-truth diagnostics for the current state."""
        r_tm_b, v_tm_b = body_relative_geometry(self.x[0:3], self.x[3:6], self.x[6:10], self.x[13:16],
                                                self.x[16:19])
        rng_m = float(np.linalg.norm(r_tm_b))
        return {
            "range": rng_m,
            "v_c": float(-(r_tm_b @ v_tm_b) / rng_m),
            "look_angle": look_angle(r_tm_b / rng_m),
            "speed": float(np.linalg.norm(self.x[3:6])),
        }

    # -- API -------------------------------------------------------------------

    def reset(self, seed):
        self.rng = np.random.default_rng(seed)
        self.scenario = sample_scenario(self.rng, self.preset)
        self.sensor = SensorState.reset(self.rng, self.preset.sensors)
        missile, target = initial_states(self.scenario)
        self.q_init = missile.q.copy()
        self.airframe = SixDof(self.geom, self.scenario.perturb, aero=True, gravity=self.gravity)
        self.x = pack(missile, target)
        self.cmd = ActuatorCommandState()
        self.t = 0.0
        self.steps = 0
        self.miss = float(np.linalg.norm(self.x[13:16] - self.x[0:3]))
        self.done = False
        self.accel_norms = []
        self._measure(NAV_DT)
        self.obs = self._observe()
        self.records = []
        if self.log:
            self._record(np.zeros(ACT_DIM), 0.0, {k: 0.0 for k in REWARD_KEYS}, [])
        return self.obs.copy()

    def _integrate_period(self, fp, tp):
        """Advance up to one navigation period; stops early once closing ends."""
        gp = np.concatenate([self.sensor.gyro_scale, self.gyro_noise])
        tau = 0.0
        while tau < NAV_DT - 1e-12:
            d0 = self.x[13:16] - self.x[0:3]
            dt = min(select_timestep(float(np.linalg.norm(d0))), NAV_DT - tau)
            self.x = self.airframe.step(self.x, tau, dt, fp, tp, gp)
            tau += dt
            d1 = self.x[13:16] - self.x[0:3]
            self.miss = min(self.miss, segment_min_distance(d0, d1))
            if (d1 @ (self.x[16:19] - self._missile_velocity())) > 0:
                return tau, True
        return tau, False

    def _missile_velocity(self):
        return ned_to_engagement(quat_to_dcm(self.x[6:10]) @ self.x[3:6])

    def step(self, u):
        if self.done:
            raise UsageError("step() called on a finished episode; call reset()")
        u = np.asarray(u, dtype=float)
        rates = map_action(u, self.limits)
        fin_cmd = integrate_and_mix(self.cmd, rates, NAV_DT, self.limits)
        fp = response_params(self.actuator, fin_cmd, self.cmd.fins, self.cmd.fin_rates)
        sched = self.scenario.maneuver
        v_t = self.x[16:19]
        mag = maneuver_magnitude(sched, self.t, self.x[15], float(np.linalg.norm(v_t)), self.preset.scenario)
        tp = np.concatenate([[mag], sched.plane_normal])

        reason, violations = None, []
        try:
            tau, separating = self._integrate_period(fp, tp)
        except SimulationFault:
            tau, separating, reason = NAV_DT, False, "fault"
        self.t += tau
        self.steps += 1
        self.cmd.fins, self.cmd.fin_rates = fin_response(fp, tau)
        self.sensor.dq_obs = self.x[19:23].copy()

        truth = None
        if reason is None:
            force = self._measure(NAV_DT)
            truth = self.truth()
            look = truth["look_angle"] if truth["range"] > FINE_RANGE else 0.0
            violations = check_constraints(self.x[3:6], self.x[6:10], self.x[10:13], force, look,
                                           self.geom.mass, self.constraints)
            self.accel_norms.append(float(np.linalg.norm(self.accel_obs)))
            if violations:
                reason = "constraint:" + violations[0].name
            elif separating:
                reason = "closing"
            elif self.t >= self.max_time - 1e-9:
                reason = "timeout"
        violated = reason is not None and reason != "closing" and reason != "timeout"
        self.done = reason is not None
        if reason != "fault":
            self.obs = self._observe()
        total, parts = reward(self.seeker.omega, self.x[10], u, self.done, self.miss, violated, self.reward_params)
        info = {"t": self.t, "components": parts}
        if self.done:
            info.update(reason=reason, miss=self.miss, violations=[asdict(v) for v in violations],
                        final_speed=float(np.linalg.norm(self.x[3:6])))
        if self.log:
            self._record(u, total, parts, violations)
        return StepResult(self.obs.copy(), float(total), self.done, info)

    def _record(self, u, total, parts, violations):
        rec = {"t": self.t}
        for name, sl in (("r_m", slice(0, 3)), ("v_b", slice(3, 6)), ("q", slice(6, 10)),
                         ("w", slice(10, 13)), ("r_t", slice(13, 16)), ("v_t", slice(16, 19))):
            for i, v in enumerate(self.x[sl]):
                rec[f"{name}{i}"] = float(v)
        for i, v in enumerate(self.cmd.fins):
            rec[f"fin{i}"] = float(v)
        rec.update({k: float(v) for k, v in zip(OBS_FIELDS, self.obs)})
        rec.update({f"u{i}": float(v) for i, v in enumerate(u)})
        rec["reward"] = float(total)
        rec.update({f"r_{k}": float(v) for k, v in parts.items()})
        rec["violations"] = ";".join(v.name for v in violations)
        rec["miss_so_far"] = self.miss
        self.records.append(rec)
