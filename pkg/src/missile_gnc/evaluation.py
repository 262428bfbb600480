"""Ensemble evaluation of fin-command policies and a scripted reference controller."""

from dataclasses import asdict, dataclass

import numpy as np

from .actuation import ActuatorLimits, ActuatorModel
from .dynamics import GRAVITY
from .env import GncEnv, NAV_DT
from .rotations import quat_conj, quat_mult, quat_to_dcm

STAT_COLUMNS = ("preset", "episodes", "miss_lt_1", "miss_lt_2", "miss_lt_3", "vf_mean", "vf_std", "vf_min",
                "accel_mean_g", "accel_std_g", "violation_pct")


@dataclass
class EnsembleStats:
    preset: str
    episodes: int
    miss_lt_1: float
    miss_lt_2: float
    miss_lt_3: float
    vf_mean: float
    vf_std: float
    vf_min: float
    accel_mean_g: float
    accel_std_g: float
    violation_pct: float

    def row(self):
        return asdict(self)


def summarize(preset, misses, final_speeds, accel_norms, violated):
    """Percent miss under 1/2/3 m, final-speed and lateral-load statistics."""
    misses = np.asarray(misses, dtype=float)
    if misses.size == 0:
        raise ValueError("need at least one episode")
    vf = np.asarray(final_speeds, dtype=float)
    acc = np.asarray(accel_norms, dtype=float) / GRAVITY
    pct = lambda m: 100.0 * float(np.mean(m))  # noqa: E731
    return EnsembleStats(
        preset=preset, episodes=int(misses.size),
        miss_lt_1=pct(misses < 1), miss_lt_2=pct(misses < 2), miss_lt_3=pct(misses < 3),
        vf_mean=float(vf.mean()), vf_std=float(vf.std()), vf_min=float(vf.min()),
        accel_mean_g=float(acc.mean()) if acc.size else 0.0,
        accel_std_g=float(acc.std()) if acc.size else 0.0,
        violation_pct=pct(np.asarray(violated, dtype=bool)),
    )


class ScriptedController:
    """Proportional navigation with an acceleration/rate-damping fin loop.

    Uses only the observation: the seeker LOS-rate surrogate is turned into a
    PN acceleration demand in body axes (with an assumed closing speed), the
    pitch/yaw deflections track it with integral action plus body-rate
    damping, and the differential channels null the roll rate.
    """

    def __init__(self, nav_gain=3.0, closing_speed=1200.0, k_int=2.5e-3, k_rate=0.003,
                 k_roll=4e-4, k_roll_acc=3e-5, max_slew=5.0 * np.pi / 180, limits=ActuatorLimits()):
        self.nav_gain = nav_gain
        self.closing_speed = closing_speed
        self.k_int = k_int
        self.k_rate = k_rate
        self.k_roll = k_roll
        self.k_roll_acc = k_roll_acc
        self.max_slew = max_slew
        self.rate_max = np.asarray(limits.rate_max)
        self.reset()

    def reset(self):
        self.integ = np.zeros(2)   # yaw (V), pitch (H)
        self.q_init = None
        self.prev_wx = 0.0

    def act(self, obs):
        lam, om_s, q_est, w, acc, theta = obs[0:3], obs[3:6], obs[6:10], obs[10:13], obs[13:16], obs[16:20]
        if self.q_init is None:
            self.q_init = q_est.copy()
        # attitude change since launch maps current body axes to launch-body axes
        dq = quat_mult(quat_conj(self.q_init), q_est)
        a_cmd = quat_to_dcm(dq).T @ (-self.nav_gain * self.closing_speed * np.cross(om_s, lam))
        # specific-force demand also carries the weight of the missile
        a_cmd -= quat_to_dcm(q_est).T @ np.array([0.0, 0.0, GRAVITY])
        # positive V or H deflection drives body y / z acceleration negative
        err = acc[1:3] - a_cmd[1:3]
        self.integ += self.k_int * err * NAV_DT
        des = self.integ - self.k_rate * np.array([-w[2], w[1]])
        rates = np.clip((des - theta[0:2]) / NAV_DT, -self.max_slew, self.max_slew)
        # dV - dH produces positive roll torque
        wdot = (w[0] - self.prev_wx) / NAV_DT
        self.prev_wx = w[0]
        roll = -(self.k_roll * w[0] + self.k_roll_acc * wdot)
        out = np.array([rates[0], rates[1], roll, -roll])
        return np.clip(out / self.rate_max, -1.0, 1.0)


def run_episode(env: GncEnv, policy, seed):
    """Run one episode; ``policy`` exposes ``reset()`` and ``act(obs)``."""
    obs = env.reset(seed)
    policy.reset()
    total = 0.0
    while True:
        res = env.step(policy.act(obs))
        total += res.reward
        obs = res.obs
        if res.done:
            info = dict(res.info)
            info["return"] = total
            info["steps"] = env.steps
            info["accel_norms"] = list(env.accel_norms)
            return info


def evaluate_policy(policy, preset="nominal", n_episodes=100, seed=0, actuator=ActuatorModel("second_order"),
                    env_kwargs=None, episode_log=None):
    """Table-style statistics of ``policy`` over ``n_episodes`` seeded episodes."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    env = GncEnv(preset, actuator=actuator, **(env_kwargs or {}))
    seeds = np.random.SeedSequence(seed).spawn(n_episodes)
    misses, vfs, accs, viol = [], [], [], []
    for i, s in enumerate(seeds):
        info = run_episode(env, policy, s)
        misses.append(info["miss"])
        vfs.append(info["final_speed"])
        accs.extend(info["accel_norms"])
        bad = info["reason"] not in ("closing", "timeout")
        viol.append(bad)
        if episode_log is not None:
            episode_log.append({"episode": i, "miss": info["miss"], "final_speed": info["final_speed"],
                                "reason": info["reason"], "steps": info["steps"], "return": info["return"]})
    return summarize(env.preset.name, misses, vfs, accs, viol)
