"""Fin command path: action -> deflection rates -> integrated commands -> fins.

Channel order for commands is ``[V, H, dV, dH]``; fin order is
``[LT, RT, BT, UT]``.
"""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import fin_response

DEG = np.pi / 180.0


@dataclass(frozen=True)
class ActuatorLimits:
    rate_max: tuple = (20 * DEG, 20 * DEG, 0.1 * DEG, 0.1 * DEG)
    defl_max: tuple = (20 * DEG, 20 * DEG, 0.1 * DEG, 0.1 * DEG)


@dataclass(frozen=True)
class ActuatorModel:
    mode: str = "first_order"  # "ideal" | "first_order" | "second_order"
    tau: float = 0.02
    zeta: float = 0.7
    omega: float = 150.0

    def __post_init__(self):
        if self.mode not in ("ideal", "first_order", "second_order"):
            raise ValueError(f"unknown actuator mode {self.mode!r}")
        if self.mode == "second_order" and not 0 < self.zeta < 1:
            raise ValueError("second-order actuator requires 0 < zeta < 1")

    @property
    def code(self):
        return {"ideal": 0, "first_order": 1, "second_order": 2}[self.mode]


@dataclass
class ActuatorCommandState:
    theta_cmd: np.ndarray = field(default_factory=lambda: np.zeros(4))  # V, H, dV, dH (rad)
    fins: np.ndarray = field(default_factory=lambda: np.zeros(4))       # actual LT, RT, BT, UT
    fin_rates: np.ndarray = field(default_factory=lambda: np.zeros(4))


def map_action(u, limits=ActuatorLimits()):
    """Commanded deflection rates (rad/s) for a raw 4-dim policy action."""
    u = np.asarray(u, dtype=float)
    if u.shape != (4,) or not np.all(np.isfinite(u)):
        raise ValueError(f"action must be 4 finite numbers, got {u!r}")
    return np.asarray(limits.rate_max) * np.clip(u, -1.0, 1.0)


def mix(theta_cmd):
    v, h, dv, dh = theta_cmd
    return np.array([h - dh, h + dh, v - dv, v + dv])


def unmix(fins):
    lt, rt, bt, ut = fins
    return np.array([(bt + ut) / 2, (lt + rt) / 2, (ut - bt) / 2, (rt - lt) / 2])


def integrate_and_mix(cmd: ActuatorCommandState, rates, dt, limits=ActuatorLimits()):
    """Integrate commanded rates over ``dt``, clamp the integrator, mix to fins.

    Updates ``cmd.theta_cmd`` in place and returns the fin commands.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    lim = np.asarray(limits.defl_max)
    cmd.theta_cmd = np.clip(cmd.theta_cmd + np.asarray(rates) * dt, -lim, lim)
    return mix(cmd.theta_cmd)


def response_params(model: ActuatorModel, fin_cmd, fins, fin_rates):
    """Pack the closed-form actuator response parameters for the integrator."""
    fp = np.empty(16)
    fp[0] = model.code
    fp[1] = model.tau
    fp[2] = model.zeta
    fp[3] = model.omega
    fp[4:8] = fin_cmd
    fp[8:12] = fins
    fp[12:16] = fin_rates
    return fp


def actuator_dynamics(model: ActuatorModel, fin_cmd, fins, fin_rates, dt):
    """Exact response of each fin to a command held constant for ``dt``.

    Returns ``(fins, fin_rates)`` after ``dt``.
    """
    return fin_response(response_params(model, fin_cmd, fins, fin_rates), float(dt))
