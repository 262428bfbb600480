"""Time-series and sweep data behind the airframe, manoeuvre and radome plots.

Every function returns ``(columns, rows)`` ready for CSV output.
"""

from dataclasses import replace

import numpy as np

from .actuation import ActuatorModel, response_params
from .aero import AeroPerturbation, MissileGeometry, lift_drag_sweep
from .dynamics import COARSE_DT, GRAVITY, RigidBodyState, SixDof, TargetState, body_velocity, pack, wind_angles
from .engagement import DEG, ScenarioBounds, sample_maneuver
from .rotations import euler321_to_quat
from .sensors import RadomeParams, refraction_angles

FIG4_FINS_DEG = (10.0, 10.0, 20.0, 20.0)   # LT, RT, BT, UT


def lift_drag(geom=MissileGeometry(), mach=3.0, alpha_deg=np.arange(0.0, 20.5, 0.5)):
    cl_cd = lift_drag_sweep(geom, mach, np.radians(alpha_deg))
    rows = [(a, cl, cd, cl / cd) for a, (cl, cd) in zip(alpha_deg, cl_cd)]
    return ("alpha_deg", "c_l", "c_d", "l_over_d"), rows


def open_loop_response(fins_deg=FIG4_FINS_DEG, altitude=5000.0, speed=900.0, duration=1.0, dt=COARSE_DT / 4,
                       geom=MissileGeometry(), perturb=AeroPerturbation(), gravity=True, induced_drag=False):
    """Airframe response to fin steps held from t = 0, starting in level flight.

    Returns columns ``t, a_y_g, a_z_g, p_dps, q_dps, r_dps, alpha_deg, beta_deg,
    speed``; accelerations are body-axis specific force in g. Induced drag is
    off by default: at large steps it would slow the airframe through Mach 1
    within a second, hiding the short-period response.
    """
    if not induced_drag:
        geom = replace(geom, k_drag=0.0)
    body = SixDof(geom, perturb, aero=True, gravity=gravity)
    fins = np.radians(np.asarray(fins_deg, dtype=float))
    missile = RigidBodyState(r_m=np.array([0.0, 0.0, altitude]), v_b=body_velocity(speed, 0.0, 0.0),
                             q=euler321_to_quat(0.0, 0.0, 0.0))
    x = pack(missile, TargetState(np.array([1e6, 0.0, altitude]), np.zeros(3)))
    fp = response_params(ActuatorModel("ideal"), fins, fins, np.zeros(4))
    tp = np.zeros(4)
    rows = []
    n = int(round(duration / dt))
    for k in range(n + 1):
        force, _ = body.loads(x, fins)
        a = force / geom.mass / GRAVITY
        alpha, beta = wind_angles(x[3:6])
        rows.append((k * dt, a[1], a[2], *np.degrees(x[10:13]), np.degrees(alpha), np.degrees(beta),
                     np.linalg.norm(x[3:6])))
        if k < n:
            x = body.step(x, k * dt, dt, fp, tp)
    return ("t", "a_y_g", "a_z_g", "p_dps", "q_dps", "r_dps", "alpha_deg", "beta_deg", "speed"), rows


def maneuver_samples(n=6, seed=0, duration=10.0, dt=0.05, bounds=ScenarioBounds()):
    """Signed target acceleration levels (m/s^2) of ``n`` sampled manoeuvres."""
    rng = np.random.default_rng(seed)
    v_t = np.array([-300.0, 0.0, 0.0])
    scheds = [sample_maneuver(rng, v_t, bounds) for _ in range(n)]
    t = np.arange(0.0, duration + 1e-9, dt)
    cols = ("t",) + tuple(f"{s.kind}_{i}" for i, s in enumerate(scheds))
    rows = [(tk, *(s.level(tk) for s in scheds)) for tk in t]
    return cols, rows


def radome_curves(amp=0.02, k_values=(1.0, 2.0, 3.0), look_max_deg=80.0, n=161):
    """Refraction angle versus look angle for a few radome slopes."""
    looks = np.linspace(0.0, look_max_deg, n)
    cols = ("look_deg",) + tuple(f"refraction_deg_k{k:g}" for k in k_values)
    rows = []
    for lk in looks:
        vals = [np.degrees(refraction_angles(lk * DEG, RadomeParams(amp, amp, k, k))[0]) for k in k_values]
        rows.append((lk, *vals))
    return cols, rows


def engagement_trace(env, policy, seed):
    """Per-step log of one closed-loop episode."""
    env.log = True
    obs = env.reset(seed)
    policy.reset()
    while True:
        res = env.step(policy.act(obs))
        obs = res.obs
        if res.done:
            break
    cols = tuple(env.records[-1].keys())
    rows = [tuple(r.get(c, "") for c in cols) for r in env.records]
    return cols, rows
