"""Fast invariant checks runnable from the installed package (``missile-gnc selftest``)."""

import numpy as np

from .aero import AeroPerturbation, MissileGeometry, force_coefficients
from .dynamics import RigidBodyState, SixDof, TargetState, body_velocity, pack
from .engagement import get_preset, initial_states, sample_scenario
from .pn3dof import pn_command
from .ppo.scaler import RunningScaler
from .rotations import euler321_to_quat


def _quaternion_norm():
    rng = np.random.default_rng(0)
    sc = sample_scenario(rng, get_preset("nominal"))
    body = SixDof(MissileGeometry(), sc.perturb)
    missile, target = initial_states(sc)
    x = pack(missile, target)
    fp = np.zeros(16)   # ideal actuators, fins held at zero
    for k in range(100):
        x = body.step(x, 0.02 * k, 0.02, fp, np.zeros(4))
    drift = abs(np.linalg.norm(x[6:10]) - 1.0)
    return drift < 1e-8, f"|q| drift {drift:.2e}"


def _aero_oddness():
    rng = np.random.default_rng(1)
    g, zero = MissileGeometry(), AeroPerturbation()
    worst = 0.0
    for _ in range(200):
        a, m = rng.uniform(-0.5, 0.5), rng.uniform(1.2, 4.0)
        cn_p, _, _ = force_coefficients(g, zero, a, 0.0, m, np.zeros(4))
        cn_m, _, _ = force_coefficients(g, zero, -a, 0.0, m, np.zeros(4))
        worst = max(worst, float(np.max(np.abs(cn_p + cn_m))))
    return worst < 1e-12, f"max |C_N(a) + C_N(-a)| {worst:.1e}"


def _zero_incidence_torque():
    body = SixDof(MissileGeometry(), AeroPerturbation())
    missile = RigidBodyState(np.array([0.0, 0.0, 5000.0]), body_velocity(900.0, 0.0, 0.0),
                             euler321_to_quat(0.3, 0.1, 0.2))
    _, torque = body.loads(pack(missile, TargetState(np.zeros(3), np.zeros(3))), np.zeros(4))
    return float(np.max(np.abs(torque))) < 1e-9, f"torque {np.max(np.abs(torque)):.1e} N*m"


def _pn_collinear():
    a = pn_command(np.array([[1000.0, 0.0, 0.0]]), np.array([[-900.0, 0.0, 0.0]]))
    return float(np.max(np.abs(a))) == 0.0, "collinear geometry gives zero demand"


def _scaler_floor():
    s = RunningScaler(3)
    s.update(np.ones((10, 3)))
    out = s.scale(np.ones(3) * 2)
    return bool(np.all(np.isfinite(out))), "constant observations stay finite"


CHECKS = (
    ("quaternion_norm", _quaternion_norm),
    ("aero_oddness", _aero_oddness),
    ("zero_incidence_torque", _zero_incidence_torque),
    ("pn_collinear", _pn_collinear),
    ("scaler_floor", _scaler_floor),
)


def run_checks():
    """Yield ``(name, passed, detail)`` for each check; exceptions count as failures."""
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # noqa: BLE001
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        yield name, bool(passed), detail
