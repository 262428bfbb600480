"""Slender-body / slender-wing component build-up aerodynamics.

Each component (nose, wing, body and the two tail fins of a channel) gets a
force coefficient row and a centre-of-pressure row. Normal-force rows use the
left/right tail pair, side-force rows the bottom/upper pair. Stations are
measured aft from the nose tip; body axes are x forward, y right, z down.
Fin deflections are always ordered ``[LT, RT, BT, UT]``.
"""

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._jit import njit

ROWS = ("nose", "wing", "body", "tail_a", "tail_b")


class ConfigurationError(ValueError):
    pass


class OutOfEnvelopeError(ValueError):
    pass


@dataclass(frozen=True)
class MissileGeometry:
    """Airframe dimensions (m), mass (kg) and axial-drag constants.

    ``x_w`` is measured from the end of the nose to the wing leading edge.
    """

    d: float = 0.31
    h_w: float = 0.63
    h_t: float = 0.63
    c_rw: float = 1.88
    c_tw: float = 0.63
    c_rt: float = 0.63
    c_tt: float = 0.63
    x_n: float = 0.94
    x_w: float = 1.25
    x_l: float = 6.25
    x_hl: float = 6.09
    x_cg: float = 3.13
    mass: float = 455.0
    c_a0: float = 0.35
    k_drag: float = 4.0

    def __post_init__(self):
        validate_geometry(self)

    @property
    def s_ref(self):
        return np.pi * self.d**2 / 4.0

    @property
    def s_wing(self):
        return self.h_w * (self.c_rw + self.c_tw) / 2.0

    @property
    def s_tail(self):
        return self.h_t * (self.c_rt + self.c_tt) / 2.0

    @property
    def s_plan(self):
        return self.d * (self.x_l - self.x_n) + 0.67 * self.d * self.x_n

    def constants(self):
        """Scalars packed for the compiled load kernel (order matters)."""
        return np.array([
            self.s_ref, self.s_wing, self.s_tail, self.s_plan, self.c_a0,
            self.k_drag, self.h_t, self.d, self.x_cg,
        ])

    def to_dict(self):
        return asdict(self)


def validate_geometry(g):
    for f in fields(g):
        v = getattr(g, f.name)
        # drag constants may be zero; every length and the mass must be positive
        low_ok = v >= 0 if f.name in ("c_a0", "k_drag") else v > 0
        if not np.isfinite(v) or not low_ok:
            raise ConfigurationError(f"geometry field {f.name} must be positive and finite, got {v}")
    if not (g.x_n < g.x_w < g.x_hl <= g.x_l):
        raise ConfigurationError(
            f"stations must satisfy x_n < x_w < x_hl <= x_l, got {g.x_n}, {g.x_w}, {g.x_hl}, {g.x_l}")
    if not (0 < g.x_cg < g.x_l):
        raise ConfigurationError(f"x_cg={g.x_cg} outside the body (0, {g.x_l})")


@dataclass(frozen=True)
class PerturbationBounds:
    force: float = 0.1
    axial: float = 0.1
    cp: float = 0.01


@dataclass
class AeroPerturbation:
    """Multiplicative offsets; a coefficient ``c`` is used as ``c * (1 + eps)``."""

    eps_force_n: np.ndarray = field(default_factory=lambda: np.zeros((5, 3)))
    eps_force_y: np.ndarray = field(default_factory=lambda: np.zeros((5, 3)))
    eps_force_a: float = 0.0
    eps_cp_n: np.ndarray = field(default_factory=lambda: np.zeros((5, 3)))
    eps_cp_y: np.ndarray = field(default_factory=lambda: np.zeros((5, 3)))

    def within(self, bounds: PerturbationBounds, tol=1e-12):
        return (np.all(np.abs(self.eps_force_n) <= bounds.force + tol)
                and np.all(np.abs(self.eps_force_y) <= bounds.force + tol)
                and abs(self.eps_force_a) <= bounds.axial + tol
                and np.all(np.abs(self.eps_cp_n) <= bounds.cp + tol)
                and np.all(np.abs(self.eps_cp_y) <= bounds.cp + tol))


@dataclass
class AeroLoads:
    force: np.ndarray   # body frame, N
    torque: np.ndarray  # body frame about the CG, N*m


def _mixture(rng, bound, shape):
    # half the entries uniform in [-b, b], the rest pinned at +b or -b
    uni = rng.uniform(-bound, bound, size=shape)
    pinned = bound * rng.choice(np.array([-1.0, 1.0]), size=shape)
    return np.where(rng.random(size=shape) < 0.5, uni, pinned)


def sample_perturbation(rng, bounds: PerturbationBounds = PerturbationBounds()):
    return AeroPerturbation(
        eps_force_n=_mixture(rng, bounds.force, (5, 3)),
        eps_force_y=_mixture(rng, bounds.force, (5, 3)),
        eps_force_a=float(_mixture(rng, bounds.axial, ())),
        eps_cp_n=_mixture(rng, bounds.cp, (5, 3)),
        eps_cp_y=_mixture(rng, bounds.cp, (5, 3)),
    )


def centers_of_pressure(geom: MissileGeometry):
    """Unperturbed centre-of-pressure matrices ``(cp_n, cp_y)``, 5x3 each.

    Rows are nose, wing, body, then LT/RT for the normal set and BT/UT for the
    side set.
    """
    g = geom
    a_n = 0.67 * g.d * g.x_n
    a_b = g.d * (g.x_l - g.x_n)
    x_nose = 0.67 * g.x_n
    x_wing = g.x_n + g.x_w + 0.7 * g.c_rw - 0.2 * g.c_tw
    x_body = (0.67 * a_n * g.x_n + a_b * (g.x_n + 0.5 * (g.x_l - g.x_n))) / (a_n + a_b)
    arm = g.h_t + g.d / 2.0
    common = [[x_nose, 0.0, 0.0], [x_wing, 0.0, 0.0], [x_body, 0.0, 0.0]]
    cp_n = np.array(common + [[g.x_hl, -arm, 0.0], [g.x_hl, arm, 0.0]])
    cp_y = np.array(common + [[g.x_hl, 0.0, -arm], [g.x_hl, 0.0, arm]])
    return cp_n, cp_y


def perturbed_centers_of_pressure(geom, perturb: AeroPerturbation):
    cp_n, cp_y = centers_of_pressure(geom)
    return cp_n * (1.0 + perturb.eps_cp_n), cp_y * (1.0 + perturb.eps_cp_y)


def inertia_tensor(geom: MissileGeometry):
    r = geom.d / 2.0
    j_t = geom.mass * (3 * r**2 + geom.x_l**2) / 12.0
    return np.diag([geom.mass * r**2 / 2.0, j_t, j_t])


def prandtl_glauert_eta(mach):
    if not mach > 1.0:
        raise OutOfEnvelopeError(f"supersonic model requires mach > 1, got {mach}")
    return np.sqrt(mach * mach - 1.0)


@njit
def _coefficients(consts, eps_n, eps_y, eps_a, alpha, beta, eta, fins):
    s_ref, s_wing, s_tail, s_plan, c_a0, k_drag = consts[0], consts[1], consts[2], consts[3], consts[4], consts[5]
    wing = 8.0 * s_wing / (eta * s_ref)
    tail = 8.0 * s_tail / (eta * s_ref)
    body = 1.5 * s_plan / (eta * s_ref)
    sa, sb = np.sin(alpha), np.sin(beta)
    c_n = np.zeros((5, 3))
    c_n[0, 2] = 2.0 * sa
    c_n[1, 2] = wing * sa
    c_n[2, 2] = body * np.sign(alpha) * sa * sa
    c_n[3, 2] = tail * np.sin(alpha - fins[0])
    c_n[4, 2] = tail * np.sin(alpha - fins[1])
    c_y = np.zeros((5, 3))
    c_y[0, 1] = 2.0 * sb
    c_y[1, 1] = wing * sb
    c_y[2, 1] = body * np.sign(beta) * sb * sb
    c_y[3, 1] = tail * np.sin(beta - fins[2])
    c_y[4, 1] = tail * np.sin(beta - fins[3])
    c_n = c_n * (1.0 + eps_n)
    c_y = c_y * (1.0 + eps_y)
    c_a = (c_a0 + k_drag * np.sqrt(np.sum(c_n) ** 2 + np.sum(c_y) ** 2)) * (1.0 + eps_a)
    return c_n, c_y, c_a


@njit
def _loads(consts, cp_n, cp_y, eps_n, eps_y, eps_a, q_dyn, alpha, beta, eta, fins, omega, speed):
    c_n, c_y, c_a = _coefficients(consts, eps_n, eps_y, eps_a, alpha, beta, eta, fins)
    s_ref, h_t, d, x_cg = consts[0], consts[6], consts[7], consts[8]
    f_n = q_dyn * s_ref * c_n
    f_y = q_dyn * s_ref * c_y
    f_a = q_dyn * s_ref * c_a
    force = np.array([-f_a, -np.sum(f_y[:, 1]), -np.sum(f_n[:, 2])])
    torque = np.zeros(3)
    for i in range(5):
        arm_n = cp_n[i].copy()
        arm_n[0] -= x_cg
        arm_y = cp_y[i].copy()
        arm_y[0] -= x_cg
        torque += np.cross(arm_n, f_n[i]) + np.cross(arm_y, f_y[i])
    # roll damping scales the undamped roll torque (rate in deg/s), then the
    # sideslip-induced roll term is added
    damp = 4.0 * (-2.15 * h_t / d) * (torque[0] * np.rad2deg(omega[0]) * d / (2.0 * speed))
    torque[0] += damp + 100.0 * beta
    return force, torque


def force_coefficients(geom: MissileGeometry, perturb: AeroPerturbation, alpha, beta, mach, fins):
    """Component force coefficients ``(C_N, C_Y, C_A)`` with perturbation applied."""
    eta = prandtl_glauert_eta(mach)
    return _coefficients(geom.constants(), perturb.eps_force_n, perturb.eps_force_y,
                         float(perturb.eps_force_a), float(alpha), float(beta), eta,
                         np.asarray(fins, dtype=float))


def aero_loads(geom: MissileGeometry, perturb: AeroPerturbation, q_dyn, alpha, beta, mach, fins,
               omega, speed) -> AeroLoads:
    if q_dyn < 0 or not speed > 0:
        raise ValueError(f"need q_dyn >= 0 and speed > 0, got {q_dyn}, {speed}")
    cp_n, cp_y = perturbed_centers_of_pressure(geom, perturb)
    force, torque = _loads(geom.constants(), cp_n, cp_y, perturb.eps_force_n, perturb.eps_force_y,
                           float(perturb.eps_force_a), float(q_dyn), float(alpha), float(beta),
                           prandtl_glauert_eta(mach), np.asarray(fins, dtype=float),
                           np.asarray(omega, dtype=float), float(speed))
    return AeroLoads(force, torque)


def lift_drag_sweep(geom, mach, alphas):
    """Wind-frame lift and drag coefficients for a pitch-plane alpha sweep."""
    zero = AeroPerturbation()
    out = []
    for a in alphas:
        c_n, _, c_a = force_coefficients(geom, zero, a, 0.0, mach, np.zeros(4))
        cn = c_n.sum()
        out.append((cn * np.cos(a) - c_a * np.sin(a), cn * np.sin(a) + c_a * np.cos(a)))
    return np.array(out)
