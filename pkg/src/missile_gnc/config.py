"""Schema-validated run configuration (YAML) with reference defaults.

Every section rejects unknown keys. Omitted sections take the defaults
below; optional overrides (``sensors``, ``radome``, ``perturbation``) replace
the corresponding part of the chosen preset only when given.
"""

import hashlib
import json
import math
from dataclasses import fields, replace
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .actuation import ActuatorModel
from .aero import MissileGeometry, PerturbationBounds
from .engagement import PRESETS
from .pn3dof import A_REF, Pn3dofParams
from .dynamics import GRAVITY
from .ppo.trainer import PPOConfig
from .sensors import RadomeBounds, SensorErrors

GEOMETRY_FIELDS = tuple(f.name for f in fields(MissileGeometry))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SensorSettings(_Strict):
    gyro_scale: float = Field(1e-3, ge=0, description="gyro scale-factor bound (reference value)")
    gyro_noise: float = Field(1e-3, ge=0, description="gyro noise bound, rad/s (reference value)")
    accel_scale: float = Field(1e-3, ge=0, description="accelerometer scale-factor bound (reference value)")


class RadomeSettings(_Strict):
    amp: float = Field(1e-2, ge=0, description="peak refraction amplitude A_u, A_v, rad (reference value)")
    k_min: float = Field(1.0, gt=0, description="radome slope parameter lower bound (reference value)")
    k_max: float = Field(3.0, gt=0, description="radome slope parameter upper bound (reference value)")


class PerturbationSettings(_Strict):
    force: float = Field(0.1, ge=0, description="normal/side force coefficient variation (reference value)")
    axial: float = Field(0.1, ge=0, description="axial coefficient variation (reference value)")
    cp: float = Field(0.01, ge=0, description="centre-of-pressure variation (reference value)")


class ActuatorSettings(_Strict):
    train_mode: Literal["ideal", "first_order", "second_order"] = Field(
        "first_order", description="actuator model used during optimisation")
    eval_mode: Literal["ideal", "first_order", "second_order"] = Field(
        "second_order", description="actuator model used for testing")
    tau: float = Field(0.02, gt=0, description="first-order time constant, s")
    zeta: float = Field(0.7, gt=0, lt=1, description="second-order damping ratio")
    omega: float = Field(150.0, gt=0, description="second-order natural frequency, rad/s")

    def model(self, mode):
        return ActuatorModel(mode, self.tau, self.zeta, self.omega)


class PPOSettings(_Strict):
    episodes_per_batch: int = Field(60, ge=1, description="rollouts per update (60 episodes)")
    epochs: int = Field(10, ge=1)
    clip: float = Field(0.2, gt=0)
    clip_bounds: tuple[float, float] = (0.01, 0.5)
    lr_policy: float = Field(3e-4, gt=0)
    lr_value: float = Field(1e-3, gt=0)
    lr_bounds: tuple[float, float] = (1e-6, 1e-2)
    kl_target: float = Field(1e-3, gt=0, description="KL servo target (0.001)")
    kl_band: float = Field(1.5, gt=1)
    servo_factor: float = Field(1.5, gt=1)
    gamma_shaping: float = Field(0.90, gt=0, le=1, description="shaping-reward discount (0.90)")
    gamma_terminal: float = Field(0.995, gt=0, le=1, description="terminal-reward discount (0.995)")
    width_mult: int = Field(10, ge=1, description="hidden-width multiplier (10 at full size)")
    recurrent: bool = True
    log_std_init: float | list[float] = math.log(0.5)
    out_gain: float | list[float] = 0.01
    max_grad_norm: float = Field(1.0, ge=0)
    scaler_warmup_episodes: int = Field(10, ge=0)
    max_time: float = Field(40.0, gt=0)


class TrainingSettings(_Strict):
    max_batches: int = Field(1000, ge=1)
    max_hours: Optional[float] = Field(None, gt=0)
    cpu_clock: bool = Field(False, description="count max_hours in process CPU time")
    checkpoint_every: int = Field(10, ge=1)


class BenchmarkSettings(_Strict):
    nav_gain: float = Field(3.0, gt=0, description="navigation ratio N = 3")
    tau_g: float = Field(0.3, ge=0, description="guidance time constant 0.3 s")
    a_ref_g: float = Field(A_REF / GRAVITY, gt=0, description="sea-level 1000 m/s acceleration limit, 74 g")
    drag_k: float = Field(4.0, ge=0, description="drag constant k = 4")
    drag_unit_g: bool = Field(True, description="|a_M| enters the drag law in g")

    def params(self, max_time=40.0):
        return Pn3dofParams(self.nav_gain, self.tau_g, self.a_ref_g * GRAVITY, self.drag_k,
                            GRAVITY if self.drag_unit_g else 1.0, max_time)


class RunConfig(_Strict):
    preset: str = Field("nominal", description="engagement preset name")
    geometry: dict[str, float] = Field(default_factory=dict, description="MissileGeometry field overrides")
    sensors: Optional[SensorSettings] = None
    radome: Optional[RadomeSettings] = None
    perturbation: Optional[PerturbationSettings] = None
    actuator: ActuatorSettings = ActuatorSettings()
    ppo: PPOSettings = PPOSettings()
    training: TrainingSettings = TrainingSettings()
    benchmark: BenchmarkSettings = BenchmarkSettings()
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    output_dir: str = "runs"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, v):
        if v not in PRESETS:
            raise ValueError(f"unknown preset {v!r}; choose from {sorted(PRESETS)}")
        return v

    @field_validator("geometry")
    @classmethod
    def _known_geometry(cls, v):
        bad = sorted(set(v) - set(GEOMETRY_FIELDS))
        if bad:
            raise ValueError(f"unknown geometry fields {bad}; valid: {list(GEOMETRY_FIELDS)}")
        return v

    # -- builders --------------------------------------------------------------

    def geometry_model(self):
        return replace(MissileGeometry(), **self.geometry)

    def build_preset(self, name=None):
        pre = PRESETS[name or self.preset]
        changes = {}
        if self.sensors is not None:
            changes["sensors"] = SensorErrors(**self.sensors.model_dump())
        if self.radome is not None:
            changes["radome"] = RadomeBounds(**self.radome.model_dump())
        if self.perturbation is not None:
            changes["perturbation"] = PerturbationBounds(**self.perturbation.model_dump())
        return replace(pre, **changes) if changes else pre

    def env_kwargs(self):
        return {"geom": self.geometry_model(), "max_time": self.ppo.max_time}

    def ppo_config(self):
        d = self.ppo.model_dump()
        d["clip_bounds"], d["lr_bounds"] = tuple(d["clip_bounds"]), tuple(d["lr_bounds"])
        return PPOConfig(preset=self.build_preset(), actuator=self.actuator.train_mode, seed=self.seed,
                         workers=self.workers, geometry=dict(self.geometry), **d)

    # -- serialisation ---------------------------------------------------------

    def to_yaml(self):
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)

    def digest(self):
        """Short hash of the canonical JSON form, written into output headers."""
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def load_config(path=None):
    """Parse a YAML file into :class:`RunConfig` (defaults when ``path`` is None)."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return RunConfig.model_validate(data)


def parse_config(text):
    return RunConfig.model_validate(yaml.safe_load(text) or {})

