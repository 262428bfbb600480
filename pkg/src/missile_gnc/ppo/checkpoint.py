"""Versioned policy/value checkpoints."""

import torch

from .networks import GaussianPolicy, NetworkSpec, ValueFunction
from .scaler import RunningScaler

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, policy, value, scaler, config=None, extra=None):
    torch.save({
        "format_version": FORMAT_VERSION,
        "policy_spec": policy.spec.to_dict(),
        "value_spec": value.spec.to_dict(),
        "policy_state": policy.state_dict(),
        "value_state": value.state_dict(),
        "scaler": scaler.state_dict(),
        "config": config or {},
        "extra": extra or {},
    }, path)


def load_checkpoint(path, obs_dim=None, act_dim=None):
    """Rebuild ``(policy, value, scaler, payload)`` from ``path``.

    ``obs_dim``/``act_dim`` (if given) are checked against the stored layout.
    """
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except FileNotFoundError:
        raise
    except Exception as exc:  # corrupt or foreign file
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format")
    p_spec = NetworkSpec(**payload["policy_spec"])
    v_spec = NetworkSpec(**payload["value_spec"])
    if obs_dim is not None and p_spec.in_dim != obs_dim:
        raise CheckpointError(f"{path}: policy expects {p_spec.in_dim} observations, environment gives {obs_dim}")
    if act_dim is not None and p_spec.out_dim != act_dim:
        raise CheckpointError(f"{path}: policy emits {p_spec.out_dim} actions, environment takes {act_dim}")
    policy, value = GaussianPolicy(p_spec), ValueFunction(v_spec)
    try:
        policy.load_state_dict(payload["policy_state"])
        value.load_state_dict(payload["value_state"])
    except RuntimeError as exc:
        raise CheckpointError(f"{path}: network shape mismatch: {exc}") from exc
    scaler = RunningScaler.from_state_dict(payload["scaler"])
    if scaler.dim != p_spec.in_dim:
        raise CheckpointError(f"{path}: scaler width {scaler.dim} != policy input {p_spec.in_dim}")
    return policy, value, scaler, payload
