"""Proximal policy optimisation for the guidance environment."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .networks import GaussianPolicy, NetworkSpec, ValueFunction, policy_spec, value_spec
from .scaler import RunningScaler
from .trainer import PolicyAgent, PPOConfig, PPOTrainer, rollout_episode, train

__all__ = ["CheckpointError", "GaussianPolicy", "NetworkSpec", "PPOConfig", "PPOTrainer", "PolicyAgent",
           "RunningScaler", "ValueFunction", "load_checkpoint", "policy_spec", "rollout_episode",
           "save_checkpoint", "train", "value_spec"]
