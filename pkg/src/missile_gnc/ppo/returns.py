"""Discounted returns with separate discounts for shaping and terminal rewards."""

import numpy as np

SHAPING_KEYS = ("shaping", "roll_rate", "control")
TERMINAL_KEYS = ("bonus", "penalty")


def discounted(rewards, gamma):
    out = np.zeros(len(rewards))
    acc = 0.0
    for k in range(len(rewards) - 1, -1, -1):
        acc = rewards[k] + gamma * acc
        out[k] = acc
    return out


def dual_returns(shaping, terminal, gamma_shaping=0.90, gamma_terminal=0.995):
    """Sum of the two separately discounted reward streams, per step."""
    return discounted(shaping, gamma_shaping) + discounted(terminal, gamma_terminal)


def split_streams(components):
    """Per-step component dicts -> (shaping stream, terminal stream) arrays."""
    shaping = np.array([sum(c[k] for k in SHAPING_KEYS) for c in components])
    terminal = np.array([sum(c[k] for k in TERMINAL_KEYS) for c in components])
    return shaping, terminal


def normalize(adv, eps=1e-8):
    adv = np.asarray(adv, dtype=float)
    return (adv - adv.mean()) / (adv.std() + eps)
