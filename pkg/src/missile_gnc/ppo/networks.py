"""Policy and value networks: dense -> GRU -> dense -> linear output.

Hidden widths follow the rule ``n1 = m * in_dim``, ``n3 = m * out_dim`` (policy)
or ``n3 = 5`` (value), with the recurrent width the geometric mean
``round(sqrt(n1 * n3))``; ``m`` is 10 at full size.
"""

import math
from dataclasses import asdict, dataclass

import torch
from torch import nn

torch.set_default_dtype(torch.float64)


@dataclass(frozen=True)
class NetworkSpec:
    in_dim: int
    out_dim: int
    h1: int
    h2: int
    h3: int
    recurrent: bool = True

    def to_dict(self):
        return asdict(self)


def policy_spec(obs_dim, act_dim, width_mult=10, recurrent=True):
    h1, h3 = width_mult * obs_dim, width_mult * act_dim
    return NetworkSpec(obs_dim, act_dim, h1, round(math.sqrt(h1 * h3)), h3, recurrent)


def value_spec(obs_dim, width_mult=10, recurrent=True):
    h1, h3 = width_mult * obs_dim, 5
    return NetworkSpec(obs_dim, 1, h1, round(math.sqrt(h1 * h3)), h3, recurrent)


class RecurrentMLP(nn.Module):
    """``forward(x[B, T, in], h0[1, B, h2]) -> (y[B, T, out], h_T)``.

    With ``recurrent=False`` the GRU is replaced by a dense tanh layer of the
    same width and the hidden state is passed through unchanged (zeros).
    """

    def __init__(self, spec: NetworkSpec, out_gain=1.0):
        super().__init__()
        self.spec = spec
        self.l1 = nn.Linear(spec.in_dim, spec.h1)
        if spec.recurrent:
            self.l2 = nn.GRU(spec.h1, spec.h2, batch_first=True)
        else:
            self.l2 = nn.Linear(spec.h1, spec.h2)
        self.l3 = nn.Linear(spec.h2, spec.h3)
        self.out = nn.Linear(spec.h3, spec.out_dim)
        for lin in (self.l1, self.l3):
            nn.init.orthogonal_(lin.weight, gain=math.sqrt(2))
            nn.init.zeros_(lin.bias)
        if not spec.recurrent:
            nn.init.orthogonal_(self.l2.weight, gain=math.sqrt(2))
            nn.init.zeros_(self.l2.bias)
        nn.init.orthogonal_(self.out.weight, gain=out_gain)
        nn.init.zeros_(self.out.bias)

    def initial_state(self, batch=1):
        return torch.zeros(1, batch, self.spec.h2)

    def forward(self, x, h0=None):
        if x.shape[-1] != self.spec.in_dim:
            raise ValueError(f"expected input width {self.spec.in_dim}, got {x.shape[-1]}")
        if h0 is None:
            h0 = self.initial_state(x.shape[0])
        z = torch.tanh(self.l1(x))
        if self.spec.recurrent:
            z, h = self.l2(z, h0)
        else:
            z, h = torch.tanh(self.l2(z)), h0
        z = torch.tanh(self.l3(z))
        return self.out(z), h


class GaussianPolicy(nn.Module):
    """Diagonal Gaussian with network mean and a state-independent log-std."""

    def __init__(self, spec: NetworkSpec, log_std_init=math.log(0.5), out_gain=0.01):
        """``log_std_init`` and ``out_gain`` may be scalars or per-action sequences."""
        super().__init__()
        self.net = RecurrentMLP(spec, out_gain=1.0)
        gain = torch.as_tensor(out_gain, dtype=torch.float64).expand(spec.out_dim)
        with torch.no_grad():
            self.net.out.weight.mul_(gain.reshape(-1, 1))
        init = torch.as_tensor(log_std_init, dtype=torch.float64).expand(spec.out_dim).clone()
        self.log_std = nn.Parameter(init)

    @property
    def spec(self):
        return self.net.spec

    def forward(self, obs, h0=None):
        mean, h = self.net(obs, h0)
        return mean, self.log_std.expand_as(mean), h

    @staticmethod
    def log_prob(act, mean, log_std):
        z = (act - mean) / torch.exp(log_std)
        return (-0.5 * z**2 - log_std - 0.5 * math.log(2 * math.pi)).sum(-1)


class ValueFunction(nn.Module):
    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.net = RecurrentMLP(spec, out_gain=1.0)

    @property
    def spec(self):
        return self.net.spec

    def forward(self, obs, h0=None):
        v, h = self.net(obs, h0)
        return v.squeeze(-1), h


def gaussian_kl(mean_p, log_std_p, mean_q, log_std_q):
    """KL(p || q) for diagonal Gaussians, summed over the last axis."""
    var_p, var_q = torch.exp(2 * log_std_p), torch.exp(2 * log_std_q)
    return (log_std_q - log_std_p + (var_p + (mean_p - mean_q) ** 2) / (2 * var_q) - 0.5).sum(-1)
