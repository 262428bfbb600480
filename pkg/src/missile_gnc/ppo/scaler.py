"""Running per-dimension observation standardisation."""

import numpy as np


class RunningScaler:
    """Streaming mean/variance, merged batch-wise (Chan et al. parallel update)."""

    def __init__(self, dim, var_floor=1e-8):
        self.dim = dim
        self.var_floor = var_floor
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    @property
    def var(self):
        return self.m2 / self.count if self.count > 0 else np.ones(self.dim)

    def update(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        n_b = x.shape[0]
        if n_b == 0:
            return
        mean_b = x.mean(axis=0)
        m2_b = ((x - mean_b) ** 2).sum(axis=0)
        n = self.count + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * n_b / n
        self.m2 = self.m2 + m2_b + delta**2 * self.count * n_b / n
        self.count = n

    def scale(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / np.sqrt(np.maximum(self.var, self.var_floor))

    def snapshot(self):
        s = RunningScaler(self.dim, self.var_floor)
        s.count, s.mean, s.m2 = self.count, self.mean.copy(), self.m2.copy()
        return s

    def state_dict(self):
        return {"dim": self.dim, "var_floor": self.var_floor, "count": self.count,
                "mean": self.mean.tolist(), "m2": self.m2.tolist()}

    @classmethod
    def from_state_dict(cls, d):
        s = cls(d["dim"], d["var_floor"])
        s.count, s.mean, s.m2 = d["count"], np.array(d["mean"]), np.array(d["m2"])
        return s
