"""PPO with recurrent policy/value networks and a KL-servoed clip range.

Each batch is a set of complete episodes. Sequences are kept whole so the
GRU state threads through an episode and restarts at zero for the next one.
"""

import csv
import math
import multiprocessing as mp
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import torch

from ..actuation import ActuatorModel
from ..aero import MissileGeometry
from ..env import ACT_DIM, OBS_DIM, GncEnv
from .checkpoint import save_checkpoint
from .networks import GaussianPolicy, ValueFunction, gaussian_kl, policy_spec, value_spec
from .returns import dual_returns, normalize, split_streams
from .scaler import RunningScaler

CURVE_COLUMNS = ("batch", "episodes", "env_steps", "mean_R", "sd_R", "std_R", "min_R", "max_R", "mean_steps",
                 "max_steps", "miss_mean", "miss_median", "miss_lt_3_pct", "violation_pct", "kl", "clip",
                 "lr_policy", "loss_policy", "loss_value", "epochs_run", "wall_s")


@dataclass
class PPOConfig:
    preset: object = "nominal"    # preset name or Preset
    geometry: dict = field(default_factory=dict)
    actuator: str = "first_order"
    episodes_per_batch: int = 60
    epochs: int = 10
    clip: float = 0.2
    clip_bounds: tuple = (0.01, 0.5)
    lr_policy: float = 3e-4
    lr_value: float = 1e-3
    lr_bounds: tuple = (1e-6, 1e-2)
    kl_target: float = 1e-3
    kl_band: float = 1.5          # servo acts when KL leaves [target/band, target*band]
    servo_factor: float = 1.5
    gamma_shaping: float = 0.90
    gamma_terminal: float = 0.995
    width_mult: int = 10
    recurrent: bool = True
    log_std_init: object = math.log(0.5)   # scalar or per-action sequence
    out_gain: object = 0.01
    max_grad_norm: float = 1.0
    scaler_warmup_episodes: int = 10
    workers: int = 1
    seed: int = 0
    max_time: float = 40.0

    def to_dict(self):
        return asdict(self)


@dataclass
class Episode:
    obs: np.ndarray          # raw observations, (T, obs_dim)
    act: np.ndarray          # sampled (unclipped) actions, (T, act_dim)
    logp: np.ndarray         # log-probs under the rollout policy, (T,)
    shaping: np.ndarray
    terminal: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def ret(self):
        return float(self.shaping.sum() + self.terminal.sum())


def rollout_episode(env, policy, scaler, seed, deterministic=False):
    """Run one episode with the stochastic policy; all randomness from ``seed``."""
    env_seed, act_seed = np.random.SeedSequence(seed).spawn(2) if not isinstance(seed, np.random.SeedSequence) \
        else seed.spawn(2)
    noise_rng = np.random.default_rng(act_seed)
    obs = env.reset(env_seed)
    h = policy.net.initial_state(1)
    std = torch.exp(policy.log_std).detach().numpy()
    obs_l, act_l, logp_l, comps = [], [], [], []
    with torch.no_grad():
        while True:
            x = torch.as_tensor(scaler.scale(obs)).reshape(1, 1, -1)
            mean, log_std, h = policy(x, h)
            mean = mean.reshape(-1).numpy()
            u = mean if deterministic else mean + std * noise_rng.standard_normal(mean.shape)
            logp = float(GaussianPolicy.log_prob(torch.as_tensor(u), torch.as_tensor(mean),
                                                 log_std.reshape(-1)))
            res = env.step(u)
            obs_l.append(obs)
            act_l.append(u)
            logp_l.append(logp)
            comps.append(res.info["components"])
            obs = res.obs
            if res.done:
                break
    shaping, terminal = split_streams(comps)
    info = {k: res.info[k] for k in ("reason", "miss", "final_speed", "t")}
    info["steps"] = len(act_l)
    return Episode(np.array(obs_l), np.array(act_l), np.array(logp_l), shaping, terminal, info)


def _make_env(cfg: PPOConfig):
    geom = replace(MissileGeometry(), **cfg.geometry)
    return GncEnv(cfg.preset, actuator=ActuatorModel(cfg.actuator), geom=geom, max_time=cfg.max_time)


def _worker(args):
    cfg, p_spec, p_state, scaler_state, seeds = args
    torch.set_num_threads(1)
    policy = GaussianPolicy(p_spec)
    policy.load_state_dict(p_state)
    scaler = RunningScaler.from_state_dict(scaler_state)
    env = _make_env(cfg)
    return [rollout_episode(env, policy, scaler, s) for s in seeds]


class PPOTrainer:
    def __init__(self, cfg: PPOConfig):
        torch.set_num_threads(1)
        torch.manual_seed(cfg.seed)
        self.cfg = cfg
        self.policy = GaussianPolicy(policy_spec(OBS_DIM, ACT_DIM, cfg.width_mult, cfg.recurrent),
                                     cfg.log_std_init, cfg.out_gain)
        self.value = ValueFunction(value_spec(OBS_DIM, cfg.width_mult, cfg.recurrent))
        self.opt_p = torch.optim.Adam(self.policy.parameters(), lr=cfg.lr_policy)
        self.opt_v = torch.optim.Adam(self.value.parameters(), lr=cfg.lr_value)
        self.clip = cfg.clip
        self.lr_policy = cfg.lr_policy
        self.scaler = RunningScaler(OBS_DIM)
        self.snapshot = self.scaler.snapshot()
        self.env = _make_env(cfg)
        self.master = np.random.SeedSequence(cfg.seed)
        self.batch_index = 0
        self._pool = None

    # -- rollouts ----------------------------------------------------------------

    def _batch_seeds(self, n):
        # one child sequence per batch, one grandchild per episode: reproducible
        # regardless of how episodes are spread over workers
        return np.random.SeedSequence(self.master.entropy, spawn_key=(self.batch_index,)).spawn(n)

    def collect(self, n=None):
        n = n or self.cfg.episodes_per_batch
        seeds = self._batch_seeds(n)
        if self.cfg.workers <= 1:
            return [rollout_episode(self.env, self.policy, self.snapshot, s) for s in seeds]
        if self._pool is None:
            self._pool = mp.get_context("fork").Pool(self.cfg.workers)
        chunks = [seeds[i::self.cfg.workers] for i in range(self.cfg.workers)]
        state = {k: v.clone() for k, v in self.policy.state_dict().items()}
        args = [(self.cfg, self.policy.spec, state, self.snapshot.state_dict(), c) for c in chunks]
        out = [None] * n
        for w, eps in enumerate(self._pool.map(_worker, args)):
            for j, ep in enumerate(eps):
                out[w + j * self.cfg.workers] = ep
        return out

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def warmup_scaler(self):
        if self.cfg.scaler_warmup_episodes > 0:
            self.batch_index = -1 % (2**32)
            eps = self.collect(self.cfg.scaler_warmup_episodes)
            self.batch_index = 0
            self.scaler.update(np.concatenate([e.obs for e in eps]))
            self.snapshot = self.scaler.snapshot()

    # -- update ------------------------------------------------------------------

    def _pad(self, episodes):
        t_max = max(len(e.act) for e in episodes)
        b = len(episodes)
        obs = np.zeros((b, t_max, OBS_DIM))
        act = np.zeros((b, t_max, ACT_DIM))
        logp = np.zeros((b, t_max))
        mask = np.zeros((b, t_max))
        for i, e in enumerate(episodes):
            t = len(e.act)
            obs[i, :t] = self.snapshot.scale(e.obs)
            act[i, :t] = e.act
            logp[i, :t] = e.logp
            mask[i, :t] = 1.0
        return (torch.as_tensor(obs), torch.as_tensor(act), torch.as_tensor(logp), torch.as_tensor(mask))

    def advantages(self, episodes, values):
        """Dual-stream return targets and normalised advantages (padded arrays)."""
        b, t_max = values.shape
        ret = np.zeros((b, t_max))
        for i, e in enumerate(episodes):
            t = len(e.act)
            ret[i, :t] = dual_returns(e.shaping, e.terminal, self.cfg.gamma_shaping, self.cfg.gamma_terminal)
        adv = np.zeros((b, t_max))
        valid = np.zeros((b, t_max), dtype=bool)
        for i, e in enumerate(episodes):
            valid[i, :len(e.act)] = True
        adv[valid] = normalize(ret[valid] - values[valid])
        return torch.as_tensor(ret), torch.as_tensor(adv)

    def surrogate(self, obs, act, logp_old, adv, mask, clip):
        mean, log_std, _ = self.policy(obs)
        logp = GaussianPolicy.log_prob(act, mean, log_std)
        ratio = torch.exp(logp - logp_old)
        surr = torch.minimum(ratio * adv, torch.clamp(ratio, 1 - clip, 1 + clip) * adv)
        return (surr * mask).sum() / mask.sum(), ratio

    def value_loss(self, obs, ret, mask):
        v, _ = self.value(obs)
        return (((v - ret) ** 2) * mask).sum() / mask.sum()

    def update(self, episodes):
        obs, act, logp_old, mask = self._pad(episodes)
        with torch.no_grad():
            values, _ = self.value(obs)
            mean_old, log_std_old, _ = self.policy(obs)
        ret, adv = self.advantages(episodes, values.numpy())
        saved = ({k: v.clone() for k, v in self.policy.state_dict().items()},
                 {k: v.clone() for k, v in self.value.state_dict().items()})
        loss_p = loss_v = float("nan")
        for _ in range(self.cfg.epochs):
            obj, _ = self.surrogate(obs, act, logp_old, adv, mask, self.clip)
            loss = -obj
            lv = self.value_loss(obs, ret, mask)
            if not (torch.isfinite(loss) and torch.isfinite(lv)):
                self.policy.load_state_dict(saved[0])
                self.value.load_state_dict(saved[1])
                return {"kl": float("nan"), "loss_policy": float("nan"), "loss_value": float("nan"),
                        "aborted": True}
            self.opt_p.zero_grad()
            loss.backward()
            if self.cfg.max_grad_norm:
                torch.nn.utils.clip_grad_norm_(self.policy.parameters(), self.cfg.max_grad_norm)
            self.opt_p.step()
            self.opt_v.zero_grad()
            lv.backward()
            if self.cfg.max_grad_norm:
                torch.nn.utils.clip_grad_norm_(self.value.parameters(), self.cfg.max_grad_norm)
            self.opt_v.step()
            loss_p, loss_v = loss.item(), lv.item()
        with torch.no_grad():
            mean_new, log_std_new, _ = self.policy(obs)
            kl = float((gaussian_kl(mean_old, log_std_old, mean_new, log_std_new) * mask).sum() / mask.sum())
        self.servo(kl)
        return {"kl": kl, "loss_policy": loss_p, "loss_value": loss_v, "aborted": False}

    def servo(self, kl):
        """Steer the clip range and policy step size toward the KL target."""
        c = self.cfg
        if kl > c.kl_target * c.kl_band:
            self.clip /= c.servo_factor
            self.lr_policy /= c.servo_factor
        elif kl < c.kl_target / c.kl_band:
            self.clip *= c.servo_factor
            self.lr_policy *= c.servo_factor
        self.clip = float(np.clip(self.clip, *c.clip_bounds))
        self.lr_policy = float(np.clip(self.lr_policy, *c.lr_bounds))
        for g in self.opt_p.param_groups:
            g["lr"] = self.lr_policy

    # -- loop --------------------------------------------------------------------

    def step(self):
        """Collect one batch, update, refresh the scaler; returns curve row."""
        t0 = time.time()
        episodes = self.collect()
        metrics = self.update(episodes)
        self.scaler.update(np.concatenate([e.obs for e in episodes]))
        self.snapshot = self.scaler.snapshot()
        rets = np.array([e.ret for e in episodes])
        steps = np.array([e.info["steps"] for e in episodes])
        miss = np.array([e.info["miss"] for e in episodes])
        viol = np.array([e.info["reason"] not in ("closing", "timeout") for e in episodes])
        row = {
            "batch": self.batch_index, "episodes": len(episodes), "env_steps": int(steps.sum()),
            "mean_R": rets.mean(), "sd_R": rets.mean() - rets.std(), "std_R": rets.std(), "min_R": rets.min(),
            "max_R": rets.max(), "mean_steps": steps.mean(), "max_steps": int(steps.max()),
            "miss_mean": miss.mean(), "miss_median": float(np.median(miss)),
            "miss_lt_3_pct": 100.0 * np.mean(miss < 3.0), "violation_pct": 100.0 * viol.mean(),
            "kl": metrics["kl"], "clip": self.clip, "lr_policy": self.lr_policy,
            "loss_policy": metrics["loss_policy"], "loss_value": metrics["loss_value"],
            "epochs_run": 0 if metrics["aborted"] else self.cfg.epochs, "wall_s": time.time() - t0,
        }
        self.batch_index += 1
        return row

    def save(self, path, extra=None):
        save_checkpoint(path, self.policy, self.value, self.scaler, self.cfg.to_dict(), extra)


def train(cfg: PPOConfig, out_dir, max_batches=1000, max_hours=None, checkpoint_every=10, header="", log=print,
          cpu_clock=False):
    """Train until ``max_batches`` or ``max_hours``; writes curve CSV and checkpoints.

    With ``cpu_clock`` the hour budget counts process CPU time, so concurrent
    runs on a shared machine each get the same amount of compute.
    """
    clock = time.process_time if cpu_clock else time.time
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trainer = PPOTrainer(cfg)
    trainer.warmup_scaler()
    start = clock()
    best = -np.inf
    curve_path = out / "learning_curve.csv"
    try:
        with open(curve_path, "w", newline="") as fh:
            if header:
                fh.write(header)
            writer = csv.DictWriter(fh, fieldnames=CURVE_COLUMNS)
            writer.writeheader()
            for _ in range(max_batches):
                row = trainer.step()
                writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
                fh.flush()
                if log:
                    log(f"batch {row['batch']:5d}  R {row['mean_R']:8.2f}  miss<3 {row['miss_lt_3_pct']:5.1f}%  "
                        f"viol {row['violation_pct']:5.1f}%  kl {row['kl']:.2e}  clip {row['clip']:.3f}")
                if row["mean_R"] > best:
                    best = row["mean_R"]
                    trainer.save(out / "best.pt", {"batch": row["batch"], "mean_R": best})
                if (row["batch"] + 1) % checkpoint_every == 0:
                    trainer.save(out / "latest.pt", {"batch": row["batch"]})
                if max_hours is not None and clock() - start > max_hours * 3600:
                    break
        trainer.save(out / "latest.pt", {"batch": trainer.batch_index - 1})
    finally:
        trainer.close()
    return trainer


class PolicyAgent:
    """Adapter giving a trained network the ``reset()/act(obs)`` interface."""

    def __init__(self, policy, scaler, deterministic=True, seed=0):
        self.policy = policy
        self.scaler = scaler
        self.deterministic = deterministic
        self.rng = np.random.default_rng(seed)
        self.reset()

    def reset(self):
        self.h = self.policy.net.initial_state(1)

    def act(self, obs):
        with torch.no_grad():
            x = torch.as_tensor(self.scaler.scale(obs)).reshape(1, 1, -1)
            mean, log_std, self.h = self.policy(x, self.h)
        u = mean.reshape(-1).numpy()
        if not self.deterministic:
            u = u + np.exp(log_std.reshape(-1).numpy()) * self.rng.standard_normal(u.shape)
        return u
