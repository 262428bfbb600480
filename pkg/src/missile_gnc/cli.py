"""Command-line entry point: train, eval, benchmark, trace, selftest.

Exit codes: 0 success, 1 usage or input error, 2 runtime fault. Outputs go
under ``$MISSILE_GNC_OUTPUT`` (falling back to the config's ``output_dir``);
every CSV starts with comment lines carrying the config hash and seed.
"""

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .engagement import PRESETS, TABLE_ROWS
from .env import ACT_DIM, OBS_DIM, GncEnv
from .evaluation import STAT_COLUMNS, ScriptedController, evaluate_policy
from .pn3dof import run_benchmark

log = logging.getLogger("missile_gnc")

EXIT_OK, EXIT_USAGE, EXIT_FAULT = 0, 1, 2
OUTPUT_ENV = "MISSILE_GNC_OUTPUT"
TRACE_KINDS = ("fig3", "fig4", "fig7", "fig8", "engagement")


class UsageFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageFailure(message)


def output_root(cfg):
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output_dir)


def header_lines(cfg, seed, command):
    return f"# command={command}\n# config_hash={cfg.digest()}\n# seed={seed}\n"


def write_csv(path, columns, rows, header=""):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(header)
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([f"{v:.9g}" if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def _presets(names):
    if not names:
        return None
    out = list(TABLE_ROWS) if names == ["all"] else names
    bad = [n for n in out if n not in PRESETS]
    if bad:
        raise UsageFailure(f"unknown preset(s) {bad}; choose from {sorted(PRESETS)} or 'all'")
    return out


def _load(args):
    from .config import load_config

    if args.config is not None and not Path(args.config).is_file():
        raise UsageFailure(f"config file not found: {args.config}")
    try:
        cfg = load_config(args.config)
    except ValidationError as exc:
        raise UsageFailure(f"invalid config {args.config}:\n{exc}") from exc
    except ValueError as exc:
        raise UsageFailure(str(exc)) from exc
    if getattr(args, "seed", None) is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    return cfg


def _policy(args, cfg):
    if args.checkpoint in (None, "scripted"):
        return ScriptedController(), "scripted"
    from .ppo import CheckpointError, PolicyAgent, load_checkpoint

    if not Path(args.checkpoint).is_file():
        raise UsageFailure(f"checkpoint not found: {args.checkpoint}")
    try:
        policy, _, scaler, _ = load_checkpoint(args.checkpoint, OBS_DIM, ACT_DIM)
    except CheckpointError as exc:
        raise UsageFailure(str(exc)) from exc
    return PolicyAgent(policy, scaler, deterministic=True), Path(args.checkpoint).stem


# -- commands ------------------------------------------------------------------

def cmd_train(args):
    from .ppo import train

    cfg = _load(args)
    if args.workers is not None:
        cfg = cfg.model_copy(update={"workers": args.workers})
    tr = cfg.training
    out = Path(args.out) if args.out else output_root(cfg) / f"train_{cfg.preset}_{cfg.digest()}_s{cfg.seed}"
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfg.to_yaml())
    hours = args.max_hours if args.max_hours is not None else tr.max_hours
    batches = args.max_batches if args.max_batches is not None else tr.max_batches
    train(cfg.ppo_config(), out, max_batches=batches, max_hours=hours, checkpoint_every=tr.checkpoint_every,
          header=header_lines(cfg, cfg.seed, "train"), log=log.info, cpu_clock=tr.cpu_clock)
    print(out)
    return EXIT_OK


def cmd_eval(args):
    cfg = _load(args)
    agent, tag = _policy(args, cfg)
    presets = _presets(args.preset) or [cfg.preset]
    out = output_root(cfg)
    rows = []
    for name in presets:
        episodes = []
        stats = evaluate_policy(agent, cfg.build_preset(name), args.episodes, cfg.seed,
                                actuator=cfg.actuator.model(cfg.actuator.eval_mode),
                                env_kwargs=cfg.env_kwargs(), episode_log=episodes)
        rows.append([getattr(stats, c) for c in STAT_COLUMNS])
        write_csv(out / f"eval_{tag}_{name}_episodes.csv", list(episodes[0].keys()),
                  [list(e.values()) for e in episodes], header_lines(cfg, cfg.seed, f"eval {name}"))
    path = write_csv(out / f"eval_{tag}.csv", STAT_COLUMNS, rows, header_lines(cfg, cfg.seed, "eval"))
    _print_table(STAT_COLUMNS, rows)
    if args.trace:
        from .traces import engagement_trace

        env = GncEnv(cfg.build_preset(presets[0]), actuator=cfg.actuator.model(cfg.actuator.eval_mode),
                     **cfg.env_kwargs())
        seed = np.random.SeedSequence(cfg.seed).spawn(1)[0]
        cols, trows = engagement_trace(env, agent, seed)
        write_csv(out / f"trace_{tag}_{presets[0]}.csv", cols, trows, header_lines(cfg, cfg.seed, "eval --trace"))
    print(path)
    return EXIT_OK


def cmd_benchmark(args):
    cfg = _load(args)
    params = cfg.benchmark.params(cfg.ppo.max_time)
    if args.tau_g is not None:
        from dataclasses import replace

        params = replace(params, tau_g=args.tau_g)
    presets = _presets(args.preset) or [cfg.preset]
    rows = []
    for name in presets:
        stats, _ = run_benchmark(cfg.build_preset(name), args.episodes, cfg.seed, params)
        rows.append([getattr(stats, c) for c in STAT_COLUMNS])
    path = write_csv(output_root(cfg) / f"benchmark_tau{params.tau_g:g}.csv", STAT_COLUMNS, rows,
                     header_lines(cfg, cfg.seed, f"benchmark tau_g={params.tau_g:g}"))
    _print_table(STAT_COLUMNS, rows)
    print(path)
    return EXIT_OK


def cmd_trace(args):
    from . import traces

    cfg = _load(args)
    geom = cfg.geometry_model()
    if args.kind == "fig3":
        cols, rows = traces.lift_drag(geom)
    elif args.kind == "fig4":
        cols, rows = traces.open_loop_response(geom=geom)
    elif args.kind == "fig7":
        cols, rows = traces.maneuver_samples(seed=cfg.seed, bounds=cfg.build_preset().scenario)
    elif args.kind == "fig8":
        cols, rows = traces.radome_curves()
    else:
        agent, _ = _policy(args, cfg)
        env = GncEnv(cfg.build_preset(), actuator=cfg.actuator.model(cfg.actuator.eval_mode), **cfg.env_kwargs())
        cols, rows = traces.engagement_trace(env, agent, np.random.SeedSequence(cfg.seed).spawn(1)[0])
    path = write_csv(output_root(cfg) / f"trace_{args.kind}.csv", cols, rows,
                     header_lines(cfg, cfg.seed, f"trace {args.kind}"))
    print(path)
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_checks

    ok = True
    for name, passed, detail in run_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
    return EXIT_OK if ok else EXIT_FAULT


def _print_table(columns, rows):
    print(",".join(columns))
    for r in rows:
        print(",".join(f"{v:.2f}" if isinstance(v, float) else str(v) for v in r))


def build_parser():
    p = _Parser(prog="missile-gnc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="YAML run configuration (defaults if omitted)")
        sp.add_argument("--seed", type=int, help="override the config seed")

    sp = sub.add_parser("train", help="optimise a policy with PPO")
    common(sp)
    sp.add_argument("--out", help="run directory (default: under the output root)")
    sp.add_argument("--max-batches", type=int)
    sp.add_argument("--max-hours", type=float)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint (or the scripted controller)")
    common(sp)
    sp.add_argument("--checkpoint", default="scripted", help="checkpoint path or 'scripted'")
    sp.add_argument("--preset", action="append", help="preset name, repeatable, or 'all'")
    sp.add_argument("--episodes", type=int, default=100)
    sp.add_argument("--trace", action="store_true", help="also write a one-episode trace")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("benchmark", help="3-DOF proportional-navigation benchmark")
    common(sp)
    sp.add_argument("--preset", action="append", help="preset name, repeatable, or 'all'")
    sp.add_argument("--episodes", type=int, default=2000)
    sp.add_argument("--tau-g", type=float, help="guidance time constant override, s")
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("trace", help="write plot data")
    common(sp)
    sp.add_argument("kind", choices=TRACE_KINDS)
    sp.add_argument("--checkpoint", default="scripted", help="for 'engagement': checkpoint path or 'scripted'")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("selftest", help="run the built-in invariant checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s")
    t0 = time.time()
    try:
        code = args.func(args)
    except UsageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to one exit code
        log.exception("runtime fault: %s", exc)
        return EXIT_FAULT
    log.debug("done in %.1f s", time.time() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
