"""Command-line entry point: ``aoiitrack {simulate,train-rl,sweep}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .belief import expected_cost
from .policies import POLICY_NAMES
from .rlmpc import RlMpcConfig, train_rl_mpc
from .scenarios import build_scenario_fire, build_scenario_grid
from .sim import EpisodeConfig, PolicySpec, Timer, run_batch, simulate
from .source import ChannelModel, load_model
from .sweep import load_sweep, rows_to_csv, run_sweep, write_csv
from .valuenet import load_net, save_net

log = logging.getLogger("aoiitrack")


def _add_scenario_args(p):
    p.add_argument("--scenario", choices=["fire", "grid", "file"], default="fire")
    p.add_argument("--lx", type=int, default=3)
    p.add_argument("--ly", type=int, default=3)
    p.add_argument("--boundary", choices=["renormalize", "stay"], default="renormalize")
    p.add_argument("--model-file", help="model document for --scenario file")
    p.add_argument("--rho-s", type=float, default=0.8)
    p.add_argument("--dmax", type=int, default=15)
    p.add_argument("--initial-state", type=int, default=0)


def _model(args):
    if args.scenario == "fire":
        return build_scenario_fire()
    if args.scenario == "grid":
        return build_scenario_grid(args.lx, args.ly, args.boundary)
    if not args.model_file:
        raise SystemExit("--scenario file needs --model-file")
    return load_model(args.model_file)


def cmd_simulate(args):
    model = _model(args)
    channel = ChannelModel(args.rho_s)
    net = load_net(args.checkpoint) if args.checkpoint else None
    if args.policy == "rl-mpc" and net is None:
        raise SystemExit("rl-mpc needs --checkpoint (see train-rl)")
    cfg = EpisodeConfig(model, channel, PolicySpec(args.policy, args.lookahead, net),
                        slots=args.slots, d_max=args.dmax, seed=args.seed,
                        initial_state=args.initial_state)
    with Timer() as t:
        res = run_batch(cfg, args.episodes, workers=args.workers)
    param = repr(args.rho_s) if args.scenario != "grid" else f"{args.lx}x{args.ly}"
    row = {"scenario": args.scenario, "param": param, "policy": args.policy,
           "lookahead": args.lookahead if args.policy in ("mpc-wtc", "rl-mpc") else 0,
           "episodes": args.episodes, "slots": args.slots, "seed": args.seed,
           "maoii": res.maoii, "stderr": res.stderr, "erasure_rate": res.erasure_rate,
           "wall_ms": round(t.ms, 1)}
    if args.out:
        write_csv([row], args.out)
    if args.trace:
        write_trace(cfg, args.trace, model)
    sys.stdout.write(rows_to_csv([row]))


def write_trace(cfg, path, model):
    """Per-slot dump of episode 0 (one line per slot, so files get large)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "true_state", "estimate", "aoii", "action", "delivered",
                    "expected_cost"])
        for t, b, xhat, x, aoii, a, packet in simulate(cfg):
            w.writerow([t, model.label(x), model.label(xhat), aoii, a, int(not packet.erased),
                        repr(expected_cost(b))])


def cmd_train(args):
    model = _model(args)
    channel = ChannelModel(args.rho_s)
    cfg = RlMpcConfig(horizon=args.lookahead, iterations=args.iterations,
                      samples_per_iteration=args.samples, learning_rate=args.lr,
                      epochs=args.epochs, batch_size=args.batch_size,
                      hidden_width=args.hidden, seed=args.seed, d_max=args.dmax,
                      initial_state=args.initial_state)
    res = train_rl_mpc(cfg, model, channel, checkpoint_dir=args.checkpoint_dir,
                       log_path=args.log,
                       progress=lambda d, loss, w: log.info("iteration %d: loss %.6g (%.1fs)",
                                                            d, loss, w))
    save_net(res.net, args.checkpoint)
    log.info("wrote %s", args.checkpoint)


def cmd_sweep(args):
    spec = load_sweep(args.spec)
    rows = run_sweep(spec, progress=lambda r: log.info("%s %s %s:%s maoii=%.4f",
                                                      r["scenario"], r["param"], r["policy"],
                                                      r["lookahead"], r["maoii"]))
    out = args.out or spec.output
    if out:
        write_csv(rows, out)
    else:
        sys.stdout.write(rows_to_csv(rows))


def build_parser():
    parser = argparse.ArgumentParser(prog="aoiitrack", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="measure MAoII of one policy")
    _add_scenario_args(p)
    p.add_argument("--policy", choices=POLICY_NAMES, required=True)
    p.add_argument("--lookahead", type=int, default=1)
    p.add_argument("--checkpoint", help="value-net checkpoint for rl-mpc")
    p.add_argument("--slots", type=int, default=100_000)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--trace", help="per-slot CSV of episode 0 (large for long runs)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train-rl", help="learn RL-MPC terminal costs")
    _add_scenario_args(p)
    p.add_argument("--lookahead", type=int, default=1)
    p.add_argument("--iterations", type=int, default=4)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint", required=True, help="output file for the final net")
    p.add_argument("--checkpoint-dir", help="also write one checkpoint per iteration")
    p.add_argument("--log", help="training-log CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run a sweep file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", help="overrides the spec's output path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    args.func(args)


if __name__ == "__main__":
    main()
