"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  A JSON config file
(``--config``) may hold any flag by its long name with dashes replaced by
underscores; flags given on the command line take precedence.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import random
import sys
from typing import List, Optional

from .bench import ExperimentConfig, run_episode, run_sweep
from .config import SearchConfig, Variant
from .envs import ENV_NAMES, make_env
from .oracle import solve
from .plot import plot_summary
from .search import run_search

SEED_ENV = "TREESEARCH_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # flags whose default needs words spell it out themselves
    def _get_help_string(self, action):
        if "(default:" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _variant_list(text: str) -> List[str]:
    try:
        return [Variant.parse(x).value for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_env_flags(p: argparse.ArgumentParser):
    p.add_argument("--env", choices=ENV_NAMES, default="chain", help="environment")
    p.add_argument("--length", type=int, default=10, help="chain length (chain, loopy-chain)")
    p.add_argument("--goal-reward", type=float, default=1.0, help="chain goal reward")
    p.add_argument("--env-seed", type=int, default=0, help="seed of the chain's forward-action map")
    p.add_argument("--horizon", type=int, default=None,
                   help="episode horizon (default: 2*length for chains, 400 otherwise)")


def _add_search_flags(p: argparse.ArgumentParser):
    p.add_argument("--c", type=float, default=1.0, help="exploration constant")
    p.add_argument("--gamma", type=float, default=1.0, help="discount")
    p.add_argument("--eta", type=float, default=1e-5, help="loop detection distance threshold")
    p.add_argument("--loop-value-cap", type=float, default=None,
                   help="value of a loop with nonzero reward sum (default: reward bound * horizon)")
    p.add_argument("--max-rollout-depth", type=int, default=10_000, help="roll-out length cap")
    p.add_argument("--no-loop-history", action="store_true", default=False,
                   help="match loops against in-tree ancestors only")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--config", default=None, help="JSON file with flag defaults")


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    parser = _Parser(prog="treesearch", formatter_class=fmt,
                     description="MCTS, MCTS-T and MCTS-T+ on deterministic benchmark domains.")
    sub = parser.add_subparsers(dest="command", metavar="{run,sweep,oracle,dump-tree,plot}", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", help="play one episode", formatter_class=fmt)
    _add_env_flags(p)
    p.add_argument("--variant", type=lambda s: Variant.parse(s).value, default="mcts-t",
                   help="mcts, mcts-t or mcts-t+")
    p.add_argument("--budget", type=int, default=64, help="traces per real step")
    _add_search_flags(p)

    p = sub.add_parser("sweep", help="variants x budgets x episodes, written as CSV", formatter_class=fmt)
    _add_env_flags(p)
    p.add_argument("--variants", type=_variant_list, default="mcts,mcts-t", help="comma-separated variants")
    p.add_argument("--budgets", type=_int_list, default="8,32,128", help="comma-separated trace budgets")
    p.add_argument("--episodes", type=int, default=25, help="episodes per (variant, budget)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _add_search_flags(p)

    p = sub.add_parser("oracle", help="exhaustive optimal value from the start state", formatter_class=fmt)
    _add_env_flags(p)
    p.add_argument("--gamma", type=float, default=1.0, help="discount")
    p.add_argument("--node-budget", type=int, default=10_000_000, help="refuse trees larger than this")
    p.add_argument("--config", default=None, help="JSON file with flag defaults")

    p = sub.add_parser("dump-tree", help="run one search from the start state and print the tree",
                       formatter_class=fmt)
    _add_env_flags(p)
    p.add_argument("--variant", type=lambda s: Variant.parse(s).value, default="mcts-t",
                   help="mcts, mcts-t or mcts-t+")
    p.add_argument("--budget", type=int, default=16, help="traces")
    _add_search_flags(p)

    p = sub.add_parser("plot", help="one SVG per environment from a summary CSV", formatter_class=fmt)
    p.add_argument("--in", dest="input", default="results/summary.csv", help="summary CSV")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--config", default=None, help="JSON file with flag defaults")
    return parser


def _parse(argv: List[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(overrides, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise UsageError(f"unknown config keys in {args.config}: {', '.join(unknown)}")
        for action in subparser._actions:
            if action.dest in overrides and isinstance(overrides[action.dest], str) and action.type:
                overrides[action.dest] = action.type(overrides[action.dest])
        subparser.set_defaults(**overrides)
        args = parser.parse_args(argv)
    for name in ("variants", "budgets"):
        value = getattr(args, name, None)
        if isinstance(value, str):
            setattr(args, name, _variant_list(value) if name == "variants" else _int_list(value))
    if hasattr(args, "seed") and args.seed is None:
        env_seed = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env_seed) if env_seed else 0
        except ValueError:
            raise UsageError(f"${SEED_ENV} must be an integer, got {env_seed!r}")
    return args


def _env(args):
    return make_env(args.env, args.length, args.goal_reward, args.env_seed, args.horizon)


def _search_config(args) -> SearchConfig:
    return SearchConfig(c=args.c, gamma=args.gamma, eta=args.eta, loop_value_cap=args.loop_value_cap,
                        max_rollout_depth=args.max_rollout_depth, loop_history=not args.no_loop_history)


def _cmd_run(args):
    rec = run_episode(_env(args), args.variant, args.budget, args.seed, _search_config(args))
    for key, value in zip(["env", "variant", "budget", "episode", "seed", "return", "steps", "nodes", "wall_ms"],
                          rec.row()):
        print(f"{key}: {value}")


def _cmd_sweep(args):
    cfg = ExperimentConfig(env=args.env, length=args.length, goal_reward=args.goal_reward,
                           env_seed=args.env_seed, horizon=args.horizon, variants=tuple(args.variants),
                           budgets=tuple(args.budgets), episodes=args.episodes, master_seed=args.seed,
                           c=args.c, gamma=args.gamma, eta=args.eta, loop_value_cap=args.loop_value_cap,
                           max_rollout_depth=args.max_rollout_depth,
                           loop_history=not args.no_loop_history, out=args.out, jobs=args.jobs)
    result = run_sweep(cfg)
    for r in result.rows:
        print(f"{r.env} {r.variant} budget={r.budget} mean_return={r.mean_return:.6g} stderr={r.stderr:.6g}")
    print(f"wrote {args.out}/records.csv, {args.out}/summary.csv, {args.out}/manifest.json")


def _cmd_oracle(args):
    env = _env(args)
    state = env.reset(0)
    res = solve(env, state, env.spec.horizon, args.gamma, node_budget=args.node_budget)
    print(f"state: {state}")
    print(f"optimal_value: {res.optimal_value!r}")
    print(f"optimal_actions: {','.join(str(a) for a in sorted(res.optimal_actions))}")
    print(f"expanded_traces: {res.expanded_traces}")
    print(f"expanded_nodes: {res.expanded_nodes}")


def _cmd_dump_tree(args):
    env = _env(args)
    cfg = _search_config(args)
    cfg = dataclasses.replace(cfg, variant=args.variant, n_trace=args.budget, rng_seed=args.seed)
    decision = run_search(env.reset(args.seed), env, env.spec.horizon, cfg, random.Random(args.seed))
    sys.stdout.write(decision.tree.dump())
    print(f"decision: {decision.action}")


def _cmd_plot(args):
    for path in plot_summary(args.input, args.out):
        print(f"wrote {path}")


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "oracle": _cmd_oracle,
            "dump-tree": _cmd_dump_tree, "plot": _cmd_plot}


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except argparse.ArgumentTypeError as exc:
        print(f"treesearch: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except Exception as exc:
        print(f"treesearch {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
