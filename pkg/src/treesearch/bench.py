"""Seeded episodes, budget sweeps and their CSV outputs."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import SearchConfig, Variant
from .envs import Env, make_env
from .search import SearchTree, run_search

log = logging.getLogger(__name__)

RECORD_HEADER = ["env", "variant", "budget", "episode", "seed", "return", "steps", "nodes", "wall_ms"]
SUMMARY_HEADER = ["env", "variant", "budget", "mean_return", "stderr", "mean_nodes", "mean_wall_ms"]


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any printable parts."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def fmt6(x: float) -> str:
    return f"{x:.6g}"


def round6(x: float) -> float:
    return float(fmt6(x))


@dataclass(frozen=True)
class EpisodeRecord:
    env: str
    variant: str
    budget: int
    episode: int
    seed: int
    ret: float
    steps: int
    nodes: int
    wall_ms: float = field(compare=False)
    # diagnostics, not serialized
    root_sigmas: Tuple[float, ...] = field(default=(), compare=False, repr=False)
    goal_seen: bool = field(default=False, compare=False, repr=False)

    def row(self) -> List[str]:
        return [self.env, self.variant, str(self.budget), str(self.episode), str(self.seed),
                fmt6(self.ret), str(self.steps), str(self.nodes), fmt6(self.wall_ms)]


def run_episode(env: Env, variant: "Variant | str", budget: int, seed: int,
                config: Optional[SearchConfig] = None, init_seed: Optional[int] = None,
                episode: int = 0) -> EpisodeRecord:
    """Play one episode, searching afresh (or reusing the tree) before each real step.

    ``init_seed`` seeds the environment's initial state and defaults to
    ``seed``; sweeps pass a variant-independent value so variants are compared
    on identical starts.
    """
    variant = Variant.parse(variant)
    base = config or SearchConfig()
    config = dataclasses.replace(base, variant=variant, n_trace=budget, rng_seed=seed)
    rng = random.Random(seed)
    state = env.reset(seed if init_seed is None else init_seed)
    horizon = env.spec.horizon
    total = 0.0
    nodes = 0
    steps = 0
    history = []
    sigmas = []
    goal_seen = False
    tree: Optional[SearchTree] = None
    t0 = time.perf_counter()
    for t in range(horizon):
        decision = run_search(state, env, horizon - t, config, rng, tree=tree, history=history)
        searched = decision.tree
        nodes += searched.expansions
        sigmas.append(searched.root.sigma)
        goal_seen = goal_seen or any(r > 0 for r in searched.returns)
        next_state, reward, done = env.step(state, decision.action)
        history.append((state, reward))
        total += reward
        steps += 1
        if done:
            break
        tree = searched.advance(decision.action) if config.reuse_tree else None
        state = next_state
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return EpisodeRecord(env.name, variant.value, budget, episode, seed, total, steps, nodes,
                         wall_ms, tuple(sigmas), goal_seen)


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "chain"
    length: int = 10
    goal_reward: float = 1.0
    env_seed: Optional[int] = 0
    horizon: Optional[int] = None
    variants: Tuple[str, ...] = ("mcts", "mcts-t")
    budgets: Tuple[int, ...] = (8, 32, 128)
    episodes: int = 25
    master_seed: int = 0
    c: float = 1.0
    gamma: float = 1.0
    eta: float = 1e-5
    loop_value_cap: Optional[float] = None
    max_rollout_depth: int = 10_000
    loop_history: bool = True
    out: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(Variant.parse(v).value for v in self.variants))
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if self.episodes < 1:
            raise ValueError("episodes must be at least 1")
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be positive")
        if list(self.budgets) != sorted(set(self.budgets)):
            raise ValueError("budgets must be strictly increasing")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def make_env(self) -> Env:
        return make_env(self.env, self.length, self.goal_reward, self.env_seed, self.horizon)

    def search_config(self) -> SearchConfig:
        return SearchConfig(c=self.c, gamma=self.gamma, eta=self.eta,
                            loop_value_cap=self.loop_value_cap,
                            max_rollout_depth=self.max_rollout_depth,
                            loop_history=self.loop_history)

    def cells(self) -> List[Tuple[str, int, int]]:
        return [(v, b, e) for v in self.variants for b in self.budgets for e in range(self.episodes)]

    def episode_seed(self, variant: str, budget: int, episode: int) -> int:
        return derive_seed(self.master_seed, self.env, variant, budget, episode)

    def init_seed(self, budget: int, episode: int) -> int:
        return derive_seed(self.master_seed, self.env, "init", budget, episode)


@dataclass
class SummaryRow:
    env: str
    variant: str
    budget: int
    mean_return: float
    stderr: float
    mean_nodes: float
    mean_wall_ms: float

    def row(self) -> List[str]:
        return [self.env, self.variant, str(self.budget), fmt6(self.mean_return), fmt6(self.stderr),
                fmt6(self.mean_nodes), fmt6(self.mean_wall_ms)]


@dataclass
class SweepResult:
    rows: List[SummaryRow]
    records: List[EpisodeRecord]

    def cell(self, variant: str, budget: int) -> SummaryRow:
        variant = Variant.parse(variant).value
        for r in self.rows:
            if r.variant == variant and r.budget == budget:
                return r
        raise KeyError((variant, budget))


def _run_cell(args) -> EpisodeRecord:
    cfg, variant, budget, episode = args
    try:
        return run_episode(cfg.make_env(), variant, budget, cfg.episode_seed(variant, budget, episode),
                           cfg.search_config(), cfg.init_seed(budget, episode), episode)
    except Exception as exc:
        raise RuntimeError(f"episode failed: env={cfg.env} variant={variant} budget={budget} "
                           f"episode={episode}: {exc}") from exc


def sort_records(records: Iterable[EpisodeRecord]) -> List[EpisodeRecord]:
    return sorted(records, key=lambda r: (r.variant, r.budget, r.episode))


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def aggregate(records: Sequence[EpisodeRecord]) -> List[SummaryRow]:
    """Per (variant, budget) means, computed from the serialized precision so
    re-aggregating a written record CSV reproduces the summary exactly."""
    groups: Dict[Tuple[str, str, int], List[EpisodeRecord]] = {}
    for r in sort_records(records):
        groups.setdefault((r.env, r.variant, r.budget), []).append(r)
    rows = []
    for (env, variant, budget), rs in groups.items():
        rets = np.array([round6(r.ret) for r in rs])
        rows.append(SummaryRow(env, variant, budget, float(np.mean(rets)), _stderr(rets),
                               float(np.mean([r.nodes for r in rs])),
                               float(np.mean([round6(r.wall_ms) for r in rs]))))
    return rows


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Every (variant, budget, episode) cell, aggregated per (variant, budget)."""
    jobs = [(config, v, b, e) for v, b, e in config.cells()]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_run_cell, jobs))
    else:
        records = []
        for job in jobs:
            records.append(_run_cell(job))
    records = sort_records(records)
    log.info("sweep %s: %d episodes", config.env, len(records))
    result = SweepResult(aggregate(records), records)
    if config.out:
        out = Path(config.out)
        write_csv(records, out / "records.csv")
        write_summary(result, out / "summary.csv")
        write_manifest(config, out / "manifest.json")
    return result


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_csv(records: Iterable[EpisodeRecord], path) -> Path:
    path = Path(path)
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for r in sort_records(records):
            writer.writerow(r.row())
    return path


def write_summary(sweep: "SweepResult | Sequence[SummaryRow]", path) -> Path:
    rows = sweep.rows if isinstance(sweep, SweepResult) else list(sweep)
    path = Path(path)
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for r in sorted(rows, key=lambda r: (r.variant, r.budget)):
            writer.writerow(r.row())
    return path


def write_manifest(config: ExperimentConfig, path) -> Path:
    path = Path(path)
    manifest = {"library": "treesearch", "version": __version__,
                "master_seed": config.master_seed, "config": dataclasses.asdict(config)}
    with _open_for_write(path) as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_records(path) -> List[EpisodeRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [EpisodeRecord(row["env"], row["variant"], int(row["budget"]), int(row["episode"]),
                              int(row["seed"]), float(row["return"]), int(row["steps"]),
                              int(row["nodes"]), float(row["wall_ms"])) for row in reader]


def read_summary(path) -> List[SummaryRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SUMMARY_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [SummaryRow(row["env"], row["variant"], int(row["budget"]), float(row["mean_return"]),
                           float(row["stderr"]), float(row["mean_nodes"]), float(row["mean_wall_ms"]))
                for row in reader]
