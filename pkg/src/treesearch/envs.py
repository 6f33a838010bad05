"""Deterministic benchmark environments.

Every environment is an immutable description; the mutable part of a
simulation is the state tuple the caller passes around.  ``step`` is a pure
function of ``(state, action)``, so a snapshot of an environment is simply its
state.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Protocol, Sequence, Tuple

State = Tuple[float, ...]


class Metric(Enum):
    SUP = "sup"
    L2 = "l2"


@dataclass(frozen=True)
class EnvSpec:
    action_count: int
    horizon: int
    reward_bound: float
    state_dim: int
    metric: Metric = Metric.SUP

    def __post_init__(self):
        if self.action_count < 1:
            raise ValueError("action_count must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.reward_bound <= 0:
            raise ValueError("reward_bound must be positive")


class StepResult(NamedTuple):
    next_state: State
    reward: float
    terminal: bool


class Env(Protocol):
    """What the search needs from a simulator."""

    name: str

    @property
    def spec(self) -> EnvSpec: ...

    def reset(self, seed: int = 0) -> State: ...

    def step(self, state: State, action: int) -> StepResult: ...

    def is_terminal(self, state: State) -> bool: ...

    def distance(self, a: State, b: State) -> float: ...


def state_distance(a: Sequence[float], b: Sequence[float], metric: Metric = Metric.SUP) -> float:
    if len(a) != len(b):
        raise ValueError(f"state dimension mismatch: {len(a)} != {len(b)}")
    if metric is Metric.SUP:
        return max(abs(x - y) for x, y in zip(a, b))
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def snapshot(env: Env, state: State) -> State:
    return state


def restore(env: Env, snap: State) -> State:
    return snap


class _DistanceMixin:
    def distance(self, a: State, b: State) -> float:
        return state_distance(a, b, self.spec.metric)


def _forward_map(length: int, seed: int | None) -> Tuple[int, ...]:
    # seed None pins "forward" to action 0 everywhere (debugging aid)
    if seed is None:
        return (0,) * length
    rng = random.Random(seed)
    return tuple(rng.getrandbits(1) for _ in range(length))


@dataclass(frozen=True)
class Chain(_DistanceMixin):
    """The sparse-reward chain.

    States ``0 .. length-1``; one action moves one step along, the other ends
    the episode with reward 0.  Stepping forward out of ``length-1`` pays
    ``goal_reward`` and terminates.  Which action index is "forward" is a
    seeded per-state coin flip.
    """

    length: int
    goal_reward: float = 1.0
    seed: int | None = 0
    horizon: int | None = None
    name: str = field(default="chain", init=False)

    DEAD = -1

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("chain length must be positive")
        object.__setattr__(self, "_forward", _forward_map(self.length, self.seed))

    @property
    def spec(self) -> EnvSpec:
        return EnvSpec(2, self.horizon or 2 * self.length, abs(self.goal_reward) or 1.0, 1)

    def forward_action(self, index: int) -> int:
        return self._forward[index]

    def reset(self, seed: int = 0) -> State:
        return (0,)

    def is_terminal(self, state: State) -> bool:
        return state[0] == self.DEAD or state[0] >= self.length

    def step(self, state: State, action: int) -> StepResult:
        i = state[0]
        if self.is_terminal(state):
            raise ValueError(f"cannot step terminal state {state}")
        if action not in (0, 1):
            raise ValueError(f"invalid action {action}")
        if action != self._forward[i]:
            return StepResult((self.DEAD,), 0.0, True)
        if i + 1 == self.length:
            return StepResult((self.length,), self.goal_reward, True)
        return StepResult((i + 1,), 0.0, False)


@dataclass(frozen=True)
class LoopyChain(_DistanceMixin):
    """Chain whose wrong action sends the agent back to the start instead of
    ending the episode.

    States ``1 .. length``; the episode starts in state 1 and stepping forward
    out of ``length`` pays ``goal_reward`` and terminates.
    """

    length: int
    goal_reward: float = 1.0
    seed: int | None = 0
    reset_target: int = 1
    horizon: int | None = None
    name: str = field(default="loopy-chain", init=False)

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("chain length must be positive")
        if not 1 <= self.reset_target <= self.length:
            raise ValueError("reset_target must be a chain state")
        object.__setattr__(self, "_forward", _forward_map(self.length, self.seed))

    @property
    def spec(self) -> EnvSpec:
        return EnvSpec(2, self.horizon or 2 * self.length, abs(self.goal_reward) or 1.0, 1)

    def forward_action(self, index: int) -> int:
        return self._forward[index - 1]

    def reset(self, seed: int = 0) -> State:
        return (1,)

    def is_terminal(self, state: State) -> bool:
        return state[0] > self.length

    def step(self, state: State, action: int) -> StepResult:
        i = state[0]
        if self.is_terminal(state):
            raise ValueError(f"cannot step terminal state {state}")
        if action not in (0, 1):
            raise ValueError(f"invalid action {action}")
        if action != self._forward[i - 1]:
            return StepResult((self.reset_target,), 0.0, False)
        if i == self.length:
            return StepResult((self.length + 1,), self.goal_reward, True)
        return StepResult((i + 1,), 0.0, False)


FROZEN_LAKE_4X4 = ("SFFF", "FHFH", "FFFH", "HFFG")

# gym action order
LEFT, DOWN, RIGHT, UP = range(4)
_MOVES = {LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1), UP: (-1, 0)}


@dataclass(frozen=True)
class FrozenLakeDet(_DistanceMixin):
    """4x4 FrozenLake without slipping. State is ``(row, col)``."""

    grid: Tuple[str, ...] = FROZEN_LAKE_4X4
    horizon: int = 400
    name: str = field(default="frozenlake", init=False)

    @property
    def spec(self) -> EnvSpec:
        return EnvSpec(4, self.horizon, 1.0, 2)

    def reset(self, seed: int = 0) -> State:
        for r, row in enumerate(self.grid):
            c = row.find("S")
            if c >= 0:
                return (r, c)
        raise ValueError("map has no start cell")

    def is_terminal(self, state: State) -> bool:
        return self.grid[state[0]][state[1]] in "HG"

    def step(self, state: State, action: int) -> StepResult:
        if self.is_terminal(state):
            raise ValueError(f"cannot step terminal state {state}")
        dr, dc = _MOVES[action]
        r = min(max(state[0] + dr, 0), len(self.grid) - 1)
        c = min(max(state[1] + dc, 0), len(self.grid[0]) - 1)
        cell = self.grid[r][c]
        return StepResult((r, c), 1.0 if cell == "G" else 0.0, cell in "HG")


@dataclass(frozen=True)
class CartPoleDet(_DistanceMixin):
    """Cart-pole with the usual Euler dynamics and a fixed horizon.

    Surviving a step pays ``step_reward``; leaving the angle or track limits
    pays ``failure_reward`` and terminates.  ``reset`` perturbs every state
    coordinate uniformly within ``init_noise`` using the episode seed.
    """

    gravity: float = 9.8
    masscart: float = 1.0
    masspole: float = 0.1
    half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    theta_limit: float = 12 * 2 * math.pi / 360
    x_limit: float = 2.4
    step_reward: float = 0.005
    failure_reward: float = -1.0
    init_noise: float = 0.02
    horizon: int = 400
    name: str = field(default="cartpole", init=False)

    @property
    def spec(self) -> EnvSpec:
        return EnvSpec(2, self.horizon, max(abs(self.step_reward), abs(self.failure_reward)), 4)

    def reset(self, seed: int = 0) -> State:
        rng = random.Random(seed)
        return tuple(rng.uniform(-self.init_noise, self.init_noise) for _ in range(4))

    def __post_init__(self):
        total_mass = self.masscart + self.masspole
        object.__setattr__(self, "_total_mass", total_mass)
        object.__setattr__(self, "_polemass_length", self.masspole * self.half_length)

    def _failed(self, x: float, theta: float) -> bool:
        return not (-self.x_limit <= x <= self.x_limit and -self.theta_limit <= theta <= self.theta_limit)

    def is_terminal(self, state: State) -> bool:
        return self._failed(state[0], state[2])

    def step(self, state: State, action: int) -> StepResult:
        x, x_dot, theta, theta_dot = state
        x_lim = self.x_limit
        th_lim = self.theta_limit
        if not (-x_lim <= x <= x_lim and -th_lim <= theta <= th_lim):
            raise ValueError(f"cannot step terminal state {state}")
        force = self.force_mag if action == 1 else -self.force_mag
        total_mass = self._total_mass
        polemass_length = self._polemass_length
        costheta = math.cos(theta)
        sintheta = math.sin(theta)
        temp = (force + polemass_length * theta_dot * theta_dot * sintheta) / total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.half_length * (4.0 / 3.0 - self.masspole * costheta * costheta / total_mass)
        )
        xacc = temp - polemass_length * thetaacc * costheta / total_mass
        tau = self.tau
        x = x + tau * x_dot
        x_dot = x_dot + tau * xacc
        theta = theta + tau * theta_dot
        theta_dot = theta_dot + tau * thetaacc
        if -x_lim <= x <= x_lim and -th_lim <= theta <= th_lim:
            return StepResult((x, x_dot, theta, theta_dot), self.step_reward, False)
        return StepResult((x, x_dot, theta, theta_dot), self.failure_reward, True)


ENV_NAMES = ("chain", "loopy-chain", "frozenlake", "cartpole")


def make_env(name: str, length: int = 10, goal_reward: float = 1.0, seed: int | None = 0,
             horizon: int | None = None) -> Env:
    """Build an environment from its CLI name."""
    if name == "chain":
        return Chain(length, goal_reward, seed, horizon)
    if name == "loopy-chain":
        return LoopyChain(length, goal_reward, seed, horizon=horizon)
    if name == "frozenlake":
        return FrozenLakeDet(horizon=horizon or 400)
    if name == "cartpole":
        return CartPoleDet(horizon=horizon or 400)
    raise ValueError(f"unknown environment {name!r}; expected one of {', '.join(ENV_NAMES)}")
