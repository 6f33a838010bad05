"""Exhaustive depth-limited enumeration for small deterministic instances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet

from .envs import Env, State


class OracleBudgetExceeded(RuntimeError):
    """The reachable tree is too large to enumerate."""


@dataclass(frozen=True)
class OracleResult:
    optimal_value: float
    optimal_actions: FrozenSet[int]
    expanded_traces: int
    # non-root nodes of the horizon-truncated tree
    expanded_nodes: int = 0


def solve(env: Env, state: State, horizon: int, gamma: float = 1.0,
          node_budget: int = 10_000_000, tol: float = 1e-12) -> OracleResult:
    """Best discounted return from ``state`` over all action sequences of at
    most ``horizon`` steps, plus every first action that attains it.

    No memoization or loop shortcuts: every path is walked, which keeps the
    answer exact on loopy domains but limits this to small instances.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if env.is_terminal(state):
        raise ValueError(f"state {state} is terminal")
    n_actions = env.spec.action_count
    visited = 0
    traces = 0

    def value(s: State, depth_left: int) -> float:
        nonlocal visited, traces
        best = -math.inf
        for a in range(n_actions):
            visited += 1
            if visited > node_budget:
                raise OracleBudgetExceeded(f"more than {node_budget} nodes below {state}")
            nxt, r, done = env.step(s, a)
            if done or depth_left == 1:
                traces += 1
                v = r
            else:
                v = r + gamma * value(nxt, depth_left - 1)
            best = max(best, v)
        return best

    q = []
    for a in range(n_actions):
        visited += 1
        nxt, r, done = env.step(state, a)
        if done or horizon == 1:
            traces += 1
            q.append(r)
        else:
            q.append(r + gamma * value(nxt, horizon - 1))
    top = max(q)
    best = frozenset(a for a, v in enumerate(q) if abs(v - top) <= tol)
    return OracleResult(top, best, traces, visited)
