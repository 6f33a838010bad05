"""Small hand-built environments and tree builders shared by the tests."""
from dataclasses import dataclass, field
from typing import Dict, Tuple

from treesearch.envs import EnvSpec, StepResult, state_distance
from treesearch.tree import Node

ACCEPTANCE_LINES = []


def report(criterion: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@dataclass(frozen=True)
class TableEnv:
    """Deterministic env given as {(state, action): (next_state, reward, terminal)}."""

    table: Dict[Tuple[Tuple, int], Tuple[Tuple, float, bool]]
    n_actions: int = 2
    horizon: int = 10
    name: str = "table"

    @property
    def spec(self):
        return EnvSpec(self.n_actions, self.horizon, 1.0, 1)

    def reset(self, seed=0):
        return (0,)

    def is_terminal(self, state):
        return not any((state, a) in self.table for a in range(self.n_actions))

    def step(self, state, action):
        nxt, r, done = self.table[(state, action)]
        return StepResult(nxt, r, done)

    def distance(self, a, b):
        return state_distance(a, b)


@dataclass(frozen=True)
class FlatTreeEnv:
    """Binary tree without rewards or terminals; every path gets its own state."""

    horizon: int = 12
    name: str = "flat"

    @property
    def spec(self):
        return EnvSpec(2, self.horizon, 1.0, 1)

    def reset(self, seed=0):
        return (0,)

    def is_terminal(self, state):
        return False

    def step(self, state, action):
        return StepResult((2 * state[0] + action + 1,), 0.0, False)

    def distance(self, a, b):
        return state_distance(a, b)


def make_node(n, q, child_sigma, w=None, b=None):
    """Node whose edge ``a`` has count ``n[a]``; a child exists iff n[a] > 0."""
    node = Node((0,), len(n))
    for a, e in enumerate(node.edges):
        e.n = n[a]
        e.q = q[a]
        e.w = q[a] * n[a] if w is None else w[a]
        e.b = n[a] if b is None else b[a]
        if n[a] > 0:
            child = Node((a + 1,), len(n), depth=1)
            child.sigma = child_sigma[a]
            e.child = child
    return node
