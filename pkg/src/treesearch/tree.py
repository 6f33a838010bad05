"""Search tree data structures and the text dump used for golden tests."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional, Tuple

from .envs import State


class Edge:
    """Statistics of one (state, action) pair."""

    __slots__ = ("n", "w", "q", "b", "reward", "child")

    def __init__(self):
        self.n = 0
        self.w = 0.0
        self.q = 0.0
        self.b = 0
        self.reward = 0.0
        self.child: Optional[Node] = None

    @property
    def tried(self) -> bool:
        return self.child is not None

    def __repr__(self):
        return f"Edge(n={self.n}, w={self.w:g}, q={self.q:g}, b={self.b}, r={self.reward:g})"


class Node:
    """A state vertex. ``value`` holds the leaf estimate R(s_L) once known.

    ``truncated`` marks nodes at the search horizon.  They are never expanded
    and are worth 0, but keep ``sigma`` at 1: the cut-off says nothing about
    the domain's own tree structure.
    """

    __slots__ = ("state", "terminal", "looped", "truncated", "sigma", "edges", "depth", "value")

    def __init__(self, state: State, action_count: int, depth: int = 0,
                 terminal: bool = False, looped: bool = False, truncated: bool = False):
        self.state = state
        self.terminal = terminal
        self.looped = looped
        self.truncated = truncated
        self.sigma = 0.0 if (terminal or looped) else 1.0
        self.edges = [Edge() for _ in range(action_count)]
        self.depth = depth
        self.value = 0.0

    @property
    def closed(self) -> bool:
        """Nothing can be expanded below this node."""
        return self.terminal or self.looped or self.truncated

    @property
    def visits(self) -> int:
        return sum(e.n for e in self.edges)

    def children(self) -> Iterator[Tuple[int, "Node"]]:
        for a, e in enumerate(self.edges):
            if e.child is not None:
                yield a, e.child

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(e.child for e in reversed(node.edges) if e.child is not None)

    def __repr__(self):
        flags = "T" if self.terminal else ("L" if self.looped else ("H" if self.truncated else "-"))
        return f"Node({self.state}, d={self.depth}, sigma={self.sigma:g}, {flags})"


class TraceStep(NamedTuple):
    node: Node
    action: int
    reward: float


@dataclass
class Trace:
    """Root-to-leaf path of one iteration; ``steps[i].reward`` is r(s_i, a_i)."""

    steps: List[TraceStep] = field(default_factory=list)
    leaf_value: float = 0.0

    def states(self) -> List[State]:
        return [s.node.state for s in self.steps]

    def __len__(self):
        return len(self.steps)


@dataclass
class RootDecision:
    action: int
    # per action: (n, q, b, sigma of child or None when untried)
    root_stats: List[Tuple[int, float, int, Optional[float]]]
    tree: Optional["object"] = field(default=None, repr=False, compare=False)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_state(state: State) -> str:
    return "(" + ",".join(_fmt(float(v)) for v in state) + ")"


def dump_tree(root: Node) -> str:
    """One line per node, depth-first with actions in index order::

        <indent>a=<action> d=<depth> s=<state> sigma=<sigma> flags=<T|L|H|-> | a0:n/W/Q/b a1:...

    Untried edges print as ``-``.
    """
    lines = []
    stack: List[Tuple[Node, Optional[int]]] = [(root, None)]
    while stack:
        node, action = stack.pop()
        flags = ("T" if node.terminal else "") + ("L" if node.looped else "") + ("H" if node.truncated else "") or "-"
        edges = " ".join(
            f"a{a}:{e.n}/{_fmt(e.w)}/{_fmt(e.q)}/{e.b}" if e.child is not None else f"a{a}:-"
            for a, e in enumerate(node.edges)
        )
        head = "root" if action is None else f"a={action}"
        lines.append(
            f"{'  ' * node.depth}{head} d={node.depth} s={_fmt_state(node.state)} "
            f"sigma={_fmt(node.sigma)} flags={flags} | {edges}"
        )
        for a in reversed(range(len(node.edges))):
            child = node.edges[a].child
            if child is not None:
                stack.append((child, a))
    return "\n".join(lines) + "\n"
