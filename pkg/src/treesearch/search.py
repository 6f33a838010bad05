"""Monte Carlo tree search for deterministic environments.

Three variants share one code path and differ only in a few places:

* ``mcts``    - UCB selection on visit counts, on-policy mean back-ups,
                final action by root visit count.
* ``mcts-t``  - every node also carries ``sigma`` in [0, 1], the fraction of
                its subtree still unexplored.  ``sigma`` scales the exploration
                bonus, values are backed up off-policy under the visit
                distribution plain UCB would have produced (the backward
                counts ``b``), and the final action is the best root Q.
* ``mcts-t+`` - additionally closes a leaf whose state repeats a state higher
                up in the same trace, valuing it by the sign of the loop's
                reward sum.
"""
from __future__ import annotations

import math
import random
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

from .config import SearchConfig, Variant
from .envs import Env, State, state_distance
from .tree import Node, RootDecision, Trace, TraceStep, dump_tree

INF = float("inf")
LOOP_VALUE_EPS = 1e-12


class LoopSpan(NamedTuple):
    index: int
    loop_sum: float


def _check_open(node: Node):
    if node.closed:
        raise ValueError(f"cannot select an action at closed node {node!r}")


def _ucb_argmax(edges, counts: Sequence[int], c: float, rng: random.Random,
                sigmas: Optional[Sequence[float]] = None) -> int:
    untried = [a for a, k in enumerate(counts) if k == 0]
    if untried:
        return untried[0] if len(untried) == 1 else untried[rng.randrange(len(untried))]
    sqrt_total = math.sqrt(sum(counts))
    best: List[int] = []
    best_bound = -INF
    for a, e in enumerate(edges):
        scale = c if sigmas is None else c * sigmas[a]
        bound = e.q + scale * sqrt_total / counts[a]
        if bound > best_bound:
            best_bound = bound
            best = [a]
        elif bound == best_bound:
            best.append(a)
    return best[0] if len(best) == 1 else best[rng.randrange(len(best))]


def child_sigmas(node: Node) -> List[float]:
    return [1.0 if e.child is None else e.child.sigma for e in node.edges]


def tree_policy_select(node: Node, config: SearchConfig, rng: random.Random) -> int:
    """Pick the action to follow during the forward pass.

    Untried actions win outright.  Otherwise maximise
    ``Q + c * sqrt(n(s)) / n(s, a)``, with the bonus additionally scaled by the
    child's ``sigma`` for the tree-uncertainty variants.
    """
    _check_open(node)
    counts = [e.n for e in node.edges]
    sigmas = child_sigmas(node) if config.variant.uses_sigma else None
    return _ucb_argmax(node.edges, counts, config.c, rng, sigmas)


def baseline_ucb_argmax(node: Node, config: SearchConfig, rng: random.Random,
                        counts: Optional[Sequence[int]] = None) -> int:
    """Plain UCB argmax ignoring ``sigma``.

    ``counts`` defaults to the node's visit counts.
    """
    _check_open(node)
    if counts is None:
        counts = [e.n for e in node.edges]
    return _ucb_argmax(node.edges, counts, config.c, rng)


def detect_loop(trace: Trace, new_state: State, eta: float,
                distance: Callable[[State, State], float] = state_distance,
                history: Sequence[Tuple[State, float]] = ()) -> Optional[LoopSpan]:
    """Find the shallowest ancestor state within ``eta`` of ``new_state``.

    Ancestors are the ``history`` pairs ``(state, reward of the real step taken
    from it)`` that led to the root, followed by the trace states.  ``index``
    counts over that combined sequence.  ``loop_sum`` adds the rewards from the
    matching state down to (and including) the edge that produced
    ``new_state``.
    """
    rewards = [r for _, r in history] + [s.reward for s in trace.steps]
    states = [st for st, _ in history] + [s.node.state for s in trace.steps]
    for i, state in enumerate(states):
        if distance(state, new_state) <= eta:
            return LoopSpan(i, sum(rewards[i:]))
    return None


def loop_value(loop_sum: float, config: SearchConfig, cap: Optional[float] = None) -> float:
    """Finite stand-in for repeating a loop forever: 0 or +/- the cap."""
    if cap is None:
        cap = config.loop_value_cap
    if cap is None:
        raise ValueError("no loop value cap configured")
    if abs(loop_sum) <= LOOP_VALUE_EPS:
        return 0.0
    return cap if loop_sum > 0 else -cap


def rollout(env: Env, leaf_state: State, depth_remaining: int, gamma: float,
            rng: random.Random) -> float:
    """Discounted return of a uniformly random play-out."""
    if depth_remaining <= 0 or env.is_terminal(leaf_state):
        return 0.0
    n_actions = env.spec.action_count
    step = env.step
    draw = rng.random
    state = leaf_state
    total = 0.0
    discount = 1.0
    for _ in range(depth_remaining):
        state, r, done = step(state, int(draw() * n_actions))
        total += discount * r
        if done:
            break
        discount *= gamma
    return total


def backup_value_onpolicy(trace: Trace, gamma: float):
    ret = trace.leaf_value
    for node, a, r in reversed(trace.steps):
        ret = r + gamma * ret
        e = node.edges[a]
        e.n += 1
        e.w += ret
        e.q = e.w / e.n
        e.b = e.n


def node_value(node: Node) -> float:
    """State value used by the off-policy back-up.

    Backward-count weighted mean of tried edges; falls back to the visit
    weighted mean when no tried edge has a backward count, and to the stored
    leaf estimate when nothing has been tried.
    """
    if node.closed:
        return node.value
    num = 0.0
    den = 0
    for e in node.edges:
        if e.child is not None and e.b:
            num += e.b * e.q
            den += e.b
    if den:
        return num / den
    w = 0.0
    n = 0
    for e in node.edges:
        if e.child is not None:
            w += e.w
            n += e.n
    return w / n if n else node.value


def backup_value_offpolicy(trace: Trace, gamma: float):
    """Q(s, a) = r + gamma * V(s') bottom-up; n and W still updated on-policy."""
    ret = trace.leaf_value
    last = len(trace.steps) - 1
    for i in range(last, -1, -1):
        node, a, r = trace.steps[i]
        ret = r + gamma * ret
        e = node.edges[a]
        e.n += 1
        e.w += ret
        if i == last:
            e.q = r + gamma * trace.leaf_value
        else:
            e.q = r + gamma * node_value(e.child)


def backup_sigma(node: Node):
    """Count-weighted mean of child sigmas; untried children count once at 1."""
    _check_open(node)
    num = 0.0
    den = 0
    for e in node.edges:
        if e.child is None:
            num += 1.0
            den += 1
        else:
            m = e.n if e.n >= 1 else 1
            num += m * e.child.sigma
            den += m
    sigma = num / den
    assert 0.0 <= sigma <= 1.0, sigma
    node.sigma = sigma


class SearchTree:
    """A tree rooted at one real state, grown one trace at a time."""

    def __init__(self, env: Env, root_state: State, horizon: int, config: SearchConfig,
                 history: Sequence[Tuple[State, float]] = ()):
        if horizon < 1:
            raise ValueError("remaining horizon must be at least 1")
        if env.is_terminal(root_state):
            raise ValueError(f"cannot search from terminal state {root_state}")
        self.env = env
        self.config = config
        self.horizon = horizon
        self.n_actions = env.spec.action_count
        cap = config.loop_value_cap
        self.loop_cap = cap if cap is not None else env.spec.reward_bound * env.spec.horizon
        self.root = Node(root_state, self.n_actions)
        self.history = list(history) if config.loop_history else []
        self.expansions = 0
        self.returns: List[float] = []

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())

    def expand(self, parent: Node, action: int, trace: Optional[Trace] = None) -> Node:
        """Step the environment through an untried edge and attach the leaf.

        Appends the traversed step to ``trace`` when one is given.
        """
        _check_open(parent)
        edge = parent.edges[action]
        if edge.child is not None:
            raise ValueError(f"edge {action} of {parent!r} is already expanded")
        state, reward, done = self.env.step(parent.state, action)
        edge.reward = reward
        if trace is not None:
            trace.steps.append(TraceStep(parent, action, reward))
        depth = parent.depth + 1
        child = Node(state, self.n_actions, depth, terminal=done,
                     truncated=not done and depth >= self.horizon)
        if not child.closed and self.config.variant is Variant.TREE_UNCERTAINTY_LOOPS and trace is not None:
            span = detect_loop(trace, state, self.config.eta, self.env.distance, self.history)
            if span is not None:
                child.looped = True
                child.sigma = 0.0
                child.value = loop_value(span.loop_sum, self.config, self.loop_cap)
        edge.child = child
        self.expansions += 1
        return child

    def run_trace(self, rng: random.Random, b_rng: random.Random,
                  observer: Optional[Callable[[Node], None]] = None) -> Trace:
        config = self.config
        uses_sigma = config.variant.uses_sigma
        trace = Trace()
        node = self.root
        while True:
            if node.closed:
                trace.leaf_value = node.value
                break
            if observer is not None:
                observer(node)
            if uses_sigma:
                node.edges[baseline_ucb_argmax(node, config, b_rng, [e.b for e in node.edges])].b += 1
            a = tree_policy_select(node, config, rng)
            edge = node.edges[a]
            if edge.child is None:
                leaf = self.expand(node, a, trace)
                if not leaf.closed:
                    depth_left = min(self.horizon - leaf.depth, config.max_rollout_depth)
                    leaf.value = rollout(self.env, leaf.state, depth_left, config.gamma, rng)
                trace.leaf_value = leaf.value
                break
            trace.steps.append(TraceStep(node, a, edge.reward))
            node = edge.child

        if uses_sigma:
            backup_value_offpolicy(trace, config.gamma)
        else:
            backup_value_onpolicy(trace, config.gamma)
        for step in reversed(trace.steps):
            backup_sigma(step.node)
        ret = trace.leaf_value
        for step in reversed(trace.steps):
            ret = step.reward + config.gamma * ret
        self.returns.append(ret)
        return trace

    def root_enumerated(self) -> bool:
        return all(e.child is not None and e.child.sigma == 0.0 for e in self.root.edges)

    def decide(self, rng: random.Random) -> RootDecision:
        """Most visited root action (baseline) or best root Q (tree-uncertainty
        variants, restricted to tried actions, equal Q resolved by visits).
        Remaining ties are broken uniformly at random."""
        edges = self.root.edges
        if self.config.variant is Variant.BASELINE:
            scores = [(e.n,) for e in edges]
            candidates = range(len(edges))
        else:
            scores = [(e.q, e.n) for e in edges]
            candidates = [a for a, e in enumerate(edges) if e.child is not None] or range(len(edges))
        top = max(scores[a] for a in candidates)
        best = [a for a in candidates if scores[a] == top]
        action = best[0] if len(best) == 1 else best[rng.randrange(len(best))]
        stats = [(e.n, e.q, e.b, None if e.child is None else e.child.sigma) for e in edges]
        return RootDecision(action, stats, self)

    def advance(self, action: int) -> Optional["SearchTree"]:
        """Re-root on the child of ``action`` (tree reuse); None if untried or closed."""
        child = self.root.edges[action].child
        if child is None or child.closed or self.horizon <= 1:
            return None
        for node in child.walk():
            node.depth -= 1
        self.history.append((self.root.state, self.root.edges[action].reward))
        self.root = child
        self.horizon -= 1
        self.returns = []
        self.expansions = 0
        return self

    def dump(self) -> str:
        return dump_tree(self.root)


def run_search(root_state: State, env: Env, remaining_horizon: int, config: SearchConfig,
               rng: random.Random, tree: Optional[SearchTree] = None,
               observer: Optional[Callable[[Node], None]] = None,
               history: Sequence[Tuple[State, float]] = ()) -> RootDecision:
    """Run ``config.n_trace`` traces from ``root_state`` and pick a real action.

    ``tree`` lets the caller continue a previous (re-rooted) tree; otherwise a
    fresh one is built.  ``observer`` is called on every in-tree node where an
    action gets selected.  ``history`` lists the real ``(state, reward)`` steps
    of the episode so far; loop detection treats those states as ancestors of
    the root when ``config.loop_history`` is set.
    """
    # backward-count tie-breaks draw from their own stream so the tree policy
    # sees the same random numbers in every variant
    b_rng = random.Random(rng.getrandbits(64))
    if tree is None:
        tree = SearchTree(env, root_state, remaining_horizon, config, history)
    for _ in range(config.n_trace):
        tree.run_trace(rng, b_rng, observer)
        if config.early_stop and tree.root_enumerated():
            break
    return tree.decide(rng)
