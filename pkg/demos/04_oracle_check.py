"""Checking search against brute force.

The oracle enumerates every action sequence up to the horizon.  Give mcts-t
enough traces to cover that tree and its decisions should always be among
the oracle's optimal first actions.
"""
# %%
import random

from treesearch import FrozenLakeDet, SearchConfig, run_search, solve

env = FrozenLakeDet(horizon=6)
state = env.reset()
truth = solve(env, state, env.spec.horizon)
print(f"optimal value {truth.optimal_value}, optimal first moves {sorted(truth.optimal_actions)} "
      f"(0=left 1=down 2=right 3=up), {truth.expanded_nodes} nodes in the full tree")

# %%
rng = random.Random(0)
for t in range(env.spec.horizon):
    truth = solve(env, state, env.spec.horizon - t)
    decision = run_search(state, env, env.spec.horizon - t, SearchConfig(n_trace=truth.expanded_nodes), rng)
    ok = decision.action in truth.optimal_actions
    print(f"step {t}: state {state} -> action {decision.action} ({'optimal' if ok else 'NOT optimal'})")
    state, reward, done = env.step(state, decision.action)
    if done:
        print(f"episode over, reward {reward}")
        break
