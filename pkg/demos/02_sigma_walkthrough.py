"""Watching sigma shrink.

Every node carries sigma, the share of its subtree not yet enumerated.
Terminal leaves start at 0; the back-up averages children weighted by visit
counts.  A tiny chain is small enough to print the whole tree after each
trace.
"""
# %%
import random

from treesearch import Chain, SearchConfig, SearchTree

env = Chain(3)
tree = SearchTree(env, env.reset(), env.spec.horizon, SearchConfig())
rng = random.Random(0)
b_rng = random.Random(1)

# %%
for k in range(1, 7):
    tree.run_trace(rng, b_rng)
    print(f"--- after trace {k}: root sigma = {tree.root.sigma:.4f}")
    print(tree.dump(), end="")

# %% [markdown]
# Six traces expand all six distinct nodes (three dead ends, two interior
# states, the goal) and the root sigma reaches exactly 0.  Each edge prints
# as n/W/Q/b: visits, summed return, value and backward count.
