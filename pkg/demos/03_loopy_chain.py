"""Loops: when a wrong step sends you home.

In the loopy chain a wrong action returns to the first state instead of
ending the episode, so the tree looks infinitely deep and sigma never drops.
mcts-t+ compares each new state against its ancestors and closes repeats,
which restores the enumeration argument.
"""
# %%
import random

from treesearch import LoopyChain, SearchConfig, run_search
from treesearch.bench import run_episode

env = LoopyChain(15)

# %%
for variant in ("mcts", "mcts-t", "mcts-t+"):
    rec = run_episode(env, variant, 128, seed=3)
    print(f"{variant:8s} return={rec.ret:.0f} steps={rec.steps:2d} expanded nodes={rec.nodes} "
          f"min root sigma={min(rec.root_sigmas):.3f}")

# %% [markdown]
# A single search from the start shows the effect on the tree itself: looped
# leaves carry flag L and sigma 0.

# %%
decision = run_search(env.reset(), env, env.spec.horizon, SearchConfig(variant="mcts-t+", n_trace=10),
                      random.Random(0))
print(decision.tree.dump(), end="")
