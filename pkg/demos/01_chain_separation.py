"""Sparse rewards on a chain.

Only one path through the chain pays anything, and every wrong step ends the
episode at once.  Plain UCT keeps revisiting the short dead-end subtrees; the
sigma-weighted variant notices they are exhausted and walks down the chain.

Run:  python demos/01_chain_separation.py
"""
# %%
from treesearch.bench import ExperimentConfig, run_sweep

# %% [markdown]
# One sweep: both variants, three budgets, ten episodes per cell.

# %%
cfg = ExperimentConfig(env="chain", length=30, variants=("mcts", "mcts-t"), budgets=(8, 32, 128),
                       episodes=10, master_seed=1)
result = run_sweep(cfg)

for row in result.rows:
    print(f"{row.variant:7s} budget={row.budget:4d} mean return={row.mean_return:.2f} "
          f"+/- {row.stderr:.2f}  nodes/episode={row.mean_nodes:.0f}")

# %% [markdown]
# Expected: mcts-t solves the chain at every budget; mcts almost never does,
# because a random roll-out from the start reaches the goal with probability
# 2**-30.
