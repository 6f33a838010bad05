"""A budget sweep written to disk and drawn as SVG.

This is the command-line workflow from Python: records.csv, summary.csv and
manifest.json land in the output directory, then one SVG per environment is
drawn from the summary.
"""
# %%
import sys
import tempfile
from pathlib import Path

from treesearch.bench import ExperimentConfig, run_sweep
from treesearch.plot import plot_summary

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="treesearch-"))

# %%
cfg = ExperimentConfig(env="frozenlake", variants=("mcts", "mcts-t", "mcts-t+"), budgets=(4, 8, 16),
                       episodes=10, master_seed=5, out=str(out))
result = run_sweep(cfg)
print((out / "summary.csv").read_text())

# %%
for path in plot_summary(out / "summary.csv", out):
    print(f"wrote {path}")
