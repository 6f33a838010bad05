"""Monte Carlo tree search with tree-structure uncertainty and loop blocking."""

__version__ = "0.1.0"

from .config import SearchConfig, Variant
from .envs import CartPoleDet, Chain, EnvSpec, FrozenLakeDet, LoopyChain, StepResult, make_env
from .oracle import OracleResult, solve
from .search import SearchTree, run_search
from .tree import Edge, Node, RootDecision, Trace, dump_tree
