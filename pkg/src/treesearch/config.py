from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Variant(Enum):
    BASELINE = "mcts"
    TREE_UNCERTAINTY = "mcts-t"
    TREE_UNCERTAINTY_LOOPS = "mcts-t+"

    @classmethod
    def parse(cls, name: "str | Variant") -> "Variant":
        if isinstance(name, Variant):
            return name
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown variant {name!r}; expected one of mcts, mcts-t, mcts-t+") from None

    @property
    def uses_sigma(self) -> bool:
        return self is not Variant.BASELINE


@dataclass(frozen=True)
class SearchConfig:
    """Tunables for one search.

    ``loop_value_cap`` of ``None`` means "reward bound times horizon" of the
    environment being searched.  ``loop_history`` lets loop detection also
    match states the real episode visited before the current root.
    """

    variant: Variant = Variant.TREE_UNCERTAINTY
    c: float = 1.0
    gamma: float = 1.0
    n_trace: int = 64
    eta: float = 1e-5
    max_rollout_depth: int = 10_000
    loop_value_cap: float | None = None
    rng_seed: int = 0
    reuse_tree: bool = False
    early_stop: bool = False
    loop_history: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not 0 <= self.c < math.inf:
            raise ValueError("c must be finite and non-negative")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.n_trace < 1:
            raise ValueError("n_trace must be at least 1")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.max_rollout_depth < 1:
            raise ValueError("max_rollout_depth must be positive")
        if self.loop_value_cap is not None and self.loop_value_cap <= 0:
            raise ValueError("loop_value_cap must be positive")
