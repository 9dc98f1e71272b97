"""Piecewise-constant abstaining classifiers over a tiling of the cube."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfig
from .partition_tree import Cell, Tiling

LABEL0, LABEL1, ABSTAIN = 0, 1, 2

# rows of the per-leaf probability table, columns are (p0, p1, p_abstain)
ROW = {
    LABEL0: (1.0, 0.0, 0.0),
    LABEL1: (0.0, 1.0, 0.0),
    ABSTAIN: (0.0, 0.0, 1.0),
}


@dataclass
class AbstainClassifier:
    """Each leaf carries a probability triple over (0, 1, abstain).

    Deterministic leaves have a one-hot row; at most a handful of leaves
    (usually one) are randomised.  Points are assigned to the leaf box that
    contains them.
    """

    leaves: list
    probs: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float).reshape(-1, 3)
        if len(self.leaves) != self.probs.shape[0]:
            raise InvalidConfig("one probability row per leaf is required")
        if np.any(self.probs < -1e-12) or not np.allclose(self.probs.sum(axis=1), 1.0, atol=1e-9):
            raise InvalidConfig("probability rows must be non-negative and sum to 1")
        order = sorted(range(len(self.leaves)), key=lambda k: self.leaves[k].key)
        self.leaves = [self.leaves[k] for k in order]
        self.probs = self.probs[order]
        self._tiling = Tiling(self.leaves)

    @classmethod
    def from_decisions(cls, leaves: Sequence[Cell], decisions: Sequence[int], info=None):
        return cls(list(leaves), np.array([ROW[int(d)] for d in decisions]), info or {})

    def leaf_index(self, X) -> np.ndarray:
        return self._tiling.locate(X)

    def proba(self, X) -> np.ndarray:
        return self.probs[self.leaf_index(X)]

    def predict(self, X, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Sample a decision in {0, 1, 2 (abstain)} for each row of ``X``."""
        P = self.proba(X)
        rng = np.random.default_rng(0) if rng is None else rng
        u = rng.random(P.shape[0])
        cum = np.cumsum(P, axis=1)
        return np.minimum((u[:, None] >= cum).sum(axis=1), 2)

    @property
    def randomized(self) -> bool:
        return bool(np.any(self.probs.max(axis=1) < 1.0 - 1e-12))

    def decisions(self) -> np.ndarray:
        """Most likely decision per leaf (exact for deterministic leaves)."""
        return np.argmax(self.probs, axis=1)
