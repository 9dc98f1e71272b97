"""Label oracles for the membership, pool and stream query models."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExhausted, InvalidConfig
from .estimation import EmpiricalMeasure
from .partition_tree import Cell
from .problems import ProblemInstance

MODELS = ("membership", "pool", "stream")


def pool_size(n: int) -> int:
    """M_n = ceil(max(2 n^3, 16 n^2 ln n))."""
    return int(math.ceil(max(2.0 * n ** 3, 16.0 * n * n * math.log(n))))


def stream_cutoff(n: int) -> int:
    """N_n = ceil(2 n^2 ln n), floored at one draw so n = 1 still sees the stream."""
    return max(1, int(math.ceil(2.0 * n * n * math.log(n))))


@dataclass(frozen=True)
class LabelOutcome:
    y: Optional[int]
    at: Optional[np.ndarray] = None

    @property
    def discarded(self) -> bool:
        return self.y is None


DISCARDED = LabelOutcome(None)


def _in_box(X, lo, hi):
    upper = (X < hi) | ((hi >= 1.0) & (X <= 1.0))
    return np.all((X >= lo) & upper, axis=1)


@dataclass
class OracleState:
    model: str
    budget_n: int
    instance: ProblemInstance
    rng: np.random.Generator
    used: int = 0
    pool: Optional[np.ndarray] = None
    pool_alive: Optional[np.ndarray] = None
    pool_size_Mn: int = 0
    stream_cutoff_Nn: int = 0
    stream_draws: int = 0
    unlabelled: Optional[EmpiricalMeasure] = None
    ledger: list = field(default_factory=list)

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfig(f"unknown query model {self.model!r}")
        if self.budget_n < 1:
            raise InvalidConfig(f"label budget must be >= 1, got {self.budget_n}")
        if self.model == "stream" and self.stream_cutoff_Nn <= 0:
            self.stream_cutoff_Nn = stream_cutoff(self.budget_n)
        if self.unlabelled is None:
            self.unlabelled = EmpiricalMeasure(self.instance.D, self.budget_n)

    @property
    def remaining(self) -> int:
        return self.budget_n - self.used

    @property
    def m_n(self) -> int:
        return self.unlabelled.m

    def _spend(self, x, t, cell) -> LabelOutcome:
        if self.used >= self.budget_n:
            raise BudgetExhausted(f"all {self.budget_n} labels used")
        x = np.asarray(x, dtype=float).reshape(-1)
        y = int(self.rng.random() < float(self.instance.eta(x.reshape(1, -1))[0]))
        self.used += 1
        self.ledger.append((t, "label", cell.h if cell else -1, cell.i if cell else -1, y))
        return LabelOutcome(y, x)

    def label_at(self, x, t: int = 0, cell: Optional[Cell] = None) -> LabelOutcome:
        """Membership query at an arbitrary point."""
        if self.model != "membership":
            raise InvalidConfig("point queries need the membership model")
        return self._spend(x, t, cell)


def make_oracle(model: str, n: int, instance: ProblemInstance, rng: np.random.Generator,
                pool_cap: Optional[int] = None) -> OracleState:
    if model == "pool":
        return init_pool(n, instance, rng, cap=pool_cap)
    return OracleState(model=model, budget_n=n, instance=instance, rng=rng)


def init_pool(n: int, instance: ProblemInstance, rng: np.random.Generator,
              cap: Optional[int] = None) -> OracleState:
    """Pool oracle holding M_n i.i.d. draws; ``cap`` truncates the pool for desk-scale runs."""
    if n < 1:
        raise InvalidConfig(f"label budget must be >= 1, got {n}")
    M = pool_size(n)
    if cap is not None:
        M = min(M, int(cap))
    pool = instance.sample(rng, M)
    return OracleState(model="pool", budget_n=n, instance=instance, rng=rng, pool=pool,
                       pool_alive=np.ones(M, dtype=bool), pool_size_Mn=M)


def request_label(state: OracleState, cell: Cell, t: int = 0) -> LabelOutcome:
    """Ask for one label inside ``cell``; the outcome is either a label or a discard."""
    if state.used >= state.budget_n:
        raise BudgetExhausted(f"all {state.budget_n} labels used")
    lo = np.asarray(cell.lo)
    hi = np.asarray(cell.hi)
    if state.model == "membership":
        return state._spend(cell.center, t, cell)
    if state.model == "pool":
        hits = np.flatnonzero(state.pool_alive & _in_box(state.pool, lo, hi))
        if hits.size == 0:
            state.ledger.append((t, "discard", cell.h, cell.i, ""))
            return DISCARDED
        j = int(hits[0])
        state.pool_alive[j] = False
        return state._spend(state.pool[j], t, cell)
    # stream: draw in chunks, the first hit wins and the rest are thrown away
    left = state.stream_cutoff_Nn
    while left > 0:
        k = min(left, 8192)
        X = state.instance.sample(state.rng, k)
        inside = np.flatnonzero(_in_box(X, lo, hi))
        if inside.size:
            state.stream_draws += int(inside[0]) + 1
            return state._spend(X[inside[0]], t, cell)
        state.stream_draws += k
        left -= k
    state.ledger.append((t, "discard", cell.h, cell.i, ""))
    return DISCARDED


def draw_unlabelled(state: OracleState, count: int) -> np.ndarray:
    """Append ``count`` fresh draws from P_X to the unlabelled log."""
    if count < 0:
        raise InvalidConfig(f"cannot draw a negative number of samples ({count})")
    X = state.instance.sample(state.rng, count)
    if count:
        state.unlabelled.extend(X)
    return X


def export_ledger(state: OracleState, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "action", "h", "i", "outcome"])
        w.writerows(state.ledger)
