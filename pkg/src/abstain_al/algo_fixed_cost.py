"""Active learning with a fixed abstention cost.

The shared ``ActiveState`` engine keeps the current leaves of the partition
tree, their statistics and their status (unclassified, classified or
discarded).  It is reused by the bounded-rate learners, which only differ
in how cells leave the unclassified set and in the final classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .classifier import ABSTAIN, LABEL0, LABEL1, AbstainClassifier
from .errors import InvalidConfig
from .estimation import (CellStats, SmoothnessParams, confidence_radius, index_I1,
                         update_bounds, variation_bound)
from .oracles import OracleState, request_label
from .partition_tree import Cell, TreeParams, default_params, refine, root_cell
from .trace import RunTrace

UNCLASSIFIED, CLASSIFIED, DISCARDED = "u", "c", "d"


def h_max_fixed_cost(n: int) -> int:
    return int(math.ceil(math.log(n))) if n > 1 else 0


@dataclass
class ActiveState:
    n: int
    p: SmoothnessParams
    tp: TreeParams
    oracle: OracleState
    h_max: int
    strict_depth: bool = False  # refine only when h < h_max instead of h <= h_max
    t: int = 1
    cells: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    status: dict = field(default_factory=dict)
    dirty: set = field(default_factory=set)
    case: dict = field(default_factory=dict)
    last_updated: list = field(default_factory=list)
    refined_from: dict = field(default_factory=dict)
    prior_eta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.cells:
            root = root_cell(self.tp.D)
            self.cells[root.key] = root
            self.stats[root.key] = CellStats()
            self.status[root.key] = UNCLASSIFIED

    # -- views
    @property
    def labels_used(self) -> int:
        return self.oracle.used

    def keys(self, status: Optional[str] = None) -> list:
        ks = self.cells if status is None else [k for k, s in self.status.items() if s == status]
        return sorted(ks)

    def leaves(self) -> list:
        return [self.cells[k] for k in self.keys()]

    def V(self, h: int) -> float:
        return variation_bound(h, self.p, self.tp)

    def I(self, key) -> float:
        return index_I1(self.stats[key])

    def eta_hat(self, key) -> float:
        """Cell mean, or the mean of the closest labelled ancestor for a fresh cell."""
        s = self.stats[key]
        return s.eta_hat if s.n_hi else self.prior_eta.get(key, 0.5)

    def J(self) -> float:
        """Largest index over unclassified cells (-inf when none are left)."""
        vals = [self.I(k) for k in self.keys(UNCLASSIFIED)]
        return max(vals) if vals else -math.inf

    # -- round mechanics
    def update_dirty(self) -> list:
        """Recompute bounds of cells that received labels since their last update.

        Cells whose label count did not change cannot tighten: the radius
        only grows with t, so the running min/max would keep the old value.
        """
        updated = []
        for key in sorted(self.dirty):
            self.stats[key] = update_bounds(self.stats[key], self.t, self.n, self.V(key[0]))
            updated.append(key)
        self.dirty.clear()
        self.last_updated = updated
        return updated

    def candidate(self):
        """Unclassified cell with the largest index; ties go to the smallest (h, i)."""
        ks = self.keys(UNCLASSIFIED)
        if not ks:
            return None
        return min(ks, key=lambda k: (-self.I(k), k))

    def can_refine(self, key) -> bool:
        h = key[0]
        depth_ok = h < self.h_max if self.strict_depth else h <= self.h_max
        e = confidence_radius(self.t, self.stats[key].n_hi, self.n)
        return depth_ok and e < self.V(h)

    def refine_cell(self, key) -> tuple:
        parent = self.stats[key]
        inherited = self.eta_hat(key)
        kids = refine(self.cells[key])
        del self.cells[key], self.stats[key], self.status[key]
        self.dirty.discard(key)
        for c in kids:
            self.cells[c.key] = c
            self.stats[c.key] = CellStats(u=parent.u, l=parent.l)
            self.status[c.key] = UNCLASSIFIED
            self.refined_from[c.key] = key
            self.prior_eta[c.key] = inherited
        return kids

    def label_cell(self, key) -> str:
        out = request_label(self.oracle, self.cells[key], self.t)
        if out.discarded:
            self.status[key] = DISCARDED
            return "discard"
        self.stats[key] = self.stats[key].add(out.y)
        self.dirty.add(key)
        return "label"

    def act(self, key) -> str:
        if self.can_refine(key):
            self.refine_cell(key)
            return "refine"
        return self.label_cell(key)


def classify_check(stats: CellStats, lam: float) -> Optional[str]:
    """'A' (u < lam), 'B' (l > 1-lam), 'C' (strictly between), or None when
    [l, u] touches lam or 1-lam."""
    l, u = stats.l, stats.u
    if u < lam:
        return "A"
    if l > 1.0 - lam:
        return "B"
    if lam < l and u < 1.0 - lam:
        return "C"
    return None


def select_candidate(state: ActiveState):
    return state.candidate()


def refine_or_label(state: ActiveState, key) -> str:
    return state.act(key)


def _check_lambda(lam):
    if not 0.0 < lam < 0.5:
        raise InvalidConfig(f"lambda must lie in (0, 1/2), got {lam}")


def fixed_cost_decision(stats: CellStats, status: str, lam: float) -> int:
    """Final rule, applied in this order: 1 if u > 1-lam or discarded, 0 if l < lam, else abstain."""
    if status == DISCARDED or stats.u > 1.0 - lam:
        return LABEL1
    if stats.l < lam:
        return LABEL0
    return ABSTAIN


def run_algorithm1(instance, oracle: OracleState, n: int, lam: float,
                   p: Optional[SmoothnessParams] = None, tp: Optional[TreeParams] = None,
                   h_max: Optional[int] = None,
                   observer: Optional[Callable[[ActiveState], None]] = None):
    """Learn a fixed-cost abstaining classifier with at most ``n`` labels.

    Returns ``(classifier, trace)``.  ``observer`` is called once per round,
    after the bound update and before the candidate acts.
    """
    _check_lambda(lam)
    if n < 1:
        raise InvalidConfig(f"label budget must be >= 1, got {n}")
    p = SmoothnessParams(instance.desc.L, instance.desc.beta) if p is None else p
    tp = default_params(instance.D) if tp is None else tp
    h_max = h_max_fixed_cost(n) if h_max is None else h_max
    st = ActiveState(n=n, p=p, tp=tp, oracle=oracle, h_max=h_max)
    trace = RunTrace()
    while True:
        for key in st.update_dirty():
            c = classify_check(st.stats[key], lam)
            if c is not None:
                st.status[key] = CLASSIFIED
                st.case[key] = c
        if observer is not None:
            observer(st)
        if oracle.used >= n:
            break
        key = st.candidate()
        if key is None:
            trace.flags["all_classified"] = True
            break
        I = st.I(key)
        action = st.act(key)
        trace.add(t=st.t, h=key[0], i=key[1], action=action, I_value=I, labels_used=oracle.used)
        st.t += 1
    keys = st.keys()
    dec = [fixed_cost_decision(st.stats[k], st.status[k], lam) for k in keys]
    clf = AbstainClassifier.from_decisions([st.cells[k] for k in keys], dec,
                                           info={"t_n": st.t, "labels_used": oracle.used,
                                                 "state": st})
    return clf, trace
