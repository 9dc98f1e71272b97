"""Fixed-cost active learning without knowing the Hölder constants.

Every cell is sampled in batches of ``N1`` labels, one uniform point in
each of its depth-``k`` sub-cells.  Differences of sub-cell means at each
depth give variation estimates; a Lepski-type rule picks the depth to
trust, and the cell is refined once that estimate clearly exceeds the
noise level.  The variation estimate replaces the known bound V_h in the
confidence interval of the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algo_fixed_cost import (CLASSIFIED, UNCLASSIFIED, classify_check, fixed_cost_decision,
                              h_max_fixed_cost)
from .classifier import AbstainClassifier
from .errors import InvalidConfig, NoData, UnsupportedModel
from .estimation import CellStats, confidence_radius
from .oracles import OracleState
from .partition_tree import Cell, TreeParams, default_params, descendants, refine, root_cell
from .trace import RunTrace


def subpartition_depth(D: int, n: float, tp: TreeParams) -> int:
    """k = ceil(ln(v1^D ln n) / (D ln(1/rho)))."""
    if n <= math.e:
        raise InvalidConfig(f"need ln n > 1, got n={n}")
    return max(1, int(math.ceil(math.log(tp.v1 ** D * math.log(n)) / (D * math.log(1.0 / tp.rho)) - 1e-12)))


def default_c1(n: int) -> float:
    return math.sqrt(2.0 * math.log(2.0 * math.pi ** 2 * n / 3.0))


@dataclass
class SubPartition:
    cell: Cell
    k: int
    subcells: list
    counts: np.ndarray = None
    sums: np.ndarray = None
    rounds: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(len(self.subcells), dtype=np.int64)
            self.sums = np.zeros(len(self.subcells))

    @property
    def N1(self) -> int:
        return len(self.subcells)

    @property
    def n1(self) -> int:
        return int(self.counts.sum())

    def level(self, j: int) -> list:
        """Sub-cells of depth j as index ranges into the depth-k list (children are contiguous)."""
        size = 2 ** (self.k - j)
        return [range(a, a + size) for a in range(0, self.N1, size)]

    def record(self, sub: int, y: int) -> None:
        self.counts[sub] += 1
        self.sums[sub] += y


def build_subpartition(cell: Cell, D: int, n: float, tp: TreeParams) -> SubPartition:
    k = subpartition_depth(D, n, tp)
    return SubPartition(cell, k, descendants(cell, k))


@dataclass(frozen=True)
class VariationEstimate:
    w_hat: tuple  # indexed by level j = 1..k (position j-1)
    j_hat: int
    W_hat: float
    e: tuple

    @property
    def w_sel(self) -> float:
        return self.w_hat[self.j_hat - 1]


def variation_estimate(sp: SubPartition, c1: float) -> VariationEstimate:
    """Per-level spreads of sub-cell means and the Lepski-selected level."""
    n1 = sp.n1
    if n1 == 0:
        raise NoData("no labels recorded in this cell yet")
    k = sp.k
    w, e = [], []
    for j in range(1, k + 1):
        means = []
        for grp in sp.level(j):
            c = sp.counts[grp.start:grp.stop].sum()
            if c:
                means.append(sp.sums[grp.start:grp.stop].sum() / c)
        w.append(max(means) - min(means) if means else 0.0)
        e.append(c1 / math.sqrt(n1 * 2.0 ** (-j)))
    j_hat = k
    for j in range(1, k + 1):
        if all(abs(w[j - 1] - w[i - 1]) <= 4.0 * e[i - 1] for i in range(j, k + 1)):
            j_hat = j
            break
    return VariationEstimate(tuple(w), j_hat, w[j_hat - 1] + 6.0 * e[k - 1], tuple(e))


def stopping_rule(ve: VariationEstimate, e_k: Optional[float] = None) -> str:
    """'refine' when w_hat at the selected level minus 8 e_k is >= 0, else 'sample'."""
    e_k = ve.e[-1] if e_k is None else e_k
    return "refine" if ve.w_sel - 8.0 * e_k >= 0.0 else "sample"


def adaptive_bounds(stats: CellStats, ve: VariationEstimate, t: int, n: int) -> CellStats:
    e = confidence_radius(t, stats.n_hi, n)
    if math.isinf(e):
        return stats
    width = e + ve.w_sel + 6.0 * e * math.sqrt(math.log(n))
    return CellStats(stats.n_hi, stats.sum_y,
                     u=min(stats.u, stats.eta_hat + width), l=max(stats.l, stats.eta_hat - width))


def quality_of(instance, cell: Cell, max_depth: int = 6, n_grid: int = 2001) -> float:
    """Largest q = 2^-d such that two depth-d sub-cells differ in mean eta by at least half
    the variation of eta over ``cell``.  Returns 0 when no depth up to ``max_depth`` works."""
    rng = np.random.default_rng(99)
    lo, hi = np.asarray(cell.lo), np.asarray(cell.hi)
    pts = lo + (hi - lo) * rng.random((n_grid, len(lo)))
    corners = np.array([[lo[a] if (b >> a) & 1 == 0 else hi[a] for a in range(len(lo))]
                        for b in range(2 ** len(lo))])
    vals = instance.eta(np.vstack([pts, corners, cell.center[None, :]]))
    V = float(vals.max() - vals.min())
    if V <= 0:
        return 1.0
    for d in range(1, max_depth + 1):
        subs = descendants(cell, d)
        if instance.box_eta_mass is not None:
            means = [instance.box_eta_mass(np.asarray(s.lo), np.asarray(s.hi)) / s.volume for s in subs]
        else:
            means = []
            for s in subs:
                sl, sh = np.asarray(s.lo), np.asarray(s.hi)
                means.append(float(instance.eta(sl + (sh - sl) * rng.random((400, len(sl)))).mean()))
        if max(means) - min(means) >= V / 2.0 - 1e-12:
            return 2.0 ** (-d)
    return 0.0


def quality_audit(instance, n: int, depth: int = 3) -> float:
    """Smallest quality over all cells of the tree down to ``depth``."""
    q = 1.0
    for h in range(depth + 1):
        for c in descendants(root_cell(instance.D), h):
            q = min(q, quality_of(instance, c))
    return q


@dataclass
class AdaptiveState:
    n: int
    tp: TreeParams
    oracle: OracleState
    h_max: int
    c1: float
    lam: float
    t: int = 1
    cells: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    status: dict = field(default_factory=dict)
    subs: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)
    refined: list = field(default_factory=list)

    def keys(self, status=None):
        ks = self.cells if status is None else [k for k, s in self.status.items() if s == status]
        return sorted(ks)

    def I(self, key) -> float:
        s = self.stats[key]
        return math.inf if math.isinf(s.u) or math.isinf(s.l) else s.u - s.l

    def add(self, cell: Cell, u=math.inf, l=-math.inf):
        self.cells[cell.key] = cell
        self.stats[cell.key] = CellStats(u=u, l=l)
        self.status[cell.key] = UNCLASSIFIED
        self.subs[cell.key] = build_subpartition(cell, self.tp.D, self.n, self.tp)


def run_adaptive(instance, oracle: OracleState, n: int, lam: float,
                 tp: Optional[TreeParams] = None, c1: Optional[float] = None,
                 h_max: Optional[int] = None, min_quality: Optional[float] = None,
                 observer: Optional[Callable] = None):
    """Adaptive fixed-cost learner (membership queries only).  Returns ``(classifier, trace)``.

    ``min_quality`` rejects instances whose audited quality is not above it;
    pass ``1/ln n`` to enforce the usual precondition.
    """
    if oracle.model != "membership":
        raise UnsupportedModel("the adaptive scheme needs membership queries")
    if not 0.0 < lam < 0.5:
        raise InvalidConfig(f"lambda must lie in (0, 1/2), got {lam}")
    if n < 3:
        raise InvalidConfig(f"need n >= 3, got {n}")
    if min_quality is not None:
        q = quality_audit(instance, n)
        if not q > min_quality:
            raise InvalidConfig(f"instance quality {q:.3g} is not above {min_quality:.3g}")
    tp = default_params(instance.D) if tp is None else tp
    c1 = default_c1(n) if c1 is None else c1
    h_max = h_max_fixed_cost(n) if h_max is None else h_max
    st = AdaptiveState(n=n, tp=tp, oracle=oracle, h_max=h_max, c1=c1, lam=lam)
    st.add(root_cell(instance.D))
    rng = oracle.rng
    trace = RunTrace()
    N1 = st.subs[(0, 1)].N1
    done = False
    while not done:
        unc = st.keys(UNCLASSIFIED)
        if not unc:
            trace.flags["all_classified"] = True
            break
        by_level: dict = {}
        for key in unc:
            if key[0] <= h_max:
                by_level.setdefault(key[0], []).append(key)
        if not by_level:
            break
        for h in sorted(by_level):
            cands = [k for k in by_level[h] if st.status.get(k) == UNCLASSIFIED]
            if not cands:
                continue
            key = min(cands, key=lambda k: (-st.I(k), k))
            sp = st.subs[key]
            I_before = st.I(key)
            ve = st.estimates.get(key)
            if ve is not None and key[0] < h_max and stopping_rule(ve) == "refine":
                st.refined.append({"h": key[0], "i": key[1], "n1": sp.n1, "N1": sp.N1,
                                   "c1": c1, "cell": st.cells[key], "ve": ve})
                parent = st.stats[key]
                kids = refine(st.cells[key])
                for c in (key,):
                    del st.cells[c], st.stats[c], st.status[c], st.subs[c]
                    st.estimates.pop(c, None)
                for kid in kids:
                    st.add(kid, parent.u, parent.l)
                trace.add(t=st.t, h=key[0], i=key[1], action="refine", I_value=I_before,
                          labels_used=oracle.used, j_hat=ve.j_hat, w_hat=ve.w_sel, W_hat=ve.W_hat,
                          n1=sp.n1, rounds=sp.rounds)
                continue
            if oracle.remaining < N1:
                done = True
                break
            cell = st.cells[key]
            ys = 0
            for j, sub in enumerate(sp.subcells):
                lo, hi = np.asarray(sub.lo), np.asarray(sub.hi)
                x = lo + (hi - lo) * rng.random(len(lo))
                y = oracle.label_at(x, st.t, cell).y
                sp.record(j, y)
                ys += y
            sp.rounds += 1
            s = st.stats[key]
            s = CellStats(s.n_hi + N1, s.sum_y + ys, s.u, s.l)
            ve = variation_estimate(sp, c1)
            st.estimates[key] = ve
            st.stats[key] = adaptive_bounds(s, ve, st.t, n)
            if classify_check(st.stats[key], lam) is not None:
                st.status[key] = CLASSIFIED
            trace.add(t=st.t, h=key[0], i=key[1], action="sample", I_value=I_before,
                      labels_used=oracle.used, j_hat=ve.j_hat, w_hat=ve.w_sel, W_hat=ve.W_hat,
                      n1=sp.n1, rounds=sp.rounds)
        if observer is not None:
            observer(st)
        st.t += 1
    keys = st.keys()
    dec = [fixed_cost_decision(st.stats[k], st.status[k], lam) for k in keys]
    clf = AbstainClassifier.from_decisions([st.cells[k] for k in keys], dec,
                                           info={"labels_used": oracle.used, "refined": st.refined,
                                                 "N1": N1, "c1": c1, "state": st})
    return clf, trace
