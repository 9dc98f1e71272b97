"""Active learning with a bounded abstention rate and a known marginal.

Each round the non-discarded leaves are sorted by how close their pinched
value f sits to 1/2.  The sorted prefix that first exceeds mass delta gives
two estimates of the abstention threshold, and cells whose bounds can no
longer reach the band between them leave the unclassified set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algo_fixed_cost import (CLASSIFIED, DISCARDED, UNCLASSIFIED, ActiveState)
from .classifier import AbstainClassifier
from .errors import DegenerateConfig, InvalidConfig
from .estimation import CellStats, SmoothnessParams, f_value
from .oracles import OracleState
from .partition_tree import TreeParams, default_params
from .trace import RunTrace


@dataclass(frozen=True)
class ThresholdEstimate:
    gamma1_hat: float
    gamma2_hat: float
    k_t: int
    J_t: float = math.nan
    S1: tuple = ()
    S2: tuple = ()


@dataclass(frozen=True)
class RandomizedBoundary:
    k_prime: int
    c_prime: float
    j_prime: int
    boundary: Optional[tuple] = None


def pinched_distance(stats: CellStats) -> float:
    return abs(f_value(stats) - 0.5)


def sort_cells(keys: Sequence, scores: Sequence[float]) -> list:
    """Indices ordering cells by ascending score, ties by (h, i)."""
    return sorted(range(len(keys)), key=lambda j: (scores[j], keys[j]))


def estimate_thresholds(scores: Sequence[float], masses: Sequence[float], delta: float,
                        keys: Optional[Sequence] = None) -> ThresholdEstimate:
    """k_t = first sorted prefix with mass > delta; gamma1 is the score just before it.

    ``scores`` are |f - 1/2| per cell.  The input need not be sorted.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidConfig(f"delta must lie in (0, 1), got {delta}")
    keys = list(range(len(scores))) if keys is None else list(keys)
    order = sort_cells(keys, scores)
    acc = 0.0
    for pos, j in enumerate(order):
        acc += masses[j]
        if acc > delta:
            k = pos + 1
            g1 = scores[order[pos - 1]] if pos > 0 else 0.0
            g2 = scores[j]
            return ThresholdEstimate(g1, g2, k, S1=tuple(keys[q] for q in order[:pos]),
                                     S2=tuple(keys[q] for q in order[:pos + 1]))
    raise DegenerateConfig(f"total mass {acc:.6g} of the active cells does not exceed delta={delta}")


def in_threshold_bands(l: float, u: float, g1: float, g2: float, J: float) -> bool:
    """[l, u] meets [1/2+g1, 1/2+g2+3J] or [1/2-g2-3J, 1/2-g1]."""
    reach = g2 + 3.0 * J
    hi_band = (0.5 + g1, 0.5 + reach)
    lo_band = (0.5 - reach, 0.5 - g1)
    return any(l <= b and a <= u and a <= b for a, b in (hi_band, lo_band))


def update_unclassified(state: ActiveState, est: ThresholdEstimate, J: float,
                        variant: str = "interval") -> list:
    """Move unclassified cells that can no longer matter to the classified set.

    ``variant='interval'`` intersects [l, u] with the two threshold bands;
    ``variant='score'`` classifies cells with |f - 1/2| above g2 + 3J or
    below g1.  Returns the keys that moved.
    """
    moved = []
    for key in state.keys(UNCLASSIFIED):
        s = state.stats[key]
        if variant == "interval":
            keep = in_threshold_bands(s.l, s.u, est.gamma1_hat, est.gamma2_hat, J)
        elif variant == "score":
            d = pinched_distance(s)
            keep = not (d > est.gamma2_hat + 3.0 * J or d < est.gamma1_hat)
        else:
            raise InvalidConfig(f"unknown update variant {variant!r}")
        if not keep:
            state.status[key] = CLASSIFIED
            moved.append(key)
    return moved


def boundary_side(stats: CellStats) -> int:
    f = f_value(stats)
    if f != 0.5:
        return int(f > 0.5)
    return int(stats.eta_hat >= 0.5)


def bounded_rate_classifier(state: ActiveState, mass_of: Callable, target: float,
                            info: Optional[dict] = None) -> tuple[AbstainClassifier, RandomizedBoundary]:
    """Abstain on the lowest-|f - 1/2| cells up to mass ``target``, randomising one cell.

    Cells outside the abstain set get 1 when discarded or u > 1/2 and 0
    when l < 1/2.
    """
    keys = state.keys()
    active = [k for k in keys if state.status[k] != DISCARDED]
    scores = [pinched_distance(state.stats[k]) for k in active]
    order = [active[j] for j in sort_cells(active, scores)]
    rows = {}
    for k in keys:
        s = state.stats[k]
        lab = 1 if (state.status[k] == DISCARDED or s.u > 0.5 or not s.l < 0.5) else 0
        rows[k] = [0.0, 0.0, 0.0]
        rows[k][lab] = 1.0
    acc = 0.0
    k_prime = 0
    for key in order:
        m = mass_of(key)
        if acc + m <= target + 1e-15:
            acc += m
            k_prime += 1
            rows[key] = [0.0, 0.0, 1.0]
        else:
            break
    rb = RandomizedBoundary(k_prime, 0.0, 0, None)
    if k_prime < len(order):
        key = order[k_prime]
        m = mass_of(key)
        c = (target - acc) / m if m > 0 else 0.0
        c = min(max(c, 0.0), 1.0)
        j = boundary_side(state.stats[key])
        rows[key] = [(1 - c) * (1 - j), (1 - c) * j, c]
        rb = RandomizedBoundary(k_prime, c, j, key)
    probs = np.array([rows[k] for k in keys])
    meta = {"boundary": rb, "state": state, "labels_used": state.labels_used, "t_n": state.t}
    meta.update(info or {})
    return AbstainClassifier([state.cells[k] for k in keys], probs, meta), rb


def finalize_classifier2(state: ActiveState, instance, delta: float, mass_of: Optional[Callable] = None):
    if mass_of is None:
        mass_of = _exact_mass(state, instance)
    return bounded_rate_classifier(state, mass_of, delta)[0]


def _exact_mass(state: ActiveState, instance) -> Callable:
    if instance.box_mass is None:
        raise InvalidConfig("the known-marginal learner needs box masses from the instance")
    cache: dict = {}

    def mass(key):
        if key not in cache:
            c = state.cells[key]
            cache[key] = instance.box_mass(np.asarray(c.lo), np.asarray(c.hi))[0]
        return cache[key]

    return mass


def run_algorithm2(instance, oracle: OracleState, n: int, delta: float,
                   p: Optional[SmoothnessParams] = None, tp: Optional[TreeParams] = None,
                   h_max: Optional[int] = None, variant: str = "interval",
                   observer: Optional[Callable[[ActiveState], None]] = None):
    """Bounded-rate learner with exact marginal masses.  Returns ``(classifier, trace)``."""
    from .algo_fixed_cost import h_max_fixed_cost

    if not 0.0 < delta < 1.0:
        raise InvalidConfig(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise InvalidConfig(f"label budget must be >= 1, got {n}")
    p = SmoothnessParams(instance.desc.L, instance.desc.beta) if p is None else p
    tp = default_params(instance.D) if tp is None else tp
    h_max = h_max_fixed_cost(n) if h_max is None else h_max
    st = ActiveState(n=n, p=p, tp=tp, oracle=oracle, h_max=h_max)
    mass = _exact_mass(st, instance)
    trace = RunTrace()
    while True:
        st.update_dirty()
        if observer is not None:
            observer(st)
        if oracle.used >= n:
            break
        key = st.candidate()
        if key is None:
            trace.flags["all_classified"] = True
            break
        active = [k for k in st.keys() if st.status[k] != DISCARDED]
        est = estimate_thresholds([pinched_distance(st.stats[k]) for k in active],
                                  [mass(k) for k in active], delta, keys=active)
        J = st.I(key)
        action = st.act(key)
        update_unclassified(st, est, J, variant)
        trace.add(t=st.t, h=key[0], i=key[1], action=action, I_value=J, labels_used=oracle.used,
                  gamma1_hat=est.gamma1_hat, gamma2_hat=est.gamma2_hat, k_t=est.k_t, J_t=J)
        st.t += 1
    clf = finalize_classifier2(st, instance, delta, mass)
    return clf, trace
