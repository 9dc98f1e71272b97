"""Bounded-rate active learning with an empirical marginal from unlabelled draws.

Threshold brackets come from empirical prefix masses widened by the
uniform-deviation slack s_m.  When detectability constants (C2, alpha2)
are supplied, more unlabelled data is requested whenever the slack term
would dominate the label-driven uncertainty J_t; otherwise ``C' n^2``
unlabelled points are drawn once upfront.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algo_fixed_cost import DISCARDED, ActiveState
from .algo_known_marginal import (bounded_rate_classifier, pinched_distance, sort_cells,
                                  update_unclassified, ThresholdEstimate)
from .errors import InvalidConfig
from .estimation import EmpiricalMeasure, SmoothnessParams, slack
from .oracles import OracleState, draw_unlabelled
from .partition_tree import TreeParams, default_params
from .trace import RunTrace

DEFAULT_CAP = 10 ** 8


@dataclass
class UnlabelledBudget:
    C2: float
    alpha2: float
    n: int
    cap: int = DEFAULT_CAP
    cap_hit: bool = False

    def __post_init__(self):
        if not self.C2 > 0 or not self.alpha2 > 0:
            raise InvalidConfig(f"need C2 > 0 and alpha2 > 0, got C2={self.C2}, alpha2={self.alpha2}")

    def threshold(self, s: float) -> float:
        return (s / self.C2) ** (1.0 / self.alpha2)


@dataclass(frozen=True)
class EmpiricalThresholds:
    k1_t: int
    k2_t: Optional[int]
    gamma1_hat: float
    gamma2_hat: float


def estimate_thresholds_empirical(scores: Sequence[float], masses: Sequence[float], delta: float,
                                  s: float, keys: Optional[Sequence] = None) -> EmpiricalThresholds:
    """k1 = last prefix with mass <= delta - s, k2 = first prefix with mass >= delta + s.

    gamma1 is 0 when no prefix qualifies for k1; gamma2 saturates at the
    largest score when no prefix reaches delta + s (k2 is then None).
    """
    keys = list(range(len(scores))) if keys is None else list(keys)
    order = sort_cells(keys, scores)
    acc = 0.0
    k1, g1 = 0, 0.0
    k2, g2 = None, None
    for pos, j in enumerate(order):
        acc += masses[j]
        if acc <= delta - s:
            k1, g1 = pos + 1, scores[j]
        if k2 is None and acc >= delta + s:
            k2, g2 = pos + 1, scores[j]
            break
    if g2 is None:
        g2 = max(scores) if len(scores) else 0.0
    return EmpiricalThresholds(k1, k2, g1, g2)


def unlabelled_request_rule(J: float, s: float, ub: UnlabelledBudget) -> bool:
    """True iff J <= (s / C2)^(1 / alpha2)."""
    return J <= ub.threshold(s)


def h_max_setting3(n: int, beta: float, rho: float) -> int:
    """floor(ln n / (2 beta ln(1/rho)))."""
    if n < 2:
        raise InvalidConfig(f"need n >= 2, got {n}")
    if not 0.0 < rho <= 0.95:
        raise InvalidConfig(f"rho must lie in (0, 0.95], got {rho}")
    return int(math.floor(math.log(n) / (2.0 * beta * math.log(1.0 / rho)) + 1e-12))


def unlabelled_bound(n: int, C2: float, alpha2: float, L: float, v1: float, beta: float) -> float:
    """64 n^(2 alpha2) / (C2^4 (L v1^beta)^(2 alpha2)), the bound on the unlabelled draws."""
    return 64.0 * n ** (2 * alpha2) / (C2 ** 4 * (L * v1 ** beta) ** (2 * alpha2))


def run_algorithm3(instance, oracle: OracleState, n: int, delta: float,
                   p: Optional[SmoothnessParams] = None, tp: Optional[TreeParams] = None,
                   de_params: Optional[tuple] = None, c_prime: float = 4.0,
                   cap: int = DEFAULT_CAP, target: str = "delta_minus_slack",
                   observer: Optional[Callable[[ActiveState], None]] = None):
    """Returns ``(classifier, trace, m_n)``.

    ``de_params=(C2, alpha2)`` switches on adaptive unlabelled requests
    (starting from m = n and doubling); without it ``ceil(c_prime n^2)``
    points are drawn upfront.  ``target='delta'`` is a variant that fills
    the abstain region up to empirical mass delta instead of delta - s.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidConfig(f"delta must lie in (0, 1), got {delta}")
    if n < 2:
        raise InvalidConfig(f"label budget must be >= 2, got {n}")
    if target not in ("delta_minus_slack", "delta"):
        raise InvalidConfig(f"unknown target {target!r}")
    p = SmoothnessParams(instance.desc.L, instance.desc.beta) if p is None else p
    tp = default_params(instance.D) if tp is None else tp
    h_max = h_max_setting3(n, p.beta, tp.rho)
    st = ActiveState(n=n, p=p, tp=tp, oracle=oracle, h_max=h_max, strict_depth=True)
    em: EmpiricalMeasure = oracle.unlabelled
    ub = None
    if de_params is not None:
        ub = UnlabelledBudget(float(de_params[0]), float(de_params[1]), n, cap)
        draw_unlabelled(oracle, n)
    else:
        draw_unlabelled(oracle, int(math.ceil(c_prime * n * n)))
    counts: dict = {}

    def emp_mass(key):
        if key not in counts:
            counts[key] = em.count_in(st.cells[key])
        return counts[key] / em.m

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
        s = em.slack
        active = [k for k in st.keys() if st.status[k] != DISCARDED]
        et = estimate_thresholds_empirical([pinched_distance(st.stats[k]) for k in active],
                                           [emp_mass(k) for k in active], delta, s, keys=active)
        J = st.I(key)
        action = st.act(key)
        fired = 0
        if ub is not None:
            while unlabelled_request_rule(J, em.slack, ub):
                if em.m * 2 > ub.cap:
                    ub.cap_hit = True
                    trace.flags["unlabelled_cap_hit"] = True
                    break
                draw_unlabelled(oracle, em.m)
                counts.clear()
                fired += 1
        update_unclassified(st, ThresholdEstimate(et.gamma1_hat, et.gamma2_hat, et.k1_t), J)
        trace.add(t=st.t, h=key[0], i=key[1], action=action, I_value=J, labels_used=oracle.used,
                  gamma1_hat=et.gamma1_hat, gamma2_hat=et.gamma2_hat, k1_t=et.k1_t,
                  k2_t=et.k2_t if et.k2_t is not None else -1, J_t=J, m=em.m, s_t=s,
                  requests=fired)
        st.t += 1
    s_final = em.slack
    goal = delta - s_final if target == "delta_minus_slack" else delta
    clf, rb = bounded_rate_classifier(st, emp_mass, max(goal, 0.0),
                                      info={"m_n": em.m, "s_final": s_final, "target": goal,
                                            "h_max": h_max})
    if ub is not None:
        trace.flags["m_n_bound"] = unlabelled_bound(n, ub.C2, ub.alpha2, p.L, tp.v1, p.beta)
    return clf, trace, em.m
