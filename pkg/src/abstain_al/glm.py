"""Direction recovery for single-index models eta(x) = psi(<x, w*>) + 1/2.

The D-dimensional direction is recovered from D-1 planar problems.  On the
plane spanned by e_1 and e_j the unit circle is parameterised by
s in [0, 1) (angle 2 pi s), where the regression function becomes
psi(r cos(2 pi s - theta)) + 1/2 with theta the angle of (w_1, w_j).  The
fixed-cost learner estimates that one-dimensional function; its level sets
at lambda and 1 - lambda are arcs centred on theta, so arc bisectors give
the angle.  The planar angles are then stitched into one unit vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .algo_fixed_cost import run_algorithm1
from .errors import InsufficientBudget, InvalidConfig
from .estimation import SmoothnessParams
from .oracles import OracleState
from .problems import Descriptors, ProblemInstance

TWO_PI = 2.0 * math.pi


@dataclass
class AngleProblem:
    instance: ProblemInstance
    pair: tuple  # (0, j), zero-based coordinates
    budget: int

    def __post_init__(self):
        a, b = self.pair
        if a == b or not (0 <= a < self.instance.D and 0 <= b < self.instance.D):
            raise InvalidConfig(f"bad coordinate pair {self.pair} for D={self.instance.D}")

    def embed(self, S) -> np.ndarray:
        """Points on the unit circle of the (a, b) plane for parameters s in [0, 1]."""
        S = np.asarray(S, dtype=float).reshape(-1)
        X = np.zeros((S.size, self.instance.D))
        X[:, self.pair[0]] = np.cos(TWO_PI * S)
        X[:, self.pair[1]] = np.sin(TWO_PI * S)
        return X

    def circle_instance(self) -> ProblemInstance:
        base = self.instance
        L_s = base.desc.L * TWO_PI ** base.desc.beta
        return ProblemInstance(
            name=f"circle{self.pair}",
            D=1,
            eta_fn=lambda S: base.eta(self.embed(S[:, 0])),
            sampler=lambda rng, m: rng.random((m, 1)),
            desc=Descriptors(L=L_s, beta=base.desc.beta),
            spec={"kind": "circle", "pair": self.pair},
        )


@dataclass
class RecoveredDirection:
    w_hat: np.ndarray
    thetas: list
    per_pair_error: list = field(default_factory=list)
    epsilon: Optional[float] = None
    labels_used: int = 0
    flags: list = field(default_factory=list)


def _longest_circular_run(mask: np.ndarray) -> Optional[tuple]:
    """(start, length) of the longest run of True in a circular boolean array."""
    m = mask.size
    if not mask.any():
        return None
    if mask.all():
        return (0, m)
    start0 = int(np.flatnonzero(~mask)[0]) + 1  # first index after a False
    best = (0, 0)
    run_start, run_len = None, 0
    for step in range(m):
        j = (start0 + step) % m
        if mask[j]:
            if run_len == 0:
                run_start = j
            run_len += 1
            if run_len > best[1]:
                best = (run_start, run_len)
        else:
            run_len = 0
    return best


def _circular_mean(angles: Sequence[float]) -> float:
    z = np.mean(np.exp(1j * np.asarray(angles)))
    return float(np.angle(z) % TWO_PI)


def _crossing(c0: float, v0: float, c1: float, v1: float, level: float) -> float:
    """Circle position in [0, 1) where the segment from (c0, v0) to (c1, v1) meets ``level``."""
    gap = (c1 - c0) % 1.0
    frac = 0.5 if v1 == v0 else min(max((level - v0) / (v1 - v0), 0.0), 1.0)
    return (c0 + frac * gap) % 1.0


def arc_angle(cells, values: np.ndarray, level: float, above: bool = True) -> Optional[float]:
    """Angle (radians) bisecting the longest circular arc where ``values`` exceed ``level``
    (or fall below it when ``above`` is False); None when no such arc or it is the whole circle.

    The two ends of the arc are placed by linear interpolation of the values
    between neighbouring cell centres.
    """
    mask = values > level if above else values < level
    if not mask.any() or mask.all():
        return None
    m = len(cells)
    centers = np.array([c.center[0] for c in cells])
    start, length = _longest_circular_run(mask)
    end = (start + length - 1) % m
    before, after = (start - 1) % m, (end + 1) % m
    a = _crossing(centers[before], values[before], centers[start], values[start], level)
    b = _crossing(centers[end], values[end], centers[after], values[after], level)
    span = (b - a) % 1.0
    return TWO_PI * ((a + span / 2.0) % 1.0)


def estimate_angle_2d(ap: AngleProblem, oracle: OracleState, n: int, lam: float,
                      p: Optional[SmoothnessParams] = None, tp=None,
                      observer: Optional[Callable] = None) -> float:
    """Angle of (w_a, w_b) in [0, 2 pi) from ``n`` labels on the circle of the (a, b) plane.

    The learner's final piecewise-constant estimate of eta is thresholded at
    lambda and at 1 - lambda; the arcs above each level are centred on the
    target angle, and the circular mean of their bisectors is returned.
    """
    inst = ap.circle_instance()
    oracle_1d = OracleState(model="membership", budget_n=n, instance=inst, rng=oracle.rng)
    clf, _ = run_algorithm1(inst, oracle_1d, n, lam, p=p, tp=tp, observer=observer)
    oracle.used += oracle_1d.used
    st = clf.info["state"]
    keys = sorted(st.cells, key=lambda k: st.cells[k].lo[0])
    cells = [st.cells[k] for k in keys]
    vals = np.array([st.eta_hat(k) for k in keys])
    est = [a for a in (arc_angle(cells, vals, lam), arc_angle(cells, vals, 1.0 - lam)) if a is not None]
    low = arc_angle(cells, vals, lam, above=False)
    if low is not None:
        est.append((low + math.pi) % TWO_PI)
    if not est:
        raise InsufficientBudget(f"no level set of the planar problem {ap.pair} was bracketed "
                                 f"with {n} labels", partial={"cells": cells, "eta_hat": vals})
    return _circular_mean(est)


def reassemble(thetas: Sequence[float], D: int) -> tuple[np.ndarray, list]:
    """Unit vector w with (w_1, w_j) pointing along angle thetas[j-2] for j = 2..D.

    Each angle gives the linear constraint w_j cos(theta) - w_1 sin(theta) = 0;
    the solution is the null vector of that system, with the sign fixed so
    that the planar projections point along their angles.
    """
    if len(thetas) != D - 1:
        raise InvalidConfig(f"need {D - 1} planar angles, got {len(thetas)}")
    flags = []
    if D == 1:
        return np.array([1.0]), flags
    A = np.zeros((D - 1, D))
    for j, th in enumerate(thetas, start=1):
        A[j - 1, 0] = -math.sin(th)
        A[j - 1, j] = math.cos(th)
    _, sv, Vt = np.linalg.svd(A)
    w = Vt[-1]
    if sv.size >= D - 1 and sv[-1] < 1e-9 * max(sv[0], 1.0) and D > 2:
        flags.append("rank_deficient")
    score = sum(w[0] * math.cos(th) + w[j] * math.sin(th) for j, th in enumerate(thetas, start=1))
    if score < 0:
        w = -w
    return w / np.linalg.norm(w), flags


def dimension_coupling(D: int, angle_estimator: Callable[[tuple], float]) -> RecoveredDirection:
    """Estimate the D-1 planar angles for pairs (0, j) and stitch them together."""
    if D < 2:
        raise InvalidConfig(f"need D >= 2, got {D}")
    thetas, flags = [], []
    for j in range(1, D):
        thetas.append(angle_estimator((0, j)) % TWO_PI)
    w, f = reassemble(thetas, D)
    flags.extend(f)
    return RecoveredDirection(w, thetas, flags=flags)


def recover_direction(instance: ProblemInstance, n: int, lam: float, rng: np.random.Generator,
                      p: Optional[SmoothnessParams] = None) -> RecoveredDirection:
    """Run the planar learner with ``n`` labels on each of the D-1 planes."""
    D = instance.D
    used = [0]

    def est(pair):
        ap = AngleProblem(instance, pair, n)
        o = OracleState(model="membership", budget_n=n, instance=instance, rng=rng)
        th = estimate_angle_2d(ap, o, n, lam, p=p)
        used[0] += o.used
        return th

    rd = dimension_coupling(D, est)
    rd.labels_used = used[0]
    w_true = instance.spec.get("w_star")
    if w_true is not None:
        w_true = np.array([float(v) for v in str(w_true).split(",")])
        rd.per_pair_error = [_angle_gap(th, math.atan2(w_true[j], w_true[0])) for j, th in
                             enumerate(rd.thetas, start=1)]
    return rd


def _angle_gap(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def sample_complexity(epsilon: float, D: int, beta: float,
                      nu_inverse: Optional[Callable[[float], float]] = None) -> float:
    """Order-level label count (leading constant 1): (1 / nu^-1(eps / (D-1)))^(2 + 1/beta).

    Without ``nu_inverse`` the identity is used, which is the continuously
    differentiable case ((D-1)/eps)^(2 + 1/beta).
    """
    if not epsilon > 0:
        raise InvalidConfig(f"epsilon must be positive, got {epsilon}")
    if D < 2:
        raise InvalidConfig(f"need D >= 2, got {D}")
    arg = epsilon / (D - 1)
    r = nu_inverse(arg) if nu_inverse is not None else arg
    return (1.0 / r) ** (2.0 + 1.0 / beta)
