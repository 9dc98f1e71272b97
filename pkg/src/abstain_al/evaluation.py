"""Bayes references, risk functionals, a passive plug-in baseline and rate fitting."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .classifier import ABSTAIN, LABEL0, LABEL1, AbstainClassifier
from .errors import InvalidConfig
from .partition_tree import Cell
from .problems import ProblemInstance

N_MC_RISK = 10 ** 6


@dataclass(frozen=True)
class RiskReport:
    risk: float
    abstain_rate: float
    excess: float
    mc_stderr: float = 0.0
    bayes_risk: float = float("nan")


def _check_mode(mode, lam, delta):
    if mode == "fixed":
        if lam is None or not 0.0 < lam < 0.5:
            raise InvalidConfig(f"fixed-cost mode needs lambda in (0, 1/2), got {lam}")
    elif mode == "bounded":
        if delta is None or not 0.0 <= delta < 1.0:
            raise InvalidConfig(f"bounded-rate mode needs delta in [0, 1), got {delta}")
    else:
        raise InvalidConfig(f"unknown risk mode {mode!r}")


# ------------------------------------------------------------------ Bayes

def bayes_decision_fixed(eta: np.ndarray, lam: float) -> np.ndarray:
    """Pointwise argmin of (1 - eta, eta, lam) -> label 1, label 0, abstain."""
    eta = np.asarray(eta, dtype=float)
    out = np.full(eta.shape, ABSTAIN, dtype=np.int64)
    out[(1.0 - eta) < np.minimum(eta, lam)] = LABEL1
    out[eta < np.minimum(1.0 - eta, lam)] = LABEL0
    return out


def bayes_fixed_cost(instance: ProblemInstance, lam: float, n_mc: int = N_MC_RISK,
                     rng: Optional[np.random.Generator] = None) -> tuple[Callable, float, float]:
    """Bayes fixed-cost rule as a function of points, its risk and the risk's stderr."""
    _check_mode("fixed", lam, None)
    rule = lambda X: bayes_decision_fixed(instance.eta(X), lam)
    if instance.bayes_fixed_exact is not None:
        return rule, float(instance.bayes_fixed_exact(lam)), 0.0
    rng = np.random.default_rng(12345) if rng is None else rng
    eta = instance.eta(instance.sample(rng, n_mc))
    loss = np.minimum(np.minimum(eta, 1 - eta), lam)
    return rule, float(loss.mean()), float(loss.std(ddof=1) / math.sqrt(n_mc))


def gamma_delta(instance: ProblemInstance, delta: float, n_mc: int = N_MC_RISK,
                rng: Optional[np.random.Generator] = None) -> float:
    """sup{gamma >= 0 : P(|eta - 1/2| <= gamma) <= delta}.

    Without a closed form the sup is read off the sorted Monte-Carlo values
    of |eta - 1/2|, which solves the empirical version of the problem exactly.
    """
    if not 0.0 <= delta <= 1.0:
        raise InvalidConfig(f"delta must lie in [0, 1], got {delta}")
    if instance.gamma_delta_exact is not None:
        return float(instance.gamma_delta_exact(delta))
    rng = np.random.default_rng(54321) if rng is None else rng
    a = np.sort(np.abs(instance.eta(instance.sample(rng, n_mc)) - 0.5))
    k = int(math.floor(delta * n_mc))
    if k >= n_mc:
        return 0.5
    # largest gamma with #{a <= gamma} <= k is just below a[k]
    return float(np.nextafter(a[k], -np.inf)) if a[k] > 0 else 0.0


def bayes_bounded_risk(instance: ProblemInstance, delta: float, n_mc: int = N_MC_RISK,
                       rng: Optional[np.random.Generator] = None) -> tuple[float, float]:
    if instance.bayes_bounded_exact is not None:
        return float(instance.bayes_bounded_exact(delta)), 0.0
    g = gamma_delta(instance, delta, n_mc=n_mc, rng=rng)
    rng = np.random.default_rng(777) if rng is None else rng
    eta = instance.eta(instance.sample(rng, n_mc))
    loss = np.where(np.abs(eta - 0.5) <= g, 0.0, np.minimum(eta, 1 - eta))
    return float(loss.mean()), float(loss.std(ddof=1) / math.sqrt(n_mc))


# ------------------------------------------------------------------ risks

def _exact_available(instance):
    return instance.box_mass is not None and instance.box_eta_mass is not None


def risk_of(instance: ProblemInstance, clf: AbstainClassifier, mode: str = "fixed",
            lam: Optional[float] = None, delta: Optional[float] = None,
            n_mc: int = N_MC_RISK, rng: Optional[np.random.Generator] = None) -> RiskReport:
    """Risk, abstention rate and excess risk of ``clf``.

    Exact leaf-by-leaf integration when the instance provides box masses and
    box integrals of eta; otherwise a Monte-Carlo estimate in which the
    Bayes loss is evaluated on the same points, so the excess has low noise.
    Randomised leaves contribute their expected loss.
    """
    _check_mode(mode, lam, delta)
    cost = lam if mode == "fixed" else 0.0
    if _exact_available(instance):
        risk = abst = 0.0
        exact = True
        for cell, (p0, p1, pa) in zip(clf.leaves, clf.probs):
            lo, hi = np.asarray(cell.lo), np.asarray(cell.hi)
            m, se = instance.box_mass(lo, hi)
            exact &= se == 0.0
            e = instance.box_eta_mass(lo, hi)
            risk += p1 * (m - e) + p0 * e + pa * cost * m
            abst += pa * m
        if exact:
            if mode == "fixed":
                _, bayes, bse = bayes_fixed_cost(instance, lam)
            else:
                bayes, bse = bayes_bounded_risk(instance, delta)
            return RiskReport(risk, abst, risk - bayes, bse, bayes)
    rng = np.random.default_rng(2024) if rng is None else rng
    X = instance.sample(rng, n_mc)
    eta = instance.eta(X)
    P = clf.proba(X)
    loss = P[:, 1] * (1 - eta) + P[:, 0] * eta + P[:, 2] * cost
    if mode == "fixed":
        ref = np.minimum(np.minimum(eta, 1 - eta), lam)
    else:
        g = gamma_delta(instance, delta, n_mc=n_mc)
        ref = np.where(np.abs(eta - 0.5) <= g, 0.0, np.minimum(eta, 1 - eta))
    diff = loss - ref
    return RiskReport(float(loss.mean()), float(P[:, 2].mean()), float(diff.mean()),
                      float(diff.std(ddof=1) / math.sqrt(n_mc)), float(ref.mean()))


def abstain_measure(instance: ProblemInstance, clf: AbstainClassifier) -> tuple[float, float]:
    """P_X(clf abstains), with randomised leaves weighted by their abstain probability."""
    if instance.box_mass is None:
        raise InvalidConfig("abstention measure needs box masses")
    total, var = 0.0, 0.0
    for cell, pa in zip(clf.leaves, clf.probs[:, 2]):
        if pa > 0:
            m, se = instance.box_mass(np.asarray(cell.lo), np.asarray(cell.hi))
            total += pa * m
            var += (pa * se) ** 2
    return total, math.sqrt(var)


# --------------------------------------------------------- passive plug-in

def grid_cells(k: int, D: int) -> list:
    """The k^D grid boxes of side 1/k, keyed (0, j+1) in row-major order."""
    edges = np.linspace(0.0, 1.0, k + 1)
    cells = []
    for j, idx in enumerate(np.ndindex(*(k,) * D)):
        lo = tuple(float(edges[a]) for a in idx)
        hi = tuple(float(edges[a + 1]) for a in idx)
        cells.append(Cell(0, j + 1, lo, hi))
    return cells


def passive_bins(n: int, beta: float, D: int) -> int:
    """Bins per axis for bandwidth n^(-1/(2 beta + D))."""
    return max(1, int(math.ceil(n ** (1.0 / (2.0 * beta + D)) - 1e-9)))


def bounded_rate_rows(masses, scores, signs, delta) -> np.ndarray:
    """Probability rows abstaining on the cells with the smallest scores up to mass delta.

    Cells are taken in ascending score order (stable, so ties keep the
    given order).  The first cell that would overshoot gets abstention
    probability c' so the total is exactly ``delta``; its remaining
    probability goes to the label given by ``signs`` (1 or 0), as do all
    later cells.
    """
    masses = np.asarray(masses, dtype=float)
    order = np.argsort(np.asarray(scores, dtype=float), kind="stable")
    rows = np.zeros((masses.size, 3))
    rows[np.arange(masses.size), np.where(np.asarray(signs) > 0, 1, 0)] = 1.0
    acc = 0.0
    for j in order:
        if acc + masses[j] <= delta + 1e-15:
            rows[j] = (0.0, 0.0, 1.0)
            acc += masses[j]
            continue
        c = (delta - acc) / masses[j] if masses[j] > 0 else 0.0
        c = min(max(c, 0.0), 1.0)
        lab = 1 if signs[j] > 0 else 0
        rows[j] = (0.0, 0.0, c)
        rows[j, lab] = 1.0 - c
        break
    return rows


def passive_plugin(instance: ProblemInstance, n: int, mode: str = "fixed",
                   lam: Optional[float] = None, delta: Optional[float] = None,
                   beta: Optional[float] = None, rng: Optional[np.random.Generator] = None
                   ) -> AbstainClassifier:
    """Histogram plug-in rule from ``n`` i.i.d. labelled draws.

    Empty bins get eta_hat = 1/2.  In bounded mode the known marginal is
    used to abstain on the bins with the smallest |eta_hat - 1/2| up to mass
    delta, randomising on the boundary bin.
    """
    _check_mode(mode, lam, delta)
    if n < 1:
        raise InvalidConfig(f"sample size must be >= 1, got {n}")
    beta = instance.desc.beta if beta is None else beta
    rng = np.random.default_rng() if rng is None else rng
    D = instance.D
    k = passive_bins(n, beta, D)
    X = instance.sample(rng, n)
    y = instance.sample_labels(rng, X)
    idx = np.minimum((X * k).astype(np.int64), k - 1)
    flat = np.ravel_multi_index(idx.T, (k,) * D)
    counts = np.bincount(flat, minlength=k ** D)
    sums = np.bincount(flat, weights=y, minlength=k ** D)
    eta_hat = np.where(counts > 0, sums / np.maximum(counts, 1), 0.5)
    cells = grid_cells(k, D)
    info = {"bins_per_axis": k, "eta_hat": eta_hat}
    if mode == "fixed":
        return AbstainClassifier.from_decisions(cells, bayes_decision_fixed(eta_hat, lam), info)
    if instance.box_mass is None:
        raise InvalidConfig("bounded-mode plug-in needs a known marginal")
    masses = [instance.box_mass(np.asarray(c.lo), np.asarray(c.hi))[0] for c in cells]
    rows = bounded_rate_rows(masses, np.abs(eta_hat - 0.5), (eta_hat >= 0.5).astype(int), delta)
    return AbstainClassifier(cells, rows, info)


# ------------------------------------------------------------ rate fitting

def fit_rate(budgets: Sequence[float], excess_risks: Sequence[float]) -> float:
    """Least-squares slope of log(excess) against log(n); nonpositive risks are dropped."""
    b = np.asarray(budgets, dtype=float)
    r = np.asarray(excess_risks, dtype=float)
    if b.shape != r.shape:
        raise InvalidConfig("budgets and risks must have the same length")
    keep = np.isfinite(r) & (r > 0) & (b > 0)
    if not np.all(keep):
        warnings.warn(f"dropping {int((~keep).sum())} nonpositive or non-finite risk values", RuntimeWarning)
    b, r = b[keep], r[keep]
    if b.size < 3:
        raise InvalidConfig(f"need at least 3 positive points to fit a rate, got {b.size}")
    return float(np.polyfit(np.log(b), np.log(r), 1)[0])
