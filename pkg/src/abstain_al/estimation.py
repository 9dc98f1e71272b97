"""Per-cell statistics and the confidence formulas shared by every algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, NoData
from .partition_tree import Cell, TreeParams

INF = math.inf
_TWO_PI2_OVER_3 = 2.0 * math.pi ** 2 / 3.0


@dataclass(frozen=True)
class SmoothnessParams:
    L: float
    beta: float

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidConfig(f"Hölder constant must be positive, got {self.L}")
        if not 0.0 < self.beta <= 1.0:
            raise InvalidConfig(f"Hölder exponent must lie in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class CellStats:
    n_hi: int = 0
    sum_y: float = 0.0
    u: float = INF
    l: float = -INF

    @property
    def eta_hat(self) -> float:
        return self.sum_y / self.n_hi if self.n_hi else 0.5

    def add(self, y: float, count: int = 1) -> "CellStats":
        return replace(self, n_hi=self.n_hi + count, sum_y=self.sum_y + y)


def confidence_radius(t: int, n_hi: int, n: int) -> float:
    """sqrt(2 log(2 pi^2 t^3 n / 3) / n_hi); infinite when the cell has no labels."""
    if n_hi <= 0:
        return INF
    return math.sqrt(2.0 * math.log(_TWO_PI2_OVER_3 * float(t) ** 3 * n) / n_hi)


def variation_bound(h: int, p: SmoothnessParams, tp: TreeParams) -> float:
    """V_h = L (v1 rho^h)^beta, the largest variation of eta over a level-h cell."""
    return p.L * (tp.v1 * tp.rho ** h) ** p.beta


def update_bounds(stats: CellStats, t: int, n: int, V_h: float) -> CellStats:
    """Tighten (u, l) with the fresh confidence interval; never loosen them."""
    e = confidence_radius(t, stats.n_hi, n)
    if math.isinf(e):
        return stats
    eta = stats.eta_hat
    u_bar = eta + e + V_h
    l_bar = eta - e - V_h
    return replace(stats, u=min(stats.u, u_bar), l=max(stats.l, l_bar))


def index_I1(stats: CellStats) -> float:
    if math.isinf(stats.u) or math.isinf(stats.l):
        return INF
    return stats.u - stats.l


def f_value(stats: CellStats) -> float:
    """Value pinched towards 1/2: u below 1/2, l above 1/2, else exactly 1/2."""
    if stats.u < 0.5:
        return stats.u
    if stats.l > 0.5:
        return stats.l
    return 0.5


def slack(m: int, n: int) -> float:
    """Uniform deviation s_m = 2 sqrt(18 log(2 pi^2 m^2 n / 3) / m) of the empirical marginal."""
    if m < 1 or n < 1:
        raise InvalidConfig(f"slack needs m >= 1 and n >= 1, got m={m}, n={n}")
    return 2.0 * math.sqrt(18.0 * math.log(_TWO_PI2_OVER_3 * float(m) ** 2 * n) / m)


@dataclass
class EmpiricalMeasure:
    """Append-only log of unlabelled draws and the empirical measure they define."""

    D: int
    n: int
    samples: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.samples is None:
            self.samples = np.empty((0, self.D))
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1, self.D)
        self._sorted = None

    @property
    def m(self) -> int:
        return int(self.samples.shape[0])

    @property
    def slack(self) -> float:
        return slack(self.m, self.n)

    def extend(self, points) -> None:
        points = np.asarray(points, dtype=float).reshape(-1, self.D)
        self.samples = np.concatenate([self.samples, points])
        self._sorted = None

    def count_in(self, cell: Cell) -> int:
        if self.D == 1:
            if self._sorted is None:
                self._sorted = np.sort(self.samples[:, 0])
            a = np.searchsorted(self._sorted, cell.lo[0], side="left")
            top = "right" if cell.hi[0] >= 1.0 else "left"
            b = np.searchsorted(self._sorted, cell.hi[0], side=top)
            return int(b - a)
        lo = np.asarray(cell.lo)
        hi = np.asarray(cell.hi)
        upper = (self.samples < hi) | ((hi >= 1.0) & (self.samples <= 1.0))
        return int(np.count_nonzero(np.all((self.samples >= lo) & upper, axis=1)))

    def mass(self, cell: Cell) -> float:
        if self.m == 0:
            raise NoData("empirical measure has no samples")
        return self.count_in(cell) / self.m


def empirical_level_mass(em: EmpiricalMeasure, boxes: Sequence[Cell]) -> float:
    """Fraction of logged samples in the union of pairwise-disjoint ``boxes``."""
    if em.m == 0:
        raise NoData("empirical measure has no samples")
    return sum(em.count_in(c) for c in boxes) / em.m
