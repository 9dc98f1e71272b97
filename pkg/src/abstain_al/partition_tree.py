"""Dyadic tree of partitions of the unit cube [0, 1]^D.

Cells are axis-aligned boxes indexed by ``(h, i)`` with ``1 <= i <= 2**h``.
Refining a cell halves it along its longest axis (lowest axis index on
ties), so boxes stay quasi-cubic and the ball sandwich of the tree holds
with the default constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidConfig, OutOfDomain


@dataclass(frozen=True)
class TreeParams:
    D: int
    rho: float
    v1: float
    v2: float

    def __post_init__(self):
        if self.D < 1:
            raise InvalidConfig(f"dimension must be >= 1, got {self.D}")
        if not 0.0 < self.rho < 1.0:
            raise InvalidConfig(f"rho must lie in (0, 1), got {self.rho}")
        if not (0.0 < self.v2 <= 1.0 <= self.v1):
            raise InvalidConfig(f"need 0 < v2 <= 1 <= v1, got v1={self.v1}, v2={self.v2}")


def default_params(D: int) -> TreeParams:
    """Constants for the Euclidean cube: rho = 2^(-1/D), v1 = 2 sqrt(D), v2 = 1/2."""
    if D < 1:
        raise InvalidConfig(f"dimension must be >= 1, got {D}")
    return TreeParams(D=D, rho=2.0 ** (-1.0 / D), v1=2.0 * math.sqrt(D), v2=0.5)


@dataclass(frozen=True, order=False)
class Cell:
    h: int
    i: int
    lo: tuple
    hi: tuple

    @property
    def key(self) -> tuple:
        return (self.h, self.i)

    @property
    def D(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lo)) and np.all(x <= np.asarray(self.hi)))

    def __repr__(self):
        box = " x ".join(f"[{a:g},{b:g}]" for a, b in zip(self.lo, self.hi))
        return f"Cell(h={self.h}, i={self.i}, {box})"


def root_cell(D: int) -> Cell:
    if D < 1:
        raise InvalidConfig(f"dimension must be >= 1, got {D}")
    return Cell(0, 1, (0.0,) * D, (1.0,) * D)


def split_axis(cell: Cell) -> int:
    w = cell.widths
    # argmax returns the first maximal axis; a relative tolerance keeps
    # float noise from breaking the lowest-index tie rule.
    wmax = w.max()
    return int(np.flatnonzero(w >= wmax * (1.0 - 1e-12))[0])


def refine(cell: Cell) -> tuple[Cell, Cell]:
    """Halve ``cell`` along its longest axis into children (h+1, 2i-1) and (h+1, 2i)."""
    ax = split_axis(cell)
    mid = 0.5 * (cell.lo[ax] + cell.hi[ax])
    hi_left = list(cell.hi)
    hi_left[ax] = mid
    lo_right = list(cell.lo)
    lo_right[ax] = mid
    left = Cell(cell.h + 1, 2 * cell.i - 1, cell.lo, tuple(hi_left))
    right = Cell(cell.h + 1, 2 * cell.i, tuple(lo_right), cell.hi)
    return left, right


def descendants(cell: Cell, depth: int) -> list[Cell]:
    """All descendants of ``cell`` exactly ``depth`` levels below it, ordered by index."""
    level = [cell]
    for _ in range(depth):
        level = [c for parent in level for c in refine(parent)]
    return level


def _check_point(x, D):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != D:
        raise OutOfDomain(f"point has dimension {x.shape[0]}, expected {D}")
    if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
        raise OutOfDomain(f"point {x} lies outside [0,1]^{D}")
    return x


def project(leaves: Sequence[Cell], x) -> Cell:
    """Leaf whose center is nearest to ``x``; ties go to the smallest (h, i)."""
    if not leaves:
        raise InvalidConfig("empty leaf set")
    x = _check_point(x, leaves[0].D)
    best = None
    best_d = math.inf
    for c in sorted(leaves, key=lambda c: c.key):
        d = float(np.sum((c.center - x) ** 2))
        if d < best_d - 1e-15:
            best, best_d = c, d
    return best


class Tiling:
    """Vectorised point location for a set of leaves tiling the cube.

    Boxes are treated as half-open ``[lo, hi)`` except on the upper face of
    the cube, so every point of [0,1]^D belongs to exactly one leaf.
    """

    def __init__(self, leaves: Iterable[Cell]):
        self.leaves = sorted(leaves, key=lambda c: c.key)
        if not self.leaves:
            raise InvalidConfig("empty leaf set")
        self.D = self.leaves[0].D
        self.lo = np.array([c.lo for c in self.leaves], dtype=float)
        self.hi = np.array([c.hi for c in self.leaves], dtype=float)
        if self.D == 1:
            self._order = np.argsort(self.lo[:, 0])
            self._starts = self.lo[self._order, 0]

    def __len__(self):
        return len(self.leaves)

    def locate(self, X) -> np.ndarray:
        """Index into ``self.leaves`` of the leaf containing each row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.D)
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise OutOfDomain("points outside the unit cube")
        if self.D == 1:
            pos = np.searchsorted(self._starts, X[:, 0], side="right") - 1
            return self._order[np.clip(pos, 0, len(self.leaves) - 1)]
        out = np.full(X.shape[0], -1, dtype=np.int64)
        top = self.hi >= 1.0
        for k in range(len(self.leaves)):
            upper_ok = (X < self.hi[k]) | (top[k] & (X <= 1.0))
            inside = np.all((X >= self.lo[k]) & upper_ok, axis=1) & (out < 0)
            out[inside] = k
        if np.any(out < 0):
            raise InvalidConfig("leaves do not tile the cube")
        return out


def locate(leaves: Sequence[Cell], x) -> Cell:
    """Leaf containing ``x`` (half-open boxes, closed at the cube's upper face)."""
    x = _check_point(x, leaves[0].D)
    tiling = Tiling(leaves)
    return tiling.leaves[int(tiling.locate(x.reshape(1, -1))[0])]


def tiles_cube(leaves: Sequence[Cell], n_probe: int = 2000, rng=None, tol: float = 1e-12) -> bool:
    """Check that ``leaves`` cover [0,1]^D with pairwise-disjoint interiors.

    Volume must sum to one and every random probe point must fall in the
    open interior of exactly one leaf.
    """
    if not leaves:
        return False
    if abs(sum(c.volume for c in leaves) - 1.0) > tol:
        return False
    rng = np.random.default_rng(0) if rng is None else rng
    D = leaves[0].D
    X = rng.random((n_probe, D))
    lo = np.array([c.lo for c in leaves])
    hi = np.array([c.hi for c in leaves])
    hits = np.zeros(n_probe, dtype=int)
    for k in range(len(leaves)):
        hits += np.all((X > lo[k]) & (X < hi[k]), axis=1)
    return bool(np.all(hits == 1))


def outer_radius_ok(cell: Cell, tp: TreeParams) -> bool:
    """box ⊆ B(center, v1 rho^h): the half-diagonal fits in the outer ball."""
    half_diag = 0.5 * float(np.linalg.norm(cell.widths))
    return half_diag <= tp.v1 * tp.rho ** cell.h * (1.0 + 1e-12)
