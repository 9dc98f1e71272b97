"""Synthetic problem instances with known regression functions and marginals.

An instance bundles a regression function ``eta`` (vectorised over rows of
an ``(N, D)`` array), a sampler for the marginal, and whatever closed forms
are available: box masses, box integrals of ``eta``, the bounded-rate
threshold and the two Bayes risks.  Evaluation code uses the closed forms
when present and falls back to Monte Carlo otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidConfig
from .partition_tree import Cell

Box = tuple  # (lo, hi), each a length-D tuple


@dataclass(frozen=True)
class Descriptors:
    L: float
    beta: float
    C0: Optional[float] = None
    alpha0: Optional[float] = None
    C1: Optional[float] = None
    alpha1: Optional[float] = None

    @property
    def C2(self) -> Optional[float]:
        if self.C0 is None or self.C1 is None:
            return None
        return min(self.C0, self.C1)

    @property
    def alpha2(self) -> Optional[float]:
        if self.alpha0 is None or self.alpha1 is None:
            return None
        return max(self.alpha0, self.alpha1)


@dataclass(frozen=True)
class MeasureResult:
    value: float
    stderr: float = 0.0

    @property
    def exact(self) -> bool:
        return self.stderr == 0.0


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    name: str
    D: int
    eta_fn: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    desc: Descriptors
    spec: dict = field(default_factory=dict)
    # (lo, hi) -> (mass, stderr)
    box_mass: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None
    # (lo, hi) -> integral of eta dP_X over the box
    box_eta_mass: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    gamma_delta_exact: Optional[Callable[[float], float]] = None
    bayes_fixed_exact: Optional[Callable[[float], float]] = None
    bayes_bounded_exact: Optional[Callable[[float], float]] = None
    flags: tuple = ()
    extra: dict = field(default_factory=dict)

    def eta(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.D)
        return self.eta_fn(X)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        if m <= 0:
            return np.empty((0, self.D))
        return self.sampler(rng, int(m))

    def sample_labels(self, rng: np.random.Generator, X) -> np.ndarray:
        p = self.eta(X)
        return (rng.random(p.shape[0]) < p).astype(np.int8)


def _as_box(b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(b, Cell):
        return np.asarray(b.lo, dtype=float), np.asarray(b.hi, dtype=float)
    lo, hi = b
    return np.atleast_1d(np.asarray(lo, dtype=float)), np.atleast_1d(np.asarray(hi, dtype=float))


def _uniform_box_mass(lo, hi):
    return float(np.prod(np.clip(hi, 0, 1) - np.clip(lo, 0, 1))), 0.0


def measure(instance: ProblemInstance, boxes: Iterable, n_mc: int = 10 ** 6,
            rng: Optional[np.random.Generator] = None) -> MeasureResult:
    """P_X of a union of pairwise-disjoint boxes (Cells or ``(lo, hi)`` pairs)."""
    boxes = [_as_box(b) for b in boxes]
    if not boxes:
        return MeasureResult(0.0, 0.0)
    if instance.box_mass is not None:
        total, var = 0.0, 0.0
        for lo, hi in boxes:
            v, se = instance.box_mass(lo, hi)
            total += v
            var += se ** 2
        return MeasureResult(total, math.sqrt(var))
    rng = np.random.default_rng(0) if rng is None else rng
    X = instance.sample(rng, n_mc)
    hit = np.zeros(n_mc, dtype=bool)
    for lo, hi in boxes:
        hit |= np.all((X >= lo) & (X <= hi), axis=1)
    p = hit.mean()
    return MeasureResult(float(p), float(math.sqrt(p * (1 - p) / n_mc)))


def holder_excess(instance: ProblemInstance, rng: np.random.Generator, n_pairs: int = 10 ** 4,
                  L: Optional[float] = None, beta: Optional[float] = None) -> float:
    """Largest |eta(x1)-eta(x2)| - L d^beta over random pairs; <= 0 means no violation seen.

    Half the pairs are uniform over the cube, half are close pairs, where
    small-exponent violations would show up.
    """
    L = instance.desc.L if L is None else L
    beta = instance.desc.beta if beta is None else beta
    D = instance.D
    half = n_pairs // 2
    X1 = rng.random((n_pairs, D))
    X2 = rng.random((n_pairs, D))
    scale = 10.0 ** rng.uniform(-6, -1, size=(n_pairs - half, 1))
    X2[half:] = np.clip(X1[half:] + scale * rng.standard_normal((n_pairs - half, D)), 0, 1)
    d = np.linalg.norm(X1 - X2, axis=1)
    diff = np.abs(instance.eta(X1) - instance.eta(X2))
    return float(np.max(diff - L * d ** beta))


# ---------------------------------------------------------------- simple ones

def make_linear_1d() -> ProblemInstance:
    """eta(x) = x with uniform X on [0, 1]."""

    def box_eta_mass(lo, hi):
        a, b = float(np.clip(lo[0], 0, 1)), float(np.clip(hi[0], 0, 1))
        return 0.5 * (b * b - a * a)

    def bayes_fixed(lam):
        # min(x, 1-x, lam) integrated over [0, 1]
        return lam * lam + lam * (1 - 2 * lam)

    def gamma_delta(delta):
        return min(max(delta, 0.0), 1.0) / 2.0

    def bayes_bounded(delta):
        return (0.5 - gamma_delta(delta)) ** 2

    return ProblemInstance(
        name="linear1d",
        D=1,
        eta_fn=lambda X: X[:, 0].copy(),
        sampler=lambda rng, m: rng.random((m, 1)),
        desc=Descriptors(L=1.0, beta=1.0, C0=2.0, alpha0=1.0, C1=1.0, alpha1=1.0),
        spec={"kind": "linear1d"},
        box_mass=_uniform_box_mass,
        box_eta_mass=box_eta_mass,
        gamma_delta_exact=gamma_delta,
        bayes_fixed_exact=bayes_fixed,
        bayes_bounded_exact=bayes_bounded,
    )


def make_constant(value: float, D: int = 1) -> ProblemInstance:
    """eta identically ``value`` with uniform X on the cube."""
    if not 0.0 <= value <= 1.0:
        raise InvalidConfig(f"constant regression value must lie in [0, 1], got {value}")
    if D < 1:
        raise InvalidConfig(f"dimension must be >= 1, got {D}")
    c = float(value)

    def bayes_fixed(lam):
        return min(c, 1 - c, lam)

    def bayes_bounded(delta):
        # all mass sits at one eta level; abstaining on a delta fraction is optimal
        return (1 - min(delta, 1.0)) * min(c, 1 - c)

    return ProblemInstance(
        name="constant",
        D=D,
        eta_fn=lambda X: np.full(X.shape[0], c),
        sampler=lambda rng, m: rng.random((m, D)),
        desc=Descriptors(L=1e-12, beta=1.0),
        spec={"kind": "constant", "value": c, "D": D},
        box_mass=_uniform_box_mass,
        box_eta_mass=lambda lo, hi: c * _uniform_box_mass(lo, hi)[0],
        bayes_fixed_exact=bayes_fixed,
        bayes_bounded_exact=bayes_bounded,
    )


# ----------------------------------------------------------- Hölder profiles

def _signed_pow(s, g):
    return np.sign(s) * np.abs(s) ** g


def make_holder_instance(L: float = 1.0, beta: float = 1.0, alpha0: float = 1.0,
                         lam: float = 0.2, D: int = 1, seed: int = 0) -> ProblemInstance:
    """Uniform-marginal instance whose eta is a two-ramp profile along one axis.

    eta rises through lam at ``m - w`` and through 1 - lam at ``m + w`` with
    power profile ``|s|^g``, ``g = 1/alpha0``, so the level-set masses scale
    as ``t^alpha0``.  The seed picks the axis and the centre ``m``.
    """
    if not 0.0 < beta <= 1.0:
        raise InvalidConfig(f"beta must lie in (0, 1], got {beta}")
    if not L > 0:
        raise InvalidConfig(f"L must be positive, got {L}")
    if alpha0 < 0:
        raise InvalidConfig(f"alpha0 must be >= 0, got {alpha0}")
    if not 0.0 < lam < 0.5:
        raise InvalidConfig(f"lambda must lie in (0, 1/2), got {lam}")
    if D < 1:
        raise InvalidConfig(f"dimension must be >= 1, got {D}")
    g = 1.0 if alpha0 == 0 else 1.0 / alpha0
    if g < beta:
        raise InvalidConfig(f"need alpha0 * beta <= 1 for a Hölder-{beta} profile, got alpha0={alpha0}")
    gap = 0.5 - lam
    if g <= 1.0:
        # signed power is Hölder-g with constant 2^(1-g) per ramp; crossing the
        # midpoint doubles that again
        c = L / 4.0 ** (1.0 - g)
    else:
        # Lipschitz branch: the slope g c w^(g-1) at the ramp end must be <= L
        c = (L / (g * gap ** ((g - 1.0) / g))) ** g
    w = (gap / c) ** (1.0 / g)
    if w > 0.5:
        raise InvalidConfig(f"profile too flat: ramp half-width {w:.3f} exceeds 1/2; increase L")
    rng = np.random.default_rng(seed)
    axis = int(rng.integers(D))
    m = float(rng.uniform(w, 1.0 - w)) if w < 0.5 else 0.5

    def profile(s):
        s = np.asarray(s, dtype=float)
        left = np.clip(lam + c * _signed_pow(s - (m - w), g), 0.0, 0.5)
        right = np.clip(1.0 - lam + c * _signed_pow(s - (m + w), g), 0.5, 1.0)
        return np.where(s <= m, left, right)

    breaks = sorted(p for p in (m - w, m, m + w) if 0 < p < 1)

    def integral(a, b):
        if b <= a:
            return 0.0
        pts = [p for p in breaks if a < p < b]
        return float(integrate.quad(profile, a, b, points=pts or None, limit=200, epsabs=1e-13)[0])

    def box_eta_mass(lo, hi):
        lo = np.clip(lo, 0, 1)
        hi = np.clip(hi, 0, 1)
        other = float(np.prod(np.delete(hi - lo, axis)))
        return other * integral(lo[axis], hi[axis])

    grid = np.linspace(0.0, 1.0, 200_001)
    vals = profile(grid)

    def level_mass(gamma, t):
        return float(np.mean(np.abs(vals - gamma) <= t))

    ts = np.geomspace(1e-3, 1.0, 60)
    if alpha0 == 0:
        C0 = 1.0
        C1 = min(min(level_mass(lam, t), level_mass(1 - lam, t)) for t in ts)
        alpha1 = 0.0
    else:
        ratios = [max(level_mass(lam, t), level_mass(1 - lam, t)) / t ** alpha0 for t in ts]
        C0 = 1.02 * max(ratios)
        alpha1 = alpha0
        C1 = 0.98 * min(min(level_mass(lam, t), level_mass(1 - lam, t)) / t ** alpha1 for t in ts)

    def bayes_fixed(lam_eval):
        f = lambda s: np.minimum(np.minimum(profile(s), 1 - profile(s)), lam_eval)
        return float(integrate.quad(f, 0, 1, points=breaks or None, limit=400, epsabs=1e-13)[0])

    def eta_fn(X):
        return profile(X[:, axis])

    return ProblemInstance(
        name="holder",
        D=D,
        eta_fn=eta_fn,
        sampler=lambda r, k: r.random((k, D)),
        desc=Descriptors(L=L, beta=beta, C0=C0, alpha0=float(alpha0), C1=C1, alpha1=float(alpha1)),
        spec={"kind": "holder", "L": L, "beta": beta, "alpha0": alpha0, "lambda": lam, "D": D, "seed": seed},
        box_mass=_uniform_box_mass,
        box_eta_mass=box_eta_mass,
        bayes_fixed_exact=bayes_fixed,
    )


# ------------------------------------------------------ hard (lower) instance

@dataclass(frozen=True)
class SigmaVector:
    sigma: tuple

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.sigma):
            raise InvalidConfig("sigma entries must be -1 or +1")

    def __len__(self):
        return len(self.sigma)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "SigmaVector":
        return cls(tuple(int(v) for v in rng.choice([-1, 1], size=length)))

    @classmethod
    def ones(cls, length: int) -> "SigmaVector":
        return cls((1,) * length)


def _unit_ball_volume(D: int) -> float:
    return math.pi ** (D / 2) / math.gamma(D / 2 + 1)


def _sample_ball(rng, m, D, center, r):
    z = rng.standard_normal((m, D))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    rad = r * rng.random(m) ** (1.0 / D)
    return np.asarray(center) + z * rad[:, None]


@dataclass(frozen=True)
class _Component:
    """Piece of a mixture marginal: uniform on a Euclidean ball, or on the part
    of a corner ball inside the cube when ``inward`` is given."""

    weight: float
    center: np.ndarray
    radius: float
    inward: Optional[np.ndarray] = None  # +1/-1 per axis pointing into the cube

    def sample(self, rng, m):
        D = self.center.shape[0]
        pts = _sample_ball(rng, m, D, np.zeros(D), self.radius)
        if self.inward is not None:
            pts = np.abs(pts) * self.inward
        return np.clip(self.center + pts, 0.0, 1.0)

    def support_box(self):
        if self.inward is None:
            return self.center - self.radius, self.center + self.radius
        far = self.center + self.inward * self.radius
        return np.minimum(self.center, far), np.maximum(self.center, far)


def make_lower_bound_instance(D: int = 2, eps: float = 1 / 30, w: Optional[float] = None,
                              sigma: Optional[SigmaVector] = None, lam: float = 0.2,
                              L: float = 3.0, beta: float = 1.0, q5_delta: Optional[float] = None,
                              mc_samples: int = 20_000) -> ProblemInstance:
    """Hard instance built from sign-flipped bumps near the two decision thresholds.

    Corner balls Q1..Q4 of radius 1/3 sit at the corners 0, e_1, e_2,
    e_1 + e_2.  Side-``eps`` grid cubes fully inside Q1 (Q2) carry bumps
    ``lam + sigma*phi`` (``1 - lam + sigma*phi``); eta is 1 on Q3 and 0 on Q4,
    with power ramps of slope L outside the balls and 1/2 elsewhere.  The
    marginal puts mass ``w`` uniformly on a ball of radius eps/4 around each
    bump centre and splits the rest between Q3 and Q4.  With ``q5_delta``
    (D >= 3) a fifth corner ball where eta = 1/2 receives mass
    ``q5_delta - 2 M w`` and Q3, Q4 get ``(1 - q5_delta)/2`` each.
    """
    if D < 2:
        raise InvalidConfig(f"lower-bound construction needs D >= 2, got {D}")
    if not 0.0 < beta <= 1.0:
        raise InvalidConfig(f"beta must lie in (0, 1], got {beta}")
    if not 0.0 < lam < 0.5:
        raise InvalidConfig(f"lambda must lie in (0, 1/2), got {lam}")
    if L < 3:
        raise InvalidConfig(f"need L >= 3 so the ramps stay short, got {L}")
    k = int(round(1.0 / eps))
    if k < 1 or abs(k * eps - 1.0) > 1e-9:
        raise InvalidConfig(f"1/eps must be an integer, got eps={eps}")
    amp = L * (eps / 2) ** beta
    if not amp < 0.5 - lam:
        raise InvalidConfig(f"bump height {amp:.4f} must be below 1/2 - lambda = {0.5 - lam}")
    if q5_delta is not None and D < 3:
        raise InvalidConfig("the fifth corner region needs D >= 3")

    corners = [np.zeros(D) for _ in range(4)]
    corners[1][0] = 1.0
    corners[2][1] = 1.0
    corners[3][0] = corners[3][1] = 1.0
    inward = [np.where(c > 0.5, -1.0, 1.0) for c in corners]
    if q5_delta is not None:
        c5 = np.zeros(D)
        c5[2] = 1.0
        corners.append(c5)
        inward.append(np.where(c5 > 0.5, -1.0, 1.0))

    # grid cubes fully inside Q1 and Q2
    idx = np.array(list(itertools.product(range(k), repeat=D)), dtype=float)
    centers_all = (idx + 0.5) * eps
    bump_centers = []
    for j in (0, 1):
        far = np.where(inward[j] > 0, idx + 1.0, idx) * eps  # farthest cube corner from e_j
        inside = np.linalg.norm(far - corners[j], axis=1) <= 1.0 / 3.0 + 1e-12
        bump_centers.append(centers_all[inside])
    M = len(bump_centers[0])
    if M == 0 or len(bump_centers[1]) != M:
        raise InvalidConfig(f"eps={eps} leaves no grid cube inside the corner balls")
    centers = np.vstack(bump_centers)
    if sigma is None:
        sigma = SigmaVector.ones(2 * M)
    if len(sigma) != 2 * M:
        raise InvalidConfig(f"sigma must have length {2 * M}, got {len(sigma)}")
    sig = np.asarray(sigma.sigma, dtype=float)
    if w is None:
        w = 1.0 / (4.0 * M)
    if not 0 < w or M * w > 0.5:
        raise InvalidConfig(f"need 0 < w and M*w <= 1/2, got M={M}, w={w}")
    if q5_delta is not None and not 2 * M * w <= q5_delta <= 1:
        raise InvalidConfig("q5_delta must lie in [2 M w, 1]")

    lookup = np.full((k,) * D, -1, dtype=np.int64)
    cube_idx = np.floor(centers / eps).astype(int)
    lookup[tuple(cube_idx.T)] = np.arange(2 * M)
    base = np.where(np.arange(2 * M) < M, lam, 1.0 - lam)

    z1 = ((0.5 - lam) / L) ** (1.0 / beta)
    z2 = (1.0 / (2.0 * L)) ** (1.0 / beta)

    def eta_fn(X):
        n = X.shape[0]
        out = np.full(n, 0.5)
        d = [np.maximum(np.linalg.norm(X - corners[j], axis=1) - 1.0 / 3.0, 0.0) for j in range(4)]
        ramp = [(d[0] <= z1, lam + L * d[0] ** beta),
                (d[1] <= z1, 1.0 - lam - L * d[1] ** beta),
                (d[2] <= z2, 1.0 - L * d[2] ** beta),
                (d[3] <= z2, L * d[3] ** beta)]
        for mask, val in ramp:
            out = np.where(mask, val, out)
        ci = np.minimum(np.floor(X / eps).astype(int), k - 1)
        b = lookup[tuple(ci.T)]
        hit = b >= 0
        if np.any(hit):
            bb = b[hit]
            r = np.linalg.norm(X[hit] - centers[bb], axis=1)
            phi = amp * np.maximum(1.0 - 2.0 * r / eps, 0.0) ** beta
            out[hit] = base[bb] + sig[bb] * phi
        return out

    comps = [_Component(w, centers[b], eps / 4.0) for b in range(2 * M)]
    if q5_delta is None:
        rest = (1.0 - 2 * M * w) / 2.0
        comps += [_Component(rest, corners[j], 1.0 / 3.0, inward[j]) for j in (2, 3)]
    else:
        comps += [_Component((1.0 - q5_delta) / 2.0, corners[j], 1.0 / 3.0, inward[j]) for j in (2, 3)]
        comps.append(_Component(q5_delta - 2 * M * w, corners[4], 1.0 / 3.0, inward[4]))
    weights = np.array([c.weight for c in comps])
    weights = weights / weights.sum()

    def sampler(rng, m):
        counts = rng.multinomial(m, weights)
        parts = [comps[j].sample(rng, c) for j, c in enumerate(counts) if c]
        X = np.vstack(parts)
        return X[rng.permutation(m)]

    mc_cache: dict = {}

    def box_mass(lo, hi):
        total, var = 0.0, 0.0
        for j, comp in enumerate(comps):
            slo, shi = comp.support_box()
            if np.all(slo >= lo) and np.all(shi <= hi):
                total += comp.weight
                continue
            nearest = np.clip(comp.center, lo, hi)
            if np.linalg.norm(nearest - comp.center) >= comp.radius or np.any(shi <= lo) or np.any(slo >= hi):
                continue
            if j not in mc_cache:
                mc_cache[j] = comp.sample(np.random.default_rng(1_000_003 + j), mc_samples)
            pts = mc_cache[j]
            p = float(np.mean(np.all((pts >= lo) & (pts <= hi), axis=1)))
            total += comp.weight * p
            var += comp.weight ** 2 * p * (1 - p) / mc_samples
        return total, math.sqrt(var)

    spec = {"kind": "lower_bound", "D": D, "eps": eps, "w": w, "lambda": lam, "L": L, "beta": beta,
            "sigma": "".join("+" if s > 0 else "-" for s in sigma.sigma)}
    if q5_delta is not None:
        spec["q5_delta"] = q5_delta
    inst = ProblemInstance(
        name="lower_bound",
        D=D,
        eta_fn=eta_fn,
        sampler=sampler,
        desc=Descriptors(L=L, beta=beta),
        spec=spec,
        box_mass=box_mass,
        extra={"bump_centers": centers, "n_bumps": M, "amplitude": amp},
    )
    return inst


# ---------------------------------------------------------------------- GLM

@dataclass(frozen=True)
class LinkFunction:
    """Monotone link psi: R -> [-1/2, 1/2] with psi(0) = 0, here psi(z) = clip(slope z)."""

    slope: float = 0.25

    def __call__(self, z):
        return np.clip(self.slope * np.asarray(z, dtype=float), -0.5, 0.5)

    def inverse(self, v):
        return np.asarray(v, dtype=float) / self.slope

    @property
    def L(self) -> float:
        return self.slope

    @property
    def beta(self) -> float:
        return 1.0


def make_glm_instance(w_star: Sequence[float], psi: Optional[LinkFunction] = None) -> ProblemInstance:
    """eta(x) = psi(<x, w*>) + 1/2 with uniform X on [0,1]^D.

    eta accepts points off the cube as well, which the angle estimator uses
    to query points on the unit circle of a coordinate plane.
    """
    w = np.asarray(w_star, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise InvalidConfig("w_star must be a non-empty vector")
    psi = LinkFunction() if psi is None else psi
    norm = float(np.linalg.norm(w))
    if norm == 0:
        raise InvalidConfig("w_star must be non-zero")
    flags = ()
    if abs(norm - 1.0) > 1e-9:
        w = w / norm
        flags = ("w_star_normalized",)
    D = w.size
    return ProblemInstance(
        name="glm",
        D=D,
        eta_fn=lambda X: psi(X @ w) + 0.5,
        sampler=lambda rng, m: rng.random((m, D)),
        desc=Descriptors(L=psi.L * 1.0, beta=psi.beta),
        spec={"kind": "glm", "w_star": ",".join(repr(float(v)) for v in w), "psi_slope": psi.slope},
        box_mass=_uniform_box_mass,
        flags=flags,
    )


# ------------------------------------------------------------ serialisation

def _f(spec, key, default=None, cast=float):
    if key not in spec:
        if default is None:
            raise InvalidConfig(f"instance spec is missing '{key}'")
        return default
    try:
        return cast(spec[key])
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad value for '{key}': {spec[key]!r}") from exc


def instance_from_spec(spec: Mapping) -> ProblemInstance:
    """Rebuild an instance from the flat key/value mapping stored in ``instance.spec``."""
    kind = spec.get("kind")
    if kind == "linear1d":
        return make_linear_1d()
    if kind == "constant":
        return make_constant(_f(spec, "value"), _f(spec, "D", 1, int))
    if kind == "holder":
        return make_holder_instance(L=_f(spec, "L", 1.0), beta=_f(spec, "beta", 1.0),
                                    alpha0=_f(spec, "alpha0", 1.0), lam=_f(spec, "lambda", 0.2),
                                    D=_f(spec, "D", 1, int), seed=_f(spec, "seed", 0, int))
    if kind == "lower_bound":
        sigma = None
        if "sigma" in spec and spec["sigma"]:
            s = str(spec["sigma"])
            if set(s) - {"+", "-"}:
                raise InvalidConfig("sigma must be a string of '+' and '-'")
            sigma = SigmaVector(tuple(1 if ch == "+" else -1 for ch in s))
        q5 = spec.get("q5_delta")
        return make_lower_bound_instance(D=_f(spec, "D", 2, int), eps=_f(spec, "eps", 1 / 30),
                                         w=float(spec["w"]) if "w" in spec else None, sigma=sigma,
                                         lam=_f(spec, "lambda", 0.2), L=_f(spec, "L", 3.0),
                                         beta=_f(spec, "beta", 1.0),
                                         q5_delta=None if q5 is None else float(q5))
    if kind == "glm":
        w = [float(v) for v in str(_f(spec, "w_star", cast=str)).split(",")]
        return make_glm_instance(w, LinkFunction(_f(spec, "psi_slope", 0.25)))
    raise InvalidConfig(f"unknown instance kind {kind!r}")
