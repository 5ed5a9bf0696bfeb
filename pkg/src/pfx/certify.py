"""Sampled certification of F-perturbed maps and of the a_n series criterion."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError, NoEligiblePairs, NonPositiveArgument, OverflowGuard
from .gauge import FGauge, eval_gauge
from .metric import POINT_TOL, GridSpace, Interval, PerturbedMetric

ZERO_THRESHOLD = 1e-14
SERIES_RATIO = 0.95


@dataclass(frozen=True)
class SelfMap:
    apply: Callable
    domain: Interval | GridSpace
    name: str = ""

    def __call__(self, x):
        return self.apply(x)

    def many(self, xs: np.ndarray) -> np.ndarray:
        """Apply to a stack of points (1-D for scalars, one row per grid function)."""
        if self.domain.is_scalar:
            return np.asarray(np.broadcast_to(self.apply(xs), xs.shape), dtype=float)
        return np.stack([np.asarray(self.apply(x), dtype=float) for x in xs])


def check_self_map(T: SelfMap, sample) -> list:
    """Sample points whose image leaves the domain (empty when T is a self-map there)."""
    return [x for x in sample if not T.domain.contains(T(x))]


@dataclass(frozen=True)
class PairSample:
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        if self.left.shape != self.right.shape:
            raise ValueError("pair sides must have identical shapes")

    def __len__(self):
        return self.left.shape[0]

    def __iter__(self):
        return zip(self.left, self.right)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "PairSample":
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs], dtype=float), np.array([p[1] for p in pairs], dtype=float))

    def concat(self, other: "PairSample") -> "PairSample":
        return PairSample(np.concatenate([self.left, other.left]), np.concatenate([self.right, other.right]))


def as_pairs(pairs) -> PairSample:
    return pairs if isinstance(pairs, PairSample) else PairSample.from_pairs(pairs)


def grid_pairs(domain: Interval, n: int = 200) -> PairSample:
    """Full Cartesian product of an n-point uniform grid."""
    g = domain.grid(n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return PairSample(X.ravel(), Y.ravel())


def near_diagonal_pairs(domain: Interval, separations, n_base: int = 11) -> PairSample:
    """Pairs (x, x + delta) with x on a coarse grid, for probing small-separation limits."""
    base = domain.grid(n_base)
    left, right = [], []
    for x in base:
        for dlt in separations:
            y = x + dlt if x + dlt <= domain.hi else x - dlt
            if domain.contains(y):
                left.append(x)
                right.append(y)
    return PairSample(np.array(left), np.array(right))


def random_function_pairs(n_nodes: int, count: int = 50, seed: int = 0, bound: float = 2.0) -> PairSample:
    rng = np.random.default_rng(seed)
    return PairSample(
        rng.uniform(-bound, bound, (count, n_nodes)), rng.uniform(-bound, bound, (count, n_nodes))
    )


def pairwise(fn: Callable, X: np.ndarray, Y: np.ndarray, scalar: bool) -> np.ndarray:
    if scalar:
        return np.asarray(np.broadcast_to(fn(X, Y), X.shape), dtype=float)
    return np.array([fn(x, y) for x, y in zip(X, Y)], dtype=float)


def _first_outside(domain, pts: np.ndarray):
    if domain.is_scalar and domain.contains(pts):
        return None
    return next((p for p in pts if not domain.contains(p)), None)


def _check_domain(domain, pts: np.ndarray, what: str):
    bad = _first_outside(domain, pts)
    if bad is not None:
        raise DomainError(f"{what} {bad!r} outside {domain.describe()}")


@dataclass
class CertReport:
    certified: bool
    tau: float
    worst_margin: float
    worst_pair: tuple | None
    pairs_checked: int
    pairs_skipped_zero: int


def _margin_terms(T: SelfMap, m: PerturbedMetric, g: FGauge, pairs: PairSample):
    scalar = m.domain.is_scalar
    X, Y = pairs.left, pairs.right
    _check_domain(m.domain, X, "pair member")
    _check_domain(m.domain, Y, "pair member")
    TX, TY = T.many(X), T.many(Y)
    _check_domain(m.domain, TX, "image")
    _check_domain(m.domain, TY, "image")
    d_xy = pairwise(m.D, X, Y, scalar)
    d_txy = pairwise(m.D, TX, TY, scalar)
    eligible = d_txy > ZERO_THRESHOLD
    bad = eligible & ~(d_xy > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonPositiveArgument(f"D(x, y) = {d_xy[i]!r} <= 0 while D(Tx, Ty) > 0 at pair {i}")
    idx = np.nonzero(eligible)[0]
    # F(D(x, y)) - F(D(Tx, Ty)); certification subtracts tau from exactly this array.
    drop = eval_gauge(g, d_xy[idx]) - eval_gauge(g, d_txy[idx])
    return idx, np.atleast_1d(drop)


def certify_f_perturbed(
    T: SelfMap, m: PerturbedMetric, g: FGauge, tau: float, pairs, tol: float = 0.0
) -> CertReport:
    """Check tau + F(D(Tx, Ty)) <= F(D(x, y)) on every pair with D(Tx, Ty) > 0."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    pairs = as_pairs(pairs)
    idx, drop = _margin_terms(T, m, g, pairs)
    skipped = len(pairs) - idx.size
    if idx.size == 0:
        return CertReport(True, float(tau), math.inf, None, 0, skipped)
    margins = drop - tau
    w = int(np.argmin(margins))
    worst = float(margins[w])
    i = int(idx[w])
    pair = (_point(pairs.left[i]), _point(pairs.right[i]))
    return CertReport(bool(worst >= -tol), float(tau), worst, pair, int(idx.size), int(skipped))


def _point(p):
    return float(p) if np.ndim(p) == 0 else np.array(p)


def estimate_tau_max(T: SelfMap, m: PerturbedMetric, g: FGauge, pairs) -> float:
    """Infimum of F(D(x, y)) - F(D(Tx, Ty)) over eligible pairs.

    This is an upper bound on the admissible tau for the sampled pairs only; pairs
    missing from the sample can push the true supremum lower.
    """
    pairs = as_pairs(pairs)
    idx, drop = _margin_terms(T, m, g, pairs)
    if idx.size == 0:
        raise NoEligiblePairs("every pair has D(Tx, Ty) at or below the zero threshold")
    return float(np.min(drop))


@dataclass
class SeriesEstimate:
    a: list[float]
    partial_sums: list[float]
    convergent_flag: bool
    tail_ratio: float | None


def series_verdict(a, ratio_threshold: float = SERIES_RATIO) -> tuple[bool, float | None]:
    """Heuristic tail ratio test over the last ceil(n/2) ratios a_{n+1}/a_n."""
    a = np.asarray(a, dtype=float)
    if a.size < 2:
        return False, None
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(a[:-1] > 0, a[1:] / a[:-1], 0.0)
    tail = r[-math.ceil(a.size / 2):]
    worst = float(np.max(tail))
    return bool(worst <= ratio_threshold), worst


def estimate_series(
    T: SelfMap, m: PerturbedMetric, pairs, n_max: int, ratio_threshold: float = SERIES_RATIO
) -> SeriesEstimate:
    """a_n = max over sampled x != y of D(T^n x, T^n y) / D(x, y), for n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    pairs = as_pairs(pairs)
    scalar = m.domain.is_scalar
    if scalar:
        distinct = np.abs(pairs.left - pairs.right) > POINT_TOL
    else:
        distinct = np.array([not m.domain.equal(x, y) for x, y in pairs], dtype=bool)
    X, Y = pairs.left[distinct], pairs.right[distinct]
    if X.shape[0] == 0:
        raise NoEligiblePairs("no pair of distinct points in the sample")
    base = pairwise(m.D, X, Y, scalar)
    a = []
    for n in range(1, n_max + 1):
        X, Y = T.many(X), T.many(Y)
        if _first_outside(m.domain, X) is not None or _first_outside(m.domain, Y) is not None:
            raise OverflowGuard(f"iterate left {m.domain.describe()} at n = {n}")
        a.append(float(np.max(pairwise(m.D, X, Y, scalar) / base)))
    flag, tail = series_verdict(a, ratio_threshold)
    return SeriesEstimate(a, np.cumsum(a).tolist(), flag, tail)
