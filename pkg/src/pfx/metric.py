"""Perturbed metrics (D, P) with exact part d = D - P, and sample-based axiom audits.

Scalar-domain distance callables must broadcast over numpy arrays; grid-function
callables take two 1-D arrays and return a float.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidScale, MismatchedBase, NegativeExactDistance

POINT_TOL = 1e-12
TRIANGLE_TOL = 1e-10
# Points the scalar default sample always contains (Example 3.1 witness).
SPECIAL_POINTS = (0.0, 1.0 / 3.0, 0.5)

Distance = Callable[..., "np.ndarray | float"]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    is_scalar = True

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, x, tol: float = POINT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.isfinite(x)) and np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def equal(self, x, y, tol: float = POINT_TOL) -> bool:
        return abs(float(x) - float(y)) <= tol

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def default_sample(self, n: int = 41) -> list[float]:
        pts = set(self.grid(n).tolist())
        pts.update(p for p in SPECIAL_POINTS if self.lo <= p <= self.hi)
        return sorted(pts)

    def describe(self) -> str:
        return f"interval[{self.lo!r}, {self.hi!r}]"


@dataclass(frozen=True)
class GridSpace:
    """Real functions sampled on the uniform grid t_i = i/(n_nodes - 1)."""

    n_nodes: int
    bound: float = np.inf

    is_scalar = False

    def contains(self, u, tol: float = POINT_TOL) -> bool:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_nodes,) or not np.all(np.isfinite(u)):
            return False
        return bool(np.max(np.abs(u)) <= self.bound + tol)

    def equal(self, u, v, tol: float = POINT_TOL) -> bool:
        return float(np.max(np.abs(np.asarray(u) - np.asarray(v)))) <= tol

    def describe(self) -> str:
        return f"grid[{self.n_nodes}]"


@dataclass(frozen=True)
class PerturbedMetric:
    D: Distance
    P: Distance | None = None
    domain: Interval | GridSpace = field(default_factory=lambda: Interval(-np.inf, np.inf))
    name: str = ""

    def perturbation(self, x, y):
        if self.P is None:
            return 0.0 * np.asarray(self.D(x, y), dtype=float)
        return self.P(x, y)

    def exact(self, x, y):
        """Raw d = D - P, broadcasting for scalar domains; no checks."""
        return np.asarray(self.D(x, y), dtype=float) - np.asarray(self.perturbation(x, y), dtype=float)


@dataclass
class Violation:
    axiom: str
    points: tuple
    lhs: float
    rhs: float

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


@dataclass
class AxiomReport:
    violations: list[Violation]
    samples_checked: int

    @property
    def passed(self) -> bool:
        return not self.violations

    def by_axiom(self, axiom: str) -> list[Violation]:
        return [v for v in self.violations if v.axiom == axiom]


def _check_points(domain, points):
    for p in points:
        if not domain.contains(p):
            raise DomainError(f"point {p!r} outside {domain.describe()}")


def pair_matrix(fn: Distance, sample: Sequence) -> np.ndarray:
    """M[i, j] = fn(sample[i], sample[j])."""
    n = len(sample)
    if n and np.ndim(sample[0]) == 0:
        xs = np.asarray(sample, dtype=float)
        return np.array(np.broadcast_to(fn(xs[:, None], xs[None, :]), (n, n)), dtype=float)
    M = np.empty((n, n))
    for i, x in enumerate(sample):
        for j, y in enumerate(sample):
            M[i, j] = fn(x, y)
    return M


def eval_exact(m: PerturbedMetric, x, y, tol: float = TRIANGLE_TOL) -> float:
    _check_points(m.domain, (x, y))
    d = float(m.exact(x, y))
    if d < -tol:
        raise NegativeExactDistance(f"D - P = {d!r} at ({x!r}, {y!r})")
    return max(d, 0.0)


def audit_axioms(
    m: PerturbedMetric, sample: Sequence, tol: float = TRIANGLE_TOL, point_tol: float = POINT_TOL
) -> AxiomReport:
    """Check nonnegativity of D and P plus (P1)-(P4) for d = D - P on a finite sample.

    Every violation is recorded with gap = lhs - rhs. For the distinct-points half of
    (P2) the witness is lhs = 0, rhs = d(x, y), flagged whenever d(x, y) <= 0.
    """
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    sample = list(sample)
    _check_points(m.domain, sample)
    n = len(sample)
    Dm = pair_matrix(m.D, sample)
    Pm = pair_matrix(m.perturbation, sample)
    dm = Dm - Pm
    same = np.array([[m.domain.equal(a, b, point_tol) for b in sample] for a in sample])
    out: list[Violation] = []

    for i in range(n):
        for j in range(n):
            pair = (sample[i], sample[j])
            if Dm[i, j] < -tol:
                out.append(Violation("D_nonneg", pair, 0.0, Dm[i, j]))
            if Pm[i, j] < -tol:
                out.append(Violation("P_nonneg", pair, 0.0, Pm[i, j]))
            if dm[i, j] < -tol:
                out.append(Violation("P1", pair, 0.0, dm[i, j]))
            if same[i, j]:
                if abs(dm[i, j]) > tol:
                    out.append(Violation("P2", pair, abs(dm[i, j]), 0.0))
            elif dm[i, j] <= 0.0:
                out.append(Violation("P2", pair, 0.0, dm[i, j]))
            if dm[i, j] - dm[j, i] > tol:
                out.append(Violation("P3", pair, dm[i, j], dm[j, i]))

    for i in range(n):
        # gap[j, k] = d(x_i, x_j) - d(x_i, x_k) - d(x_k, x_j)
        gap = dm[i][:, None] - dm[i][None, :] - dm.T
        for j, k in zip(*np.nonzero(gap > tol)):
            out.append(
                Violation("P4", (sample[i], sample[j], sample[k]), float(dm[i, j]), float(dm[i, k] + dm[k, j]))
            )
    return AxiomReport(out, n)


@dataclass
class TriangleWitness:
    x: object
    y: object
    z: object
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def find_triangle_violation(D: Distance, sample: Sequence, tol: float = TRIANGLE_TOL) -> TriangleWitness | None:
    """Triple maximising D(x, y) - D(x, z) - D(z, y), if that maximum exceeds tol.

    Ties go to the lexicographically smallest index triple (i, j, k).
    """
    sample = list(sample)
    if len(sample) < 3:
        raise ValueError("need at least 3 sample points")
    M = pair_matrix(D, sample)
    best, best_idx = -np.inf, None
    for i in range(len(sample)):
        gap = M[i][:, None] - M[i][None, :] - M.T
        flat = int(np.argmax(gap))
        if gap.flat[flat] > best:
            best = gap.flat[flat]
            best_idx = (i, *np.unravel_index(flat, gap.shape))
    if best_idx is None or best <= tol:
        return None
    i, j, k = (int(v) for v in best_idx)
    return TriangleWitness(sample[i], sample[j], sample[k], float(M[i, j]), float(M[i, k] + M[k, j]))


def average_perturbations(
    m1: PerturbedMetric, m2: PerturbedMetric, sample: Sequence | None = None, tol: float = POINT_TOL
) -> PerturbedMetric:
    """(X, D, (P + Q)/2) from (X, D, P) and (X, D, Q); exact metric becomes (d1 + d2)/2."""
    if m1.D is not m2.D:
        if sample is None:
            if not m1.domain.is_scalar:
                raise ValueError("a sample is required to compare grid-function metrics")
            sample = m1.domain.default_sample()
        diff = np.abs(pair_matrix(m1.D, list(sample)) - pair_matrix(m2.D, list(sample)))
        if np.max(diff) > tol:
            raise MismatchedBase(f"D functions differ by {np.max(diff):.3e} on the sample")

    def P(x, y):
        return 0.5 * (np.asarray(m1.perturbation(x, y)) + np.asarray(m2.perturbation(x, y)))

    return PerturbedMetric(m1.D, P, m1.domain, name=f"avg({m1.name}, {m2.name})")


def scale(alpha: float, m: PerturbedMetric) -> PerturbedMetric:
    if not alpha > 0:
        raise InvalidScale(f"alpha must be positive, got {alpha!r}")

    def D(x, y):
        return alpha * np.asarray(m.D(x, y))

    def P(x, y):
        return alpha * np.asarray(m.perturbation(x, y))

    return PerturbedMetric(D, P, m.domain, name=f"{alpha!r}*{m.name}")


# Metrics appearing in the worked examples.

def x2y4_perturbed(domain: Interval | None = None) -> PerturbedMetric:
    """D = |x - y| + x^2 y^4 with P = x^2 y^4 on the reals."""
    return PerturbedMetric(
        lambda x, y: np.abs(x - y) + x**2 * y**4,
        lambda x, y: x**2 * y**4,
        domain or Interval(-np.inf, np.inf),
        name="abs+x2y4",
    )


def quartic_unit() -> PerturbedMetric:
    """D = |x - y| + (x - y)^4 with P = (x - y)^4 on [0, 1]."""
    return PerturbedMetric(
        lambda x, y: np.abs(x - y) + (x - y) ** 4,
        lambda x, y: (x - y) ** 4,
        Interval(0.0, 1.0),
        name="abs+quartic",
    )


def quadratic_unit() -> PerturbedMetric:
    """D = |x - y| + (x - y)^2 with P = (x - y)^2 on [0, 1]."""
    return PerturbedMetric(
        lambda x, y: np.abs(x - y) + (x - y) ** 2,
        lambda x, y: (x - y) ** 2,
        Interval(0.0, 1.0),
        name="abs+quadratic",
    )


def absolute(domain: Interval | None = None) -> PerturbedMetric:
    return PerturbedMetric(lambda x, y: np.abs(x - y), None, domain or Interval(0.0, 1.0), name="abs")
