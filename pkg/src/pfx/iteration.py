"""Picard iteration x_{n+1} = T x_n with the diagnostics used by the fixed-point argument."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import ZERO_THRESHOLD, SelfMap
from .errors import DomainError, DomainExit, InsufficientData, NonPositiveArgument
from .gauge import LN, FGauge, eval_gauge
from .metric import PerturbedMetric, eval_exact

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 10_000

FIXED_POINT = "fixed_point"
TOLERANCE_MET = "tolerance_met"
MAX_ITERS = "max_iters"
DOMAIN_EXIT = "domain_exit"


@dataclass
class IterationTrace:
    points: list = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)
    exact_steps: list[float] = field(default_factory=list)
    f_gamma: list[float] = field(default_factory=list)
    perturbations: list[float] = field(default_factory=list)
    stop_reason: str | None = None

    @property
    def final(self):
        return self.points[-1]

    @property
    def n_steps(self) -> int:
        return len(self.gamma)


def _same(a, b) -> bool:
    return bool(np.array_equal(np.asarray(a), np.asarray(b)))


def iterate(
    T: SelfMap,
    x0,
    m: PerturbedMetric,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    gauge: FGauge = LN,
) -> IterationTrace:
    """Run x_{n+1} = T x_n until a stop condition holds.

    Stops with ``fixed_point`` when T x_n is bit-identical to x_n, ``tolerance_met`` when
    the exact step d(x_{n+1}, x_n) drops below tol, ``max_iters`` otherwise. F(gamma_n) is
    recorded only while gamma_n stays above the zero threshold.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not m.domain.contains(x0):
        raise DomainError(f"x0 = {x0!r} outside {m.domain.describe()}")
    trace = IterationTrace(points=[x0])
    gauge_live = True
    x = x0
    for _ in range(max_iters):
        y = T(x)
        if not m.domain.contains(y):
            trace.stop_reason = DOMAIN_EXIT
            raise DomainExit(f"iterate {len(trace.points)} left {m.domain.describe()}", trace)
        trace.points.append(y)
        g = float(m.D(y, x))
        p = float(m.perturbation(y, x))
        trace.gamma.append(g)
        trace.perturbations.append(p)
        trace.exact_steps.append(eval_exact(m, y, x))
        if gauge_live and g > ZERO_THRESHOLD:
            trace.f_gamma.append(float(eval_gauge(gauge, g)))
        else:
            gauge_live = False
        if _same(y, x):
            trace.stop_reason = FIXED_POINT
            return trace
        if trace.exact_steps[-1] < tol:
            trace.stop_reason = TOLERANCE_MET
            return trace
        x = y
    trace.stop_reason = MAX_ITERS
    return trace


@dataclass
class DecayCheck:
    ok: bool
    first_failure: int | None
    checked: int

    def __bool__(self):
        return self.ok


def check_gamma_decay(trace: IterationTrace, g: FGauge, tau: float, tol: float = 0.0) -> DecayCheck:
    """Verify F(gamma_n) <= F(gamma_0) - n * tau + tol along the trace."""
    usable = []
    for n, gam in enumerate(trace.gamma):
        if gam > ZERO_THRESHOLD:
            usable.append(gam)
            continue
        if not _same(trace.points[n + 1], trace.points[n]):
            raise NonPositiveArgument(f"gamma_{n} = {gam!r} for distinct iterates")
        break
    if len(usable) < 2:
        return DecayCheck(True, None, len(usable))
    F = np.asarray(eval_gauge(g, np.array(usable)))
    bound = F[0] - tau * np.arange(len(usable)) + tol
    bad = np.nonzero(F > bound)[0]
    if bad.size:
        return DecayCheck(False, int(bad[0]), len(usable))
    return DecayCheck(True, None, len(usable))


def estimate_rate(trace: IterationTrace) -> float:
    """Geometric mean of successive exact-step ratios over the tail half of the run."""
    steps = []
    for s in trace.exact_steps:
        if s <= ZERO_THRESHOLD:
            break
        steps.append(s)
    if len(steps) < 3:
        raise InsufficientData(f"need >= 3 nonzero exact steps, got {len(steps)}")
    ratios = np.asarray(steps[1:]) / np.asarray(steps[:-1])
    tail = ratios[len(ratios) // 2:]
    return float(np.exp(np.mean(np.log(tail))))


def step_ratios(trace: IterationTrace) -> np.ndarray:
    s = np.asarray(trace.exact_steps, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return s[1:] / s[:-1]


def cauchy_chain_holds(trace: IterationTrace, m: PerturbedMetric, n: int, p: int, tol: float = 1e-12) -> bool:
    """d(x_{n+p}, x_n) <= sum of the p intermediate exact steps."""
    lhs = eval_exact(m, trace.points[n + p], trace.points[n])
    return lhs <= math.fsum(trace.exact_steps[n:n + p]) + tol


@dataclass
class UniquenessProbe:
    finals: list
    traces: list[IterationTrace]
    spread: float


def uniqueness_probe(
    T: SelfMap,
    m: PerturbedMetric,
    starts,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> UniquenessProbe:
    """Iterate from every start; spread is the largest pairwise exact distance of the limits."""
    traces = [iterate(T, x0, m, tol, max_iters) for x0 in starts]
    finals = [t.final for t in traces]
    spread = 0.0
    for i in range(len(finals)):
        for j in range(i + 1, len(finals)):
            spread = max(spread, eval_exact(m, finals[i], finals[j]))
    return UniquenessProbe(finals, traces, spread)


def seeded_starts(domain, count: int = 10, seed: int = 0) -> list[float]:
    rng = np.random.default_rng(seed)
    return rng.uniform(domain.lo, domain.hi, count).tolist()
