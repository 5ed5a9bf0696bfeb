"""-u'' = f(t, u), u(0) = u(1) = 0, solved as the fixed point of the Green's-function operator.

Functions live on the uniform grid t_i = i/(n_nodes - 1). The integral over s is split
at s = t_i where the kernel has its derivative kink: each side is integrated with
composite Simpson (a 3/8 panel closes odd interval counts). A one-interval side uses
a three-point rule on the kernel branch extended one node past the kink, which keeps
the whole operator fourth-order accurate.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .certify import SelfMap
from .errors import DomainError, NonFiniteValue, ShapeMismatch
from .iteration import DEFAULT_MAX_ITERS, IterationTrace, iterate
from .metric import AxiomReport, GridSpace, PerturbedMetric, Violation

DEFAULT_NODES = 201
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ShapeMismatch("grid function values must be 1-D")
        if v.size < 3 or v.size % 2 == 0:
            raise ShapeMismatch(f"n_nodes must be odd and >= 3, got {v.size}")
        object.__setattr__(self, "values", v)

    @property
    def n_nodes(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def t(self) -> np.ndarray:
        return grid(self.n_nodes)

    @classmethod
    def from_callable(cls, fn: Callable, n_nodes: int = DEFAULT_NODES) -> "GridFunction":
        t = grid(n_nodes)
        return cls(np.asarray(np.broadcast_to(fn(t), t.shape), dtype=float))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def grid(n_nodes: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_nodes)


@dataclass(frozen=True)
class BvpProblem:
    f: Callable
    tau: float = 0.2
    name: str = ""

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")

    @property
    def lipschitz_bound(self) -> float:
        return float(np.exp(-self.tau))

    def rhs(self, s, u) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.asarray(np.broadcast_to(self.f(s, np.asarray(u, dtype=float)), np.shape(s)), dtype=float)


def sine_rhs(s, u):
    """f(s, u) = ((s + 0.5)/2) sin u."""
    return (s + 0.5) / 2.0 * np.sin(u)


def green_kernel(t, s):
    """G(t, s) = s(1 - t) for s <= t, t(1 - s) otherwise."""
    t_arr, s_arr = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    if np.any((t_arr < 0) | (t_arr > 1) | (s_arr < 0) | (s_arr > 1)):
        raise DomainError("green_kernel is defined on the unit square only")
    out = np.where(s_arr <= t_arr, s_arr * (1.0 - t_arr), t_arr * (1.0 - s_arr))
    return float(out) if out.ndim == 0 else out


def simpson_weights(n_nodes: int) -> np.ndarray:
    """Composite Simpson weights on [0, 1] (unit-length interval, odd n_nodes)."""
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise ValueError("Simpson needs an odd node count >= 3")
    return _interval_rule(n_nodes - 1) / (n_nodes - 1)


def _interval_rule(m: int) -> np.ndarray:
    """Weights (for unit spacing) of a fourth-order rule over m >= 2 intervals."""
    if m < 2:
        raise ValueError("need at least two intervals")
    w = np.zeros(m + 1)
    if m % 2 == 0:
        w[0:m + 1:2] = 2.0 / 3.0
        w[1:m:2] = 4.0 / 3.0
        w[0] = w[m] = 1.0 / 3.0
        return w
    if m > 3:
        w[:m - 2] = _interval_rule(m - 3)
    w[m - 3:] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


# Integrates over the first of three equally spaced nodes' intervals; exact for quadratics.
_ONE_INTERVAL = np.array([5.0, 8.0, -1.0]) / 12.0


@lru_cache(maxsize=16)
def operator_matrix(n_nodes: int) -> np.ndarray:
    """K with (T u)_i = sum_j K[i, j] f(s_j, u_j)."""
    if n_nodes < 5 or n_nodes % 2 == 0:
        raise ValueError(f"n_nodes must be odd and >= 5, got {n_nodes}")
    N = n_nodes - 1
    h = 1.0 / N
    t = grid(n_nodes)
    K = np.zeros((n_nodes, n_nodes))
    # Rows 0 and N stay zero: G vanishes on the boundary.
    for i in range(1, N):
        ti = t[i]
        if i == 1:
            K[i, :3] += h * _ONE_INTERVAL * t[:3] * (1.0 - ti)
        else:
            K[i, :i + 1] += h * _interval_rule(i) * t[:i + 1] * (1.0 - ti)
        m = N - i
        if m == 1:
            K[i, N - 2:] += h * _ONE_INTERVAL[::-1] * ti * (1.0 - t[N - 2:])
        else:
            K[i, i:] += h * _interval_rule(m) * ti * (1.0 - t[i:])
    K.setflags(write=False)
    return K


def kernel_row_integral(t: float, n_nodes: int = DEFAULT_NODES) -> float:
    """Integral of G(t, s) over s in [0, 1] by Simpson on [0, t] and [t, 1]; equals t(1 - t)/2."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t = {t!r} outside [0, 1]")
    w = simpson_weights(n_nodes)
    left = np.linspace(0.0, t, n_nodes)
    right = np.linspace(t, 1.0, n_nodes)
    return float(t * w @ green_kernel(t, left) + (1.0 - t) * w @ green_kernel(t, right))


def weighted_row_max(weight: Callable, n_nodes: int = DEFAULT_NODES) -> float:
    """max_t of the integral of G(t, s) * weight(s) ds: the sup-norm Lipschitz factor of T
    when |f(s, u1) - f(s, u2)| <= weight(s) |u1 - u2|."""
    t = grid(n_nodes)
    return float(np.max(operator_matrix(n_nodes) @ np.asarray(weight(t), dtype=float)))


def apply_operator(u: GridFunction, p: BvpProblem) -> GridFunction:
    values = p.rhs(u.t, u.values)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("f returned a non-finite value")
    return GridFunction(operator_matrix(u.n_nodes) @ values)


def function_metric_D(u1: GridFunction, u2: GridFunction) -> float:
    """sup |u1 - u2| + |u1(0) - u2(0)|."""
    a, b = _values(u1), _values(u2)
    if a.shape != b.shape:
        raise ShapeMismatch(f"grid sizes differ: {a.size} vs {b.size}")
    return float(np.max(np.abs(a - b)) + abs(a[0] - b[0]))


def function_metric_P(u1, u2) -> float:
    a, b = _values(u1), _values(u2)
    if a.shape != b.shape:
        raise ShapeMismatch(f"grid sizes differ: {a.size} vs {b.size}")
    return float(abs(a[0] - b[0]))


def sup_distance(u1, u2) -> float:
    a, b = _values(u1), _values(u2)
    if a.shape != b.shape:
        raise ShapeMismatch(f"grid sizes differ: {a.size} vs {b.size}")
    return float(np.max(np.abs(a - b)))


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def function_metric(n_nodes: int = DEFAULT_NODES) -> PerturbedMetric:
    """The perturbed metric on grid functions, acting on raw value arrays."""
    return PerturbedMetric(function_metric_D, function_metric_P, GridSpace(n_nodes), name="sup+origin")


def operator_map(p: BvpProblem, n_nodes: int = DEFAULT_NODES) -> SelfMap:
    """T as a SelfMap on raw value arrays, for use with the generic engines."""
    t = grid(n_nodes)
    K = operator_matrix(n_nodes)

    def apply(u):
        values = p.rhs(t, u)
        if not np.all(np.isfinite(values)):
            raise NonFiniteValue("f returned a non-finite value")
        return K @ values

    return SelfMap(apply, GridSpace(n_nodes), name=f"green[{p.name}]")


def lipschitz_audit(p: BvpProblem, u_range=(-2.0, 2.0), n_samples: int = 41, tol: float = 1e-12) -> AxiomReport:
    """Grid check of |f(s, u1) - f(s, u2)| <= exp(-tau) |u1 - u2|; reports the worst violation."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    s = np.linspace(0.0, 1.0, n_samples)
    u = np.linspace(u_range[0], u_range[1], n_samples)
    S, U1, U2 = np.meshgrid(s, u, u, indexing="ij")
    lhs = np.abs(p.rhs(S, U1) - p.rhs(S, U2))
    rhs = p.lipschitz_bound * np.abs(U1 - U2)
    gap = lhs - rhs
    out = []
    w = np.unravel_index(int(np.argmax(gap)), gap.shape)
    if gap[w] > tol:
        out.append(Violation("lipschitz", (float(S[w]), float(U1[w]), float(U2[w])), lhs[w], rhs[w]))
    return AxiomReport(out, int(gap.size))


def lipschitz_constant(p: BvpProblem, u_range=(-2.0, 2.0), n_samples: int = 41) -> float:
    """Largest sampled difference quotient |f(s, u1) - f(s, u2)| / |u1 - u2|."""
    s = np.linspace(0.0, 1.0, n_samples)
    u = np.linspace(u_range[0], u_range[1], n_samples)
    S, U1, U2 = np.meshgrid(s, u, u, indexing="ij")
    mask = U1 != U2
    q = np.abs(p.rhs(S, U1) - p.rhs(S, U2))[mask] / np.abs(U1 - U2)[mask]
    return float(np.max(q))


def solve_bvp(
    p: BvpProblem, u0: GridFunction, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
) -> tuple[GridFunction, IterationTrace]:
    trace = iterate(operator_map(p, u0.n_nodes), u0.values, function_metric(u0.n_nodes), tol, max_iters)
    return GridFunction(trace.final), trace


def residual_check(u: GridFunction, p: BvpProblem) -> float:
    """Max interior |-(second difference) - f| plus the boundary deviations |u(0)| + |u(1)|."""
    if not isinstance(u, GridFunction):
        raise ShapeMismatch("residual_check expects a GridFunction")
    if u.n_nodes < 5:
        raise ShapeMismatch("residual_check needs at least 5 nodes")
    v, h = u.values, u.h
    second = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h**2
    res = np.abs(-second - p.rhs(u.t[1:-1], v[1:-1]))
    return float(np.max(res) + abs(v[0]) + abs(v[-1]))
