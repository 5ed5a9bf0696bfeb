"""F-gauges: strictly increasing F on (0, inf) with F(0+) = -inf and t^k F(t) -> 0."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonPositiveArgument
from .metric import AxiomReport, Violation

T_M = 1e-8
M_DEFAULT = 10.0
EPS_DEFAULT = 1e-2


@dataclass(frozen=True)
class FGauge:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    k_witness: float = 0.5

    def __call__(self, t):
        return eval_gauge(self, t)


def eval_gauge(g: FGauge, t):
    """F(t); accepts a scalar or an array. Raises NonPositiveArgument for t <= 0."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveArgument(f"gauge {g.name} evaluated at non-positive argument")
    out = np.asarray(g.fn(arr), dtype=float)
    return float(out) if out.ndim == 0 else out


LN = FGauge("ln", np.log)
LN_PLUS_X = FGauge("ln_plus_x", lambda t: np.log(t) + t)
# t^k * (-1/sqrt t) = -t^(k - 1/2) vanishes only for k > 1/2.
NEG_INV_SQRT = FGauge("neg_inv_sqrt", lambda t: -1.0 / np.sqrt(t), k_witness=0.75)
LN_QUADRATIC = FGauge("ln_quadratic", lambda t: np.log(t * t + t))

BUILTIN = {g.name: g for g in (LN, LN_PLUS_X, NEG_INV_SQRT, LN_QUADRATIC)}


def get_gauge(name: str) -> FGauge:
    try:
        return BUILTIN[name]
    except KeyError:
        raise KeyError(f"unknown gauge {name!r}; builtins are {sorted(BUILTIN)}") from None


def audit_gauge(
    g: FGauge,
    grid,
    k: float | None = None,
    M: float = M_DEFAULT,
    eps: float = EPS_DEFAULT,
    t_M: float = T_M,
    t_eps: float = T_M,
) -> AxiomReport:
    """Sampled check of (F1)-(F3).

    (F1) is checked on adjacent grid pairs, which covers every pair of a sorted grid.
    (F2) requires F(t_min) < -M when t_min < t_M. (F3) requires |t^k F(t)| < eps at every
    grid point below t_eps, or at the smallest point when none is that small. Limits are
    not proofs; a pass only means no counterexample at these thresholds.
    """
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("grid must be a 1-D array with at least two points")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    k = g.k_witness if k is None else k
    if not 0 < k < 1:
        raise ValueError(f"k must lie in (0, 1), got {k}")
    if M <= 0 or eps <= 0:
        raise ValueError("M and eps must be positive")

    F = np.asarray(g.fn(t), dtype=float)
    out: list[Violation] = []
    for i in np.nonzero(~(F[:-1] < F[1:]))[0]:
        out.append(Violation("F1", (t[i], t[i + 1]), F[i], F[i + 1]))
    if t[0] < t_M and not F[0] < -M:
        out.append(Violation("F2", (t[0],), F[0], -M))
    small = np.nonzero(t < t_eps)[0]
    if small.size == 0:
        small = np.array([0])
    for i in small:
        val = abs(t[i] ** k * F[i])
        if not val < eps:
            out.append(Violation("F3", (t[i],), val, eps))
    return AxiomReport(out, int(t.size))
