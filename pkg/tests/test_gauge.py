import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfx.errors import NonPositiveArgument
from pfx.gauge import BUILTIN, LN, NEG_INV_SQRT, FGauge, audit_gauge, eval_gauge, get_gauge

GRID = np.logspace(-12, 1, 200)


@pytest.mark.parametrize("name", ["ln", "ln_plus_x", "ln_quadratic"])
def test_builtins_pass_at_half(name):
    assert audit_gauge(BUILTIN[name], GRID, k=0.5).passed


def test_neg_inv_sqrt_passes_with_its_witness():
    assert NEG_INV_SQRT.k_witness == 0.75
    assert audit_gauge(NEG_INV_SQRT, GRID).passed


def test_neg_inv_sqrt_has_constant_weighted_value_at_half():
    # t^0.5 * (-1/sqrt t) = -1 for every t, so (F3) cannot hold at k = 0.5
    report = audit_gauge(NEG_INV_SQRT, GRID, k=0.5)
    assert [v.axiom for v in report.violations] and {v.axiom for v in report.violations} == {"F3"}
    assert all(v.lhs == pytest.approx(1.0) for v in report.violations)


def test_non_gauges():
    assert audit_gauge(FGauge("neg_inv", lambda t: -1.0 / t), GRID, k=0.5).by_axiom("F3")
    assert audit_gauge(FGauge("decreasing", lambda t: -np.log(t)), GRID, k=0.5).by_axiom("F1")
    assert audit_gauge(FGauge("atan", np.arctan), GRID, k=0.5).by_axiom("F2")


@given(st.floats(1e-100, 1e100), st.floats(1e-100, 1e100))
def test_ln_additivity(a, b):
    assert eval_gauge(LN, a * b) == pytest.approx(eval_gauge(LN, a) + eval_gauge(LN, b), abs=1e-12)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_nonpositive_argument(t):
    with pytest.raises(NonPositiveArgument):
        eval_gauge(LN, t)


def test_eval_gauge_vectorised_and_lookup():
    out = eval_gauge(get_gauge("ln_plus_x"), np.array([1.0, math.e]))
    np.testing.assert_allclose(out, [1.0, 1.0 + math.e], rtol=0, atol=1e-15)
    with pytest.raises(KeyError):
        get_gauge("nope")


def test_audit_rejects_bad_grid_and_k():
    with pytest.raises(ValueError):
        audit_gauge(LN, [1.0, 0.5])
    with pytest.raises(ValueError):
        audit_gauge(LN, GRID, k=1.0)
