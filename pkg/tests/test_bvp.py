import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pfx import bvp, iteration
from pfx.errors import DomainError, NonFiniteValue, ShapeMismatch


def quad_operator(fn, t_nodes):
    """Independent oracle: adaptive quadrature of G(t, s) fn(s), split at the kink."""

    def G(t, s):
        return s * (1 - t) if s <= t else t * (1 - s)

    out = []
    for t in t_nodes:
        left = quad(lambda s: G(t, s) * fn(s), 0.0, t, epsabs=1e-14)[0] if t > 0 else 0.0
        right = quad(lambda s: G(t, s) * fn(s), t, 1.0, epsabs=1e-14)[0] if t < 1 else 0.0
        out.append(left + right)
    return np.array(out)


def test_green_kernel_values_and_domain():
    assert bvp.green_kernel(0.25, 0.5) == pytest.approx(0.125)
    assert bvp.green_kernel(0.5, 0.25) == pytest.approx(0.125)
    with pytest.raises(DomainError):
        bvp.green_kernel(1.5, 0.2)


@pytest.mark.parametrize("n", [5, 7, 9, 11, 51])
def test_linear_load_is_exact(n):
    # f(s) = s gives u = t (1 - t^2) / 6; piecewise-quadratic integrands are integrated exactly
    t = bvp.grid(n)
    np.testing.assert_allclose(bvp.operator_matrix(n) @ t, t * (1 - t**2) / 6, rtol=0, atol=1e-15)


def test_operator_matches_quad_oracle():
    n = 101
    u = bvp.GridFunction.from_callable(lambda t: np.sin(3 * t) + t**2, n)
    p = bvp.BvpProblem(bvp.sine_rhs)
    got = bvp.apply_operator(u, p).values
    ref = quad_operator(lambda s: bvp.sine_rhs(s, math.sin(3 * s) + s**2), u.t)
    assert np.max(np.abs(got - ref)) <= 1e-8


def test_kernel_row_integral_closed_form():
    for t in (0.1, 0.5, 0.77):
        assert bvp.kernel_row_integral(t) == pytest.approx(t * (1 - t) / 2, abs=1e-15)


def test_weighted_row_max_for_sine_weight():
    # max_t of 5t/24 - t^2/8 - t^3/12
    tt = np.linspace(0, 1, 2_000_001)
    oracle = np.max(5 * tt / 24 - tt**2 / 8 - tt**3 / 12)
    got = bvp.weighted_row_max(lambda s: (s + 0.5) / 2, 201)
    assert got == pytest.approx(oracle, abs=1e-6)
    assert got == pytest.approx(0.062928, abs=1e-6)
    assert got <= 0.094


def test_simpson_weights_and_rule():
    w = bvp.simpson_weights(5)
    np.testing.assert_allclose(w * 12, [1, 4, 2, 4, 1])
    x = np.linspace(0, 1, 11)
    assert w.sum() == pytest.approx(1.0)
    assert bvp.simpson_weights(11) @ x**3 == pytest.approx(0.25, abs=1e-15)


def test_operator_matrix_rejects_even_and_is_read_only():
    with pytest.raises(ValueError):
        bvp.operator_matrix(10)
    K = bvp.operator_matrix(11)
    assert not K.flags.writeable
    assert np.all(K[0] == 0) and np.all(K[-1] == 0)


@pytest.mark.parametrize("n", [51, 101, 201])
def test_sin_manufactured_solution(n):
    p = bvp.BvpProblem(lambda s, u: math.pi**2 * np.sin(math.pi * s))
    u, trace = bvp.solve_bvp(p, bvp.GridFunction(np.zeros(n)))
    assert trace.stop_reason == "fixed_point"
    err = np.max(np.abs(u.values - np.sin(math.pi * u.t)))
    assert err <= 5e-6 * (51 / n) ** 4 * 10


def test_sine_problem_converges_to_zero():
    p = bvp.BvpProblem(bvp.sine_rhs, 0.2)
    u, trace = bvp.solve_bvp(p, bvp.GridFunction.from_callable(lambda t: t))
    assert u.sup() <= 1e-9
    assert np.max(iteration.step_ratios(trace)[1:]) <= 0.094


def test_identity_is_not_a_solution():
    # u(t) = t violates the right boundary condition
    p = bvp.BvpProblem(bvp.sine_rhs)
    assert bvp.residual_check(bvp.GridFunction.from_callable(lambda t: t), p) > 0.5


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_contraction_on_random_pairs(seed):
    n = 101
    rng = np.random.default_rng(seed)
    u, v = rng.uniform(-2, 2, (2, n))
    T = bvp.operator_map(bvp.BvpProblem(bvp.sine_rhs), n)
    assert bvp.sup_distance(T(u), T(v)) <= 0.0944 * bvp.sup_distance(u, v)


def test_function_metric_pieces():
    u, v = np.array([1.0, 0.0, 3.0]), np.array([0.5, 0.0, 0.0])
    assert bvp.function_metric_D(u, v) == 3.5
    assert bvp.function_metric_P(u, v) == 0.5
    assert bvp.sup_distance(u, v) == 3.0
    with pytest.raises(ShapeMismatch):
        bvp.function_metric_D(u, v[:2])


def test_lipschitz_audit():
    assert bvp.lipschitz_audit(bvp.BvpProblem(bvp.sine_rhs, 0.2)).passed
    # f = sin u has constant 1 > exp(-0.2)
    report = bvp.lipschitz_audit(bvp.BvpProblem(lambda s, u: np.sin(u), 0.2))
    assert not report.passed and len(report.violations) == 1
    assert bvp.lipschitz_constant(bvp.BvpProblem(bvp.sine_rhs)) == pytest.approx(0.75, abs=1e-2)


def test_non_finite_rhs_is_reported():
    p = bvp.BvpProblem(lambda s, u: u / 0.0)
    with np.errstate(all="ignore"), pytest.raises(NonFiniteValue):
        bvp.apply_operator(bvp.GridFunction(np.ones(5)), p)


def test_grid_function_validation():
    with pytest.raises(ShapeMismatch):
        bvp.GridFunction(np.zeros(4))
    g = bvp.GridFunction.from_callable(lambda t: t, 5)
    assert g.h == 0.25 and g.sup() == 1.0
