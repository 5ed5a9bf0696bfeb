import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfx.errors import DomainError, InvalidScale, MismatchedBase, NegativeExactDistance
from pfx.metric import (
    Interval,
    PerturbedMetric,
    absolute,
    audit_axioms,
    average_perturbations,
    eval_exact,
    x2y4_perturbed,
    find_triangle_violation,
    quartic_unit,
    scale,
)

unit_pts = st.floats(0.0, 1.0, allow_nan=False)


def brute_force_worst_triangle(D, sample):
    """Reference: plain-Python loop over ordered triples."""
    best = None
    for x, y, z in itertools.product(sample, repeat=3):
        gap = D(x, y) - D(x, z) - D(z, y)
        if best is None or gap > best[0]:
            best = (gap, x, y, z)
    return best


def test_quartic_triangle_witness_matches_brute_force():
    D = lambda x, y: abs(x - y) + (x - y) ** 4
    sample = [0.0, 1 / 3, 0.5]
    w = find_triangle_violation(quartic_unit().D, sample)
    gap, x, y, z = brute_force_worst_triangle(D, sample)
    assert (w.x, w.y, w.z) == (x, y, z) == (0.0, 0.5, 1 / 3)
    assert w.gap == pytest.approx(gap, abs=1e-15)


def test_quartic_exact_part_is_a_metric():
    report = audit_axioms(quartic_unit(), Interval(0, 1).default_sample())
    assert report.passed
    assert report.samples_checked == 42  # 41 grid points plus 1/3


def test_x2y4_perturbed_exact_part_passes_but_D_alone_fails():
    sample = [-1.0, 0.0, 0.5, 1.0, 2.0]
    assert audit_axioms(x2y4_perturbed(), sample).passed
    m = x2y4_perturbed()
    bare = audit_axioms(PerturbedMetric(m.D, None, m.domain), sample)
    assert bare.by_axiom("P2")  # D(x, x) = x^6 != 0
    assert find_triangle_violation(m.D, sample) is not None


def test_audit_flags_each_axiom():
    dom = Interval(0, 1)
    negative_P = PerturbedMetric(lambda x, y: np.abs(x - y), lambda x, y: -np.ones_like(x), dom)
    assert audit_axioms(negative_P, [0.0, 0.5]).by_axiom("P_nonneg")
    asym = PerturbedMetric(lambda x, y: np.abs(x - y) + 0.1 * x, lambda x, y: 0.0 * x, dom)
    assert audit_axioms(asym, [0.0, 0.5]).by_axiom("P3")
    too_big_P = PerturbedMetric(lambda x, y: np.abs(x - y), lambda x, y: 2 * np.abs(x - y), dom)
    assert audit_axioms(too_big_P, [0.0, 0.5]).by_axiom("P1")
    zero_d = PerturbedMetric(lambda x, y: np.abs(x - y), lambda x, y: np.abs(x - y), dom)
    assert audit_axioms(zero_d, [0.0, 0.5]).by_axiom("P2")


def test_audit_rejects_points_outside_domain():
    with pytest.raises(DomainError):
        audit_axioms(quartic_unit(), [0.0, 2.0])


def test_eval_exact_rejects_negative():
    m = PerturbedMetric(lambda x, y: np.abs(x - y), lambda x, y: np.abs(x - y) + 1.0, Interval(0, 1))
    with pytest.raises(NegativeExactDistance):
        eval_exact(m, 0.0, 0.5)


@given(unit_pts, unit_pts)
def test_exact_part_of_quartic_is_abs(x, y):
    assert eval_exact(quartic_unit(), x, y) == pytest.approx(abs(x - y), abs=1e-12)


@given(st.floats(0.01, 100), st.floats(0.01, 100), unit_pts, unit_pts)
def test_scale_composition(a, b, x, y):
    m = quartic_unit()
    left, right = scale(a, scale(b, m)), scale(a * b, m)
    assert left.D(x, y) == pytest.approx(right.D(x, y), rel=1e-12, abs=1e-12)
    assert left.perturbation(x, y) == pytest.approx(right.perturbation(x, y), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, -1.0, math.nan])
def test_scale_rejects_nonpositive(alpha):
    with pytest.raises(InvalidScale):
        scale(alpha, absolute())


def test_scaled_metric_still_passes():
    assert audit_axioms(scale(3.5, quartic_unit()), [0.0, 0.2, 0.7, 1.0]).passed


def _shared_base():
    dom = Interval(-1, 1)
    D = lambda x, y: 2 * np.abs(x - y) + (x - y) ** 2
    m1 = PerturbedMetric(D, lambda x, y: np.abs(x - y) + (x - y) ** 2, dom)
    m2 = PerturbedMetric(D, lambda x, y: (x - y) ** 2, dom)
    return m1, m2


@given(st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=50)
def test_average_exact_metric_is_mean(x, y):
    m1, m2 = _shared_base()
    avg = average_perturbations(m1, m2)
    assert avg.exact(x, y) == pytest.approx(1.5 * abs(x - y), abs=1e-12)
    assert avg.exact(x, y) == pytest.approx(0.5 * (m1.exact(x, y) + m2.exact(x, y)), abs=1e-12)


def test_average_passes_audit():
    m1, m2 = _shared_base()
    assert audit_axioms(average_perturbations(m1, m2), [-1.0, -0.3, 0.0, 0.4, 1.0]).passed


def test_average_with_non_metric_exact_parts_is_flagged():
    # D = |x-y| + x^2 y^4 + x^4 y^2 with P = x^2 y^4, Q = x^4 y^2: each exact part fails P2
    dom = Interval(-1, 1)
    D = lambda x, y: np.abs(x - y) + x**2 * y**4 + x**4 * y**2
    m1 = PerturbedMetric(D, lambda x, y: x**2 * y**4, dom)
    m2 = PerturbedMetric(D, lambda x, y: x**4 * y**2, dom)
    report = audit_axioms(average_perturbations(m1, m2), [-1.0, 0.0, 0.5, 1.0])
    assert report.by_axiom("P2")


def test_average_mismatched_base():
    dom = Interval(0, 1)
    m1 = PerturbedMetric(lambda x, y: np.abs(x - y), None, dom)
    m2 = PerturbedMetric(lambda x, y: 2 * np.abs(x - y), None, dom)
    with pytest.raises(MismatchedBase):
        average_perturbations(m1, m2)
