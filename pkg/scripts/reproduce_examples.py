"""Recompute the scalar worked examples and print a short table for each."""
import math

import numpy as np

from pfx import certify, iteration
from pfx.gauge import BUILTIN, LN, audit_gauge
from pfx.metric import Interval, PerturbedMetric, absolute, audit_axioms, x2y4_perturbed, quadratic_unit, quartic_unit

UNIT = Interval(0.0, 1.0)


def triangle():
    m = quartic_unit()
    bare = PerturbedMetric(m.D, None, m.domain)
    print("triangle check for D = |x-y| + (x-y)^4 on {0, 1/3, 1/2}")
    for v in audit_axioms(bare, [0.0, 1 / 3, 0.5]).by_axiom("P4"):
        x, y, z = v.points
        print(f"  D({x:.4f},{y:.4f}) = {v.lhs:.6f} > D(x,z) + D(z,y) = {v.rhs:.6f} with z = {z:.4f}")
    print(f"  exact part audit passes: {audit_axioms(m, UNIT.default_sample()).passed}")


def example_metric():
    sample = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
    print("D = |x-y| + x^2 y^4, P = x^2 y^4")
    print(f"  exact part audit passes: {audit_axioms(x2y4_perturbed(), sample).passed}")


def certification():
    print("sampled tau_max with F = ln on a 400-point grid")
    for k, m in ((2, quartic_unit()), (3, quadratic_unit())):
        T = certify.SelfMap(lambda x, k=k: x / k, UNIT, f"x/{k}")
        tau = certify.estimate_tau_max(T, m, LN, certify.grid_pairs(UNIT, 400))
        print(f"  T x = x/{k}: tau_max = {tau:.6f}  (ln {k} = {math.log(k):.6f})")


def series():
    T = certify.SelfMap(lambda x: x / 3, UNIT, "x/3")
    seps = np.logspace(-12, -1, 23)
    pairs = certify.grid_pairs(UNIT, 200).concat(certify.PairSample(np.zeros_like(seps), seps))
    est = certify.estimate_series(T, quadratic_unit(), pairs, 10)
    print("series criterion for T x = x/3, D = |x-y| + (x-y)^2")
    print("   n        a_n         3^-n      partial sum")
    for n, (a, s) in enumerate(zip(est.a, est.partial_sums), start=1):
        print(f"  {n:2d}  {a:.6e}  {3.0**-n:.6e}  {s:.6f}")
    print(f"  convergent: {est.convergent_flag} (tail ratio {est.tail_ratio:.4f})")
    banach = certify.estimate_series(certify.SelfMap(lambda x: x / 2, UNIT, "x/2"), absolute(), certify.grid_pairs(UNIT, 200), 10)
    print(f"  Banach x/2 under |x-y|: max |a_n - 2^-n| = {np.max(np.abs(np.array(banach.a) - 2.0 ** -np.arange(1, 11))):.1e}")


def gamma_decay():
    T = certify.SelfMap(lambda x: x / 2, UNIT, "x/2")
    trace = iteration.iterate(T, 1.0, quartic_unit())
    check = iteration.check_gamma_decay(trace, LN, math.log(2), 1e-10)
    print(f"Picard run for x/2 from 1: {trace.n_steps} steps, stop = {trace.stop_reason}, "
          f"rate = {iteration.estimate_rate(trace):.6f}, ln-decay holds: {check.ok}")


def gauges():
    grid = np.logspace(-12, 1, 200)
    print("gauge audits (k = 0.5 and each gauge's own witness k)")
    for name, g in BUILTIN.items():
        print(f"  {name:14s} k=0.5: {audit_gauge(g, grid, k=0.5).passed!s:5s}  "
              f"k={g.k_witness}: {audit_gauge(g, grid).passed}")


if __name__ == "__main__":
    for section in (triangle, example_metric, certification, series, gamma_decay, gauges):
        section()
        print()
