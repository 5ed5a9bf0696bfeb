"""``pfx`` command line: one subcommand per problem kind.

Exit codes: 0 certified/converged/passed, 2 ran but refuted, 1 failed to run.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bvp, certify, iteration
from .errors import DomainExit, PfxError
from .gauge import LN, audit_gauge
from .io import point_repr, write_json, write_solution, write_trace
from .metric import PerturbedMetric, audit_axioms, find_triangle_violation
from .spec import ProblemSpec, load_spec

log = logging.getLogger("pfx")

OK, REFUTED, ERROR = 0, 2, 1

COMMANDS = {
    "audit-metric": "metric_audit",
    "audit-gauge": "gauge_audit",
    "certify": "certify",
    "iterate": "iterate",
    "series": "series",
    "bvp": "bvp",
}


def _violations(report) -> list[dict]:
    return [
        {"axiom": v.axiom, "points": [point_repr(p) for p in v.points], "lhs": v.lhs, "rhs": v.rhs, "gap": v.gap}
        for v in report.violations
    ]


def _metric(spec: ProblemSpec) -> PerturbedMetric:
    return PerturbedMetric(spec.expressions["D"], spec.expressions.get("P"), spec.domain)


def _self_map(spec: ProblemSpec) -> certify.SelfMap:
    return certify.SelfMap(spec.expressions["T"], spec.domain, name=spec.expressions["T"].source)


def _gauge_report(spec: ProblemSpec):
    g = spec.gauge
    grid = np.logspace(np.log10(spec.get("grid_min", 1e-12)), np.log10(spec.get("grid_max", 10.0)), spec.get("grid_n", 200))
    return g, audit_gauge(g, grid, k=spec.get("k"), M=spec.get("M", 10.0), eps=spec.get("eps", 1e-2))


def run_metric_audit(spec: ProblemSpec, out: Path) -> int:
    m = _metric(spec)
    sample = spec.get("sample") or spec.domain.default_sample(spec.get("n_sample"))
    tol = spec.get("tol")
    report = audit_axioms(m, sample, tol)
    witness = find_triangle_violation(m.D, sample, tol) if len(sample) >= 3 else None
    write_json(
        out / "report.json",
        {
            "kind": "metric_audit",
            "passed": report.passed,
            "samples_checked": report.samples_checked,
            "violation_count": len(report.violations),
            "violations": _violations(report),
            "D_triangle_witness": None
            if witness is None
            else {"x": witness.x, "y": witness.y, "z": witness.z, "lhs": witness.lhs, "rhs": witness.rhs, "gap": witness.gap},
        },
    )
    return OK if report.passed else REFUTED


def run_gauge_audit(spec: ProblemSpec, out: Path) -> int:
    g, report = _gauge_report(spec)
    write_json(
        out / "report.json",
        {
            "kind": "gauge_audit",
            "gauge": g.name,
            "k": spec.get("k", g.k_witness),
            "passed": report.passed,
            "samples_checked": report.samples_checked,
            "violations": _violations(report),
        },
    )
    return OK if report.passed else REFUTED


def run_certify(spec: ProblemSpec, out: Path) -> int:
    g, gauge_report = _gauge_report(spec)
    if not gauge_report.passed:
        write_json(out / "report.json", {"kind": "certify", "error": "gauge failed audit", "gauge": g.name,
                                         "violations": _violations(gauge_report)})
        log.error("gauge %s failed the (F1)-(F3) audit", g.name)
        return ERROR
    m, T = _metric(spec), _self_map(spec)
    pairs = certify.grid_pairs(spec.domain, spec.get("grid_n"))
    rep = certify.certify_f_perturbed(T, m, g, spec.get("tau"), pairs, spec.get("tol"))
    try:
        tau_max = certify.estimate_tau_max(T, m, g, pairs)
    except certify.NoEligiblePairs:
        tau_max = None
    write_json(
        out / "report.json",
        {
            "kind": "certify",
            "gauge": g.name,
            "certified": rep.certified,
            "tau": rep.tau,
            "worst_margin": rep.worst_margin,
            "worst_pair": None if rep.worst_pair is None else [point_repr(p) for p in rep.worst_pair],
            "pairs_checked": rep.pairs_checked,
            "pairs_skipped_zero": rep.pairs_skipped_zero,
            "tau_max_estimate": tau_max,
        },
    )
    return OK if rep.certified else REFUTED


def run_iterate(spec: ProblemSpec, out: Path) -> int:
    m, T = _metric(spec), _self_map(spec)
    g = spec.gauge or LN
    tol, max_iters = spec.get("tol"), spec.get("max_iters")
    try:
        trace = iteration.iterate(T, spec.get("x0"), m, tol, max_iters, g)
    except DomainExit as exc:
        write_trace(out / "trace.csv", exc.trace)
        write_json(out / "report.json", {"kind": "iterate", "stop_reason": iteration.DOMAIN_EXIT,
                                         "n_steps": exc.trace.n_steps})
        return REFUTED
    write_trace(out / "trace.csv", trace)
    report = {
        "kind": "iterate",
        "stop_reason": trace.stop_reason,
        "n_steps": trace.n_steps,
        "final": point_repr(trace.final),
        "final_exact_step": trace.exact_steps[-1],
        "fixed_point_residual": float(m.exact(T(trace.final), trace.final)),
    }
    try:
        report["rate"] = iteration.estimate_rate(trace)
    except iteration.InsufficientData:
        report["rate"] = None
    tau = spec.get("tau")
    if tau is not None:
        check = iteration.check_gamma_decay(trace, g, tau, 1e-10)
        report["gamma_decay_ok"] = check.ok
        report["gamma_decay_first_failure"] = check.first_failure
    n_starts = spec.get("n_starts")
    if n_starts:
        starts = iteration.seeded_starts(spec.domain, n_starts, spec.get("seed"))
        try:
            probe = iteration.uniqueness_probe(T, m, starts, tol, max_iters)
            report["uniqueness_spread"] = probe.spread
        except DomainExit:
            report["uniqueness_spread"] = None
        report["n_starts"] = n_starts
    write_json(out / "report.json", report)
    converged = trace.stop_reason in (iteration.FIXED_POINT, iteration.TOLERANCE_MET)
    return OK if converged else REFUTED


def run_series(spec: ProblemSpec, out: Path) -> int:
    m, T = _metric(spec), _self_map(spec)
    pairs = certify.grid_pairs(spec.domain, spec.get("grid_n"))
    est = certify.estimate_series(T, m, pairs, spec.get("n_max"), spec.get("ratio"))
    write_json(
        out / "report.json",
        {
            "kind": "series",
            "a": est.a,
            "partial_sums": est.partial_sums,
            "convergent_flag": est.convergent_flag,
            "tail_ratio": est.tail_ratio,
        },
    )
    return OK if est.convergent_flag else REFUTED


def run_bvp(spec: ProblemSpec, out: Path) -> int:
    n = spec.get("n_nodes")
    problem = bvp.BvpProblem(spec.expressions["f"], spec.get("tau"), name=spec.expressions["f"].source)
    u0 = bvp.GridFunction.from_callable(spec.expressions["u0"], n)
    u, trace = bvp.solve_bvp(problem, u0, spec.get("tol"), spec.get("max_iters"))
    write_trace(out / "trace.csv", trace)
    write_solution(out / "solution.csv", u.t, u.values)

    u_range = spec.get("u_range")
    lip = bvp.lipschitz_audit(problem, (u_range.lo, u_range.hi), spec.get("lipschitz_samples"))
    lip_const = bvp.lipschitz_constant(problem, (u_range.lo, u_range.hi), spec.get("lipschitz_samples"))
    pairs = certify.random_function_pairs(n, spec.get("n_pairs"), spec.get("seed"), max(abs(u_range.lo), abs(u_range.hi)))
    T, m = bvp.operator_map(problem, n), bvp.function_metric(n)
    try:
        tau_max = certify.estimate_tau_max(T, m, LN, pairs)
    except certify.NoEligiblePairs:
        tau_max = None
    ratios = iteration.step_ratios(trace)
    try:
        rate = iteration.estimate_rate(trace)
    except iteration.InsufficientData:
        rate = None
    converged = trace.stop_reason in (iteration.FIXED_POINT, iteration.TOLERANCE_MET)
    write_json(
        out / "report.json",
        {
            "kind": "bvp",
            "converged": converged,
            "stop_reason": trace.stop_reason,
            "n_steps": trace.n_steps,
            "n_nodes": n,
            "final_sup_norm": u.sup(),
            "final_step": trace.exact_steps[-1],
            "max_step_ratio": float(np.max(ratios)) if ratios.size else None,
            "rate": rate,
            "residual": bvp.residual_check(u, problem),
            "tau": problem.tau,
            "lipschitz_bound": problem.lipschitz_bound,
            "lipschitz_passed": lip.passed,
            "lipschitz_worst": _violations(lip)[0] if lip.violations else None,
            "sampled_lipschitz_constant": lip_const,
            "kernel_factor": bvp.kernel_row_integral(0.5, n),
            "operator_factor_bound": lip_const * bvp.kernel_row_integral(0.5, n),
            "sampled_tau_max_ln": tau_max,
        },
    )
    return OK if converged else REFUTED


RUNNERS = {
    "metric_audit": run_metric_audit,
    "gauge_audit": run_gauge_audit,
    "certify": run_certify,
    "iterate": run_iterate,
    "series": run_series,
    "bvp": run_bvp,
}


def run_command(spec: ProblemSpec, output_dir, seed: int | None = None, tol: float | None = None) -> int:
    """Dispatch a validated spec; writes report.json (and trace/solution CSVs) into output_dir."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if seed is not None:
        spec.scalars["seed"] = seed
    if tol is not None:
        if not tol > 0:
            log.error("--tol must be positive")
            return ERROR
        spec.scalars["tol"] = tol
    try:
        return RUNNERS[spec.kind](spec, out)
    except PfxError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfx", description="Fixed points in perturbed metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("spec", type=Path, help="problem file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
    except OSError as exc:
        log.error("cannot read %s: %s", args.spec, exc.strerror)
        return ERROR
    except PfxError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return ERROR
    expected = COMMANDS[args.command]
    if spec.kind != expected:
        log.error("%s expects a [%s] spec, got [%s]", args.command, expected, spec.kind)
        return ERROR
    try:
        return run_command(spec, args.out, args.seed, args.tol)
    except OSError as exc:
        log.error("%s", exc)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
