"""Self-check suites behind the ``verify`` command.

Three suites: projection (thresholding dichotomy, feasibility, shrinkage,
certificate residuals, grid-oracle optimality in low dimension), smoothing
(value and directional bias bounds by exhaustive enumeration, estimator
query cost), and oracle (budget accounting, determinism, domain policing).
Each suite returns pass/fail counts plus the first few failure descriptions
so a regression is actionable from the command line.

The suites accept an injectable projection function so tests can confirm
they actually catch a broken implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import projection as proj
from . import smoothing
from .errors import BudgetExhausted, DomainViolation
from .oracle import DeterministicProblem, OracleSession, ProblemSpec
from .quadratic import QuadraticProblemConfig, generate_problem
from .rng import stream

KKT_TOL = 1e-9


@dataclass
class SuiteReport:
    name: str
    passed: int = 0
    failed: int = 0
    failures: List[str] = field(default_factory=list)

    def record(self, ok: bool, describe: str):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 8:
                self.failures.append(describe)

    @property
    def ok(self) -> bool:
        return self.failed == 0


def random_projection_input(gen: np.random.Generator, max_dim: int = 64) -> proj.ProjectionInput:
    """Sample a well-posed input: gamma >= 2a, R >= U, mixed magnitudes."""
    d = int(gen.integers(1, max_dim + 1))
    a = float(gen.uniform(0.02, 2.0))
    gamma = a * float(gen.uniform(2.0, 8.0))
    u_thr = a * float(gen.uniform(0.05, 2.0))  # lam in [0.05, 2]
    radius = float(gen.uniform(1.0, 10.0)) * max(u_thr, 0.5)
    scale = float(gen.uniform(0.2, 3.0))
    x = gen.standard_normal(d) * scale
    # push some coordinates below threshold so both branches are exercised
    mask = gen.random(d) < 0.4
    x[mask] *= 0.05
    return proj.ProjectionInput(x=x, threshold_U=u_thr, radius_R=radius, gamma=gamma, a=a)


def check_projection_output(inp: proj.ProjectionInput, v: np.ndarray, cert) -> Optional[str]:
    """Return a failure description, or None when all contracts hold."""
    x = inp.x
    u_thr = inp.threshold_U
    nonzero = v != 0.0
    if np.any(nonzero & (np.abs(v) < u_thr - 1e-12)):
        return "dichotomy violated: nonzero coordinate below threshold"
    l1 = float(np.abs(v).sum())
    if l1 > inp.radius_R * (1 + 1e-12):
        return f"feasibility violated: |v|_1 = {l1} > R = {inp.radius_R}"
    if np.any(np.abs(v) > np.abs(x) * (1 + 1e-12) + 1e-15):
        return "shrinkage violated: output magnitude exceeds input"
    if np.any(nonzero & (np.sign(v) != np.sign(x))):
        return "sign preservation violated"
    if np.count_nonzero(v) > math.floor(2 * inp.radius_R / u_thr) + 1e-9:
        return "sparsity bound violated"
    residual = proj.verify_kkt(inp, v, cert)
    if residual > KKT_TOL:
        return f"KKT residual {residual:.3e} > {KKT_TOL}"
    return None


def projection_suite(
    n_instances: int = 2000,
    seed: int = 20240,
    max_dim: int = 64,
    brute_force_instances: int = 40,
    sparsify_fn: Optional[Callable] = None,
) -> SuiteReport:
    sparsify = sparsify_fn or proj.sparsify_project
    gen = stream(seed, "verify-projection")
    report = SuiteReport("projection")
    small = 0
    for i in range(n_instances):
        inp = random_projection_input(gen, max_dim=max_dim)
        v, cert = sparsify(inp)
        failure = check_projection_output(inp, v, cert)
        report.record(failure is None, f"instance {i}: {failure}")
        if failure is None and inp.x.shape[0] <= 3 and small < brute_force_instances:
            small += 1
            ref = proj.brute_force_reference(inp, grid_step=1e-3)
            ours = proj.frozen_weight_objective(inp, v, v)
            best = proj.frozen_weight_objective(inp, v, ref)
            report.record(
                ours <= best + 1e-4,
                f"instance {i}: objective {ours:.6e} above grid optimum {best:.6e}",
            )
    # idempotence on the ball: re-projecting an output is a no-op
    for i in range(min(200, n_instances)):
        inp = random_projection_input(gen, max_dim=16)
        v, _ = sparsify(inp)
        v2, _ = sparsify(
            proj.ProjectionInput(
                x=v, threshold_U=inp.threshold_U, radius_R=inp.radius_R, gamma=inp.gamma, a=inp.a
            )
        )
        report.record(np.array_equal(v, v2), f"idempotence violated on instance {i}")
    return report


def smoothing_suite(n_functions: int = 100, seed: int = 31337) -> SuiteReport:
    gen = stream(seed, "verify-smoothing")
    report = SuiteReport("smoothing")
    deltas = [1e-3, 1e-2, 1e-1]
    for i in range(n_functions):
        d = int(gen.integers(1, 11))
        mat = gen.standard_normal((d, d))
        a_sym = 0.5 * (mat + mat.T)
        lin = gen.standard_normal(d)
        x = gen.standard_normal(d)
        lam_max = float(np.max(np.abs(np.linalg.eigvalsh(a_sym))))
        lipschitz = 2 * lam_max + 1e-12

        def f(points, a_sym=a_sym, lin=lin):
            return np.einsum("ij,jk,ik->i", points, a_sym, points) + points @ lin

        def grad(point, a_sym=a_sym, lin=lin):
            return 2 * a_sym @ point + lin

        delta = deltas[i % len(deltas)]
        bias, bound = smoothing.check_value_bias(f, x, delta, lipschitz)
        report.record(bias <= bound + 1e-10, f"fn {i}: value bias {bias:.3e} > bound {bound:.3e}")
        exact = delta**2 * float(np.trace(a_sym))
        report.record(
            abs(bias - abs(exact)) <= 1e-10 * max(1.0, abs(exact)),
            f"fn {i}: enumeration bias {bias:.6e} != quadratic identity {exact:.6e}",
        )
        v = gen.standard_normal(d)
        lhs, dbound = smoothing.check_directional_bias(f, x, v, delta, lipschitz, grad_f=grad)
        report.record(lhs <= dbound + 1e-9, f"fn {i}: directional bias {lhs:.3e} > bound {dbound:.3e}")
    return report


def oracle_suite(seed: int = 97531) -> SuiteReport:
    report = SuiteReport("oracle")
    problem = generate_problem(
        QuadraticProblemConfig(dim=16, seed=seed), calibration_samples=2000
    )

    # exact accounting and budget fencing
    session = OracleSession(problem, rng_root=seed, budget=5)
    scen = session.sample_scenario_batch(1, "probe", 0)
    for _ in range(5):
        session.evaluate(np.zeros(16), scen)
    report.record(session.queries_used == 5, "counter after 5 scalar calls != 5")
    try:
        session.evaluate(np.zeros(16), scen)
        report.record(False, "sixth call did not fail with an exhausted budget")
    except BudgetExhausted:
        report.record(session.queries_used == 5, "failed call consumed budget")

    # batch rejection consumes nothing
    session2 = OracleSession(problem, rng_root=seed, budget=3)
    batch = session2.sample_scenario_batch(4, "probe", 1)
    try:
        session2.evaluate_batch(np.zeros(16), batch)
        report.record(False, "over-budget batch was accepted")
    except BudgetExhausted:
        report.record(session2.queries_used == 0, "rejected batch consumed budget")

    # determinism: identical roots reproduce scenarios bitwise
    s_a = OracleSession(problem, rng_root=123)
    s_b = OracleSession(problem, rng_root=123)
    batch_a = s_a.sample_scenario_batch(64, "rep", 7)
    batch_b = s_b.sample_scenario_batch(64, "rep", 7)
    report.record(
        np.array_equal(batch_a.alpha, batch_b.alpha) and np.array_equal(batch_a.b, batch_b.b),
        "identical stream addresses produced different scenarios",
    )

    # domain policing
    spec = ProblemSpec(dim=4, lipschitz_L=1.0, strong_mu=0.0, sigma_sq=0.0, radius_R=1.0)
    det = DeterministicProblem(lambda pts: (pts**2).sum(axis=1), spec)
    s_dom = OracleSession(det, rng_root=1, domain_slack=1e-6)
    sc = s_dom.sample_scenario_batch(1, "probe", 2)
    try:
        s_dom.evaluate(np.array([1.0, 1.0, 0.0, 0.0]), sc)
        report.record(False, "out-of-domain point was accepted")
    except DomainViolation:
        report.record(s_dom.queries_used == 0, "rejected point consumed budget")

    # gap oracle nonnegative, zero at the optimum
    gap_opt = problem.analytic_gap(problem.x_true)
    report.record(abs(gap_opt) <= 1e-12, f"gap at optimum = {gap_opt}")
    gen = stream(seed, "verify-oracle-points")
    gaps = [problem.analytic_gap(gen.standard_normal(16)) for _ in range(50)]
    report.record(all(g >= -1e-12 for g in gaps), "negative sub-optimality gap observed")
    return report


def run_suites(
    scope: Optional[str] = None,
    quick: bool = True,
    sparsify_fn: Optional[Callable] = None,
) -> List[SuiteReport]:
    n_proj = 800 if quick else 10_000
    n_fun = 40 if quick else 150
    suites = {
        "projection": lambda: projection_suite(n_instances=n_proj, sparsify_fn=sparsify_fn),
        "smoothing": lambda: smoothing_suite(n_functions=n_fun),
        "oracle": lambda: oracle_suite(),
    }
    if scope is not None:
        if scope not in suites:
            raise ValueError(f"unknown scope {scope!r}; choose from {sorted(suites)}")
        return [suites[scope]()]
    return [fn() for fn in suites.values()]
