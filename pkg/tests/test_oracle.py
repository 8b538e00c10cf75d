import numpy as np
import pytest

from sisgf import (
    BudgetExhausted,
    DeterministicProblem,
    DomainViolation,
    OracleSession,
    ProblemSpec,
    QuadraticProblemConfig,
    generate_problem,
    true_gap,
)


def make_session(problem, root=7, **kw):
    return OracleSession(problem, rng_root=root, **kw)


def test_scenario_determinism(quad16):
    s1 = make_session(quad16)
    s2 = make_session(quad16)
    a = s1.sample_scenario((0, 1, 2))
    b = s2.sample_scenario((0, 1, 2))
    assert np.array_equal(a.alpha, b.alpha)
    assert np.array_equal(a.b, b.b)


def test_distinct_streams_decorrelated(quad16):
    n = 10_000
    s = make_session(quad16)
    a = s.sample_scenario_batch(n, "ind", 0).alpha[:, 0]
    b = s.sample_scenario_batch(n, "ind", 1).alpha[:, 0]
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 0.05


def test_empirical_covariance_matches_sigma(quad16):
    n = 100_000
    batch = make_session(quad16).sample_scenario_batch(n, "cov", 0)
    emp = np.cov(batch.alpha, rowvar=False)
    sigma = quad16.sigma_matrix
    rel = np.linalg.norm(emp - sigma) / np.linalg.norm(sigma)
    assert rel < 0.05


def test_noise_free_evaluation_at_truth_is_zero():
    problem = generate_problem(
        QuadraticProblemConfig(dim=8, noise_std=0.0, seed=5), calibration_samples=2000
    )
    session = make_session(problem)
    batch = session.sample_scenario_batch(100, "probe", 0)
    values = session.evaluate_batch(problem.x_true, batch)
    assert np.allclose(values, 0.0, atol=1e-20)


def test_budget_contract(quad16):
    session = make_session(quad16, budget=5)
    sc = session.sample_scenario_batch(1, "b", 0)
    for _ in range(5):
        session.evaluate(np.zeros(16), sc)
    assert session.queries_used == 5
    with pytest.raises(BudgetExhausted):
        session.evaluate(np.zeros(16), sc)
    assert session.queries_used == 5  # never exceeds budget

    # a rejected batch consumes nothing
    session2 = make_session(quad16, budget=3)
    big = session2.sample_scenario_batch(4, "b", 1)
    with pytest.raises(BudgetExhausted):
        session2.evaluate_batch(np.zeros(16), big)
    assert session2.queries_used == 0


def test_mean_value_at_origin_matches_expectation(quad16):
    # E f(0, xi) = 0.5 * (x_true' Sigma x_true + noise^2)
    n = 100_000
    session = make_session(quad16)
    batch = session.sample_scenario_batch(n, "mean", 0)
    values = session.evaluate_batch(np.zeros(16), batch)
    expect = 0.5 * (quad16.x_true @ quad16.sigma_mul(quad16.x_true) + 1.0)
    se = values.std(ddof=1) / np.sqrt(n)
    assert abs(values.mean() - expect) < 3 * se
    assert session.queries_used == n


def test_true_gap_paths(quad16):
    assert true_gap(quad16, quad16.x_true) == pytest.approx(0.0, abs=1e-12)

    # identity covariance via a single-entry block: gap(x* + e1) = 0.5
    iso = generate_problem(
        QuadraticProblemConfig(dim=6, block_size=1, seed=2), calibration_samples=2000
    )
    x = iso.x_true.copy()
    x[0] += 1.0
    assert true_gap(iso, x) == pytest.approx(0.5, abs=1e-12)

    # black box without an analytic optimum
    spec = ProblemSpec(dim=2, lipschitz_L=1.0, strong_mu=0.0, sigma_sq=0.0, radius_R=1.0)
    black = DeterministicProblem(lambda pts: (pts**2).sum(axis=1), spec)
    assert true_gap(black, np.zeros(2)) is None


def test_gap_nonnegative_random_points(quad16, rng):
    for _ in range(100):
        x = rng.standard_normal(16) * rng.uniform(0.1, 3)
        assert true_gap(quad16, x) >= -1e-12


def test_domain_slack(quad16):
    session = make_session(quad16, domain_slack=1e-9)
    sc = session.sample_scenario_batch(1, "d", 0)
    inside = np.zeros(16)
    inside[0] = quad16.spec.radius_R
    session.evaluate(inside, sc)  # exactly on the boundary is fine
    outside = inside * (1 + 1e-6)
    with pytest.raises(DomainViolation):
        session.evaluate(outside, sc)
    assert session.queries_used == 1

    relaxed = make_session(quad16, domain_slack=None)
    relaxed.evaluate(outside * 100, relaxed.sample_scenario_batch(1, "d", 1))


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(dim=0, lipschitz_L=1.0, strong_mu=0.0, sigma_sq=0.0, radius_R=1.0)
    with pytest.raises(ValueError):
        ProblemSpec(dim=2, lipschitz_L=1.0, strong_mu=2.0, sigma_sq=0.0, radius_R=1.0)
    with pytest.raises(ValueError):
        ProblemSpec(
            dim=2, lipschitz_L=1.0, strong_mu=0.0, sigma_sq=0.0, radius_R=1.0,
            optimum_point=np.array([2.0, 0.0]),
        )
