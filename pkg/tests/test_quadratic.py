import numpy as np
import pytest

from sisgf import (
    EmptySample,
    QuadraticProblemConfig,
    estimate_sigma_sq,
    generate_problem,
)
from sisgf.rng import stream


def test_block_spectrum_envelope():
    # AR(rho) band matrix eigenvalues lie in [(1-rho)/(1+rho), (1+rho)/(1-rho)]
    problem = generate_problem(QuadraticProblemConfig(dim=128, seed=1), calibration_samples=2000)
    eigs = np.linalg.eigvalsh(problem.sigma_matrix)
    lo, hi = 0.7 / 1.3, 1.3 / 0.7
    assert eigs.min() >= lo - 1e-9
    assert eigs.max() <= hi + 1e-9
    assert eigs.min() >= 0.5  # strongly convex schedule always valid
    assert problem.spec.strong_mu == pytest.approx(eigs.min(), abs=1e-9)
    assert problem.spec.lipschitz_L == pytest.approx(eigs.max(), abs=1e-9)


def test_small_dim_block_covers_everything():
    problem = generate_problem(QuadraticProblemConfig(dim=16, seed=2), calibration_samples=2000)
    assert problem.block_size == 16
    sigma = problem.sigma_matrix
    assert sigma[0, 1] == pytest.approx(0.3)
    assert np.allclose(sigma, sigma.T)


def test_sparse_truth_shape():
    for seed in range(8):
        problem = generate_problem(QuadraticProblemConfig(dim=64, seed=seed), calibration_samples=500)
        nz = problem.x_true[problem.x_true != 0]
        assert nz.size == 3
        assert np.all((nz > 2.5) & (nz < 4.0))
        l1 = np.abs(problem.x_true).sum()
        assert 7.5 < l1 < 12.0
        assert problem.spec.radius_R == np.ceil(l1)
        assert 8 <= problem.spec.radius_R <= 12


def test_optimum_value_and_gap(quad16):
    assert quad16.spec.optimum_value == pytest.approx(0.5)
    assert quad16.analytic_gap(quad16.x_true) == 0.0
    w = np.ones(16)
    direct = 0.5 * w @ quad16.sigma_matrix @ w
    assert quad16.analytic_gap(quad16.x_true + w) == pytest.approx(direct, rel=1e-12)


def test_identity_covariance_gap():
    iso = generate_problem(QuadraticProblemConfig(dim=5, block_size=1, seed=4), calibration_samples=500)
    for t in (0.5, 1.0, 2.0):
        x = iso.x_true.copy()
        x[1] += t
        assert iso.analytic_gap(x) == pytest.approx(t**2 / 2, rel=1e-12)


def test_monte_carlo_gap_matches_analytic(quad16):
    # F(x) - F(x*) estimated from f samples agrees with the closed form
    gen = stream(77, "mc-gap")
    for trial in range(20):
        x = gen.standard_normal(16) * gen.uniform(0.2, 1.5)
        n = 100_000
        batch = quad16.sample_scenario_batch(n, gen)
        vals_x = quad16.evaluate_batch(x, batch)
        vals_opt = quad16.evaluate_batch(quad16.x_true, batch)
        diff = vals_x - vals_opt
        se = diff.std(ddof=1) / np.sqrt(n)
        assert abs(diff.mean() - quad16.analytic_gap(x)) <= 3 * se + 1e-12


def test_sigma_sq_at_truth_matches_trace(quad16):
    # at the optimum the gradient is -e*alpha, whose total variance is tr(Sigma)
    est = estimate_sigma_sq(quad16, 100_000, probe_points=[quad16.x_true])
    assert est == pytest.approx(np.trace(quad16.sigma_matrix), rel=0.10)


def test_sigma_sq_guards(quad16):
    with pytest.raises(EmptySample):
        estimate_sigma_sq(quad16, 0)
    assert estimate_sigma_sq(quad16, 500) >= 0.0
    assert quad16.spec.sigma_sq > 0


def test_generation_deterministic():
    a = generate_problem(QuadraticProblemConfig(dim=32, seed=9), calibration_samples=1000)
    b = generate_problem(QuadraticProblemConfig(dim=32, seed=9), calibration_samples=1000)
    assert np.array_equal(a.x_true, b.x_true)
    assert a.block_start == b.block_start
    assert a.spec.sigma_sq == b.spec.sigma_sq
    sc_a = a.sample_scenario_batch(16, stream(1, "s"))
    sc_b = b.sample_scenario_batch(16, stream(1, "s"))
    assert np.array_equal(sc_a.alpha, sc_b.alpha)
    assert np.array_equal(sc_a.b, sc_b.b)


def test_least_squares_form_consistency(quad16):
    batch = quad16.sample_scenario_batch(50_000, stream(2, "ls"))
    a_rows, b = quad16.least_squares_form(batch)
    noise = b - a_rows @ quad16.x_true
    assert abs(noise.mean()) < 0.02
    assert noise.std() == pytest.approx(1.0, abs=0.02)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadraticProblemConfig(dim=4, n_nonzeros=5)
    with pytest.raises(ValueError):
        QuadraticProblemConfig(dim=4, block_rho=1.0)
    with pytest.raises(ValueError):
        QuadraticProblemConfig(dim=0)
