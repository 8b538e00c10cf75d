import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sisgf import (
    DimensionTooLarge,
    InvalidInput,
    ProjectionInput,
    brute_force_reference,
    sparsify_project,
    verify_kkt,
)
from sisgf.projection import frozen_weight_objective


def make_input(x, U=0.2, R=1.0, gamma=1.0, a=0.4):
    return ProjectionInput(x=np.asarray(x, float), threshold_U=U, radius_R=R, gamma=gamma, a=a)


# --- worked examples -------------------------------------------------------

def test_zero_input_maps_to_zero():
    v, cert = sparsify_project(make_input(np.zeros(4)))
    assert np.all(v == 0.0)
    assert cert.max_kkt_residual <= 1e-12
    # multipliers for the all-zero case: beta = 0, mu_i = lam
    assert cert.beta == 0.0
    assert np.allclose(cert.mu, 0.2 / 0.4)


def test_pass_through_inside_ball():
    v, cert = sparsify_project(make_input([0.5, -0.3], U=0.1, a=0.3))
    assert np.array_equal(v, np.array([0.5, -0.3]))
    assert cert.tau is None and cert.rho is None


def test_rescale_branch_hand_trace():
    v, cert = sparsify_project(make_input([0.9, 0.5, -0.4], U=0.2, R=1.0, gamma=1.0, a=0.4))
    assert np.allclose(v, [0.7, 0.3, 0.0], atol=1e-15)
    assert cert.rho == 2
    assert cert.tau == pytest.approx(-0.2, abs=1e-15)
    assert np.abs(v).sum() == pytest.approx(1.0, abs=1e-15)
    assert cert.max_kkt_residual <= 1e-9


def test_all_below_threshold():
    v, _ = sparsify_project(make_input([0.05, 0.05], U=0.1, a=0.05, gamma=0.2))
    assert np.all(v == 0.0)


def test_invalid_inputs_rejected():
    with pytest.raises(InvalidInput):
        make_input([1.0], U=0.2, gamma=0.5, a=0.4)  # gamma < 2a
    with pytest.raises(InvalidInput):
        make_input([1.0], U=-0.1)
    with pytest.raises(InvalidInput):
        ProjectionInput(x=np.ones(2), threshold_U=0.5, radius_R=-1.0, gamma=1.0, a=0.25)
    with pytest.raises(InvalidInput):
        make_input([1.0], U=0.5, R=0.2, a=0.25, gamma=1.0)  # R < U


def test_degenerate_prefix_keeps_mass_inside_ball():
    # the maximal qualifying prefix is {1} and its tight shift would be
    # +0.5: the correct output keeps it unshifted with beta = 0 instead of
    # growing the coordinate to 5.5
    inp = make_input([5.0, 1.0, -1.0, 1.0, -1.0, 1.0], U=1.0, R=5.5, gamma=1.0, a=0.5)
    v, cert = sparsify_project(inp)
    assert np.array_equal(v, np.array([5.0, 0, 0, 0, 0, 0]))
    assert cert.beta == 0.0 and cert.tau is None
    assert cert.max_kkt_residual <= 1e-12
    assert_contracts(inp, v, cert)
    # the grid oracle agrees the kept-prefix point is optimal for the
    # frozen-weight problem
    small = make_input([3.0, 0.8, -0.8], U=0.7, R=3.5, gamma=1.0, a=0.35)
    v_s, cert_s = sparsify_project(small)
    assert np.array_equal(v_s, np.array([3.0, 0.0, 0.0]))
    ref = brute_force_reference(small, grid_step=1e-3)
    assert frozen_weight_objective(small, v_s, v_s) <= frozen_weight_objective(small, v_s, ref) + 1e-4


# --- certificate checker ---------------------------------------------------

def test_kkt_checker_detects_perturbed_beta():
    inp = make_input([0.9, 0.5, -0.4], U=0.2, R=1.0, gamma=1.0, a=0.4)
    v, cert = sparsify_project(inp)
    assert cert.max_kkt_residual <= 1e-9
    cert.beta += 0.1
    assert verify_kkt(inp, v, cert) >= 0.09


# --- randomized properties -------------------------------------------------

def random_input(gen, max_dim=64):
    d = int(gen.integers(1, max_dim + 1))
    a = float(gen.uniform(0.02, 2.0))
    gamma = a * float(gen.uniform(2.0, 8.0))
    u_thr = a * float(gen.uniform(0.05, 2.0))
    radius = float(gen.uniform(1.0, 10.0)) * max(u_thr, 0.5)
    x = gen.standard_normal(d) * float(gen.uniform(0.2, 3.0))
    mask = gen.random(d) < 0.4
    x[mask] *= 0.05
    return ProjectionInput(x=x, threshold_U=u_thr, radius_R=radius, gamma=gamma, a=a)


def assert_contracts(inp, v, cert):
    nz = v != 0.0
    assert not np.any(nz & (np.abs(v) < inp.threshold_U - 1e-12)), "dichotomy"
    assert np.abs(v).sum() <= inp.radius_R * (1 + 1e-12), "feasibility"
    if cert.tau is not None:
        assert np.abs(v).sum() == pytest.approx(inp.radius_R, rel=1e-12)
    assert np.all(np.abs(v) <= np.abs(inp.x)), "shrinkage"
    assert np.all(~nz | (np.sign(v) == np.sign(inp.x))), "sign preservation"
    assert np.count_nonzero(v) <= math.floor(2 * inp.radius_R / inp.threshold_U) + 1e-9
    assert verify_kkt(inp, v, cert) <= 1e-9


def test_randomized_contract_suite():
    gen = np.random.default_rng(2024)
    for _ in range(2000):
        inp = random_input(gen)
        v, cert = sparsify_project(inp)
        assert_contracts(inp, v, cert)


def test_idempotent_on_outputs():
    gen = np.random.default_rng(77)
    for _ in range(200):
        inp = random_input(gen, max_dim=16)
        v, _ = sparsify_project(inp)
        again = ProjectionInput(
            x=v, threshold_U=inp.threshold_U, radius_R=inp.radius_R, gamma=inp.gamma, a=inp.a
        )
        v2, _ = sparsify_project(again)
        assert np.array_equal(v, v2)


def test_permutation_and_sign_equivariance():
    gen = np.random.default_rng(31)
    for _ in range(100):
        inp = random_input(gen, max_dim=12)
        v, _ = sparsify_project(inp)
        perm = gen.permutation(inp.x.shape[0])
        signs = gen.choice([-1.0, 1.0], size=inp.x.shape[0])
        transformed = ProjectionInput(
            x=inp.x[perm] * signs,
            threshold_U=inp.threshold_U,
            radius_R=inp.radius_R,
            gamma=inp.gamma,
            a=inp.a,
        )
        v_t, _ = sparsify_project(transformed)
        assert np.allclose(v_t, v[perm] * signs, atol=1e-14)


@settings(max_examples=150, deadline=None)
@given(
    data=st.data(),
    d=st.integers(min_value=1, max_value=32),
)
def test_hypothesis_contracts(data, d):
    x = np.array(
        data.draw(
            st.lists(
                st.floats(min_value=-5, max_value=5, allow_nan=False, width=64),
                min_size=d,
                max_size=d,
            )
        )
    )
    a = data.draw(st.floats(min_value=0.05, max_value=1.0))
    gamma = a * data.draw(st.floats(min_value=2.0, max_value=6.0))
    u_thr = a * data.draw(st.floats(min_value=0.1, max_value=1.5))
    radius = max(u_thr, 0.5) * data.draw(st.floats(min_value=1.0, max_value=8.0))
    inp = ProjectionInput(x=x, threshold_U=u_thr, radius_R=radius, gamma=gamma, a=a)
    v, cert = sparsify_project(inp)
    assert_contracts(inp, v, cert)


# --- brute-force optimality oracle ----------------------------------------

def test_brute_force_dimension_guard():
    with pytest.raises(DimensionTooLarge):
        brute_force_reference(make_input(np.ones(5) * 0.5, R=5.0), grid_step=1e-2)


def test_hand_trace_beats_grid():
    inp = make_input([0.9, 0.5, -0.4], U=0.2, R=1.0, gamma=1.0, a=0.4)
    v, _ = sparsify_project(inp)
    ref = brute_force_reference(inp, grid_step=1e-3)
    assert frozen_weight_objective(inp, v, v) <= frozen_weight_objective(inp, v, ref) + 1e-5


def test_interior_fixed_point_matches_grid():
    # all magnitudes above threshold, strictly inside the ball: v = x and the
    # grid optimum sits at x too
    inp = make_input([0.4, -0.3], U=0.1, R=2.0, gamma=1.0, a=0.05)
    v, _ = sparsify_project(inp)
    assert np.array_equal(v, inp.x)
    ref = brute_force_reference(inp, grid_step=1e-3)
    assert np.allclose(ref, inp.x, atol=5e-3)


def test_shrinkage_dominates_when_gamma_lam_large():
    # weights frozen at v=0 give the plain soft threshold: optimum 0 when
    # gamma*lam >= max|x_i|
    inp = make_input([0.05, -0.08], U=0.1, R=10.0, gamma=2.0, a=1.0)  # lam=0.1, gamma*lam=0.2
    v, _ = sparsify_project(inp)
    assert np.all(v == 0.0)
    ref = brute_force_reference(inp, grid_step=1e-3)
    assert frozen_weight_objective(inp, v, v) <= frozen_weight_objective(inp, v, ref) + 1e-6


def test_random_small_instances_beat_grid():
    gen = np.random.default_rng(5150)
    checked = 0
    while checked < 60:
        inp = random_input(gen, max_dim=3)
        v, _ = sparsify_project(inp)
        ref = brute_force_reference(inp, grid_step=1e-3)
        ours = frozen_weight_objective(inp, v, v)
        best = frozen_weight_objective(inp, v, ref)
        assert ours <= best + 1e-4, f"{ours} > {best} on {inp}"
        checked += 1
