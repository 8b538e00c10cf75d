"""Main iteration driver: estimate, project, and select the outputs.

Each iteration estimates the gradient at x^k with a two-point mini-batch,
takes the step x^k - gamma_k * g, and maps the result through the
sparsifying projection with threshold U_k, so every iterate after the first
is feasible, thresholded, and sparse.  Two outputs are produced from one
run: a randomized iterate x^Y with P[Y = k] proportional to 1/gamma_{k-1}
(gamma_0 taken as gamma_1), and the iterate with the smallest mini-batch
in-sample mean, which reuses the base-point values already computed by the
estimator and therefore costs no extra queries.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import BudgetExhausted
from .oracle import OracleSession, true_gap
from .projection import ProjectionInput, sparsify_project
from .schedule import HyperParams
from .smoothing import SmoothingConfig, estimate_gradient

# keep full iterate histories only for short runs unless asked otherwise
_STORE_ITERATES_MAX_K = 512


@dataclass(eq=False)
class IterateTrace:
    """Per-iteration record of one run.

    ``batch_mean_f[k-1]`` is the mini-batch mean of f(x^k, xi^{k,m});
    ``cumulative_queries[k-1]`` is the session counter after iteration k.
    The diagnostic arrays cover the K+1 states x^1 .. x^{K+1}; full iterates
    are kept only when ``iterates`` is not None.
    """

    batch_mean_f: np.ndarray
    cumulative_queries: np.ndarray
    l1_norms: np.ndarray
    support_sizes: np.ndarray
    min_nonzero_mag: np.ndarray
    completed_iterations: int
    iterates: Optional[List[np.ndarray]] = None


@dataclass(eq=False)
class RunResult:
    """Final outputs of one run; indices are 1-based iteration numbers.

    Determinism contract: everything except ``wall_time_s`` is a pure
    function of (problem, session root seed, schedule, flags).
    """

    x_randomized: np.ndarray
    x_aos: np.ndarray
    chosen_Y: int
    chosen_kstar: int
    gap_randomized: Optional[float]
    gap_aos: Optional[float]
    queries_total: int
    seed: int
    wall_time_s: float = 0.0


def aos_select(batch_means: np.ndarray) -> int:
    """1-based index of the smallest in-sample mean; ties go to the smallest k."""
    batch_means = np.asarray(batch_means, dtype=float)
    if batch_means.size == 0:
        raise ValueError("empty trace")
    return int(np.argmin(batch_means)) + 1


def output_weights(gamma: np.ndarray) -> np.ndarray:
    """Probability mass over iterations 1..K, proportional to 1/gamma_{k-1}.

    gamma_0 is taken equal to gamma_1, which reproduces the inverse-step
    weighting of both schedule variants (uniform in the constant-step case).
    """
    gamma = np.asarray(gamma, dtype=float)
    shifted = np.concatenate([[gamma[0]], gamma[:-1]])
    w = 1.0 / shifted
    return w / w.sum()


def sample_output_index(gamma: np.ndarray, gen: np.random.Generator) -> int:
    """Draw the 1-based randomized output index Y."""
    p = output_weights(gamma)
    return int(gen.choice(len(p), p=p)) + 1


def _diagnostics(x: np.ndarray) -> Tuple[float, int, float]:
    nz = x[x != 0.0]
    l1 = float(np.abs(x).sum())
    min_mag = float(np.abs(nz).min()) if nz.size else math.inf
    return l1, int(nz.size), min_mag


def run(
    session: OracleSession,
    params: HyperParams,
    x1: Optional[np.ndarray] = None,
    *,
    store_iterates: Optional[bool] = None,
    aos_fresh_samples: bool = False,
) -> Tuple[RunResult, IterateTrace]:
    """Execute K iterations on the session's problem.

    ``x1`` defaults to the all-zero vector, which satisfies both
    initialization constraints for any radius and threshold.  With
    ``aos_fresh_samples`` the in-sample means for output selection are
    recomputed on fresh scenarios (M extra queries per iteration) instead of
    reusing the estimator's base values.

    Raises :class:`BudgetExhausted` if the session budget dies mid-run; the
    partial trace is attached to the exception.
    """
    spec = session.problem.spec
    d = spec.dim
    R = spec.radius_R
    x = np.zeros(d) if x1 is None else np.array(x1, dtype=float)
    if x.shape != (d,):
        raise ValueError(f"x1 must have shape ({d},)")
    if np.abs(x).sum() > R * (1 + 1e-12):
        raise ValueError("x1 violates the l1 radius constraint")
    if np.count_nonzero(x) > 2 * R / params.U[0] + 1e-9:
        raise ValueError("x1 violates the initial sparsity constraint 2R/U_1")

    K, M = params.K, params.M
    if store_iterates is None:
        store_iterates = K <= _STORE_ITERATES_MAX_K
    cfg = SmoothingConfig(delta=params.delta, batch_M=M)

    chosen_y = sample_output_index(params.gamma, session.stream("output-index"))

    batch_means = np.full(K, np.nan)
    cum_queries = np.zeros(K, dtype=np.int64)
    l1_norms = np.zeros(K + 1)
    supports = np.zeros(K + 1, dtype=np.int64)
    min_mags = np.zeros(K + 1)
    iterates: Optional[List[np.ndarray]] = [x.copy()] if store_iterates else None
    l1_norms[0], supports[0], min_mags[0] = _diagnostics(x)

    x_rand = x.copy() if chosen_y == 1 else None
    x_aos = None
    best_mean = math.inf
    kstar = 0
    queries_start = session.queries_used
    t0 = time.perf_counter()

    def _trace(completed: int) -> IterateTrace:
        return IterateTrace(
            batch_mean_f=batch_means,
            cumulative_queries=cum_queries,
            l1_norms=l1_norms,
            support_sizes=supports,
            min_nonzero_mag=min_mags,
            completed_iterations=completed,
            iterates=iterates,
        )

    for k in range(1, K + 1):
        try:
            grad, batch_mean = estimate_gradient(session, x, cfg, (k,))
            if aos_fresh_samples:
                fresh = session.sample_scenario_batch(M, "aos-scen", k)
                batch_mean = float(session.evaluate_batch(x, fresh).mean())
        except BudgetExhausted as err:
            err.partial_trace = _trace(k - 1)
            raise

        batch_means[k - 1] = batch_mean
        cum_queries[k - 1] = session.queries_used - queries_start
        if k == chosen_y:
            x_rand = x.copy()
        if batch_mean < best_mean:
            best_mean = batch_mean
            kstar = k
            x_aos = x.copy()

        step = x - params.gamma[k - 1] * grad
        x, _cert = sparsify_project(
            ProjectionInput(
                x=step,
                threshold_U=params.U[k - 1],
                radius_R=R,
                gamma=params.gamma[k - 1],
                a=params.a[k - 1],
            )
        )
        l1_norms[k], supports[k], min_mags[k] = _diagnostics(x)
        if iterates is not None:
            iterates.append(x.copy())

    assert x_rand is not None and x_aos is not None
    result = RunResult(
        x_randomized=x_rand,
        x_aos=x_aos,
        chosen_Y=chosen_y,
        chosen_kstar=kstar,
        gap_randomized=true_gap(session.problem, x_rand),
        gap_aos=true_gap(session.problem, x_aos),
        queries_total=session.queries_used - queries_start,
        seed=session.rng_root,
        wall_time_s=time.perf_counter() - t0,
    )
    return result, _trace(K)


def check_trajectory_invariants(trace: IterateTrace, params: HyperParams, radius_R: float) -> int:
    """Count invariant violations along a completed trace.

    For every state x^k with k >= 2: l1 norm within the ball, nonzero
    magnitudes at or above U_{k-1}, and support size at most
    floor(2R / U_{k-1}).  Returns the number of violating states (0 for a
    conforming run).
    """
    violations = 0
    for k in range(2, trace.completed_iterations + 2):
        u_prev = params.U[k - 2]
        ok = (
            trace.l1_norms[k - 1] <= radius_R * (1 + 1e-12)
            and (math.isinf(trace.min_nonzero_mag[k - 1]) or trace.min_nonzero_mag[k - 1] >= u_prev - 1e-12)
            and trace.support_sizes[k - 1] <= math.floor(2 * radius_R / u_prev) + 1e-9
        )
        if not ok:
            violations += 1
    return violations
