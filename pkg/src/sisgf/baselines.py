"""Gaussian-direction stochastic gradient-free baseline.

One iteration draws a standard normal direction u and a scenario xi, queries
the oracle at x + nu*u and x, and steps along the difference quotient times
u with a constant step size.  Two outputs come from a single run: a
uniformly random iterate from the whole sequence and the running average of
the sequence.  The method is unconstrained, so sessions must be created
without the l1 domain check.

Problems that expose ``least_squares_form`` (scenario -> rows (A, b) with
f(x, xi_t) = 0.5*(A_t.x - b_t)^2) are executed through the chunked kernel
backend; everything else goes through scalar oracle calls.  Either path
consumes exactly two queries per iteration and draws from the same streams.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .backends import get_kernels
from .errors import BudgetTooSmall
from .oracle import OracleSession, ProblemSpec

# scenario/direction draws are batched per chunk of iterations; the chunk
# size keys the random streams, so it is a fixed constant, not a tunable
_CHUNK = 1024


@dataclass(frozen=True)
class SgfParams:
    n_iterations: int
    nu: float
    gamma: float
    d_tilde: float

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if not (self.nu > 0 and self.gamma > 0 and self.d_tilde > 0):
            raise ValueError("nu, gamma, d_tilde must be positive")


@dataclass
class SgfTrace:
    n_iterations: int
    queries_total: int
    chosen_index: int
    backend: str
    wall_time_s: float
    x_final: Optional[np.ndarray] = None


def sgf_default_params(spec: ProblemSpec, budget: int, d_tilde: Optional[float] = None) -> SgfParams:
    """Step rule for a given query budget.

    N = budget // 2 iterations; the step is
    (1/sqrt(d+4)) * min(1/(4L sqrt(d+4)), D/(sigma sqrt(N))) with the
    distance guess D defaulting to the l1 radius; the smoothing radius is
    the smaller of the driver's perturbation scale and 1/(sqrt(d) N),
    floored at 1e-8 against cancellation.
    """
    n = budget // 2
    if n < 1:
        raise BudgetTooSmall(f"budget {budget} below one two-point iteration")
    d = spec.dim
    L = spec.lipschitz_L
    d_tilde = spec.radius_R if d_tilde is None else float(d_tilde)
    sigma = math.sqrt(spec.sigma_sq)
    cap = d_tilde / (sigma * math.sqrt(n)) if sigma > 0 else math.inf
    gamma = (1.0 / math.sqrt(d + 4)) * min(1.0 / (4.0 * L * math.sqrt(d + 4)), cap)
    nu_scale = 1.0 / (50.0 * max(1.0, L) * spec.radius_R * max(1.0, d) ** 1.5)
    nu = max(1e-8, min(nu_scale, 1.0 / (math.sqrt(d) * n)))
    return SgfParams(n_iterations=n, nu=nu, gamma=gamma, d_tilde=d_tilde)


def sgf_run(
    session: OracleSession,
    params: SgfParams,
    x1: Optional[np.ndarray] = None,
    *,
    backend: str = "auto",
) -> Tuple[np.ndarray, np.ndarray, SgfTrace]:
    """Run N iterations; return (random iterate, average iterate, trace)."""
    if session.domain_slack is not None:
        raise ValueError(
            "baseline iterates are not confined to the l1 ball; "
            "create the session with domain_slack=None"
        )
    spec = session.problem.spec
    d = spec.dim
    n = params.n_iterations
    if session.budget is not None and session.remaining() < 2 * n:
        raise BudgetTooSmall(f"session budget cannot fund {n} two-point iterations")

    x = np.zeros(d) if x1 is None else np.array(x1, dtype=float)
    if x.shape != (d,):
        raise ValueError(f"x1 must have shape ({d},)")
    xsum = np.zeros(d)
    # the random output index is drawn up front; the iterate is snapshotted
    # in passing, so no history is kept
    chosen = int(session.stream("sgf-output").integers(1, n + 1))
    x_rand = None

    least_squares = getattr(session.problem, "least_squares_form", None)
    kern = get_kernels(backend)
    t0 = time.perf_counter()
    queries_start = session.queries_used

    done = 0
    chunk_idx = 0
    while done < n:
        size = min(_CHUNK, n - done)
        scen = session.sample_scenario_batch(size, "sgf-scen", chunk_idx)
        u = session.stream("sgf-dirs", chunk_idx).standard_normal((size, d))
        if least_squares is not None:
            a_rows, b = least_squares(scen)
            session.charge(2 * size)
            # split the chunk at the snapshot row so x^chosen is captured
            # before its own update
            snap = chosen - 1 - done
            if 0 <= snap < size:
                kern.sgf_least_squares_run(x, xsum, a_rows, b, u, params.gamma, params.nu, 0, snap)
                x_rand = x.copy()
                kern.sgf_least_squares_run(x, xsum, a_rows, b, u, params.gamma, params.nu, snap, size)
            else:
                kern.sgf_least_squares_run(x, xsum, a_rows, b, u, params.gamma, params.nu, 0, size)
        else:
            for t in range(size):
                if done + t + 1 == chosen:
                    x_rand = x.copy()
                sc = scen.take(t)
                f_plus = session.evaluate(x + params.nu * u[t], sc)
                f_base = session.evaluate(x, sc)
                q = (f_plus - f_base) / params.nu
                xsum += x
                x -= (params.gamma * q) * u[t]
        done += size
        chunk_idx += 1

    assert x_rand is not None
    x_avg = xsum / n
    trace = SgfTrace(
        n_iterations=n,
        queries_total=session.queries_used - queries_start,
        chosen_index=chosen,
        backend=kern.LABEL,
        wall_time_s=time.perf_counter() - t0,
        x_final=x.copy(),
    )
    return x_rand, x_avg, trace
