"""Stochastic zeroth-order objectives and metered oracle sessions.

A problem couples the constants the algorithms consume (dimension, gradient
smoothness, noise level, l1 radius of an optimal point) with scenario
sampling and batched function evaluation.  An :class:`OracleSession` wraps
one problem for one run: it derives all randomness from a single root seed,
counts every scalar evaluation of f(x, xi) against an optional budget, and
optionally polices the l1 evaluation domain.

Sessions are single-run-owned.  Independent sessions may run concurrently;
the query counter is never shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng as rngmod
from .errors import BudgetExhausted, DomainViolation


@dataclass(frozen=True)
class ProblemSpec:
    """Constants describing one stochastic objective.

    ``strong_mu`` is 0 for merely convex objectives.  ``sigma_sq`` bounds the
    variance of the stochastic gradient over the l1 ball of radius
    ``radius_R``.  ``optimum_value``/``optimum_point`` are populated only
    when an analytic optimum is known (synthetic benchmarks).
    """

    dim: int
    lipschitz_L: float
    strong_mu: float
    sigma_sq: float
    radius_R: float
    optimum_value: Optional[float] = None
    optimum_point: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.lipschitz_L > 0:
            raise ValueError(f"lipschitz_L must be > 0, got {self.lipschitz_L}")
        if not self.radius_R > 0:
            raise ValueError(f"radius_R must be > 0, got {self.radius_R}")
        if self.strong_mu < 0:
            raise ValueError(f"strong_mu must be >= 0, got {self.strong_mu}")
        if self.strong_mu > self.lipschitz_L * (1 + 1e-12):
            raise ValueError("strong_mu cannot exceed lipschitz_L")
        if self.sigma_sq < 0:
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")
        if self.optimum_point is not None:
            pt = np.asarray(self.optimum_point, dtype=float)
            object.__setattr__(self, "optimum_point", pt)
            if pt.shape != (self.dim,):
                raise ValueError("optimum_point has wrong shape")
            if np.abs(pt).sum() > self.radius_R + 1e-9:
                raise ValueError("optimum_point violates the l1 radius bound")


class StochasticProblem:
    """Interface for stochastic objectives.

    Subclasses provide ``spec``, scenario sampling, and batched evaluation.
    Scenario batches are opaque to the session; they only need ``len()``.
    """

    spec: ProblemSpec

    def sample_scenario_batch(self, n: int, gen: np.random.Generator):
        raise NotImplementedError

    def evaluate_batch(self, x: np.ndarray, scenarios) -> np.ndarray:
        """Evaluate f at ``x`` under each scenario.

        ``x`` is either a single point of shape (d,), evaluated under every
        scenario, or an (n, d) array pairing row i with scenario i.
        """
        raise NotImplementedError

    def analytic_gap(self, x: np.ndarray) -> Optional[float]:
        """F(x) - F(x*) when available in closed form, else None."""
        return None


def true_gap(problem: StochasticProblem, x: np.ndarray) -> Optional[float]:
    """Sub-optimality gap F(x) - F(x*), or None for black boxes."""
    return problem.analytic_gap(np.asarray(x, dtype=float))


class _TrivialScenarios:
    """Scenario batch for deterministic objectives: carries only a count."""

    __slots__ = ("n",)

    def __init__(self, n):
        self.n = n

    def __len__(self):
        return self.n

    def take(self, i):
        if not 0 <= i < self.n:
            raise IndexError(i)
        return _TrivialScenarios(1)


class DeterministicProblem(StochasticProblem):
    """Noise-free objective: every scenario evaluates to the same f(x).

    ``f_batch`` maps an (n, d) array to (n,) values.  Useful for tests and
    diagnostics where the smoothing or driver behavior must be isolated from
    sampling noise.
    """

    def __init__(self, f_batch, spec: ProblemSpec, gap_fn=None):
        self._f = f_batch
        self.spec = spec
        self._gap_fn = gap_fn

    def sample_scenario_batch(self, n, gen):
        return _TrivialScenarios(n)

    def evaluate_batch(self, x, scenarios):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            value = self._f(x[None, :])
            return np.full(len(scenarios), float(value[0]))
        if x.shape[0] != len(scenarios):
            raise ValueError("row count does not match scenario count")
        return np.asarray(self._f(x), dtype=float)

    def analytic_gap(self, x):
        if self._gap_fn is not None:
            return float(self._gap_fn(x))
        if self.spec.optimum_value is not None:
            return float(self._f(np.asarray(x, float)[None, :])[0]) - self.spec.optimum_value
        return None


@dataclass
class OracleSession:
    """Metered handle over a problem for a single run.

    ``domain_slack`` extends the l1 evaluation domain beyond radius_R;
    ``None`` disables the check entirely (used for unconstrained baselines
    whose iterates legitimately leave the ball).  ``budget`` of ``None``
    means unlimited queries.
    """

    problem: StochasticProblem
    rng_root: int
    budget: Optional[int] = None
    domain_slack: Optional[float] = None
    queries_used: int = field(default=0, init=False)

    def stream(self, tag: str, *path: int) -> np.random.Generator:
        return rngmod.stream(self.rng_root, tag, *path)

    def remaining(self) -> float:
        if self.budget is None:
            return math.inf
        return self.budget - self.queries_used

    def sample_scenario_batch(self, n: int, tag: str, *path: int):
        return self.problem.sample_scenario_batch(n, self.stream(tag, *path))

    def sample_scenario(self, stream_id):
        """Draw a single scenario addressed by an integer tuple ``stream_id``."""
        return self.problem.sample_scenario_batch(1, self.stream("scenario", *stream_id))

    def _check_domain(self, x: np.ndarray):
        if self.domain_slack is None:
            return
        limit = self.problem.spec.radius_R + self.domain_slack
        l1 = np.abs(x).sum(axis=-1)
        worst = float(np.max(l1))
        if worst > limit:
            raise DomainViolation(
                f"query point l1 norm {worst:.6g} exceeds radius {self.problem.spec.radius_R:.6g} "
                f"+ slack {self.domain_slack:.3g}"
            )

    def charge(self, n: int):
        """Count ``n`` scalar evaluations performed inside a fused kernel.

        Raises without consuming anything if the budget would be exceeded.
        Normal callers never need this; it exists so batch kernels that
        evaluate the objective inline keep the accounting exact.
        """
        if self.budget is not None and self.queries_used + n > self.budget:
            raise BudgetExhausted(
                f"evaluation of {n} point(s) would use {self.queries_used + n} queries, "
                f"budget is {self.budget}"
            )
        self.queries_used += n

    def evaluate_batch(self, x: np.ndarray, scenarios) -> np.ndarray:
        """Evaluate under each scenario; counts one query per scenario.

        Raises before consuming anything: a rejected batch leaves the
        counter untouched.
        """
        x = np.asarray(x, dtype=float)
        n = len(scenarios)
        if x.ndim == 2 and x.shape[0] != n:
            raise ValueError(f"got {x.shape[0]} points for {n} scenarios")
        self._check_domain(x)
        self.charge(n)
        return self.problem.evaluate_batch(x, scenarios)

    def evaluate(self, x: np.ndarray, scenario) -> float:
        """Scalar oracle call f(x, xi); increments the counter by one."""
        if len(scenario) != 1:
            raise ValueError("evaluate takes a single scenario; use evaluate_batch")
        return float(self.evaluate_batch(np.asarray(x, dtype=float), scenario)[0])
