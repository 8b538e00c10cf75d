"""Hyper-parameter schedules for the sparsity-inducing gradient-free driver.

Two regimes are provided.  The convex regime uses a constant step 1/(4L)
with threshold U = 1/K; the strongly convex regime uses the diminishing
step 2 / (mu * (k + ceil(100 L / mu) + 1)) with per-iteration thresholds
U_k = (gamma_k / 2) * (100 L / K).  Both tie a_k = gamma_k / 2 so the
projection hypothesis gamma >= 2a holds by construction, and both set the
mini-batch size from the worst-case formulas (M ~ K^2 resp. K^3 times the
gradient-variance level).  Small-K regime warnings are recorded on the
schedule rather than raised: practical runs routinely operate below the
worst-case iteration thresholds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import BudgetTooSmall, InvalidVariant
from .oracle import ProblemSpec


class Variant(str, enum.Enum):
    CONVEX = "convex"
    STRONGLY_CONVEX = "strongly-convex"


def _as_variant(variant) -> Variant:
    if isinstance(variant, Variant):
        return variant
    try:
        return Variant(str(variant))
    except ValueError:
        raise InvalidVariant(f"unknown variant {variant!r}") from None


@dataclass(frozen=True)
class HyperParams:
    """One run's schedule: iteration count, batch size, and per-step arrays."""

    variant: Variant
    K: int
    M: int
    delta: float
    lam: float
    a: np.ndarray
    gamma: np.ndarray
    U: np.ndarray
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("a", "gamma", "U"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.shape != (self.K,):
                raise ValueError(f"{name} must have shape ({self.K},)")
            if not np.all(arr > 0):
                raise ValueError(f"{name} entries must be positive")
        if self.K < 1 or self.M < 1:
            raise ValueError("K and M must be >= 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if np.any(self.gamma < 2 * self.a * (1 - 1e-12)):
            raise ValueError("schedule violates gamma_k >= 2 a_k")
        if not np.allclose(self.U, self.a * self.lam, rtol=1e-12, atol=0):
            raise ValueError("U_k must equal a_k * lam")

    @property
    def queries_per_run(self) -> int:
        return 2 * self.K * self.M


def formula_batch_size(spec: ProblemSpec, variant, K: int, sigma_sq: Optional[float] = None) -> int:
    """Worst-case mini-batch size for the given variant at K iterations."""
    variant = _as_variant(variant)
    s2 = max(1.0, spec.sigma_sq if sigma_sq is None else sigma_sq)
    L = spec.lipschitz_L
    if variant is Variant.CONVEX:
        return math.ceil(50.0 * K**2 * s2 / L**2)
    if spec.strong_mu <= 0:
        raise InvalidVariant("strongly convex schedule requires strong_mu > 0")
    return math.ceil(8.0 * K**3 * s2 * spec.strong_mu / L**3)


def make_schedule(
    spec: ProblemSpec,
    variant,
    K: int,
    *,
    sigma_sq: Optional[float] = None,
    batch_m: Optional[int] = None,
    delta: Optional[float] = None,
) -> HyperParams:
    """Build the schedule for ``K`` iterations on ``spec``.

    ``sigma_sq``, ``batch_m``, and ``delta`` override the formula values;
    overrides leave the step/threshold arrays untouched.
    """
    variant = _as_variant(variant)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    L = spec.lipschitz_L
    R = spec.radius_R
    d = spec.dim
    warnings = []

    if variant is Variant.CONVEX:
        gamma = np.full(K, 1.0 / (4.0 * L))
        a = np.full(K, 1.0 / (8.0 * L))
        lam = 8.0 * L / K
        delta_formula = 1.0 / (50.0 * max(1.0, L) * R * K * d**1.5)
        if K < 2 * L**2 * R:
            warnings.append(
                f"convex schedule below its analyzed regime: K={K} < 2*L^2*R={2 * L**2 * R:.3g}"
            )
    else:
        mu = spec.strong_mu
        if mu <= 0:
            raise InvalidVariant("strongly convex schedule requires strong_mu > 0")
        shift = math.ceil(100.0 * L / mu)
        k_idx = np.arange(1, K + 1, dtype=float)
        gamma = 2.0 / (mu * (k_idx + shift + 1))
        a = gamma / 2.0
        lam = 100.0 * L / K
        delta_formula = 1.0 / (K**2 * R * d**1.5)
        k_min = max(1.0, L**1.5 * math.sqrt(R) / math.sqrt(mu))
        if K < k_min:
            warnings.append(
                f"strongly convex schedule below its analyzed regime: K={K} < {k_min:.3g}"
            )
        if R < 1.0:
            warnings.append(f"strongly convex analysis assumes R >= 1, got R={R:.3g}")

    m = formula_batch_size(spec, variant, K, sigma_sq) if batch_m is None else int(batch_m)
    return HyperParams(
        variant=variant,
        K=K,
        M=m,
        delta=float(delta_formula if delta is None else delta),
        lam=lam,
        a=a,
        gamma=gamma,
        U=a * lam,
        warnings=tuple(warnings),
    )


def choose_K_for_budget(
    spec: ProblemSpec, variant, budget: int, sigma_sq: Optional[float] = None
) -> int:
    """Largest K whose full run fits the query budget under the formula M.

    The per-run cost 2*K*M(K) is increasing in K, so a linear scan from 1
    terminates quickly (K grows at most like budget^(1/3)).
    """
    variant = _as_variant(variant)
    if budget < 2 * formula_batch_size(spec, variant, 1, sigma_sq):
        raise BudgetTooSmall(
            f"budget {budget} cannot fund a single iteration "
            f"(needs {2 * formula_batch_size(spec, variant, 1, sigma_sq)})"
        )
    k = 1
    while 2 * (k + 1) * formula_batch_size(spec, variant, k + 1, sigma_sq) <= budget:
        k += 1
    return k
