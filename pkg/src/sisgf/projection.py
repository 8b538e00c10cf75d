"""Hard-threshold-then-rescale map onto the l1 ball, with optimality certificates.

The map works in a lifted nonnegative representation: split x into positive
and negative parts, sort the 2d magnitudes, zero every entry below the
threshold U, and, if the survivors' mass still exceeds the radius R, shift
the top rho survivors by a common negative tau chosen so they land exactly
on the l1 sphere while staying at or above U.  Every output coordinate is
therefore exactly zero or at least U in magnitude, never grows, and never
flips sign.

One degenerate configuration needs care: when the maximal prefix whose
shifted values would survive the threshold holds less than R of mass (the
prefix scan can skip past a cluster of mid-sized entries), the tight shift
would come out positive, growing coordinates and certifying with a negative
ball multiplier.  The correct move there is to keep that prefix unshifted
and zero the rest; the certificate then verifies with beta = 0, and the
output's l1 norm stays strictly inside the ball.

The output is a KKT point of

    min  (1/(2 gamma)) ||z - x_lifted||^2 + sum_i P(z_i)   s.t.  1'z <= R,  z >= 0

where P is the integral of t -> max(U - t, 0)/a.  P is concave below U, so
that problem is not convex; the sharp statement is that freezing the
penalty weights at the output, w_i = max(U - |v_i|, 0)/a, turns the penalty
linear, the same multipliers certify the frozen problem, and the frozen
problem IS convex — making the output its exact global minimizer.
``sparsify_project`` returns the multipliers alongside the point and
``verify_kkt`` recomputes all four residual groups from scratch.
``brute_force_reference`` is a grid oracle for the frozen-weight signed
problem; it shares no code path with the map itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionTooLarge, InvalidInput

# guards the threshold comparisons against rounding in x - gamma*g inputs
THRESH_EPS = 1e-12

BRUTE_FORCE_MAX_DIM = 4


@dataclass(frozen=True)
class ProjectionInput:
    """Point to project plus the parameters tying threshold and step together.

    Requires gamma >= 2a and R >= U; aside from degenerate parameter choices
    these hold by construction for the schedules in :mod:`sisgf.schedule`.
    """

    x: np.ndarray
    threshold_U: float
    radius_R: float
    gamma: float
    a: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.x.ndim != 1:
            raise InvalidInput("x must be a 1-d vector")
        if not self.threshold_U > 0:
            raise InvalidInput(f"threshold_U must be > 0, got {self.threshold_U}")
        if not self.radius_R > 0:
            raise InvalidInput(f"radius_R must be > 0, got {self.radius_R}")
        if not self.a > 0:
            raise InvalidInput(f"a must be > 0, got {self.a}")
        if self.gamma < 2 * self.a * (1 - 1e-12):
            raise InvalidInput(
                f"gamma must be >= 2a, got gamma={self.gamma}, a={self.a}"
            )
        if self.radius_R < self.threshold_U - THRESH_EPS:
            raise InvalidInput(
                f"radius_R must be >= threshold_U, got R={self.radius_R}, U={self.threshold_U}"
            )

    @property
    def lam(self) -> float:
        """Penalty level: lam = U / a."""
        return self.threshold_U / self.a


@dataclass
class ProjectionCertificate:
    """Multipliers certifying optimality in the lifted representation.

    ``beta`` multiplies the l1 constraint; ``mu`` (length 2d) multiplies the
    nonnegativity constraints.  ``tau``/``rho`` are present only when the
    rescale branch ran.
    """

    beta: float
    mu: np.ndarray
    tau: Optional[float]
    rho: Optional[int]
    max_kkt_residual: float


def _lift(x: np.ndarray) -> np.ndarray:
    return np.concatenate([np.maximum(x, 0.0), np.maximum(-x, 0.0)])


def sparsify_project(inp: ProjectionInput) -> Tuple[np.ndarray, ProjectionCertificate]:
    """Apply the threshold-then-rescale map; return the point and certificate.

    Postconditions: every coordinate of v is 0 or at least U in magnitude
    (up to the 1e-12 comparison guard), ||v||_1 <= R with equality whenever
    the tight shift ran (cert.tau is not None), |v_i| <= |x_i| with matching
    sign, and the certificate's KKT residual is small (the caller-facing
    contract is 1e-9).
    """
    x = inp.x
    d = x.shape[0]
    u_thr = inp.threshold_U
    gamma = inp.gamma
    lam = inp.lam

    xt = _lift(x)
    keep = xt >= u_thr - THRESH_EPS
    z = np.where(keep, xt, 0.0)

    # the relative guard keeps re-projection of a tight-sum output in the
    # pass-through branch instead of re-shifting it by a rounding residue
    if z.sum() <= inp.radius_R * (1.0 + 1e-12):
        vt = z
        beta = 0.0
        mu = np.where(keep, 0.0, lam - xt / gamma)
        tau = None
        rho = None
    else:
        # stable argsort on the negated magnitudes: descending order with
        # ties broken by original index ascending
        order = np.argsort(-xt, kind="stable")
        xs = xt[order]
        prefix = np.cumsum(xs)
        j = np.arange(1, 2 * d + 1, dtype=float)
        qualifies = xs + (inp.radius_R - prefix) / j >= u_thr - THRESH_EPS
        # j = 1 always qualifies because R >= U
        rho = int(np.nonzero(qualifies)[0].max()) + 1
        tau = (inp.radius_R - prefix[rho - 1]) / rho
        vt = np.zeros(2 * d)
        head = order[:rho]
        tail = order[rho:]
        mu = np.zeros(2 * d)
        if tau > 0.0:
            # Degenerate rescale case: the maximal qualifying prefix holds
            # less than R of mass, which happens only when the entries just
            # below it are too small to survive any tight shift.  A positive
            # shift would grow coordinates and carry a negative ball
            # multiplier, so the optimal move is to keep the prefix as is
            # (all of it is above the threshold here, since a prefix
            # reaching past the above-threshold entries would exceed R) and
            # zero the rest; non-qualification of position rho+1 bounds the
            # largest dropped magnitude below 2U <= gamma*lam, keeping the
            # dropped multipliers nonnegative.
            vt[head] = xt[head]
            beta = 0.0
            mu[tail] = lam - xt[tail] / gamma
            tau = None
            rho = None
        else:
            vt[head] = xt[head] + tau
            beta = -tau / gamma
            mu[tail] = lam - (xt[tail] + tau) / gamma

    v = vt[:d] - vt[d:]
    cert = ProjectionCertificate(beta=beta, mu=mu, tau=tau, rho=rho, max_kkt_residual=0.0)
    cert.max_kkt_residual = verify_kkt(inp, v, cert)
    return v, cert


def verify_kkt(inp: ProjectionInput, v: np.ndarray, cert: ProjectionCertificate) -> float:
    """Maximum absolute residual over all four KKT condition groups.

    Evaluates stationarity, primal feasibility, dual feasibility, and
    complementary slackness in the lifted 2d-dimensional form, entirely from
    (input, point, multipliers); nothing is taken on trust from the solver.
    """
    v = np.asarray(v, dtype=float)
    xt = _lift(inp.x)
    vt = _lift(v)
    gamma = inp.gamma
    a = inp.a
    u_thr = inp.threshold_U

    stationarity = (vt - xt) / gamma + np.maximum(u_thr - vt, 0.0) / a + cert.beta - cert.mu
    mass = vt.sum()
    residuals = [
        float(np.abs(stationarity).max()),
        float(np.maximum(-vt, 0.0).max()),          # primal: v >= 0
        max(mass - inp.radius_R, 0.0),              # primal: 1'v <= R
        max(-cert.beta, 0.0),                       # dual: beta >= 0
        float(np.maximum(-cert.mu, 0.0).max()),     # dual: mu >= 0
        float(np.abs(cert.mu * vt).max()),          # slackness: mu_i v_i = 0
        abs(cert.beta * (mass - inp.radius_R)),     # slackness: beta (1'v - R) = 0
    ]
    return max(residuals)


def _grid_axes(lo, hi, points):
    return [np.linspace(lo[i], hi[i], points) for i in range(len(lo))]


def brute_force_reference(inp: ProjectionInput, grid_step: float) -> np.ndarray:
    """Grid-search oracle for the frozen-weight signed problem, d <= 4.

    Minimizes  ||p - x||^2 / (2 gamma) + sum_i w_i |p_i|  over the l1 ball,
    with weights w_i = max(U - |v_i|, 0)/a frozen at the output v of
    ``sparsify_project``.  The search refines a uniform grid around the best
    cell until the spacing drops below ``grid_step``; the objective is
    convex, so local refinement cannot lose the global optimum by more than
    one cell per level.  Returns the best feasible grid point.
    """
    d = inp.x.shape[0]
    if d > BRUTE_FORCE_MAX_DIM:
        raise DimensionTooLarge(f"brute force supports d <= {BRUTE_FORCE_MAX_DIM}, got {d}")
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")

    v_algo, _ = sparsify_project(inp)
    weights = np.maximum(inp.threshold_U - np.abs(v_algo), 0.0) / inp.a
    x = inp.x

    def objective(points):
        quad = ((points - x) ** 2).sum(axis=1) / (2 * inp.gamma)
        return quad + np.abs(points) @ weights

    # initial box: between 0 and x per coordinate, slightly padded; it always
    # contains both the unconstrained shrinkage point and the feasible 0
    pad = 0.05 * max(1.0, float(np.abs(x).max()))
    lo = np.minimum(x, 0.0) - pad
    hi = np.maximum(x, 0.0) + pad

    points_per_axis = 13
    best_point = np.zeros(d)
    best_value = float(objective(best_point[None, :])[0])

    spacing = (hi - lo).max() / (points_per_axis - 1)
    for _ in range(64):
        axes = _grid_axes(lo, hi, points_per_axis)
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        feasible = np.abs(mesh).sum(axis=1) <= inp.radius_R * (1 + 1e-12)
        candidates = mesh[feasible]
        if candidates.size:
            values = objective(candidates)
            k = int(np.argmin(values))
            if values[k] < best_value:
                best_value = float(values[k])
                best_point = candidates[k]
        if spacing <= grid_step:
            break
        # refine: shrink the box to +-2 cells around the incumbent
        lo = np.maximum(lo, best_point - 2 * spacing)
        hi = np.minimum(hi, best_point + 2 * spacing)
        spacing = (hi - lo).max() / (points_per_axis - 1)

    return best_point


def frozen_weight_objective(inp: ProjectionInput, v_ref: np.ndarray, p: np.ndarray) -> float:
    """Objective of the frozen-weight problem at p, weights frozen at v_ref."""
    weights = np.maximum(inp.threshold_U - np.abs(np.asarray(v_ref, float)), 0.0) / inp.a
    p = np.asarray(p, dtype=float)
    return float(((p - inp.x) ** 2).sum() / (2 * inp.gamma) + np.abs(p) @ weights)
