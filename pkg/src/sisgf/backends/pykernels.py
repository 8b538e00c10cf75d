"""Numpy fallback for the compiled inner loops.

Matches the compiled kernel operation-for-operation; the only differences
are the summation orders inside the dot products, so results agree to
floating-point associativity (~1e-12 relative) across backends and are
bitwise reproducible within either one.
"""

from __future__ import annotations

LABEL = "python"


def sgf_least_squares_run(x, xsum, a_rows, b, u, gamma, nu, row0, row1):
    """Run baseline iterations for rows [row0, row1) of a scenario chunk.

    Per row t: evaluate f = 0.5*(a.x - b)^2 at x + nu*u_t and x, form the
    difference quotient, accumulate x into xsum (pre-update iterate), and
    step x in place.
    """
    for t in range(row0, row1):
        at = a_rows[t]
        ut = u[t]
        s = float(at @ x) - b[t]
        p = float(at @ ut)
        f_base = 0.5 * s * s
        f_plus = 0.5 * (s + nu * p) ** 2
        q = (f_plus - f_base) / nu
        xsum += x
        x -= (gamma * q) * ut
