# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for the sequential baseline iteration.

The baseline driver is a long chain of O(d) steps where each one depends on
the previous point, so it cannot be batch-vectorized; this kernel removes
the per-iteration interpreter overhead.  All randomness is drawn by the
caller and passed in as chunk arrays, keeping the stream consumption
identical to the numpy fallback.
"""

LABEL = "compiled"


def sgf_least_squares_run(
    double[::1] x,
    double[::1] xsum,
    double[:, ::1] a_rows,
    double[::1] b,
    double[:, ::1] u,
    double gamma,
    double nu,
    Py_ssize_t row0,
    Py_ssize_t row1,
):
    """Run baseline iterations for rows [row0, row1) of a scenario chunk."""
    cdef Py_ssize_t t, i, d = x.shape[0]
    cdef double s, p, f_base, f_plus, q, scale, xi
    with nogil:
        for t in range(row0, row1):
            s = 0.0
            p = 0.0
            for i in range(d):
                s += a_rows[t, i] * x[i]
                p += a_rows[t, i] * u[t, i]
            s -= b[t]
            f_base = 0.5 * s * s
            f_plus = 0.5 * (s + nu * p) * (s + nu * p)
            q = (f_plus - f_base) / nu
            scale = gamma * q
            for i in range(d):
                xi = x[i]
                xsum[i] += xi
                x[i] = xi - scale * u[t, i]
