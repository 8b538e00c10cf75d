#!/usr/bin/env python3
"""Time the baseline inner loop on every available kernel backend.

The baseline iteration is a long chain of O(d) dependent steps, so it is the
one place where the compiled extension pays off; the solver's mini-batch
path is BLAS-bound either way.  Run after building the extension:

    python benchmarks/compare_backends.py --dim 256 --iterations 200000
"""

import argparse
import time

import numpy as np

from sisgf import OracleSession, QuadraticProblemConfig, generate_problem, sgf_default_params, sgf_run
from sisgf.backends import HAVE_COMPILED


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--iterations", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    problem = generate_problem(QuadraticProblemConfig(dim=args.dim, seed=7), calibration_samples=4000)
    params = sgf_default_params(problem.spec, 2 * args.iterations)
    backends = ["python"] + (["compiled"] if HAVE_COMPILED else [])

    print(f"baseline inner loop: dim={args.dim}, iterations={args.iterations}, best of {args.repeats}")
    best = {}
    outputs = {}
    for name in backends:
        times = []
        for _ in range(args.repeats):
            session = OracleSession(problem, rng_root=42, domain_slack=None)
            t0 = time.perf_counter()
            _, x_avg, _ = sgf_run(session, params, backend=name)
            times.append(time.perf_counter() - t0)
        best[name] = min(times)
        outputs[name] = x_avg
        print(f"  {name:<9} {best[name]:8.3f}s  ({args.iterations / best[name]:>12,.0f} it/s)")

    if len(backends) == 2:
        print(f"  speedup: {best['python'] / best['compiled']:.2f}x")
        diff = float(np.max(np.abs(outputs["python"] - outputs["compiled"])))
        print(f"  max |difference| between backend outputs: {diff:.3e}")
    else:
        print("  compiled extension not built (pip install -e . builds it when Cython is present)")


if __name__ == "__main__":
    main()
