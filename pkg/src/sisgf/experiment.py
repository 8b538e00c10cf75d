"""Replication harness: grids over dimension or budget, tables, CSV.

Each replication owns a fresh problem instance and oracle session, with all
seeds derived from the experiment root, so any cell can be recomputed in
isolation (and replications can run in worker processes) without changing a
single digit of the output.  One driver run yields both of its output
strategies, so a three-algorithm experiment produces six result columns.

Iteration/batch planning supports two modes.  ``theorem`` mode sizes the
mini-batch from the worst-case formulas and picks the largest iteration
count that fits the budget; it is faithful to the analysis but, at
desk-scale budgets, spends nearly everything on variance reduction and
leaves too few iterations to move.  ``practical`` mode (the benchmark
default) fixes a moderate mini-batch and spends the budget on iterations
instead, which is what makes the solver competitive at common budgets; the
step, threshold, and perturbation schedules are unchanged.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import algorithm, baselines
from .errors import BudgetTooSmall, ConfigError
from .oracle import OracleSession
from .quadratic import QuadraticProblemConfig, generate_problem
from .rng import derive_seed
from .schedule import HyperParams, Variant, choose_K_for_budget, formula_batch_size, make_schedule

CSV_COLUMNS = (
    "dim_or_budget",
    "algorithm",
    "output_strategy",
    "mean_gap",
    "sd_gap",
    "replications",
    "queries",
    "seed",
)

# benchmark-tuned batch sizing for practical mode; the quadratic dim term
# keeps the step update mean-square stable at high dimension, and the budget
# term bounds the iteration count at very large budgets (the stationary
# noise level depends on the budget only through K*M, so trading K for M is
# free there)
PRACTICAL_M_FLOOR = 512
PRACTICAL_M_DIM_SQ = 0.01
PRACTICAL_MAX_ITER_FRACTION = 40_000


@dataclass(frozen=True)
class AlgorithmSettings:
    """One algorithm column of an experiment, with per-algorithm overrides."""

    name: str
    kind: str  # "sisgf" | "sgf"
    variant: Optional[Variant] = None
    mode: str = "practical"  # "practical" | "theorem"
    batch_m: Optional[int] = None
    k: Optional[int] = None
    sigma_sq: Optional[float] = None
    delta: Optional[float] = None
    aos_fresh: bool = False
    backend: str = "auto"
    d_tilde: Optional[float] = None
    n_iterations: Optional[int] = None  # sgf only; set by iteration-driven configs

    def __post_init__(self):
        if self.kind not in ("sisgf", "sgf"):
            raise ConfigError(f"unknown algorithm kind {self.kind!r}", field=self.name)
        if self.kind == "sisgf" and self.variant is None:
            raise ConfigError(f"algorithm {self.name!r} needs a variant", field=self.name)
        if self.mode not in ("practical", "theorem"):
            raise ConfigError(f"unknown mode {self.mode!r}", field=self.name)

    @property
    def strategies(self) -> Tuple[str, ...]:
        return ("randomized", "aos") if self.kind == "sisgf" else ("randomized", "average")


def default_algorithms() -> Dict[str, AlgorithmSettings]:
    return {
        "sisgf-convex": AlgorithmSettings(name="sisgf-convex", kind="sisgf", variant=Variant.CONVEX),
        "sisgf-sc": AlgorithmSettings(name="sisgf-sc", kind="sisgf", variant=Variant.STRONGLY_CONVEX),
        "sgf": AlgorithmSettings(name="sgf", kind="sgf"),
    }


def practical_batch_size(dim: int, budget: int) -> int:
    m = max(
        PRACTICAL_M_FLOOR,
        int(round(PRACTICAL_M_DIM_SQ * dim * dim)),
        budget // PRACTICAL_MAX_ITER_FRACTION,
    )
    return max(1, min(m, budget // 2))


def plan_sisgf(spec, settings: AlgorithmSettings, budget: Optional[int]) -> HyperParams:
    """Resolve (K, M) for the budget and build the schedule."""
    if settings.k is not None:
        k = settings.k
        m = settings.batch_m or formula_batch_size(spec, settings.variant, k, settings.sigma_sq)
        if budget is not None and 2 * k * m > budget:
            raise BudgetTooSmall(f"explicit K={k}, M={m} needs {2 * k * m} > budget {budget}")
    elif budget is None:
        raise ConfigError(f"algorithm {settings.name!r} needs either a budget or an explicit k")
    elif settings.mode == "theorem":
        k = choose_K_for_budget(spec, settings.variant, budget, sigma_sq=settings.sigma_sq)
        m = settings.batch_m or formula_batch_size(spec, settings.variant, k, settings.sigma_sq)
    else:
        m = settings.batch_m or practical_batch_size(spec.dim, budget)
        k = budget // (2 * m)
        if k < 1:
            raise BudgetTooSmall(f"budget {budget} below one iteration at M={m}")
    return make_schedule(
        spec,
        settings.variant,
        k,
        sigma_sq=settings.sigma_sq,
        batch_m=m,
        delta=settings.delta,
    )


@dataclass
class RepOutcome:
    gaps: Dict[str, float]
    queries: int
    invariant_violations: int
    planned: Dict[str, int]


def run_replication(
    problem, settings: AlgorithmSettings, budget: Optional[int], run_seed: int
) -> RepOutcome:
    """Run one algorithm once on one problem instance."""
    spec = problem.spec
    if settings.kind == "sisgf":
        params = plan_sisgf(spec, settings, budget)
        session = OracleSession(
            problem,
            run_seed,
            budget=budget,
            domain_slack=params.delta * spec.dim + 1e-9,
        )
        result, trace = algorithm.run(
            session, params, store_iterates=False, aos_fresh_samples=settings.aos_fresh
        )
        violations = algorithm.check_trajectory_invariants(trace, params, spec.radius_R)
        return RepOutcome(
            gaps={"randomized": result.gap_randomized, "aos": result.gap_aos},
            queries=result.queries_total,
            invariant_violations=violations,
            planned={"K": params.K, "M": params.M},
        )
    if settings.n_iterations is not None:
        params = baselines.sgf_default_params(spec, 2 * settings.n_iterations, d_tilde=settings.d_tilde)
    elif budget is not None:
        params = baselines.sgf_default_params(spec, budget, d_tilde=settings.d_tilde)
    else:
        raise ConfigError(f"algorithm {settings.name!r} needs either a budget or n_iterations")
    session = OracleSession(problem, run_seed, budget=budget, domain_slack=None)
    x_rand, x_avg, trace = baselines.sgf_run(session, params, backend=settings.backend)
    return RepOutcome(
        gaps={
            "randomized": problem.analytic_gap(x_rand),
            "average": problem.analytic_gap(x_avg),
        },
        queries=trace.queries_total,
        invariant_violations=0,
        planned={"N": params.n_iterations},
    )


@dataclass
class CellResult:
    dim: int
    budget: int
    algorithm: str
    strategy_gaps: Dict[str, np.ndarray]
    queries: int
    invariant_violations: int
    planned: Dict[str, int]


@dataclass
class ExperimentResult:
    dims: Tuple[int, ...]
    budgets: Tuple[int, ...]
    seed: int
    replications: int
    cells: Dict[Tuple[int, int, str], CellResult] = field(default_factory=dict)

    def gaps(self, dim: int, budget: int, algo: str, strategy: str) -> np.ndarray:
        return self.cells[(dim, budget, algo)].strategy_gaps[strategy]

    def median_gap(self, dim: int, budget: int, algo: str, strategy: str) -> float:
        return float(np.median(self.gaps(dim, budget, algo, strategy)))

    def _label(self, dim: int, budget: int) -> str:
        if len(self.budgets) == 1:
            return str(dim)
        if len(self.dims) == 1:
            return str(budget)
        return f"d{dim}|b{budget}"

    def to_csv_rows(self) -> List[Dict[str, str]]:
        rows = []
        for (dim, budget, algo) in sorted(self.cells):
            cell = self.cells[(dim, budget, algo)]
            for strategy in sorted(cell.strategy_gaps):
                gaps = cell.strategy_gaps[strategy]
                mean = float(np.mean(gaps))
                sd = float(np.std(gaps, ddof=1)) if len(gaps) > 1 else 0.0
                rows.append(
                    {
                        "dim_or_budget": self._label(dim, budget),
                        "algorithm": algo,
                        "output_strategy": strategy,
                        "mean_gap": f"{mean:.5e}",
                        "sd_gap": f"{sd:.5e}",
                        "replications": str(len(gaps)),
                        "queries": str(cell.queries),
                        "seed": str(self.seed),
                    }
                )
        return rows


def _problem_for(template: QuadraticProblemConfig, dim: int, seed: int):
    return generate_problem(replace(template, dim=dim, seed=seed))


def _task(template, dim, budget, settings, problem_seed, run_seed):
    problem = _problem_for(template, dim, seed=problem_seed)
    outcome = run_replication(problem, settings, budget or None, run_seed)
    return dim, budget, settings.name, outcome


def run_experiment(
    template: QuadraticProblemConfig,
    dims: Sequence[int],
    budgets: Sequence[int],
    algorithms: Sequence[AlgorithmSettings],
    replications: int,
    seed: int,
    jobs: int = 1,
) -> ExperimentResult:
    """Full grid of (dim, budget, algorithm, replication) runs.

    Problems are keyed by (dim, replication) so all algorithms and budgets
    of a cell row see the same ten instances; run streams are keyed by the
    full cell address.  The reduction is a deterministic fold over sorted
    keys, independent of completion order.
    """
    if replications < 1:
        raise ConfigError("replications must be >= 1", field="experiment.replications")
    dims = tuple(int(d) for d in dims)
    budgets = tuple(int(b) for b in budgets)
    names = [a.name for a in algorithms]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate algorithm names", field="experiment.algorithms")

    tasks = []
    for dim in dims:
        for budget in budgets:
            for settings in algorithms:
                for rep in range(replications):
                    problem_seed = derive_seed(seed, "problem", dim, rep)
                    run_seed = derive_seed(seed, "run-" + settings.name, dim, budget, rep)
                    tasks.append((template, dim, budget, settings, problem_seed, run_seed))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, *zip(*tasks), chunksize=1))
    else:
        # cache problems across algorithms/budgets within one process
        cache: Dict[Tuple[int, int], object] = {}
        outcomes = []
        for template_, dim, budget, settings, pseed, rseed in tasks:
            key = (dim, pseed)
            if key not in cache:
                cache[key] = _problem_for(template_, dim, pseed)
            outcomes.append(
                (dim, budget, settings.name, run_replication(cache[key], settings, budget or None, rseed))
            )

    result = ExperimentResult(dims=dims, budgets=budgets, seed=seed, replications=replications)
    by_name = {a.name: a for a in algorithms}
    grouped: Dict[Tuple[int, int, str], List[RepOutcome]] = {}
    for dim, budget, name, outcome in outcomes:
        grouped.setdefault((dim, budget, name), []).append(outcome)
    for key in sorted(grouped):
        reps = grouped[key]
        strategies = by_name[key[2]].strategies
        queries = {r.queries for r in reps}
        if len(queries) != 1:
            raise AssertionError(f"query counts differ across replications in cell {key}: {queries}")
        result.cells[key] = CellResult(
            dim=key[0],
            budget=key[1],
            algorithm=key[2],
            strategy_gaps={s: np.array([r.gaps[s] for r in reps]) for s in strategies},
            queries=queries.pop(),
            invariant_violations=sum(r.invariant_violations for r in reps),
            planned=reps[0].planned,
        )
    return result


def write_csv(rows: Sequence[Dict[str, str]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def csv_text(rows: Sequence[Dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"CSV {path} lacks columns {sorted(missing)}")
        return list(reader)


def _sort_key(label: str):
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def render_table(rows: Sequence[Dict[str, str]]) -> str:
    """Aligned pivot: one line per dim/budget, one column per algorithm-strategy."""
    columns = sorted({(r["algorithm"], r["output_strategy"]) for r in rows})
    labels = sorted({r["dim_or_budget"] for r in rows}, key=_sort_key)
    by_key = {(r["dim_or_budget"], r["algorithm"], r["output_strategy"]): r for r in rows}

    headers = ["dim/budget"] + [f"{a}:{s}" for a, s in columns]
    lines = []
    for label in labels:
        line = [label]
        for a, s in columns:
            row = by_key.get((label, a, s))
            line.append(f"{row['mean_gap']} ±{row['sd_gap']}" if row else "-")
        lines.append(line)

    widths = [max(len(h), *(len(line[i]) for line in lines)) if lines else len(h) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for line in lines:
        out.append("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(line)))
    return "\n".join(out)
