"""Flat key/value run configuration: parsing, validation, serialization.

The format is INI-style sections of ``key = value`` lines: a ``[problem]``
section, an ``[experiment]`` section, and one optional
``[algorithm.<name>]`` section per algorithm for overrides.  Values are
plain scalars or comma-separated lists; budgets accept scientific notation
(``6.4e7``).  Parsing is strict: unknown sections or keys are errors with
the offending field named, and exactly one of budget/budgets/k must be set.

``parse_config(serialize_config(cfg))`` reproduces ``cfg`` exactly, which
is what makes configs safe to archive next to their CSVs.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from .errors import ConfigError
from .experiment import AlgorithmSettings, default_algorithms
from .quadratic import QuadraticProblemConfig
from .schedule import Variant

_PROBLEM_KEYS = {
    "kind", "dim", "block_rho", "block_size", "n_nonzeros",
    "value_low", "value_high", "noise_std", "factory",
}
_EXPERIMENT_KEYS = {
    "budget", "budgets", "k", "dims", "replications", "seed", "algorithms", "output", "jobs",
}
_ALGORITHM_KEYS = {
    "kind", "variant", "mode", "batch_m", "k", "sigma_sq", "delta",
    "aos_fresh", "backend", "d_tilde", "n_iterations",
}


@dataclass(frozen=True)
class RunConfig:
    problem_kind: str
    problem: QuadraticProblemConfig
    factory: Optional[str]
    dims: Tuple[int, ...]
    budgets: Tuple[int, ...]
    k: Optional[int]
    replications: int
    seed: int
    jobs: int
    algorithms: Tuple[AlgorithmSettings, ...]
    output: Optional[str]


def _get(section, key, cast, default=None, field=""):
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except (TypeError, ValueError) as err:
        raise ConfigError(f"cannot parse {field or key} = {raw!r}: {err}", field=field or key) from None


def _as_int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(f"{raw} is not an integer")
    return int(value)


def _as_int_list(raw: str) -> Tuple[int, ...]:
    items = [s for s in (part.strip() for part in raw.split(",")) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(_as_int(item) for item in items)


def _as_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{raw!r} is not a boolean")


def _check_keys(section, allowed, section_name):
    for key in section:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in [{section_name}]", field=f"{section_name}.{key}"
            )


def _parse_algorithm(name: str, section: Dict[str, str]) -> AlgorithmSettings:
    field = f"algorithm.{name}"
    _check_keys(section, _ALGORITHM_KEYS, field)
    defaults = default_algorithms()
    base = defaults.get(name)
    kind = section.get("kind", base.kind if base else None)
    if kind is None:
        raise ConfigError(f"algorithm {name!r} needs an explicit kind", field=field)
    variant = section.get("variant", base.variant.value if base and base.variant else None)
    try:
        return AlgorithmSettings(
            name=name,
            kind=kind.strip(),
            variant=Variant(variant.strip()) if variant else None,
            mode=section.get("mode", "practical").strip(),
            batch_m=_get(section, "batch_m", _as_int, field=f"{field}.batch_m"),
            k=_get(section, "k", _as_int, field=f"{field}.k"),
            sigma_sq=_get(section, "sigma_sq", float, field=f"{field}.sigma_sq"),
            delta=_get(section, "delta", float, field=f"{field}.delta"),
            aos_fresh=_get(section, "aos_fresh", _as_bool, default=False, field=f"{field}.aos_fresh"),
            backend=section.get("backend", "auto").strip(),
            d_tilde=_get(section, "d_tilde", float, field=f"{field}.d_tilde"),
            n_iterations=_get(section, "n_iterations", _as_int, field=f"{field}.n_iterations"),
        )
    except ValueError as err:
        raise ConfigError(f"invalid settings for {name!r}: {err}", field=field) from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"config does not parse: {err}") from None

    known = {"problem", "experiment"}
    for section in parser.sections():
        if section not in known and not section.startswith("algorithm."):
            raise ConfigError(f"unknown section [{section}]", field=section)

    prob = dict(parser["problem"]) if parser.has_section("problem") else {}
    _check_keys(prob, _PROBLEM_KEYS, "problem")
    kind = prob.get("kind", "quadratic").strip()
    if kind not in ("quadratic", "external"):
        raise ConfigError(f"unknown problem kind {kind!r}", field="problem.kind")
    factory = prob.get("factory")
    if kind == "external" and not factory:
        raise ConfigError("external problems need factory = module:callable", field="problem.factory")
    dim = _get(prob, "dim", _as_int, default=256, field="problem.dim")
    try:
        template = QuadraticProblemConfig(
            dim=dim,
            block_rho=_get(prob, "block_rho", float, default=0.3, field="problem.block_rho"),
            block_size=_get(prob, "block_size", _as_int, default=100, field="problem.block_size"),
            n_nonzeros=_get(prob, "n_nonzeros", _as_int, default=3, field="problem.n_nonzeros"),
            value_low=_get(prob, "value_low", float, default=2.5, field="problem.value_low"),
            value_high=_get(prob, "value_high", float, default=4.0, field="problem.value_high"),
            noise_std=_get(prob, "noise_std", float, default=1.0, field="problem.noise_std"),
            seed=0,
        )
    except ValueError as err:
        raise ConfigError(f"invalid problem section: {err}", field="problem") from None

    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section", field="experiment")
    exp = dict(parser["experiment"])
    _check_keys(exp, _EXPERIMENT_KEYS, "experiment")

    budget = _get(exp, "budget", _as_int, field="experiment.budget")
    budgets = _get(exp, "budgets", _as_int_list, field="experiment.budgets")
    k = _get(exp, "k", _as_int, field="experiment.k")
    budget_specs = sum(x is not None for x in (budget, budgets, k))
    if budget_specs != 1:
        raise ConfigError(
            "exactly one of budget, budgets, or k must be set", field="experiment.budget"
        )
    if budget is not None:
        budgets = (budget,)
    if budgets is not None and any(b < 2 for b in budgets):
        raise ConfigError("budgets must be >= 2", field="experiment.budgets")
    if k is not None and k < 1:
        raise ConfigError("k must be >= 1", field="experiment.k")

    replications = _get(exp, "replications", _as_int, default=1, field="experiment.replications")
    if replications < 1:
        raise ConfigError("replications must be >= 1", field="experiment.replications")
    seed = _get(exp, "seed", _as_int, default=0, field="experiment.seed")
    jobs = _get(exp, "jobs", _as_int, default=1, field="experiment.jobs")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1", field="experiment.jobs")
    dims = _get(exp, "dims", _as_int_list, default=(dim,), field="experiment.dims")

    algo_names = [
        s for s in (part.strip() for part in exp.get("algorithms", "sisgf-sc, sgf").split(",")) if s
    ]
    if not algo_names:
        raise ConfigError("algorithms list is empty", field="experiment.algorithms")
    if len(set(algo_names)) != len(algo_names):
        raise ConfigError("duplicate algorithm names", field="experiment.algorithms")

    algorithms = []
    for name in algo_names:
        section_name = f"algorithm.{name}"
        section = dict(parser[section_name]) if parser.has_section(section_name) else {}
        if not section and name not in default_algorithms():
            raise ConfigError(
                f"algorithm {name!r} has no [algorithm.{name}] section and no default", field=section_name
            )
        settings = _parse_algorithm(name, section)
        if k is not None:
            if settings.kind == "sisgf" and settings.k is None:
                settings = _with(settings, k=k)
            if settings.kind == "sgf" and settings.n_iterations is None:
                settings = _with(settings, n_iterations=k)
        algorithms.append(settings)

    for section in parser.sections():
        if section.startswith("algorithm."):
            if section.split(".", 1)[1] not in algo_names:
                raise ConfigError(f"section [{section}] is not in the algorithms list", field=section)

    return RunConfig(
        problem_kind=kind,
        problem=template,
        factory=factory.strip() if factory else None,
        dims=dims,
        budgets=budgets if budgets is not None else (),
        k=k,
        replications=replications,
        seed=seed,
        jobs=jobs,
        algorithms=tuple(algorithms),
        output=(exp.get("output") or "").strip() or None,
    )


def _with(settings: AlgorithmSettings, **kw) -> AlgorithmSettings:
    return replace(settings, **kw)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(t))) == parse(t)."""
    out = configparser.ConfigParser(interpolation=None)
    out["problem"] = {
        "kind": cfg.problem_kind,
        "dim": str(cfg.problem.dim),
        "block_rho": repr(cfg.problem.block_rho),
        "block_size": str(cfg.problem.block_size),
        "n_nonzeros": str(cfg.problem.n_nonzeros),
        "value_low": repr(cfg.problem.value_low),
        "value_high": repr(cfg.problem.value_high),
        "noise_std": repr(cfg.problem.noise_std),
    }
    if cfg.factory:
        out["problem"]["factory"] = cfg.factory
    exp = {
        "dims": ", ".join(str(d) for d in cfg.dims),
        "replications": str(cfg.replications),
        "seed": str(cfg.seed),
        "jobs": str(cfg.jobs),
        "algorithms": ", ".join(a.name for a in cfg.algorithms),
    }
    if cfg.k is not None:
        exp["k"] = str(cfg.k)
    else:
        exp["budgets"] = ", ".join(str(b) for b in cfg.budgets)
    if cfg.output:
        exp["output"] = cfg.output
    out["experiment"] = exp

    for a in cfg.algorithms:
        section = {"kind": a.kind, "mode": a.mode, "backend": a.backend}
        if a.variant is not None:
            section["variant"] = a.variant.value
        if a.batch_m is not None:
            section["batch_m"] = str(a.batch_m)
        if a.k is not None:
            section["k"] = str(a.k)
        if a.sigma_sq is not None:
            section["sigma_sq"] = repr(a.sigma_sq)
        if a.delta is not None:
            section["delta"] = repr(a.delta)
        if a.aos_fresh:
            section["aos_fresh"] = "true"
        if a.d_tilde is not None:
            section["d_tilde"] = repr(a.d_tilde)
        if a.n_iterations is not None:
            section["n_iterations"] = str(a.n_iterations)
        out[f"algorithm.{a.name}"] = section

    buf = io.StringIO()
    out.write(buf)
    return buf.getvalue()
