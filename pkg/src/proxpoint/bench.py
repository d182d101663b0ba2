"""Benchmark harness: experiment configs, solver matrix runs, CSV traces.

One experiment per config file.  The harness builds the problem instance,
runs every configured solver on it, writes one trace CSV per (recipe,
solver) cell plus a summary CSV, and is deterministic given the seed (wall
times excluded).  Independent cells may run in parallel; each owns its
trace and counter.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import problems, proxlib
from .core import EvalCounter, RunTrace, evaluate_objective
from .errors import BudgetError
from .ippa import InnerSolver, ippa_run
from .rippa import ripp_psgm_run, rippa_run

SOLVER_KINDS = ("ripp_psgm", "rippa_exact", "ippa", "ppa_exact", "baseline_subgradient")

SUMMARY_COLUMNS = (
    "recipe",
    "solver",
    "total_inner_iters",
    "total_evals",
    "final_obj_error",
    "wall_time_s",
)


class ConfigError(ValueError):
    pass


@dataclass
class SolverSpec:
    kind: str
    label: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    name: str
    recipe: problems.ProblemRecipe
    solvers: list
    target_error: float = 0.5
    output_dir: str = "results"
    parallel: int = 1
    trace_every: int = 1
    stop_on_target: bool = True
    reference_budget: int = 100_000

    def __post_init__(self):
        if not self.solvers:
            raise ConfigError("experiment needs at least one solver section")
        if not self.target_error > 0:
            raise ConfigError("target_error must be positive")


def _typed(value: str):
    low = value.strip().lower()
    if low in ("true", "false", "yes", "no"):
        return low in ("true", "yes")
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value.strip()


def parse_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        read = cp.read(path)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if "problem" not in cp:
        raise ConfigError(f"{path}: missing [problem] section")

    prob = {k: _typed(v) for k, v in cp["problem"].items()}
    try:
        recipe = problems.ProblemRecipe(**prob)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: [problem] {e}") from e

    exp = {k: _typed(v) for k, v in cp["experiment"].items()} if "experiment" in cp else {}
    name = exp.pop("name", Path(path).stem)

    solvers = []
    for section in cp.sections():
        if not section.startswith("solver:"):
            continue
        head = section.split(":", 1)[1].strip()
        kind, _, label = head.partition(" ")
        if kind not in SOLVER_KINDS:
            raise ConfigError(f"{path}: [{section}] unknown solver kind {kind!r}")
        params = {k: _typed(v) for k, v in cp[section].items()}
        label = params.pop("label", label.strip() or kind)
        solvers.append(SolverSpec(kind=kind, label=label, params=params))

    try:
        return ExperimentConfig(name=name, recipe=recipe, solvers=solvers, **exp)
    except (TypeError, ConfigError) as e:
        raise ConfigError(f"{path}: [experiment] {e}") from e


def baseline_subgradient(
    p,
    x0,
    step0,
    decay,
    budget,
    trace=None,
    counter=None,
    target_error=None,
    trace_every=1,
):
    """Projected subgradient comparator with decaying step step0/(1 + decay k).

    The psi part is handled by its prox at the current step (projection for
    indicator constraints, identity when psi = 0).
    """
    if not step0 > 0:
        raise ValueError("step0 must be positive")
    if decay < 0:
        raise ValueError("decay must be nonnegative")
    trace = trace if trace is not None else RunTrace()
    counter = counter if counter is not None else EvalCounter()
    t0 = time.monotonic()
    x = p.check_point(x0).copy()
    last_recorded = -1

    def record(z, k, obj):
        nonlocal last_recorded
        if counter.count == last_recorded:
            return
        last_recorded = counter.count
        trace.append(
            epoch=0,
            outer_iter=k,
            inner_iter=0,
            cum_subgrad_evals=counter.count,
            objective=obj,
            obj_error=p.obj_error(obj),
            dist_estimate=p.dist_to_witness(z),
            wall_time_s=time.monotonic() - t0,
        )

    best = evaluate_objective(p, x)
    record(x, 0, best)  # starting point, before any oracle call
    k = 0
    for k in range(1, budget + 1):
        step = step0 / (1.0 + decay * (k - 1))
        g = p.f_subgrad(x)
        counter.add(1)
        v = x - step * g
        x = proxlib.prox(p.psi, v, step) if p.psi.kind != "zero" else v
        obj = evaluate_objective(p, x)
        best = min(best, obj)
        if trace_every and k % trace_every == 0:
            record(x, k, obj)
        if target_error is not None and p.obj_error(best) <= target_error:
            break
    record(x, k, evaluate_objective(p, x))
    trace.meta["best_objective"] = best
    return x, trace


def _default_x0(p):
    return np.zeros(p.dim)


def _run_solver(p, spec: SolverSpec, cfg: ExperimentConfig, trace=None):
    """Run one (recipe, solver) cell; returns the trace."""
    x0 = _default_x0(p)
    if trace is None:
        trace = RunTrace(meta={"solver": spec.label, "recipe": p.name})
    counter = EvalCounter()
    params = dict(spec.params)
    target = cfg.target_error if cfg.stop_on_target else None
    L_f = params.pop("l_f", p.subgrad_bound or 1.0)

    if spec.kind == "ripp_psgm":
        mu0 = params.pop("mu0", 0.1)
        delta0 = params.pop("delta0", 2.0 * L_f)
        rho = params.pop("rho", 1.005)
        q = params.pop("q", 2.0 * rho - 1.0)
        T = int(params.pop("epochs", 9))
        _reject_extras(spec, params)
        ripp_psgm_run(
            p, x0, delta0, mu0, rho, q, L_f, T,
            target_error=target, trace=trace, counter=counter,
            trace_every=cfg.trace_every,
        )
    elif spec.kind == "rippa_exact":
        mu0 = params.pop("mu0", 1.0)
        delta0 = params.pop("delta0", 1.0)
        rho = params.pop("rho", 1.5)
        T = int(params.pop("epochs", 20))
        epsilon = params.pop("epsilon", 1e-8)
        _reject_extras(spec, params)
        rippa_run(
            p, x0, mu0, delta0, rho, epsilon, InnerSolver.exact(), T,
            trace=trace, counter=counter, trace_every=cfg.trace_every,
        )
    elif spec.kind == "ippa":
        mu = params.pop("mu", 1.0)
        delta0 = params.pop("delta0", 1.0)
        halving = params.pop("halving", True)
        epsilon = params.pop("epsilon", 1e-6)
        budget = int(params.pop("budget", 1000))
        strategy = params.pop("inner", "psgm")
        _reject_extras(spec, params)
        sched = (lambda k: delta0 * 0.5**k) if halving else delta0
        inner = (
            InnerSolver.exact()
            if strategy in ("exact", "exact_prox")
            else InnerSolver.psgm_certified(R0=max(1.0, float(np.linalg.norm(x0)) + 1.0))
        )
        ippa_run(
            p, x0, mu, sched, epsilon, inner, budget,
            trace=trace, counter=counter, trace_every=cfg.trace_every,
        )
    elif spec.kind == "ppa_exact":
        mu = params.pop("mu", 1.0)
        epsilon = params.pop("epsilon", 1e-10)
        budget = int(params.pop("budget", 100_000))
        _reject_extras(spec, params)
        ippa_run(
            p, x0, mu, 0.0, epsilon, InnerSolver.exact(), budget,
            trace=trace, counter=counter, trace_every=cfg.trace_every,
        )
    elif spec.kind == "baseline_subgradient":
        step0 = params.pop("step0", 1.0)
        decay = params.pop("decay", 0.01)
        budget = int(params.pop("budget", 100_000))
        _reject_extras(spec, params)
        baseline_subgradient(
            p, x0, step0, decay, budget,
            trace=trace, counter=counter, target_error=target,
            trace_every=cfg.trace_every,
        )
    else:
        raise ConfigError(f"unknown solver kind {spec.kind!r}")
    return trace


def _reject_extras(spec, params):
    if params:
        raise ConfigError(f"[solver:{spec.kind}] unknown fields {sorted(params)}")


def ensure_reference(p, cfg: ExperimentConfig):
    """Attach a reference optimum when no planted one exists.

    Long high-accuracy comparator run: ten times tighter target, fifty times
    the budget.  The value lands in the trace metadata of every cell.
    """
    if p.F_star is not None:
        return p.F_star
    _, trace = baseline_subgradient(
        p,
        _default_x0(p),
        step0=1.0 / max(p.subgrad_bound or 1.0, 1.0),
        decay=0.05,
        budget=cfg.reference_budget,
        trace_every=0,
    )
    p.F_star = trace.meta["best_objective"]
    return p.F_star


def run_experiment(cfg: ExperimentConfig, output_dir=None, parallel=None):
    """Run the solver matrix; returns summary rows and writes the CSVs."""
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = problems.build(cfg.recipe)
    ensure_reference(p, cfg)

    workers = parallel or int(os.environ.get("BENCH_THREADS", 0)) or cfg.parallel
    jobs = [(spec, problems.build(cfg.recipe)) for spec in cfg.solvers]
    for _, pj in jobs:
        pj.F_star = p.F_star

    def cell(job):
        spec, pj = job
        started = time.monotonic()
        trace = RunTrace(meta={"solver": spec.label, "recipe": pj.name})
        try:
            _run_solver(pj, spec, cfg, trace=trace)
            err = None
        except (BudgetError, ValueError, ConfigError) as e:
            err = str(e)  # partial trace rows survive for post-mortem
        wall = time.monotonic() - started
        return spec, trace, err, wall

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(cell, jobs))
    else:
        results = [cell(j) for j in jobs]

    summary = []
    for spec, trace, err, wall in results:
        path = out / f"{cfg.name}__{spec.label}.csv"
        trace.write_csv(path)
        summary.append(
            {
                # keyed by the experiment name so `summarize` reproduces it
                "recipe": cfg.name,
                "solver": spec.label,
                "total_inner_iters": trace.total_evals,
                "total_evals": trace.total_evals,
                "final_obj_error": trace.best_obj_error,
                "wall_time_s": wall,
                "_error": err,
            }
        )
    write_summary(out / f"{cfg.name}__summary.csv", summary)
    failures = [(s["solver"], s["_error"]) for s in summary if s["_error"]]
    if failures:
        with open(out / f"{cfg.name}__errors.txt", "w") as f:
            for label, msg in failures:
                f.write(f"{label}: {msg}\n")
    return summary


def write_summary(path, rows, extra_columns=()):
    cols = tuple(extra_columns) + SUMMARY_COLUMNS
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c, math.nan)) for c in cols])


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def set_by_path(cfg: ExperimentConfig, param: str, value):
    """Override fields by path: 'problem.<field>' or 'solver:<kind>.<field>'.

    A comma-separated list of paths sets the same value on each, which is
    how tied sweeps like m = n are expressed.
    """
    if "," in param:
        for sub in param.split(","):
            set_by_path(cfg, sub.strip(), value)
        return
    section, _, key = param.partition(".")
    if not key:
        raise ConfigError(f"sweep parameter {param!r} must look like section.field")
    if section == "problem":
        if not hasattr(cfg.recipe, key):
            raise ConfigError(f"[problem] has no field {key!r}")
        cfg.recipe = dataclasses.replace(cfg.recipe, **{key: value})
        return
    if section.startswith("solver:"):
        kind = section.split(":", 1)[1]
        hits = [s for s in cfg.solvers if s.kind == kind or s.label == kind]
        if not hits:
            raise ConfigError(f"no solver section matches {section!r}")
        for s in hits:
            s.params[key] = value
        return
    raise ConfigError(f"unknown sweep section {section!r}")


def run_sweep(cfg: ExperimentConfig, param: str, values, output_dir=None, parallel=None):
    """Re-run the experiment once per value of the swept parameter."""
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for v in values:
        tag = "+".join(q.split(".")[-1] for q in param.split(","))
        sub = ExperimentConfig(
            name=f"{cfg.name}__{tag}={v:g}" if isinstance(v, float)
            else f"{cfg.name}__{tag}={v}",
            recipe=cfg.recipe,
            solvers=[SolverSpec(s.kind, s.label, dict(s.params)) for s in cfg.solvers],
            target_error=cfg.target_error,
            output_dir=str(out),
            parallel=cfg.parallel,
            trace_every=cfg.trace_every,
            stop_on_target=cfg.stop_on_target,
            reference_budget=cfg.reference_budget,
        )
        set_by_path(sub, param, v)
        for r in run_experiment(sub, output_dir=out, parallel=parallel):
            rows.append({"sweep_param": param, "sweep_value": v, **r})
    write_summary(out / f"{cfg.name}__sweep.csv", rows, extra_columns=("sweep_param", "sweep_value"))
    return rows


def summarize_dir(directory):
    """Rebuild summary rows from the trace CSVs found in a directory."""
    rows = []
    for path in sorted(Path(directory).glob("*.csv")):
        if path.name.endswith("summary.csv") or path.name.endswith("sweep.csv"):
            continue
        try:
            trace = RunTrace.read_csv(path)
        except ValueError:
            continue
        stem = path.stem
        recipe, _, solver = stem.rpartition("__")
        recipe = recipe or stem
        last = trace.rows[-1] if trace.rows else None
        rows.append(
            {
                "recipe": recipe,
                "solver": solver or stem,
                "total_inner_iters": trace.total_evals,
                "total_evals": trace.total_evals,
                "final_obj_error": last.best_obj_error_so_far if last else math.nan,
                "wall_time_s": last.wall_time_s if last else math.nan,
            }
        )
    return rows
