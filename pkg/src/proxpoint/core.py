"""Shared domain types: problems, growth certificates, configs, run traces.

The objective is always the split ``F = f + psi`` where ``f`` is convex with
a subgradient oracle and ``psi`` comes from :mod:`proxpoint.proxlib`.  All
types are immutable after construction except :class:`RunTrace`, which is
owned by exactly one solver run.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import proxlib
from .errors import ContractError

Array = np.ndarray


@dataclass(frozen=True)
class GrowthModel:
    """Growth certificate F(x) - F* >= sigma_F * dist(x, X*)^gamma.

    ``nu`` and ``L_f`` describe the smoothness of f: ||f'(x) - f'(y)|| <=
    L_f ||x - y||^nu, with nu = 0 meaning bounded subgradients of norm L_f.
    """

    gamma: float
    sigma_F: float
    nu: float = 0.0
    L_f: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ValueError("gamma must be >= 1")
        if not self.sigma_F > 0:
            raise ValueError("sigma_F must be positive")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")
        if not self.L_f > 0:
            raise ValueError("L_f must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """All tunables of the solver family in one bag."""

    mu0: float = 1.0
    delta0: float = 1.0
    rho: float = 1.5
    q: float = 2.0
    alpha0: float = 0.5
    epsilon: float = 1e-6
    max_outer: int = 10_000
    max_inner: int = 1_000_000
    max_epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        for name in ("mu0", "delta0", "alpha0", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer", "max_inner", "max_epochs"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class ProblemInstance:
    """Objective split F = f + psi with oracles.

    f_value / f_subgrad evaluate f and one element of its subdifferential.
    ``psi`` selects the proximable/indicator part; fold a non-proximable
    regularizer into f via its subgradient and leave psi zero or an
    indicator.

    Optional extras used by tests and benchmarks: a known optimal value
    ``F_star``, an optimal point ``X_star_witness``, an exact prox oracle
    ``prox_F(x, mu)`` for the full objective (closed-form test problems
    only), and a growth certificate.
    """

    dim: int
    f_value: Callable[[Array], float]
    f_subgrad: Callable[[Array], Array]
    psi: proxlib.ProxSpec = proxlib.ZERO
    F_star: Optional[float] = None
    X_star_witness: Optional[Array] = None
    prox_F: Optional[Callable[[Array, float], Array]] = None
    growth: Optional[GrowthModel] = None
    subgrad_bound: Optional[float] = None
    name: str = ""
    data: Optional[dict] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        self.psi.check_dim(self.dim)
        if self.X_star_witness is not None:
            w = np.asarray(self.X_star_witness, dtype=float).reshape(-1)
            if w.size != self.dim:
                raise ValueError("witness dimension mismatch")
            self.X_star_witness = w

    @property
    def psi_kind(self):
        if self.psi.kind == "zero":
            return "zero"
        return "indicator" if self.psi.is_indicator else "proximable"

    def check_point(self, x) -> Array:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise ValueError(f"point has dimension {x.size}, expected {self.dim}")
        return x

    def dist_to_witness(self, x):
        """||x - X_star_witness||; NaN when no witness is known."""
        if self.X_star_witness is None:
            return math.nan
        x = self.check_point(x)
        return float(np.linalg.norm(x - self.X_star_witness))

    def obj_error(self, value):
        return value - self.F_star if self.F_star is not None else math.nan


def evaluate_objective(p: ProblemInstance, x) -> float:
    """F(x) = f(x) + psi(x); +inf at infeasible indicator points."""
    x = p.check_point(x)
    psi = proxlib.psi_value(p.psi, x)
    if psi == np.inf:
        return math.inf
    return float(p.f_value(x)) + psi


TRACE_COLUMNS = (
    "epoch",
    "outer_iter",
    "inner_iter",
    "cum_subgrad_evals",
    "objective",
    "obj_error",
    "dist_estimate",
    "best_obj_error_so_far",
    "wall_time_s",
)

_INT_COLUMNS = ("epoch", "outer_iter", "inner_iter", "cum_subgrad_evals")


@dataclass
class TraceRow:
    epoch: int
    outer_iter: int
    inner_iter: int
    cum_subgrad_evals: int
    objective: float
    obj_error: float = math.nan
    dist_estimate: float = math.nan
    best_obj_error_so_far: float = math.nan
    wall_time_s: float = 0.0

    def astuple(self):
        return tuple(getattr(self, c) for c in TRACE_COLUMNS)


class RunTrace:
    """Per-inner-iteration record of one solver run.

    ``cum_subgrad_evals`` must be strictly increasing across rows and
    ``best_obj_error_so_far`` is maintained as the running minimum of the
    recorded objective errors (NaN rows do not reset it).
    """

    def __init__(self, meta=None):
        self.rows: list[TraceRow] = []
        self.meta = dict(meta or {})
        self._best = math.nan

    def __len__(self):
        return len(self.rows)

    @property
    def total_evals(self):
        return self.rows[-1].cum_subgrad_evals if self.rows else 0

    @property
    def best_obj_error(self):
        return self._best

    def append(
        self,
        epoch,
        outer_iter,
        inner_iter,
        cum_subgrad_evals,
        objective,
        obj_error=math.nan,
        dist_estimate=math.nan,
        wall_time_s=0.0,
    ):
        if self.rows and cum_subgrad_evals <= self.rows[-1].cum_subgrad_evals:
            raise ContractError(
                f"cum_subgrad_evals must be strictly increasing "
                f"({cum_subgrad_evals} after {self.rows[-1].cum_subgrad_evals})"
            )
        if not math.isnan(obj_error):
            self._best = obj_error if math.isnan(self._best) else min(self._best, obj_error)
        row = TraceRow(
            int(epoch),
            int(outer_iter),
            int(inner_iter),
            int(cum_subgrad_evals),
            float(objective),
            float(obj_error),
            float(dist_estimate),
            self._best,
            float(wall_time_s),
        )
        self.rows.append(row)
        return row

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for row in self.rows:
                w.writerow([_format_cell(v) for v in row.astuple()])

    @staticmethod
    def read_csv(path):
        trace = RunTrace()
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r)
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header {header!r}")
            for rec in r:
                vals = [
                    float(v) if v != "" else math.nan
                    for v in rec
                ]
                row = TraceRow(
                    *(int(vals[i]) for i in range(4)),
                    *(vals[i] for i in range(4, 9)),
                )
                trace.rows.append(row)
                if not math.isnan(row.best_obj_error_so_far):
                    trace._best = row.best_obj_error_so_far
        return trace


def _format_cell(v):
    if isinstance(v, int):
        return str(v)
    if math.isnan(v):
        return ""
    return repr(float(v))


def record_trace_row(trace: RunTrace, row) -> RunTrace:
    """Append a row (mapping or TraceRow-like tuple of named fields)."""
    if isinstance(row, TraceRow):
        fields = {c: getattr(row, c) for c in TRACE_COLUMNS}
    else:
        fields = dict(row)
    fields.pop("best_obj_error_so_far", None)
    trace.append(**fields)
    return trace


class EvalCounter:
    """Counts subgradient-oracle evaluations of a single run."""

    def __init__(self):
        self.count = 0

    def add(self, n=1):
        self.count += int(n)
        return self.count


@dataclass
class CertifiedResult:
    """Exit state of an outer solve.

    ``dist_bound`` is the distance certificate when one applies, NaN
    otherwise.  ``grad_norm`` is the approximate envelope-gradient norm at
    the exit point and ``delta_at_exit`` the matching prox tolerance.
    """

    point: Array
    grad_norm: float
    delta_at_exit: float
    dist_bound: float = math.nan
    status: str = "converged"

    def __post_init__(self):
        if self.status not in ("converged", "budget_exhausted"):
            raise ValueError(f"unknown status {self.status!r}")
