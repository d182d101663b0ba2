"""Outer inexact proximal point loop with pluggable inner solvers.

Each outer step replaces the exact prox by an estimate within delta_k, which
yields the approximate envelope gradient (x - z)/mu.  The loop stops once
both the gradient norm and the tolerance schedule are below target, or the
outer budget runs out.
"""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from . import envelope, psgm
from .core import (
    CertifiedResult,
    EvalCounter,
    GrowthModel,
    ProblemInstance,
    RunTrace,
    evaluate_objective,
)
from .errors import BudgetError


class InnerSolver:
    """Strategy for producing z with ||z - prox_mu^F(x)|| <= delta.

    exact           closed-form prox of the problem (test problems only).
    injected_noise  exact prox plus a deterministic perturbation of norm
                    exactly min(delta, noise) pointing away from the optimal
                    set, so recurrence tests know delta_k precisely.
    psgm            certified inner subgradient routine; the residual bound
                    fed to the budget formula is mu * ||previous approximate
                    gradient|| + previous delta (a valid over-estimate of the
                    unobservable ||z0 - prox||), R0 on the first call.

    A solver instance holds per-run state; give each run its own (or call
    ``reset``).
    """

    def __init__(self, strategy, noise=None, R0=1.0, alpha_cap=None, max_inner=10**7):
        if strategy not in ("exact_prox", "injected_noise", "psgm"):
            raise ValueError(f"unknown inner strategy {strategy!r}")
        self.strategy = strategy
        self.noise = noise
        self.R0 = float(R0)
        self.alpha_cap = alpha_cap
        self.max_inner = int(max_inner)
        self._prev_bound = None
        self._prev_mu = None

    @classmethod
    def exact(cls):
        return cls("exact_prox")

    @classmethod
    def injected(cls, noise=None):
        return cls("injected_noise", noise=noise)

    @classmethod
    def psgm_certified(cls, R0=1.0, alpha_cap=None, max_inner=10**7):
        return cls("psgm", R0=R0, alpha_cap=alpha_cap, max_inner=max_inner)

    def reset(self):
        self._prev_bound = None
        self._prev_mu = None

    def solve(self, p: ProblemInstance, x, mu, delta, counter=None, on_iterate=None):
        if self.strategy in ("exact_prox", "injected_noise"):
            if p.prox_F is None:
                raise ValueError(f"{self.strategy} inner solver needs an exact prox oracle")
            z = p.prox_F(np.asarray(x, dtype=float), mu)
            if counter is not None:
                counter.add(1)
            if self.strategy == "injected_noise":
                eps = delta if self.noise is None else min(self.noise, delta)
                z = z + eps * _away_direction(p, x)
            if on_iterate is not None:
                on_iterate(z, 0)
            return z

        # psgm: certified by iteration budget, not by measuring the prox.
        growth = p.growth
        if growth is not None:
            L_f, nu = growth.L_f, growth.nu
        elif p.subgrad_bound is not None:
            L_f, nu = p.subgrad_bound, 0.0
        else:
            L_f, nu = 1.0, 0.0
        alpha = psgm.stepsize_guard(mu, delta, L_f, nu)
        if self.alpha_cap is not None:
            alpha = min(alpha, self.alpha_cap)
        if self._prev_bound is None:
            dist0 = self.R0
        elif mu > self._prev_mu:
            # the residual bound stays valid under a larger smoothing after
            # rescaling: the envelope-gradient norm is nonincreasing in mu,
            # so ||x - prox_mu(x)|| <= (mu/mu_old)(mu_old ||g_old|| + delta_old)
            dist0 = self._prev_bound * (mu / self._prev_mu)
        else:
            dist0 = self._prev_bound
        budget = psgm.budget_for_delta(mu, alpha, dist0, delta)
        if budget.N > self.max_inner:
            raise BudgetError(
                f"certified inner budget {budget.N} exceeds max_inner {self.max_inner}",
                best=np.asarray(x, dtype=float),
            )
        z = psgm.psgm_run(p, x, x, alpha, mu, budget.N, counter=counter, on_iterate=on_iterate)
        self._prev_bound = float(np.linalg.norm(np.asarray(x) - z)) + delta
        self._prev_mu = mu
        return z


def _away_direction(p: ProblemInstance, x):
    """Deterministic unit vector pointing away from the optimal set at x."""
    x = np.asarray(x, dtype=float)
    if p.X_star_witness is not None:
        d = x - p.X_star_witness
        n = np.linalg.norm(d)
        if n > 0:
            return d / n
    e = np.zeros_like(x)
    e[0] = 1.0
    return e


def _normalize_schedule(delta_schedule):
    if callable(delta_schedule):
        return delta_schedule
    if np.isscalar(delta_schedule):
        v = float(delta_schedule)
        return lambda k: v
    seq = [float(d) for d in delta_schedule]
    last = seq[-1]
    return lambda k: seq[k] if k < len(seq) else last


def ippa_run(
    p: ProblemInstance,
    x0,
    mu: float,
    delta_schedule,
    epsilon: float,
    inner: InnerSolver,
    budget: int,
    growth: Optional[GrowthModel] = None,
    trace: Optional[RunTrace] = None,
    counter: Optional[EvalCounter] = None,
    epoch: int = 0,
    trace_every: int = 1,
    require_delta_condition: bool = True,
    clock_start: Optional[float] = None,
):
    """Outer loop: x <- (approx prox of x) until the stopping rule holds.

    The stopping rule requires ||(x - z)/mu|| <= epsilon and, unless
    ``require_delta_condition`` is off (restart epochs with constant
    tolerance), delta_k <= epsilon/mu.  Returns a CertifiedResult plus the
    RunTrace; a distance certificate is attached when ``growth`` is given
    and the certificate's guard holds.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    sched = _normalize_schedule(delta_schedule)
    x = p.check_point(x0).copy()
    trace = trace if trace is not None else RunTrace()
    counter = counter if counter is not None else EvalCounter()
    t0 = clock_start if clock_start is not None else time.monotonic()
    growth = growth if growth is not None else p.growth

    status = "budget_exhausted"
    gnorm = math.nan
    delta_k = sched(0)
    k = 0
    while True:
        delta_k = sched(k)
        recorder = _InnerRecorder(p, trace, epoch, k, counter, t0, trace_every)
        z = inner.solve(p, x, mu, delta_k, counter=counter, on_iterate=recorder)
        g_vec = (x - z) / mu
        gnorm = float(np.linalg.norm(g_vec))
        recorder.record_outer(z, gnorm, delta_k, mu, growth)
        if gnorm <= epsilon and (not require_delta_condition or delta_k <= epsilon / mu):
            status = "converged"
            break
        if k >= budget:
            break
        x = z
        k += 1

    dist_bound = math.nan
    if growth is not None:
        cert = envelope.certificate_from_norm(growth, gnorm, delta_k, mu)
        dist_bound = cert if cert is not None else math.nan
    result = CertifiedResult(
        point=x,
        grad_norm=gnorm,
        delta_at_exit=delta_k,
        dist_bound=dist_bound,
        status=status,
    )
    return result, trace


class _InnerRecorder:
    """Appends one trace row per inner iterate (subsampled by trace_every)."""

    def __init__(self, p, trace, epoch, outer_iter, counter, t0, trace_every):
        self.p = p
        self.trace = trace
        self.epoch = epoch
        self.outer_iter = outer_iter
        self.counter = counter
        self.t0 = t0
        self.trace_every = trace_every
        self.inner_count = 0

    def __call__(self, z, ell):
        self.inner_count = ell + 1
        if self.trace_every and (ell % self.trace_every == 0):
            self._append(z, ell)

    def record_outer(self, z, gnorm, delta, mu, growth):
        if self.trace_every == 0 or self.inner_count == 0 or (
            (self.inner_count - 1) % self.trace_every != 0
        ):
            dist = self.p.dist_to_witness(z)
            if math.isnan(dist) and growth is not None:
                cert = envelope.certificate_from_norm(growth, gnorm, delta, mu)
                dist = cert if cert is not None else math.nan
            self._append(z, max(self.inner_count - 1, 0), dist_override=dist)

    def _append(self, z, ell, dist_override=None):
        obj = evaluate_objective(self.p, z)
        dist = self.p.dist_to_witness(z) if dist_override is None else dist_override
        self.trace.append(
            epoch=self.epoch,
            outer_iter=self.outer_iter,
            inner_iter=ell,
            cum_subgrad_evals=self.counter.count,
            objective=obj,
            obj_error=self.p.obj_error(obj),
            dist_estimate=dist,
            wall_time_s=time.monotonic() - self.t0,
        )


def ippa_noise_robustness(
    p: ProblemInstance, x0, mu, delta_const, g: GrowthModel, max_iter=100_000
) -> int:
    """First k at which the noisy iteration reaches dist <= delta_const.

    Runs the outer loop with exactly-known constant injected noise; valid
    only in the sharp-minima regime with delta_const below mu sigma_F, where
    the iteration contracts by mu sigma_F - delta per step.
    """
    if g.gamma != 1.0:
        raise ValueError("noise robustness holds in the sharp-minima regime (gamma = 1)")
    if not delta_const < mu * g.sigma_F:
        raise ValueError("delta_const must be below mu * sigma_F")
    if p.X_star_witness is None:
        raise ValueError("needs a problem with a known optimal point")
    inner = InnerSolver.injected(noise=delta_const)
    x = p.check_point(x0).copy()
    for k in range(max_iter + 1):
        if p.dist_to_witness(x) <= delta_const:
            return k
        x = inner.solve(p, x, mu, delta_const)
    raise BudgetError(f"no iterate within {delta_const} after {max_iter} iterations", best=x)
