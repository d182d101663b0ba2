"""Restarted outer loops: geometric parameter schedules around the inexact
proximal iteration, and the fully composed restarted subgradient solver with
its sharp-minima postprocessing phase.

The restart schedule doubles the smoothing and shrinks the gradient-level
tolerance by 2^-rho each epoch; the composed solver additionally decays the
inner stepsize by 2^-q and grows the inner budget by 2^(q+1) (the budget
recursion follows the growing schedule the epoch-count analysis certifies;
see the README note on the schedule direction).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import psgm
from .core import (
    CertifiedResult,
    EvalCounter,
    GrowthModel,
    ProblemInstance,
    RunTrace,
    evaluate_objective,
)
from .errors import BudgetError
from .ippa import InnerSolver, ippa_run

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochState:
    """Per-epoch parameters of the restarted loops.

    ``delta_grad_t`` is the gradient-level tolerance, ``delta_t`` the
    absolute prox tolerance mu_t * delta_grad_t.  ``alpha_t`` / ``N_t`` only
    apply to the composed subgradient variant.
    """

    t: int
    mu_t: float
    delta_grad_t: float
    delta_t: float
    alpha_t: float = math.nan
    N_t: float = math.nan


def epoch_schedule(t, mu0, delta0, rho, q=None, alpha0=None, N0=None) -> EpochState:
    """Closed-form epoch parameters: mu doubles, tolerances shrink by 2^-rho."""
    mu_t = mu0 * 2.0**t
    dgrad = delta0 * 2.0 ** (-rho * t)
    alpha_t = alpha0 * 2.0 ** (-q * t) if alpha0 is not None else math.nan
    N_t = N0 * 2.0 ** ((q + 1.0) * t) if N0 is not None else math.nan
    return EpochState(t, mu_t, dgrad, mu_t * dgrad, alpha_t, N_t)


def rippa_run(
    p: ProblemInstance,
    x0,
    mu0,
    delta0,
    rho,
    epsilon,
    inner: InnerSolver,
    max_epochs: int,
    growth: Optional[GrowthModel] = None,
    max_outer_per_epoch: int = 100_000,
    trace: Optional[RunTrace] = None,
    counter: Optional[EvalCounter] = None,
    trace_every: int = 1,
    epoch_log: Optional[list] = None,
):
    """Restarted outer loop: each epoch runs the inexact proximal iteration
    at constant tolerance delta_t until the gradient target 5 delta_grad_t,
    then rescales (mu, delta) geometrically.

    Stops once the distance certificate (when a growth model is available)
    drops to ``epsilon``, else after ``max_epochs``.  The per-epoch stopping
    is the gradient-norm target alone; the tolerance condition of the plain
    loop is waived because delta_k is constant inside an epoch.
    """
    if not rho > 1:
        raise ValueError("rho must exceed 1")
    if not (mu0 > 0 and delta0 > 0):
        raise ValueError("mu0 and delta0 must be positive")
    x = p.check_point(x0).copy()
    trace = trace if trace is not None else RunTrace()
    counter = counter if counter is not None else EvalCounter()
    growth = growth if growth is not None else p.growth
    t0 = time.monotonic()

    result = None
    inner.reset()  # fresh residual-bound state; it then carries across epochs
    for t in range(max_epochs):
        st = epoch_schedule(t, mu0, delta0, rho)
        result, trace = ippa_run(
            p,
            x,
            st.mu_t,
            st.delta_t,
            epsilon=5.0 * st.delta_grad_t,
            inner=inner,
            budget=max_outer_per_epoch,
            growth=growth,
            trace=trace,
            counter=counter,
            epoch=t,
            trace_every=trace_every,
            require_delta_condition=False,
            clock_start=t0,
        )
        x = result.point
        if epoch_log is not None:
            epoch_log.append((st, result))
        if growth is not None and not math.isnan(result.dist_bound):
            if result.dist_bound <= epsilon:
                return (
                    CertifiedResult(x, result.grad_norm, result.delta_at_exit,
                                    result.dist_bound, "converged"),
                    trace,
                )
    final = CertifiedResult(
        x,
        result.grad_norm if result else math.nan,
        result.delta_at_exit if result else math.nan,
        result.dist_bound if result else math.nan,
        "budget_exhausted",
    )
    return final, trace


def ripp_psgm_run(
    p: ProblemInstance,
    x0,
    delta0,
    mu0,
    rho,
    q,
    L_f,
    T,
    nu: float = 0.0,
    max_inner: int = 10**7,
    max_blocks_per_epoch: int = 10_000,
    target_error: Optional[float] = None,
    trace: Optional[RunTrace] = None,
    counter: Optional[EvalCounter] = None,
    trace_every: int = 1,
    epoch_log: Optional[list] = None,
):
    """Composed restarted solver: T epochs of fixed-budget inner subgradient
    blocks, re-anchored at each block, until consecutive block outputs move
    by at most mu_t * delta_t.

    Returns ``(x_T, delta_T, trace)``.  ``delta0`` is the gradient-level
    tolerance (the movement guard uses the absolute mu_t * delta_t).  The
    first block always runs twice before the movement guard is evaluated.
    ``target_error`` stops the run early once the recorded objective error
    falls below it (benchmark protocol).
    """
    if not rho > 1:
        raise ValueError("rho must exceed 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    if not (mu0 > 0 and delta0 > 0 and L_f > 0):
        raise ValueError("mu0, delta0, L_f must be positive")
    x = p.check_point(x0).copy()
    trace = trace if trace is not None else RunTrace()
    counter = counter if counter is not None else EvalCounter()
    t0 = time.monotonic()

    alpha_guard = psgm.stepsize_guard(mu0, mu0 * delta0, L_f, nu)
    alpha = min(mu0 / 2.0, alpha_guard)
    if alpha < mu0 / 2.0:
        log.info("inner stepsize guard binds: alpha0 = %.3g < mu0/2 = %.3g", alpha, mu0 / 2.0)
    N_real = max(8.0 * math.log(L_f / delta0) + 1.0, rho - 1.0, 1.0)

    mu_t, dgrad_t = mu0, delta0
    for t in range(T):
        move_tol = mu_t * dgrad_t
        N = math.ceil(N_real)
        if N > max_inner:
            raise BudgetError(f"inner budget {N} exceeds max_inner {max_inner}", best=x)
        recorder = _BlockRecorder(p, trace, t, counter, t0, trace_every)
        # rolling window (a, b, c) of the last three block outputs; the guard
        # compares the two outputs preceding the freshest one, as the do-while
        # counter reads them, and returns the middle point on exit
        b, c = None, x
        k = 0
        while True:
            recorder.outer = k
            a, b = b, c
            c = psgm.psgm_run(p, c, c, alpha, mu_t, N, counter=counter,
                              on_iterate=recorder)
            recorder.block_end(c, N - 1)
            k += 1
            if k >= 2 and float(np.linalg.norm(b - a)) <= move_tol:
                x = b
                break
            if target_error is not None and trace.best_obj_error <= target_error:
                x = c
                break
            if k >= max_blocks_per_epoch:
                raise BudgetError(
                    f"epoch {t}: {k} blocks without meeting the movement guard", best=c
                )
        if epoch_log is not None:
            epoch_log.append(EpochState(t, mu_t, dgrad_t, mu_t * dgrad_t, alpha, N_real))
        if target_error is not None and trace.best_obj_error <= target_error:
            return x, dgrad_t, trace
        alpha *= 2.0 ** (-q)
        N_real *= 2.0 ** (q + 1.0)
        mu_t *= 2.0
        dgrad_t *= 2.0 ** (-rho)
    return x, dgrad_t, trace


class _BlockRecorder:
    """Trace hook shared by the inner blocks of one run."""

    def __init__(self, p, trace, epoch, counter, t0, trace_every):
        self.p = p
        self.trace = trace
        self.epoch = epoch
        self.counter = counter
        self.t0 = t0
        self.trace_every = trace_every
        self.outer = 0
        self.last_evals = trace.rows[-1].cum_subgrad_evals if trace.rows else -1

    def __call__(self, z, ell):
        if not self.trace_every or ell % self.trace_every:
            return
        self._append(z, ell)

    def block_end(self, z, ell):
        # one row per block regardless of subsampling, so totals and the
        # early-stop check stay live even with sparse tracing
        if self.counter.count != self.last_evals:
            self._append(z, ell)

    def _append(self, z, ell):
        obj = evaluate_objective(self.p, z)
        self.last_evals = self.counter.count
        self.trace.append(
            epoch=self.epoch,
            outer_iter=self.outer,
            inner_iter=ell,
            cum_subgrad_evals=self.counter.count,
            objective=obj,
            obj_error=self.p.obj_error(obj),
            dist_estimate=self.p.dist_to_witness(z),
            wall_time_s=time.monotonic() - self.t0,
        )


def postprocess(p: ProblemInstance, x0, beta0, mu, N, K, counter=None, trace_hook=None):
    """K fixed-budget inner calls with halving stepsize.

    Each call re-anchors at the current point; in the sharp-minima regime
    every halving of the stepsize halves the certified distance bound.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if N < 1:
        raise ValueError("N must be >= 1")
    if not beta0 > 0:
        raise ValueError("beta0 must be positive")
    x = p.check_point(x0).copy()
    beta = float(beta0)
    for _ in range(K):
        x = psgm.psgm_run(p, x, x, beta, mu, N, counter=counter, on_iterate=trace_hook)
        beta /= 2.0
    return x


def predict_epoch_count(g: GrowthModel, mu0, delta0, rho, epsilon, r0) -> int:
    """Predicted number of restart epochs to reach dist <= epsilon.

    Explicit per-regime formulas with constant 1 (natural logs); ``r0`` is
    the initial distance feeding K0 = ceil(r0 / (mu0 delta0)).
    """
    if g.gamma < 1:
        raise ValueError("gamma must be >= 1")
    if not rho > 1:
        raise ValueError("rho must exceed 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    K0 = max(1, math.ceil(r0 / (mu0 * delta0)))
    gamma = g.gamma

    def pos_log(v):
        return max(0.0, math.log(v)) if v > 0 else 0.0

    if gamma == 1.0:
        head = math.ceil(pos_log(mu0 * delta0 / epsilon) / (rho - 1.0))
        warm = K0 * math.ceil(max(0.0, math.log(12.0 * delta0 / g.sigma_F) / rho))
        return head + warm
    if gamma == 2.0:
        return math.ceil(pos_log(delta0 / epsilon) / rho) + K0
    if gamma < 2.0:
        head = max(
            (gamma - 1.0) / rho * pos_log(delta0 / epsilon),
            pos_log(mu0 * delta0 / epsilon) / (rho - 1.0),
        )
        return math.ceil(head) + K0
    zeta = (1.0 - 1.0 / rho) * (gamma - 1.0)
    expo = (zeta - 1.0) * max(1.0, 1.0 / zeta)
    return math.ceil(max(delta0 / epsilon, 1.0) ** expo) + K0
