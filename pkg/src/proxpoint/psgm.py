"""Inner proximal subgradient method on the mu-regularized subproblem.

One call solves ``min_z f(z) + psi(z) + ||z - anchor||^2 / (2 mu)`` by N
fixed-stepsize proximal subgradient steps.  The subproblem is 1/mu-strongly
convex, which certifies the iteration budgets below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import proxlib
from .core import ProblemInstance
from .errors import NumericalError


@dataclass(frozen=True)
class InnerBudget:
    """Stepsize + iteration count with the tolerance they certify."""

    alpha: float
    N: int
    certified_delta: float = math.nan

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def psgm_run(p: ProblemInstance, z0, anchor, alpha, mu, N, counter=None, on_iterate=None):
    """Run exactly N proximal subgradient steps on the regularized subproblem.

    z <- prox_alpha^psi( z - alpha (f'(z) + (z - anchor)/mu) )

    Increments ``counter`` by one per step.  ``on_iterate(z, k)`` is invoked
    after each step for trace recording.  Raises NumericalError if an
    iterate stops being finite (stepsize too large).
    """
    if not alpha > 0 or not mu > 0:
        raise ValueError("alpha and mu must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    z = p.check_point(z0).copy()
    anchor = p.check_point(anchor)
    fsub = p.f_subgrad
    inv_mu = 1.0 / mu
    psi = p.psi if p.psi.kind != "zero" else None
    for k in range(N):
        z = z - alpha * (fsub(z) + (z - anchor) * inv_mu)
        if psi is not None:
            z = proxlib.prox(psi, z, alpha)
        if counter is not None:
            counter.add(1)
        # non-finite values are sticky through the update, so a strided check
        # still catches divergence
        if (k & 31) == 31 or k == N - 1:
            if not np.all(np.isfinite(z)):
                raise NumericalError(
                    f"inner iterate diverged by step {k + 1} (alpha={alpha:g}, mu={mu:g})"
                )
        if on_iterate is not None:
            on_iterate(z, k)
    return z


def budget_for_delta(mu, alpha, dist0, delta) -> InnerBudget:
    """Iteration count certifying ||z^N - prox|| <= delta.

    N = ceil( (4 mu / alpha) * log(dist0 / delta) ), natural log, valid under
    the stepsize guard alpha <= min{mu/2, delta^(2(1-nu)) / (4 mu L_f^2)}
    (checked by the caller).  ``dist0`` is an upper bound on the initial
    residual ||z0 - prox||; when it is already within delta the budget
    degenerates to a single step certified at dist0.
    """
    if not (mu > 0 and alpha > 0 and delta > 0):
        raise ValueError("mu, alpha, delta must be positive")
    if dist0 < 0:
        raise ValueError("dist0 must be nonnegative")
    if dist0 < delta:
        return InnerBudget(alpha=alpha, N=1, certified_delta=dist0)
    N = max(1, math.ceil(4.0 * mu / alpha * math.log(dist0 / delta)))
    return InnerBudget(alpha=alpha, N=N, certified_delta=delta)


def budget_wsm_phase2(dist0, alpha, L_f, sigma_F=None) -> InnerBudget:
    """Iteration count for the sharp-minima postprocessing phase.

    N = ceil( 2 (dist0 / (alpha L_f))^2 ), clamped to at least one step.
    Valid for alpha in (0, mu/2] once dist0 <= mu sigma_F; the output then
    satisfies dist <= alpha L_f^2 / (2 sigma_F), recorded as the certified
    tolerance when sigma_F is supplied.
    """
    if not (alpha > 0 and L_f > 0):
        raise ValueError("alpha and L_f must be positive")
    if dist0 < 0:
        raise ValueError("dist0 must be nonnegative")
    N = max(1, math.ceil(2.0 * (dist0 / (alpha * L_f)) ** 2))
    certified = alpha * L_f**2 / (2.0 * sigma_F) if sigma_F else math.nan
    return InnerBudget(alpha=alpha, N=N, certified_delta=certified)


def stepsize_guard(mu, delta, L_f, nu=0.0):
    """Largest stepsize the budget certificates allow: min{mu/2, delta^(2(1-nu))/(4 mu L_f^2)}."""
    if nu >= 1.0:
        smooth_cap = 1.0 / (4.0 * mu * L_f**2)
    else:
        smooth_cap = delta ** (2.0 * (1.0 - nu)) / (4.0 * mu * L_f**2)
    return min(mu / 2.0, smooth_cap)
