"""Moreau-envelope analytics.

The envelope F_mu(x) = min_z F(z) + ||z - x||^2 / (2 mu) inherits the growth
of F outside a neighbourhood of the optimal set.  This module evaluates the
growth constant phi, the envelope lower bounds per growth regime, the
delta-approximate envelope gradient that drives the outer solvers, and the
distance certificates derived from a small gradient norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import Array, GrowthModel, ProblemInstance


def phi(gamma: float) -> float:
    """min over lam in [0,1] of lam**gamma + (1-lam)**2.

    Solved by bisection on the stationarity equation
    gamma * lam**(gamma-1) = 2 (1 - lam), which is monotone on (0, 1); a
    dense-grid fallback guards the degenerate cases.  Absolute accuracy is
    well below 1e-10.
    """
    if not gamma >= 1:
        raise ValueError("gamma must be >= 1")

    def obj(lam):
        return lam**gamma + (1.0 - lam) ** 2

    def stat(lam):
        return gamma * lam ** (gamma - 1.0) - 2.0 * (1.0 - lam)

    lo, hi = 1e-16, 1.0 - 1e-16
    if stat(lo) < 0 < stat(hi):
        lam = brentq(stat, lo, hi, xtol=1e-14, rtol=8.9e-16)
        best = obj(lam)
    else:
        grid = np.linspace(0.0, 1.0, 100_001)
        best = float(np.min(grid**gamma + (1.0 - grid) ** 2))
    return float(min(best, 1.0))  # endpoints both evaluate to 1


def huber(tau: float, s: float) -> float:
    """Huber function: quadratic below tau, linear with slope 1 above."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s > tau:
        return s - tau / 2.0
    return s * s / (2.0 * tau)


def general_lower_bound(gamma, sigma_F, mu, dist):
    """The all-gamma envelope bound phi(gamma) * min{sigma d^gamma, d^2/(2mu)}."""
    return phi(gamma) * min(sigma_F * dist**gamma, dist**2 / (2.0 * mu))


def envelope_lower_bound(g: GrowthModel, mu: float, dist: float) -> float:
    """Lower bound on F_mu(x) - F* as a function of dist(x, X*).

    Uses the sharp case formulas at gamma = 1 (Huber composition) and
    gamma = 2, the general phi(gamma) bound otherwise.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    if dist < 0:
        raise ValueError("dist must be nonnegative")
    if g.gamma == 1.0:
        return huber(g.sigma_F**2 * mu, g.sigma_F * dist)
    if g.gamma == 2.0:
        return g.sigma_F / (1.0 + 2.0 * g.sigma_F * mu) * dist**2
    return general_lower_bound(g.gamma, g.sigma_F, mu, dist)


@dataclass(frozen=True)
class EnvelopeGradient:
    """delta-approximate envelope gradient (anchor - prox_estimate) / mu.

    ``prox_estimate`` is within ``delta`` of the true prox of the anchor;
    the reconstruction identity value == (anchor - prox_estimate)/mu holds
    bit-exactly because the value is derived, never stored independently.
    """

    value: Array
    delta: float
    mu: float
    anchor: Array
    prox_estimate: Array

    @classmethod
    def from_prox_estimate(cls, anchor, prox_estimate, mu, delta):
        anchor = np.asarray(anchor, dtype=float)
        prox_estimate = np.asarray(prox_estimate, dtype=float)
        return cls(
            value=(anchor - prox_estimate) / mu,
            delta=float(delta),
            mu=float(mu),
            anchor=anchor,
            prox_estimate=prox_estimate,
        )

    @property
    def norm(self):
        return float(np.linalg.norm(self.value))


def approx_envelope_gradient(
    p: ProblemInstance, x, mu: float, inner, delta: float
) -> EnvelopeGradient:
    """Build the approximate envelope gradient at x from an inner solver.

    ``inner`` is any object with ``solve(p, x, mu, delta) -> z`` certifying
    ||z - prox_mu^F(x)|| <= delta.  A budget failure inside the inner solver
    propagates (it carries the best estimate found).
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = p.check_point(x)
    z = inner.solve(p, x, mu, delta)
    return EnvelopeGradient.from_prox_estimate(x, z, mu, delta)


def certificate_from_norm(g: GrowthModel, grad_norm, delta, mu):
    """Distance-to-optimum bound from the scalar data (norm, delta, mu).

    gamma = 1: requires grad_norm + delta/mu < sigma_F, returns
    mu grad_norm + delta.  gamma > 1: returns
    max{ [(mu grad_norm + delta) / (mu sigma_F phi)]^(1/(gamma-1)),
         (2 mu grad_norm + delta) / phi }.
    Returns None when no case applies.
    """
    if g.gamma == 1.0:
        if grad_norm + delta / mu < g.sigma_F:
            return mu * grad_norm + delta
        return None
    ph = phi(g.gamma)
    a = ((mu * grad_norm + delta) / (mu * g.sigma_F * ph)) ** (1.0 / (g.gamma - 1.0))
    b = (2.0 * mu * grad_norm + delta) / ph
    return max(a, b)


def distance_certificate(g: GrowthModel, eg: EnvelopeGradient):
    """Distance-to-optimum bound from a small approximate envelope gradient;
    None when no case applies."""
    return certificate_from_norm(g, eg.norm, eg.delta, eg.mu)
