"""Executable oracles for the convergence recurrences and sequence bounds.

Every closed-form rate in the toolkit is backed here by (a) a direct
simulator of the underlying recurrence and (b) the printed closed-form
majorant, so property tests can check that the bound dominates the simulated
sequence.  The same machinery doubles as a complexity predictor for the
outer solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GrowthModel
from .envelope import phi


@dataclass(frozen=True)
class RecurrenceSpec:
    """Parameters of the residual recurrence r+ = max{r - alpha r^rho, beta r} (+ noise).

    ``rho_exp`` is the recurrence exponent (gamma - 1 when derived from a
    growth model), distinct from any restart exponent.  ``noise`` is the
    perturbation sequence, 1-indexed: noise[j-1] is added when producing
    r_j from r_{j-1}.
    """

    alpha: float
    beta: float
    rho_exp: float
    r0: float
    noise: tuple = ()

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not self.rho_exp > 0:
            raise ValueError("rho_exp must be positive")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if any(d < 0 for d in self.noise):
            raise ValueError("noise terms must be nonnegative")


def _safe_pow(base, expo):
    """base**expo clamped to [0, inf] instead of overflowing (expo can be huge
    near the rho -> 1 degeneracy; an infinite bound is weak but still valid)."""
    if base < 0:
        raise ValueError("negative base")
    if base == 0.0:
        return 0.0 if expo > 0 else math.inf
    t = expo * math.log(base)
    if t > 700.0:
        return math.inf
    if t < -700.0:
        return 0.0
    return math.exp(t)


def h_step(spec: RecurrenceSpec, r):
    return max(r - spec.alpha * r**spec.rho_exp, spec.beta * r)


def iterate_h(spec: RecurrenceSpec, k: int) -> float:
    """k-fold iteration of h from r0 (the noiseless simulator)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    r = spec.r0
    for _ in range(k):
        r = h_step(spec, r)
    return r


def _beta_hat(spec):
    return max(spec.beta, 1.0 - 1.0 / spec.rho_exp)


def regime_threshold(spec: RecurrenceSpec):
    """Residual level separating the fast and slow regimes of the recurrence."""
    rho = spec.rho_exp
    if rho == 1.0:
        return 0.0
    if rho < 1.0:
        return _safe_pow(spec.alpha / (1.0 - spec.beta), 1.0 / (1.0 - rho))
    bh = _beta_hat(spec)
    return _safe_pow((1.0 - bh) / spec.alpha, 1.0 / (rho - 1.0))


def bound_h(spec: RecurrenceSpec, k: int) -> float:
    """Closed-form upper bound on iterate_h(spec, k).

    Piecewise in the regime the k-th iterate sits in; the regime switch
    index k0 is found by direct iteration because the recurrence defines it
    implicitly.  rho_exp = 1 collapses to a pure geometric decay and is
    evaluated exactly.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    rho, alpha, beta, r0 = spec.rho_exp, spec.alpha, spec.beta, spec.r0
    if k == 0:
        return r0
    if rho == 1.0:
        c = max(1.0 - alpha, beta, 0.0)
        return c**k * r0

    tau = regime_threshold(spec)
    rk = iterate_h(spec, k)

    if rho < 1.0:
        if rk > tau:
            xi = alpha / (2.0 * r0 ** (1.0 - rho))
            return (1.0 - xi) ** k * (r0 - k * (alpha / 2.0) * _safe_pow(tau, rho))
        k0 = _first_below(spec, tau, k)
        return beta ** (k - k0 - 1) * tau

    bh = _beta_hat(spec)
    if rk > tau:
        return bh**k * r0
    k0 = _first_below(spec, tau, k)
    base = min(r0 ** (rho - 1.0), (1.0 - bh) / alpha)
    return _safe_pow(1.0 / (1.0 / base + (rho - 1.0) * (k - k0) * alpha), 1.0 / (rho - 1.0))


def _first_below(spec, tau, kmax):
    r = spec.r0
    for k in range(kmax + 1):
        if r <= tau:
            return k
        r = h_step(spec, r)
    return kmax


def perturbed_iterate(spec: RecurrenceSpec, k: int) -> float:
    """Direct simulation of the noisy recurrence r_j = h-step(r_{j-1}) + noise_j."""
    if k > len(spec.noise):
        raise ValueError(f"need {k} noise terms, got {len(spec.noise)}")
    r = spec.r0
    for j in range(k):
        r = h_step(spec, r) + spec.noise[j]
    return r


def _damped_h(spec):
    """The damped one-step majorant absorbing noise: halved decrement, averaged factor."""
    alpha2 = spec.alpha / 2.0
    bavg = (1.0 + spec.beta) / 2.0
    rho = spec.rho_exp

    if rho < 1.0:

        def h(r):
            return max(r - alpha2 * r**rho, bavg * r)

    else:
        extra = 1.0 - 1.0 / rho

        def h(r):
            return max(r - alpha2 * r**rho, bavg * r, extra * r)

    return h


def noise_floor(spec: RecurrenceSpec, delta):
    """Residual level below which a single perturbation of size delta can push back."""
    return max(
        _safe_pow(2.0 * delta / spec.alpha, 1.0 / spec.rho_exp),
        2.0 * delta / (1.0 - spec.beta),
    )


def perturbed_bound(spec: RecurrenceSpec, k: int) -> float:
    """Majorant of the noisy recurrence after k steps.

    max{ h^(k)(r0), h^(k-1)(dhat_1), ..., h(dhat_{k-1}), dhat_k } where h is
    the damped majorant and dhat_j the noise floor of noise_j.  Zero noise
    reduces it to h^(k)(r0).
    """
    if k > len(spec.noise):
        raise ValueError(f"need {k} noise terms, got {len(spec.noise)}")
    h = _damped_h(spec)
    vals = [spec.r0] + [noise_floor(spec, d) for d in spec.noise[:k]]
    best = 0.0
    # vals[j] enters at step j and is propagated through h for the remaining steps
    for j, v in enumerate(vals):
        for _ in range(k - j):
            v = h(v)
        best = max(best, v)
    return best


def dist_decay_map(g: GrowthModel, mu: float):
    """One-step distance majorant of the inexact proximal iteration under growth.

    Returns the damped map used by the general-growth rate, i.e. the
    recurrence spec (alpha, beta, rho) = (mu phi sigma_F, sqrt(1-phi),
    gamma - 1) together with its damped h.
    """
    ph = phi(g.gamma)
    spec = RecurrenceSpec(
        alpha=mu * ph * g.sigma_F,
        beta=math.sqrt(1.0 - ph),
        rho_exp=g.gamma - 1.0,
        r0=1.0,
    )
    return spec, _damped_h(spec)


def sequence_bound(u0, alphas, betas, Gamma, k: int) -> float:
    """Closed-form bound on u_k for u_{j+1} <= alpha_j u_j + beta_j.

    Requires alpha_j in [0, 1), betas nonincreasing with sum <= Gamma.  A
    scalar ``alphas`` selects the constant-factor variant
    alpha^((k-4)/2) (u0 + Gamma) + beta_{ceil(k/2)+1} / (1 - alpha).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    betas = [float(b) for b in betas]
    if any(b < 0 for b in betas):
        raise ValueError("betas must be nonnegative")
    if any(betas[i] < betas[i + 1] for i in range(len(betas) - 1)):
        raise ValueError("betas must be nonincreasing")
    if sum(betas) > Gamma + 1e-15 * max(1.0, Gamma):
        raise ValueError("sum of betas exceeds Gamma")

    if np.isscalar(alphas):
        a = float(alphas)
        if not 0.0 <= a < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if k == 0:
            return float(u0)
        m = min(math.ceil(k / 2) + 1, len(betas) - 1)
        return a ** ((k - 4) / 2.0) * (u0 + Gamma) + betas[m] / (1.0 - a)

    alphas = [float(a) for a in alphas]
    if any(not 0.0 <= a < 1.0 for a in alphas):
        raise ValueError("alphas must lie in [0, 1)")
    if k == 0:
        return float(u0)
    if k > len(alphas) or k > len(betas):
        raise ValueError("need k alpha and beta terms")
    m = math.ceil((k - 1) / 2) + 1  # split index of the beta history
    head = u0 * math.prod(alphas[:k])
    mid = Gamma * math.prod(alphas[m:k])
    tail = max((betas[i] / (1.0 - alphas[i]) for i in range(m, k)), default=0.0)
    return head + mid + tail


def simulate_sequence(u0, alphas, betas, k):
    """Direct recursion u_{j+1} = alpha_j u_j + beta_j (oracle for sequence_bound)."""
    u = float(u0)
    for j in range(k):
        a = alphas if np.isscalar(alphas) else alphas[j]
        u = a * u + betas[j]
    return u


def max_identity(a):
    """Both sides of the sorted-suffix-sum identity; they agree exactly.

    For a1 >= ... >= an the max over {0} and all suffix partial sums equals
    max{0, total sum}.
    """
    a = list(a)
    if any(a[i] < a[i + 1] for i in range(len(a) - 1)):
        raise ValueError("input must be sorted non-increasing")
    # one right-to-left accumulation feeds both sides, so the comparison is
    # exact in floating point as well
    suffix = 0.0
    lhs = 0.0
    for v in reversed(a):
        suffix += v
        lhs = max(lhs, suffix)
    rhs = max(0.0, suffix)
    return lhs, rhs


def exact_complexity_count(g: GrowthModel, mu, r0, epsilon) -> int:
    """Predicted exact-PPA iteration count to reach dist <= epsilon.

    Explicit formulas with constant 1 per growth case; the gamma > 2 case
    instantiates the two-regime recurrence count with alpha = mu sigma_F
    phi(gamma) and the damped contraction factor.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not (mu > 0 and r0 > 0):
        raise ValueError("mu and r0 must be positive")
    gamma, sigma = g.gamma, g.sigma_F

    if gamma == 1.0:
        return max(0, math.ceil((r0 - epsilon) / (mu * sigma)))
    if gamma == 2.0:
        return max(0, math.ceil(math.log(r0 / epsilon) / (mu * sigma))) if r0 > epsilon else 0

    ph = phi(gamma)
    if gamma < 2.0:
        lvl = (mu * ph * sigma) ** (1.0 / (2.0 - gamma))
        T = r0 / lvl
        if epsilon >= lvl:
            val = min(T ** (2.0 - gamma) * math.log(max(r0 / epsilon, 1.0)), T)
        else:
            val = math.log(max(min(r0, (2.0 * mu * sigma) ** (1.0 / (2.0 - gamma))) / epsilon, 1.0))
        return max(0, math.ceil(val))

    # gamma > 2: two-regime count of the residual recurrence
    rho = gamma - 1.0
    alpha = mu * sigma * ph
    beta_hat = max((1.0 + math.sqrt(1.0 - ph)) / 2.0, 1.0 - 1.0 / rho)
    tau = _safe_pow((1.0 - beta_hat) / alpha, 1.0 / (rho - 1.0))
    head = max(0.0, math.log(r0 / tau) / beta_hat) if r0 > tau else 0.0
    base = min(r0, tau)
    tail = max(0.0, (epsilon ** (1.0 - rho) - base ** (1.0 - rho)) / ((rho - 1.0) * alpha))
    return max(0, math.ceil(head + tail))
