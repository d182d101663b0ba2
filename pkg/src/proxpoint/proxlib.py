"""Closed-form proximal operators and Euclidean projections.

These are the psi-oracles of the solvers and double as exact-prox ground
truth in tests.  All operators act on flat float arrays; the nuclear-norm
operator reshapes to ``(rows, cols)`` internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

PROX_KINDS = ("zero", "l1_norm", "l1_ball", "box", "nuclear_norm")

# Kinds whose prox is a projection: psi is an indicator function, the prox
# does not depend on the step.
INDICATOR_KINDS = ("l1_ball", "box")


@dataclass(frozen=True)
class ProxSpec:
    """Description of a psi term with a closed-form proximal mapping.

    kind:
      zero          psi = 0
      l1_norm       psi = weight * ||x||_1
      l1_ball       psi = indicator of {x : ||x||_1 <= radius}
      box           psi = indicator of {x : lo <= x <= hi}
      nuclear_norm  psi = weight * ||mat(x)||_* with mat(x) of shape rows x cols
    """

    kind: str = "zero"
    weight: float = 0.0
    radius: float = 0.0
    lo: float = -np.inf
    hi: float = np.inf
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        if self.kind not in PROX_KINDS:
            raise ValueError(f"unknown prox kind {self.kind!r}")
        if self.kind == "l1_ball" and not self.radius > 0:
            raise ValueError("l1_ball radius must be positive")
        if self.kind in ("l1_norm", "nuclear_norm") and self.weight < 0:
            raise ValueError("weight must be nonnegative")
        if self.kind == "nuclear_norm" and (self.rows < 1 or self.cols < 1):
            raise ValueError("nuclear_norm needs positive rows and cols")
        if self.kind == "box" and np.any(np.asarray(self.lo) > np.asarray(self.hi)):
            raise ValueError("box needs lo <= hi")

    @property
    def is_indicator(self):
        return self.kind in INDICATOR_KINDS

    def check_dim(self, dim: int):
        if self.kind == "nuclear_norm" and self.rows * self.cols != dim:
            raise ValueError(
                f"nuclear_norm shape {self.rows}x{self.cols} does not match dim {dim}"
            )


ZERO = ProxSpec("zero")


def soft_threshold(x, t):
    """Componentwise soft-threshold at level t >= 0.

    At the kink (|x_i| == t exactly) the output is 0, the least-norm element
    of the set-valued limit.
    """
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def project_l1_ball(x, radius):
    """Euclidean projection onto the l1 ball of the given radius.

    Exact sort-then-threshold algorithm, O(n log n).  Returns ``x`` unchanged
    when it is already feasible.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    if np.sum(np.abs(x)) <= radius:
        return x.copy()
    u = np.sort(np.abs(x))[::-1]
    css = np.cumsum(u)
    j = np.arange(1, x.size + 1)
    rho = np.nonzero(u - (css - radius) / j > 0)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return soft_threshold(x, theta)


def project_box(x, lo, hi):
    return np.clip(np.asarray(x, dtype=float), lo, hi)


def prox_nuclear(X, weight, step):
    """Singular-value soft-thresholding, the prox of ``weight * ||.||_*``."""
    if not step > 0:
        raise ValueError("step must be positive")
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    X = np.asarray(X, dtype=float)
    if weight * step == 0.0:
        return X.copy()
    try:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(
            f"SVD failed on {X.shape[0]}x{X.shape[1]} matrix "
            f"(fro norm {np.linalg.norm(X):.3e}, "
            f"max abs {np.max(np.abs(X)):.3e}): {e}"
        ) from e
    return (U * np.maximum(s - weight * step, 0.0)) @ Vt


def nuclear_norm(X):
    return float(np.sum(np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)))


def prox(spec: ProxSpec, x, step):
    """Exact minimizer of ``psi(z) + ||z - x||^2 / (2 step)``.

    For indicator kinds this is the projection (independent of the step).
    """
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    spec.check_dim(x.size)
    if spec.kind == "zero":
        return x.copy()
    if spec.kind == "l1_norm":
        return soft_threshold(x, spec.weight * step)
    if spec.kind == "l1_ball":
        return project_l1_ball(x, spec.radius)
    if spec.kind == "box":
        return project_box(x, spec.lo, spec.hi)
    # nuclear_norm
    Z = prox_nuclear(x.reshape(spec.rows, spec.cols), spec.weight, step)
    return Z.reshape(-1)


def psi_value(spec: ProxSpec, x, feas_tol=1e-9):
    """Value of the psi term at x; +inf for infeasible indicator points.

    A small feasibility slack keeps freshly projected iterates feasible under
    floating-point roundoff.
    """
    x = np.asarray(x, dtype=float)
    spec.check_dim(x.size)
    if spec.kind == "zero":
        return 0.0
    if spec.kind == "l1_norm":
        return float(spec.weight * np.sum(np.abs(x)))
    if spec.kind == "l1_ball":
        tol = feas_tol * max(1.0, spec.radius)
        return 0.0 if np.sum(np.abs(x)) <= spec.radius + tol else np.inf
    if spec.kind == "box":
        tol = feas_tol * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
        ok = np.all(x >= np.asarray(spec.lo) - tol) and np.all(
            x <= np.asarray(spec.hi) + tol
        )
        return 0.0 if ok else np.inf
    return spec.weight * nuclear_norm(x.reshape(spec.rows, spec.cols))


def prox_objective(spec: ProxSpec, z, x, step):
    """The prox objective ``psi(z) + ||z - x||^2 / (2 step)`` (test helper)."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    return psi_value(spec, z) + float(np.sum((z - x) ** 2)) / (2.0 * step)
