"""Problem zoo: desk-scale generators for the benchmark families.

Every generator is pure given its seed.  Planted instances are built so an
optimal point and value are known exactly (objective 0 at the plant), which
makes error measurement self-contained.  Where a regularizer has no
closed-form prox (the graph-guided l1 term) it is folded into f via its
subgradient and psi stays zero or an indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import proxlib
from .core import GrowthModel, ProblemInstance

FAMILIES = ("l1_ls", "graph_svm", "sparse_l1_svm", "matrix_completion", "univariate_holder")


@dataclass(frozen=True)
class ProblemRecipe:
    """Declarative description of a zoo instance (the config-file unit)."""

    family: str
    m: int = 1
    n: int = 1
    tau: float = 1.0
    gamma: float = 1.0
    sigma: float = 1.0
    n_obs: int = 0
    M_kind: str = "identity"
    seed: int = 0
    planted: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.m < 1 or self.n < 1:
            raise ValueError("dims must be positive")
        # l1_ls admits tau = inf (unconstrained); the two regularized
        # families accept tau = 0 (regularizer off)
        if self.family == "sparse_l1_svm" and not self.tau > 0:
            raise ValueError("sparse_l1_svm needs a positive ball radius tau")
        if self.family in ("graph_svm", "matrix_completion") and self.tau < 0:
            raise ValueError("tau must be nonnegative")


def build(recipe: ProblemRecipe) -> ProblemInstance:
    if recipe.family == "l1_ls":
        return make_l1_ls(recipe.m, recipe.n, recipe.tau, recipe.planted, recipe.seed)
    if recipe.family == "graph_svm":
        return make_graph_svm(recipe.m, recipe.n, recipe.tau, recipe.M_kind, recipe.seed)
    if recipe.family == "sparse_l1_svm":
        return make_sparse_l1_svm(
            recipe.m, recipe.n, recipe.tau, recipe.seed, planted=recipe.planted
        )
    if recipe.family == "matrix_completion":
        n_obs = recipe.n_obs or (recipe.m * recipe.n) // 4
        return make_matrix_completion(recipe.m, recipe.n, n_obs, recipe.tau, recipe.seed)
    return make_univariate_holder(recipe.gamma, recipe.sigma)


def make_l1_ls(m, n, tau, planted, seed) -> ProblemInstance:
    """Robust least squares: min ||Ax - b||_1 subject to ||x||_1 <= tau.

    tau = inf selects the unconstrained formulation.  A planted instance
    draws x# inside the ball and sets b = A x#, so the optimum is 0 at x#.
    """
    if m < 1 or n < 1:
        raise ValueError("dims must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    witness = None
    F_star = None
    if planted:
        xs = rng.standard_normal(n)
        if np.isfinite(tau):
            xs = proxlib.project_l1_ball(xs, tau)
        b = A @ xs
        witness, F_star = xs, 0.0
    else:
        b = rng.standard_normal(m)

    def f_value(x):
        return float(np.sum(np.abs(A @ x - b)))

    def f_subgrad(x):
        return A.T @ np.sign(A @ x - b)

    psi = proxlib.ZERO if not np.isfinite(tau) else proxlib.ProxSpec("l1_ball", radius=tau)
    L = float(np.linalg.norm(A, 2)) * math.sqrt(m)
    return ProblemInstance(
        dim=n,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=psi,
        F_star=F_star,
        X_star_witness=witness,
        subgrad_bound=L,
        name=f"l1_ls_{m}x{n}",
        data={"A": A, "b": b},
    )


def make_graph_svm(m, n, tau, M_kind, seed) -> ProblemInstance:
    """Averaged hinge loss plus a graph-guided lasso term tau ||M x||_1.

    Data is two-class Gaussian, labelled by a random separator so the
    classes are linearly separable.  M = I recovers the regularized sparse
    l1 SVM.  The composite l1 term has no closed-form prox and is folded
    into f via M^T sign(Mx); hinge ties at margin one contribute zero.
    """
    if m < 1 or n < 1:
        raise ValueError("dims must be positive")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n)
    w /= np.linalg.norm(w)
    A = rng.standard_normal((m, n))
    y = np.where(A @ w >= 0, 1.0, -1.0)
    if M_kind == "identity":
        M = np.eye(n)
    elif M_kind == "random_graph":
        M = _random_adjacency(n, rng)
    else:
        raise ValueError(f"unknown M_kind {M_kind!r}")

    def f_value(x):
        margins = y * (A @ x)
        hinge = float(np.mean(np.maximum(0.0, 1.0 - margins)))
        return hinge + tau * float(np.sum(np.abs(M @ x)))

    def f_subgrad(x):
        margins = y * (A @ x)
        active = margins < 1.0
        g = -(A.T @ (y * active)) / m
        if tau > 0:
            g = g + tau * (M.T @ np.sign(M @ x))
        return g

    L = float(np.linalg.norm(A, 2)) * math.sqrt(m) / m + tau * float(
        np.linalg.norm(M, 2)
    ) * math.sqrt(n)
    return ProblemInstance(
        dim=n,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=proxlib.ZERO,
        subgrad_bound=L,
        name=f"graph_svm_{m}x{n}",
        data={"A": A, "y": y, "M": M},
    )


def _random_adjacency(n, rng):
    # sparse-ish weighted adjacency, symmetric, zero diagonal
    p = min(1.0, 3.0 / n)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    weights = rng.uniform(0.5, 1.5, (n, n))
    M = np.where(upper, weights, 0.0)
    return M + M.T


def make_sparse_l1_svm(m, n, tau, seed, planted=True) -> ProblemInstance:
    """Averaged hinge loss constrained to the l1 ball of radius tau.

    A planted instance shifts each data point along a sparse separator w#
    with ||w#||_1 = tau so that every margin is at least one: the hinge
    vanishes at w#, giving optimum 0 with a feasible witness.
    """
    if m < 1 or n < 1:
        raise ValueError("dims must be positive")
    if not tau > 0:
        raise ValueError("tau must be positive")
    rng = np.random.default_rng(seed)
    k = max(1, n // 20)
    ws = np.zeros(n)
    support = rng.choice(n, size=k, replace=False)
    vals = rng.uniform(0.5, 1.5, k) * rng.choice([-1.0, 1.0], k)
    ws[support] = vals
    ws *= tau / np.sum(np.abs(ws))

    A = rng.standard_normal((m, n))
    raw = A @ ws
    y = np.where(raw >= 0, 1.0, -1.0)
    witness = None
    F_star = None
    if planted:
        margins = 1.0 + rng.uniform(0.0, 1.0, m)
        shift = (margins - y * raw) / float(ws @ ws)
        A = A + np.outer(y * shift, ws)
        witness, F_star = ws, 0.0

    def f_value(x):
        return float(np.mean(np.maximum(0.0, 1.0 - y * (A @ x))))

    def f_subgrad(x):
        active = y * (A @ x) < 1.0
        return -(A.T @ (y * active)) / m

    L = float(np.linalg.norm(A, 2)) * math.sqrt(m) / m
    return ProblemInstance(
        dim=n,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=proxlib.ProxSpec("l1_ball", radius=tau),
        F_star=F_star,
        X_star_witness=witness,
        subgrad_bound=L,
        name=f"sparse_l1_svm_{m}x{n}",
        data={"A": A, "y": y},
    )


def make_matrix_completion(rows, cols, n_obs, tau, seed, mode="prox") -> ProblemInstance:
    """Absolute-deviation matrix completion with a nuclear-norm term.

    Observed cells carry i.i.d. integer ratings 1..5.  ``mode="prox"``
    treats tau ||X||_* as the proximable psi (singular-value thresholding in
    the inner step); ``mode="subgrad"`` folds it into f via the U V^T
    subgradient, staying in the bounded-subgradient regime.
    """
    dim = rows * cols
    if n_obs < 1 or n_obs > dim:
        raise ValueError("n_obs must lie in [1, rows*cols]")
    if mode not in ("prox", "subgrad"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    cells = rng.choice(dim, size=n_obs, replace=False)
    ratings = rng.integers(1, 6, n_obs).astype(float)

    def data_term(x):
        return float(np.sum(np.abs(x[cells] - ratings))) / n_obs

    def data_subgrad(x):
        g = np.zeros(dim)
        g[cells] = np.sign(x[cells] - ratings) / n_obs
        return g

    if mode == "prox":
        f_value, f_subgrad = data_term, data_subgrad
        psi = proxlib.ProxSpec("nuclear_norm", weight=tau, rows=rows, cols=cols)
    else:

        def f_value(x):
            return data_term(x) + tau * proxlib.nuclear_norm(x.reshape(rows, cols))

        def f_subgrad(x):
            U, _, Vt = np.linalg.svd(x.reshape(rows, cols), full_matrices=False)
            return data_subgrad(x) + tau * (U @ Vt).reshape(-1)

        psi = proxlib.ZERO

    L = math.sqrt(n_obs) / n_obs + tau * math.sqrt(min(rows, cols))
    return ProblemInstance(
        dim=dim,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=psi,
        subgrad_bound=L,
        name=f"matrix_completion_{rows}x{cols}",
        data={"cells": cells.astype(float), "ratings": ratings},
    )


def make_univariate_holder(gamma, sigma=1.0) -> ProblemInstance:
    """Calibration family F(x) = (sigma/gamma) |x|^gamma on the line.

    Growth exponent gamma with modulus sigma/gamma, optimum 0 at the origin.
    The exact prox is closed form for gamma in {1, 2} and a safeguarded
    scalar Newton solve (tolerance 1e-14) otherwise.
    """
    if not gamma >= 1:
        raise ValueError("gamma must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")

    def f_value(x):
        return float(sigma / gamma * np.abs(x[0]) ** gamma)

    def f_subgrad(x):
        v = x[0]
        if v == 0.0:
            return np.zeros(1)
        return np.array([sigma * abs(v) ** (gamma - 1.0) * math.copysign(1.0, v)])

    def prox_F(x, mu):
        return np.array([_holder_prox_scalar(float(x[0]), mu, gamma, sigma)])

    nu = min(gamma - 1.0, 1.0)
    return ProblemInstance(
        dim=1,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=proxlib.ZERO,
        F_star=0.0,
        X_star_witness=np.zeros(1),
        prox_F=prox_F,
        growth=GrowthModel(gamma=gamma, sigma_F=sigma / gamma, nu=nu, L_f=sigma),
        subgrad_bound=sigma if gamma == 1.0 else None,
        name=f"holder_g{gamma:g}",
    )


def _holder_prox_scalar(x, mu, gamma, sigma):
    """argmin_z (sigma/gamma)|z|^gamma + (z - x)^2 / (2 mu)."""
    s = abs(x)
    if s == 0.0:
        return 0.0
    if gamma == 1.0:
        z = max(s - mu * sigma, 0.0)
    elif gamma == 2.0:
        z = s / (1.0 + mu * sigma)
    else:
        z = _newton_bisect(s, mu * sigma, gamma)
    return math.copysign(z, x)


def _newton_bisect(s, c, gamma, tol=1e-14):
    """Solve c z^(gamma-1) + z = s on [0, s] by Newton with a bisection safeguard."""
    lo, hi = 0.0, s
    z = s / 2.0
    for _ in range(200):
        g = c * z ** (gamma - 1.0) + z - s
        if g > 0:
            hi = z
        else:
            lo = z
        dg = c * (gamma - 1.0) * z ** (gamma - 2.0) + 1.0
        step = g / dg
        z_new = z - step
        if not (lo < z_new < hi):
            z_new = 0.5 * (lo + hi)
        if abs(z_new - z) <= tol * max(1.0, z):
            return z_new
        z = z_new
    return z


def save_instance_data(path, recipe: ProblemRecipe, p: ProblemInstance):
    """Plain-text dump of the generator data: two header lines, then each
    named array row-major."""
    arrays = p.data or {}
    with open(path, "w") as f:
        f.write(f"family={recipe.family} dims={recipe.m}x{recipe.n}\n")
        f.write(f"tau={recipe.tau:g} seed={recipe.seed}\n")
        for name, arr in arrays.items():
            arr = np.atleast_2d(np.asarray(arr, dtype=float))
            f.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
            for row in arr:
                f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_instance_data(path):
    """Inverse of :func:`save_instance_data`; returns (header, arrays)."""
    with open(path) as f:
        lines = f.read().splitlines()
    header = {}
    for ln in lines[:2]:
        for tok in ln.split():
            k, v = tok.split("=", 1)
            header[k] = v
    arrays = {}
    i = 2
    while i < len(lines):
        name, r, c = lines[i].split()
        r, c = int(r), int(c)
        block = [[float(v) for v in lines[i + 1 + j].split()] for j in range(r)]
        arrays[name] = np.asarray(block)
        i += 1 + r
    return header, arrays
