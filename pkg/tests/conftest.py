import numpy as np
import pytest

from proxpoint import proxlib
from proxpoint.core import GrowthModel, ProblemInstance


def make_quadratic(c, v, psi=proxlib.ZERO, lo=None, hi=None):
    """Separable strongly convex quadratic f(z) = 1/2 sum c_i (z_i - v_i)^2.

    With psi zero or a box the prox of F = f + psi + ||.-x||^2/(2 mu) is
    closed form, which makes these the ground-truth subproblems of the inner
    solver tests.
    """
    c = np.asarray(c, dtype=float)
    v = np.asarray(v, dtype=float)

    def f_value(z):
        return 0.5 * float(np.sum(c * (z - v) ** 2))

    def f_subgrad(z):
        return c * (z - v)

    def prox_F(x, mu):
        z = (c * v + x / mu) / (c + 1.0 / mu)
        if psi.kind == "box":
            z = np.clip(z, psi.lo, psi.hi)
        return z

    witness = v if psi.kind == "zero" else None
    return ProblemInstance(
        dim=c.size,
        f_value=f_value,
        f_subgrad=f_subgrad,
        psi=psi,
        F_star=0.0 if psi.kind == "zero" else None,
        X_star_witness=witness,
        prox_F=prox_F,
        growth=GrowthModel(gamma=2.0, sigma_F=float(np.min(c)) / 2.0, nu=1.0,
                           L_f=float(np.max(c))),
        name="quadratic",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
