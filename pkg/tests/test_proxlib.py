import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import brentq

from proxpoint.proxlib import ProxSpec, project_l1_ball, prox, prox_nuclear, prox_objective

ALL_SPECS = [
    ProxSpec("zero"),
    ProxSpec("l1_norm", weight=0.7),
    ProxSpec("l1_ball", radius=1.3),
    ProxSpec("box", lo=-0.5, hi=2.0),
]


def oracle_project_l1_ball(x, tau):
    """Independent projection oracle: bisection on the soft threshold theta
    solving sum(|x_i| - theta)_+ = tau."""
    x = np.asarray(x, dtype=float)
    if np.abs(x).sum() <= tau:
        return x.copy()
    f = lambda t: np.maximum(np.abs(x) - t, 0.0).sum() - tau
    theta = brentq(f, 0.0, np.abs(x).max(), xtol=1e-14)
    return np.sign(x) * np.maximum(np.abs(x) - theta, 0.0)


class TestSoftThreshold:
    def test_basic(self):
        spec = ProxSpec("l1_norm", weight=1.0)
        assert_allclose(prox(spec, np.array([3.0]), 1.0), [2.0])

    def test_dead_zone(self):
        spec = ProxSpec("l1_norm", weight=1.0)
        assert_allclose(prox(spec, np.array([0.5]), 1.0), [0.0])

    def test_kink_ties_to_zero(self):
        spec = ProxSpec("l1_norm", weight=1.0)
        out = prox(spec, np.array([1.0, -1.0]), 1.0)
        assert out[0] == 0.0 and out[1] == 0.0


class TestL1Ball:
    def test_axis_point(self):
        assert_allclose(project_l1_ball(np.array([3.0, 0.0]), 1.0), [1.0, 0.0])

    def test_already_feasible(self):
        x = np.array([0.2, 0.3])
        assert_allclose(project_l1_ball(x, 1.0), x)

    def test_against_threshold_oracle_frozen(self):
        # oracle_project_l1_ball([2, 1], 1) == [1, 0]
        assert_allclose(project_l1_ball(np.array([2.0, 1.0]), 1.0), [1.0, 0.0],
                        atol=1e-12)

    def test_against_threshold_oracle_random(self, rng):
        for _ in range(200):
            n = rng.integers(1, 30)
            x = rng.standard_normal(n) * rng.uniform(0.1, 5)
            tau = rng.uniform(0.1, 3)
            assert_allclose(project_l1_ball(x, tau), oracle_project_l1_ball(x, tau),
                            atol=1e-10)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            project_l1_ball(np.ones(3), 0.0)


class TestNuclear:
    def test_diagonal_reduces_to_soft_threshold(self):
        X = np.diag([3.0, 1.0])
        out = prox_nuclear(X, 1.0, 1.0)
        assert_allclose(out, np.diag([2.0, 0.0]), atol=1e-12)

    def test_zero_matrix(self):
        assert_allclose(prox_nuclear(np.zeros((3, 2)), 0.5, 1.0), np.zeros((3, 2)))

    def test_local_optimality_sampling(self, rng):
        X = rng.standard_normal((5, 4))
        w, step = 0.8, 0.6
        spec = ProxSpec("nuclear_norm", weight=w, rows=5, cols=4)
        Z = prox_nuclear(X, w, step).reshape(-1)
        base = prox_objective(spec, Z, X.reshape(-1), step)
        for _ in range(200):
            pert = Z + rng.standard_normal(20) * rng.uniform(1e-4, 0.3)
            val = prox_objective(spec, pert, X.reshape(-1), step)
            assert val >= base - 1e-9 * max(1.0, abs(base))

    def test_rank_never_grows(self, rng):
        X = rng.standard_normal((6, 3)) @ np.diag([1.0, 1e-9, 0.0])
        out = prox_nuclear(X, 0.5, 1.0)
        assert np.linalg.matrix_rank(out, tol=1e-12) <= np.linalg.matrix_rank(X, tol=1e-12)


class TestProxProperties:
    def test_nonexpansive(self, rng):
        specs = ALL_SPECS + [ProxSpec("nuclear_norm", weight=0.5, rows=3, cols=4)]
        for spec in specs:
            n = 12
            for _ in range(1000):
                x = rng.standard_normal(n) * 2
                y = rng.standard_normal(n) * 2
                step = rng.uniform(0.05, 3.0)
                d_out = np.linalg.norm(prox(spec, x, step) - prox(spec, y, step))
                assert d_out <= np.linalg.norm(x - y) + 1e-10

    def test_fixed_points(self):
        step = 0.7
        assert_allclose(prox(ProxSpec("l1_norm", weight=1.0), np.zeros(4), step), np.zeros(4))
        inside = np.array([0.1, -0.2, 0.0])
        assert_allclose(prox(ProxSpec("l1_ball", radius=1.0), inside, step), inside)
        assert_allclose(prox(ProxSpec("box", lo=-1, hi=1), inside, step), inside)

    def test_optimality_sampling(self, rng):
        for spec in ALL_SPECS:
            n = 8
            x = rng.standard_normal(n)
            step = 0.9
            z = prox(spec, x, step)
            base = prox_objective(spec, z, x, step)
            for _ in range(200):
                pert = z + rng.standard_normal(n) * rng.uniform(1e-4, 0.2)
                if spec.is_indicator:
                    pert = prox(spec, pert, step)  # compare over the feasible set
                val = prox_objective(spec, pert, x, step)
                assert val >= base - 1e-9 * max(1.0, abs(base))

    def test_nonpositive_step(self):
        with pytest.raises(ValueError):
            prox(ProxSpec("l1_norm", weight=1.0), np.ones(2), 0.0)

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            ProxSpec("l1_ball", radius=-1.0)
        with pytest.raises(ValueError):
            ProxSpec("nuclear_norm", weight=1.0, rows=0, cols=3)
        with pytest.raises(ValueError):
            ProxSpec("huber")

    def test_nuclear_dim_mismatch(self):
        spec = ProxSpec("nuclear_norm", weight=1.0, rows=3, cols=3)
        with pytest.raises(ValueError):
            prox(spec, np.ones(7), 1.0)
