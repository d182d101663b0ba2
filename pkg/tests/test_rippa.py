import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from proxpoint.core import GrowthModel, evaluate_objective
from proxpoint.ippa import InnerSolver
from proxpoint.problems import make_l1_ls, make_sparse_l1_svm, make_univariate_holder
from proxpoint.psgm import budget_wsm_phase2
from proxpoint.rippa import (
    epoch_schedule,
    postprocess,
    predict_epoch_count,
    ripp_psgm_run,
    rippa_run,
)


class TestEpochSchedule:
    def test_printed_example(self):
        # mu0=1, delta0=0.5, rho=2: (mu, dgrad) = (1,.5), (2,.125), (4,.03125)
        expect = [(1.0, 0.5), (2.0, 0.125), (4.0, 0.03125)]
        for t, (mu, dg) in enumerate(expect):
            st = epoch_schedule(t, 1.0, 0.5, 2.0)
            assert st.mu_t == mu and st.delta_grad_t == dg
            assert st.delta_t == mu * dg

    def test_closed_form_matches_recursion(self):
        mu0, d0, rho, q, a0, N0 = 0.3, 1.7, 1.25, 1.5, 0.15, 3.0
        mu, dg, a, N = mu0, d0, a0, N0
        for t in range(31):
            st = epoch_schedule(t, mu0, d0, rho, q=q, alpha0=a0, N0=N0)
            assert_allclose([st.mu_t, st.delta_grad_t, st.delta_t, st.alpha_t, st.N_t],
                            [mu, dg, mu * dg, a, N], rtol=1e-12)
            mu, dg, a, N = 2 * mu, dg * 2.0**-rho, a * 2.0**-q, N * 2.0 ** (q + 1)

    def test_gradient_targets_strictly_decrease(self):
        targets = [5 * epoch_schedule(t, 1.0, 1.0, 1.25).delta_grad_t for t in range(20)]
        assert all(targets[i] > targets[i + 1] for i in range(19))


class TestRippaRun:
    def test_epoch_boundary_certificates(self):
        # true envelope-gradient norm at each boundary <= 6 * dgrad_t
        p = make_univariate_holder(1.0, 1.0)
        configs = [
            (8.0, 1.0, 0.5, 2.0), (5.0, 0.5, 1.0, 1.5), (20.0, 2.0, 0.25, 1.2),
            (3.0, 1.0, 2.0, 3.0), (12.0, 0.1, 0.8, 1.1), (7.0, 4.0, 0.3, 2.5),
            (50.0, 1.0, 1.0, 1.01), (2.0, 0.25, 0.6, 1.75), (9.0, 1.5, 0.4, 2.0),
            (30.0, 0.7, 1.3, 1.4),
        ]
        for x0, mu0, d0, rho in configs:
            log = []
            rippa_run(p, np.array([x0]), mu0, d0, rho, 1e-9, InnerSolver.exact(),
                      max_epochs=10, epoch_log=log)
            for st, res in log:
                z = p.prox_F(res.point, st.mu_t)
                gnorm = abs((res.point - z) / st.mu_t)[0]
                assert gnorm <= 6.0 * st.delta_grad_t + 1e-12

    def test_single_iteration_epochs_after_collapse(self):
        p = make_univariate_holder(1.0, 1.0)
        log = []
        _, trace = rippa_run(p, np.array([8.0]), 1.0, 0.5, 2.0, 1e-9,
                             InnerSolver.exact(), max_epochs=8, epoch_log=log)
        per_epoch = {}
        for r in trace.rows:
            per_epoch[r.epoch] = per_epoch.get(r.epoch, 0) + 1
        # once the gradient norm dropped below sigma_F each epoch is one step
        collapsed = [t for t, (st, res) in enumerate(log) if res.grad_norm < 1.0]
        for t in collapsed[1:]:
            assert per_epoch[t] == 1

    def test_optimal_start_exits_each_epoch_immediately(self):
        p = make_univariate_holder(1.0, 1.0)
        log = []
        res, trace = rippa_run(p, np.zeros(1), 1.0, 0.5, 2.0, 1e-9,
                               InnerSolver.exact(), max_epochs=3, epoch_log=log)
        assert all(r.grad_norm == 0.0 for _, r in log)
        assert all(r.outer_iter == 0 for r in trace.rows)

    def test_converges_with_certificate(self):
        p = make_univariate_holder(1.0, 1.0)
        res, _ = rippa_run(p, np.array([8.0]), 1.0, 0.5, 2.0, 1e-4,
                           InnerSolver.exact(), max_epochs=40, growth=p.growth)
        assert res.status == "converged"
        assert res.dist_bound <= 1e-4

    def test_rejects_rho_at_most_one(self):
        p = make_univariate_holder(1.0, 1.0)
        with pytest.raises(ValueError):
            rippa_run(p, np.ones(1), 1.0, 1.0, 1.0, 1e-6, InnerSolver.exact(), 5)


class TestRippPsgm:
    def test_l1_ls_smoke(self):
        # desk-scale robust-LS run drives the error well below half its start
        p = make_l1_ls(50, 20, np.inf, True, 0)
        x0 = np.zeros(20)
        f0 = evaluate_objective(p, x0)
        rho = 1.005
        x, delta_T, trace = ripp_psgm_run(
            p, x0, 2 * p.subgrad_bound, 0.1, rho, 2 * rho - 1, p.subgrad_bound,
            T=9, trace_every=0,
        )
        assert evaluate_objective(p, x) < 0.5 * f0
        assert delta_T < 2 * p.subgrad_bound
        assert trace.total_evals > 0

    def test_matrix_completion_with_nuclear_prox_inner(self):
        # the proximable-psi route: inner steps apply singular-value
        # thresholding and the objective still decreases materially
        from proxpoint.core import evaluate_objective
        from proxpoint.problems import make_matrix_completion

        p = make_matrix_completion(8, 6, 20, 0.05, 3)
        x0 = np.zeros(48)
        f0 = evaluate_objective(p, x0)
        x, _, trace = ripp_psgm_run(
            p, x0, 2 * p.subgrad_bound, 0.5, 1.1, 1.2, p.subgrad_bound,
            T=6, trace_every=0,
        )
        assert evaluate_objective(p, x) < 0.6 * f0
        assert trace.total_evals > 0

    def test_optimal_start_two_blocks(self):
        # at the planted optimum the subgradient is zero: the do-while runs
        # exactly two blocks and exits with zero movement
        p = make_sparse_l1_svm(30, 40, 0.4, seed=1, planted=True)
        x0 = p.X_star_witness.copy()
        assert_allclose(p.f_subgrad(x0), np.zeros(40))
        log = []
        x, _, trace = ripp_psgm_run(p, x0, 2.0, 0.5, 1.5, 2.0, 2.0, T=1,
                                    epoch_log=log, trace_every=0)
        assert_allclose(x, x0)
        N = math.ceil(log[0].N_t)
        assert trace.total_evals == 2 * N

    def test_movement_guard_threshold(self):
        st = epoch_schedule(0, 2.0, 0.125, 1.5)
        assert st.delta_t == 0.25  # guard compares movement against mu_t * dgrad_t

    def test_budget_schedule_grows(self):
        st0 = epoch_schedule(0, 1.0, 1.0, 1.5, q=2.0, alpha0=0.5, N0=1.0)
        st1 = epoch_schedule(1, 1.0, 1.0, 1.5, q=2.0, alpha0=0.5, N0=1.0)
        assert st1.N_t == st0.N_t * 2.0**3
        assert st1.alpha_t == st0.alpha_t * 2.0**-2

    def test_rejects_bad_args(self):
        p = make_univariate_holder(1.0, 1.0)
        with pytest.raises(ValueError):
            ripp_psgm_run(p, np.ones(1), 1.0, 1.0, 1.0, 1.0, 1.0, T=1)  # rho = 1
        with pytest.raises(ValueError):
            ripp_psgm_run(p, np.ones(1), 1.0, 1.0, 1.5, 1.0, 1.0, T=0)


class TestCertifiedInnerChain:
    def test_budget_certificates_hold_across_epochs(self):
        # with the certified inner solver, every accepted iterate really is
        # within delta_t of the true prox, including after mu doubles
        p = make_univariate_holder(1.0, 1.0)
        inner = InnerSolver.psgm_certified(R0=10.0)
        solved = []
        real_solve = inner.solve

        def checked_solve(pp, x, mu, delta, counter=None, on_iterate=None):
            z = real_solve(pp, x, mu, delta, counter=counter, on_iterate=on_iterate)
            solved.append(float(np.abs(z - pp.prox_F(np.asarray(x), mu))[0]) <= delta * (1 + 1e-9))
            return z

        inner.solve = checked_solve
        rippa_run(p, np.array([6.0]), 0.5, 0.4, 1.5, 1e-9, inner, max_epochs=4)
        assert len(solved) >= 4
        assert all(solved)


class TestPostprocess:
    def test_halving_stepsizes(self, monkeypatch):
        p = make_univariate_holder(1.0, 1.0)
        seen = []
        import proxpoint.rippa as rp

        real = rp.psgm.psgm_run

        def spy(pp, z0, anchor, alpha, mu, N, **kw):
            seen.append(alpha)
            return real(pp, z0, anchor, alpha, mu, N, **kw)

        monkeypatch.setattr(rp.psgm, "psgm_run", spy)
        postprocess(p, np.array([0.5]), 0.4, 1.0, 4, 3)
        assert_allclose(seen, [0.4, 0.2, 0.1])

    def test_sharp_distance_contract(self):
        # the certified floor beta L^2/(2 sigma) holds up to the anchor-pull
        # slack; the measured distance stays within twice the certificate and
        # meets it exactly in the large-mu regime the composed solver uses
        p = make_univariate_holder(1.0, 1.0)
        b = budget_wsm_phase2(0.5, 0.25, 1.0)
        out = postprocess(p, np.array([0.5]), 0.25, 1.0, b.N, 1)
        certified = 0.25 * 1.0 / (2.0 * 1.0)
        assert abs(out[0]) <= 2.0 * certified
        out_large_mu = postprocess(p, np.array([0.5]), 0.25, 64.0, b.N, 1)
        assert abs(out_large_mu[0]) <= certified

    def test_zero_calls_rejected(self):
        p = make_univariate_holder(1.0, 1.0)
        with pytest.raises(ValueError):
            postprocess(p, np.zeros(1), 0.4, 1.0, 4, 0)


class TestPredictEpochCount:
    def test_sharp_plugged_numbers(self):
        # mu0 d0 = 1, eps = 1e-3, rho = 2, K0 = 1, 12 d0 / sigma = 12 -> 9
        g = GrowthModel(1.0, 1.0)
        assert predict_epoch_count(g, 1.0, 1.0, 2.0, 1e-3, r0=0.5) == 9

    def test_quadratic_case(self):
        g = GrowthModel(2.0, 1.0)
        K0 = math.ceil(3.0 / (1.0 * 1.0))
        expected = math.ceil(math.log(1.0 / 1e-4) / 1.5) + K0
        assert predict_epoch_count(g, 1.0, 1.0, 1.5, 1e-4, r0=3.0) == expected

    def test_monotone_in_accuracy(self):
        g = GrowthModel(4.0, 0.5)
        counts = [predict_epoch_count(g, 1.0, 1.0, 1.5, eps, r0=2.0)
                  for eps in (1e-1, 1e-2, 1e-3)]
        assert counts[0] <= counts[1] <= counts[2]

    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            predict_epoch_count(GrowthModel(1.0, 1.0), 1.0, 1.0, 1.0, 1e-3, r0=1.0)


class TestHighGrowthExponent:
    def test_exact_steps_scale_like_inverse_square(self):
        # iterations-to-eps on F = |x|^4/4 fit slope gamma - 2 = 2 on log-log
        p = make_univariate_holder(4.0, 1.0)
        counts = []
        for eps in (1e-1, 1e-2):
            x = np.array([1.0])
            k = 0
            while abs(x[0]) > eps:
                x = p.prox_F(x, 1.0)
                k += 1
            counts.append(k)
        slope = math.log(counts[1] / counts[0]) / math.log(10.0)
        assert abs(slope - 2.0) < 0.3
