import numpy as np
import pytest

from ccgi import (NoiseConfig, DriftModel, ParameterError, SolverDivergenceError, TvOptions,
                  build_ensemble, differential_matrix, make_double_slit, rel_error,
                  simulate_record, normalize, tv_admm)
from ccgi.solvers import dtd_dense, grad2d, grad2d_adjoint, tv_value
from conftest import BETA, PITCH_X, PITCH_Y, SLIT_SEPARATION, SLIT_WIDTH, blocks_16x16
from oracles import tv_min_fista, tv_objective


def delta_matrix(n, m, seed):
    return differential_matrix(build_ensemble(n, m, seed=seed)).astype(float)


class TestDifferenceOperator:
    @pytest.mark.parametrize("boundary", ["zero", "replicate"])
    def test_adjoint_identity(self, boundary):
        rng = np.random.default_rng(0)
        for _ in range(100):
            x = rng.normal(size=(7, 5))
            w = rng.normal(size=(2, 7, 5))
            lhs = float((grad2d(x, boundary) * w).sum())
            rhs = float((x * grad2d_adjoint(w, boundary)).sum())
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    @pytest.mark.parametrize("boundary", ["zero", "replicate"])
    def test_dense_normal_matrix_matches_operator(self, boundary):
        rng = np.random.default_rng(1)
        shape = (6, 9)
        K = dtd_dense(shape, boundary)
        for _ in range(10):
            x = rng.normal(size=shape)
            via_op = grad2d_adjoint(grad2d(x, boundary), boundary).ravel()
            np.testing.assert_allclose(K @ x.ravel(), via_op, atol=1e-12)

    def test_zero_boundary_penalizes_edges(self):
        x = np.ones((3, 3))
        assert tv_value(x, "replicate") == 0.0
        assert tv_value(x, "zero") == 6.0  # last row + last column magnitudes


class TestTvAdmmBasics:
    def test_identity_sensing_strong_data_term(self):
        img = blocks_16x16()
        y = img.ravel().copy()
        out = tv_admm(np.eye(256), y, (16, 16),
                      TvOptions(mu=1e6, max_outer=400, rel_change_tol=1e-12))
        err = np.linalg.norm(out.values - img) / np.linalg.norm(img)
        assert err < 1e-4

    def test_constant_image_zero_tv(self):
        # shift-invariant boundary: a consistent constant image is a
        # zero-TV feasible point and the solver returns it
        y = np.full(9, 2.5)
        out = tv_admm(np.eye(9), y, (3, 3),
                      TvOptions(boundary="replicate", max_outer=500, rel_change_tol=1e-12))
        assert tv_value(out.values, "replicate") < 1e-8
        np.testing.assert_allclose(out.values, 2.5, rtol=1e-6)

    def test_zero_measurement_returns_zero(self):
        out = tv_admm(delta_matrix(16, 8, 0), np.zeros(8), (4, 4))
        np.testing.assert_array_equal(out.values, np.zeros((4, 4)))
        assert out.iterations == 0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            tv_admm(delta_matrix(16, 8, 0), np.zeros(8), (4, 5))

    def test_nonneg_projection(self):
        A = delta_matrix(256, 100, 3)
        img = blocks_16x16()
        y = A @ img.ravel()
        out = tv_admm(A, y, (16, 16), TvOptions(nonneg=True))
        assert out.values.min() >= 0.0


class TestTvReconstruction:
    def test_double_slit_noiseless(self):
        # reference instance: 32x64 double slit, 600 differential rows
        phantom = make_double_slit(rows=32, cols=64, pitch_x=PITCH_X, pitch_y=PITCH_Y,
                                   slit_width_obj=SLIT_WIDTH,
                                   separation_obj=SLIT_SEPARATION, beta=BETA)
        A = delta_matrix(2048, 600, 42)
        kappa = 4000.0 / phantom.values.sum()
        y = kappa * (A @ phantom.ravel())
        out = tv_admm(A, y, (32, 64), TvOptions(max_outer=1000, rel_change_tol=1e-6))
        assert rel_error(out, phantom) < 1e-2

    def test_oracle_objective_agreement_16x16(self):
        # independent accelerated proximal-gradient minimizer of the same
        # objective; both must land on the same optimum
        img = blocks_16x16()
        A = delta_matrix(256, 100, 5)
        y = A @ img.ravel()
        mu = 256.0 / np.abs(y).mean()
        opts = TvOptions(mu=mu, max_outer=4000, rel_change_tol=1e-11)
        out = tv_admm(A, y, (16, 16), opts)
        obj_admm = tv_objective(out.values, A, y, mu, "zero")
        x_star = tv_min_fista(A, y, (16, 16), mu, "zero", outer=5000, prox_iters=40)
        obj_star = tv_objective(x_star, A, y, mu, "zero")
        assert abs(obj_admm - obj_star) < 1e-3
        assert abs(obj_admm - obj_star) / obj_star < 1e-3


class TestTvProperties:
    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scale_equivariance(self, c):
        A = delta_matrix(256, 128, 3)
        img = blocks_16x16()
        y = A @ img.ravel()
        opts = TvOptions(max_outer=400, rel_change_tol=1e-12)
        base = tv_admm(A, y, (16, 16), opts)
        scaled = tv_admm(A, c * y, (16, 16), opts)
        err = (np.linalg.norm(scaled.values - c * base.values)
               / np.linalg.norm(c * base.values))
        assert err < 1e-6

    def test_objective_settles_monotone(self):
        # the alternating scheme's objective oscillates with decaying
        # amplitude early on; after the burn-in it decreases monotonically
        # and ends far below the early values
        A = delta_matrix(256, 100, 9)
        img = blocks_16x16()
        y = A @ img.ravel()
        out = tv_admm(A, y, (16, 16), TvOptions(max_outer=300, rel_change_tol=1e-12))
        hist = np.array(out.objective_history)
        tail = hist[200:]
        diffs = np.diff(tail)
        assert (diffs <= 1e-10 * np.abs(tail[:-1])).all()
        assert hist[-1] <= hist[5]

    def test_direct_and_cg_paths_agree(self):
        A = delta_matrix(256, 100, 11)
        img = blocks_16x16()
        rng = np.random.default_rng(0)
        y = A @ img.ravel() + rng.normal(0, 0.5, size=100)
        fixed = dict(max_outer=30, rel_change_tol=1e-15)
        direct = tv_admm(A, y, (16, 16), TvOptions(x_step="direct", **fixed))
        cg = tv_admm(A, y, (16, 16), TvOptions(x_step="cg", cg_tol=1e-12, **fixed))
        assert direct.iterations == cg.iterations == 30
        err = np.linalg.norm(direct.values - cg.values) / np.linalg.norm(direct.values)
        assert err < 1e-7

    def test_replicate_boundary_returns_zero_mean_for_differential(self):
        # differential rows sum to zero: the constant component is
        # unobservable and the solver pins it to zero mean
        A = delta_matrix(256, 100, 13)
        img = blocks_16x16()
        y = A @ img.ravel()
        out = tv_admm(A, y, (16, 16), TvOptions(boundary="replicate"))
        assert abs(out.values.mean()) < 1e-8

    def test_divergence_guard_trips_after_ten_rises(self):
        from ccgi.solvers import _DivergenceGuard

        guard = _DivergenceGuard()
        guard.update(5.0, 1)
        with pytest.raises(SolverDivergenceError) as info:
            for k in range(10):
                guard.update(5.0 + k + 1, k + 2)
        assert info.value.iteration == 11
        assert len(info.value.objective_tail) == 11

    def test_divergence_guard_resets_on_decrease(self):
        from ccgi.solvers import _DivergenceGuard

        guard = _DivergenceGuard()
        guard.update(5.0, 1)
        for cycle in range(30):  # up 9, down 1, never 10 in a row
            for k in range(9):
                guard.update(5.0 + k, 2 + cycle * 10 + k)
            guard.update(1.0, 11 + cycle * 10)
        assert guard.rise == 0


class TestNormalizedAndRawAgree:
    def test_drift_cancellation_reaches_reconstruction(self, slit_phantom):
        # noiseless per-pair drift: the normalized drifted vector equals the
        # drift-free vector times mean(g), and the solver is scale
        # equivariant, so the two reconstructions agree up to that one
        # fitted scale
        from ccgi import raw_vectors

        ens = build_ensemble(2048, 300, seed=21)
        cfg = NoiseConfig(shot_noise=False)
        clean = simulate_record(ens, slit_phantom, cfg,
                                DriftModel(sine_amplitude=0.0, walk_sigma=0.0), seed=0)
        drifted = simulate_record(ens, slit_phantom, cfg,
                                  DriftModel(sine_amplitude=0.1, walk_sigma=0.005, seed=17),
                                  seed=0)
        A = differential_matrix(ens).astype(float)
        opts = TvOptions(max_outer=200)
        a = tv_admm(A, normalize(drifted).delta, (32, 64), opts).ravel()
        b = tv_admm(A, raw_vectors(clean).delta, (32, 64), opts).ravel()
        c = float(a @ b) / float(a @ a)
        assert np.linalg.norm(c * a - b) / np.linalg.norm(b) < 1e-10
