import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinkvar.freq_estimators import (
    InsufficientDataError,
    RankDeficiencyError,
    diagonal_target_intensity,
    ns_fit,
    ridge_fit,
    ridge_objective,
)
from shrinkvar.metrics import param_rmse
from shrinkvar.simulation import scenario, simulate_replication
from shrinkvar.var_core import LaggedDesign, VarSpec, build_design, coef_to_flat


def _design(X, Y):
    X, Y = np.atleast_2d(np.asarray(X, float)), np.atleast_2d(np.asarray(Y, float))
    return LaggedDesign(X=X, Y=Y, spec=VarSpec(Y.shape[1], X.shape[1] // Y.shape[1]))


@pytest.fixture(scope="module")
def rep1():
    return simulate_replication(scenario("1"), 0)


class TestRidge:
    def test_lambda_zero_is_ols(self, rep1):
        des = build_design(rep1.train, 4)
        ols = np.linalg.lstsq(des.X, des.Y, rcond=None)[0].T
        np.testing.assert_allclose(ridge_fit(des, 0.0).B_hat, ols, atol=1e-10)

    def test_scalar_hand_value(self):
        des = _design([[1.0], [2.0], [3.0]], [[2.0], [4.0], [6.0]])
        assert ridge_fit(des, 0.1).B_hat[0, 0] == pytest.approx(28 / 14.1, rel=1e-12)

    def test_huge_penalty(self, rep1):
        des = build_design(rep1.train, 4)
        assert np.linalg.norm(ridge_fit(des, 1e9).B_hat) < 1e-3

    def test_rank_deficient(self):
        X = np.ones((5, 2))
        with pytest.raises(RankDeficiencyError):
            ridge_fit(_design(X, np.ones((5, 1))), 0.0)
        # any positive penalty succeeds
        assert np.all(np.isfinite(ridge_fit(_design(X, np.ones((5, 1))), 1e-6).B_hat))

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            ridge_fit(LaggedDesign.empty(2, 1))

    @pytest.mark.parametrize("p", [1, 2])
    def test_noiseless_recovery(self, p):
        rng = np.random.default_rng(p)
        d = 3
        B = rng.uniform(-0.3, 0.3, size=(d, d * p))
        # several short noiseless paths from random starts give a full-rank design
        parts = []
        for _ in range(8):
            y = list(rng.normal(size=(p, d)))
            for _ in range(6):
                y.append(B @ np.concatenate(y[::-1][:p]))
            parts.append(build_design(np.array(y), p))
        des = _design(np.vstack([q.X for q in parts]), np.vstack([q.Y for q in parts]))
        assert np.max(np.abs(ridge_fit(des, 1e-8).B_hat - B)) < 1e-6

    def test_norm_decreases_with_lambda(self, rep1):
        des = build_design(rep1.train, 4)
        norms = [np.linalg.norm(ridge_fit(des, lam).B_hat) for lam in (0.0, 0.1, 1.0, 10.0, 100.0)]
        assert np.all(np.diff(norms) < 0)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), lam=st.floats(1e-3, 50.0))
    def test_minimises_objective(self, seed, lam):
        rng = np.random.default_rng(seed)
        des = _design(rng.normal(size=(30, 6)), rng.normal(size=(30, 3)))
        B = ridge_fit(des, lam).B_hat
        f0 = ridge_objective(B, des, lam)
        for _ in range(5):
            assert ridge_objective(B + 1e-3 * rng.normal(size=B.shape), des, lam) >= f0

    def test_glmnet_mode(self, rep1):
        des = build_design(rep1.train, 4)
        X, Y = des.X, des.Y
        n = X.shape[0]
        sd = X.std(axis=0)
        Xs = (X - X.mean(0)) / sd
        Yc = Y - Y.mean(0)
        lam = 0.1
        # first-order condition of RSS/(2n) + lam/2 ||B_std||^2
        Bs = ridge_fit(des, lam, scaling="glmnet").B_hat.T * sd[:, None]
        grad = -Xs.T @ (Yc - Xs @ Bs) / n + lam * Bs
        assert np.max(np.abs(grad)) < 1e-10
        assert np.linalg.norm(Bs) < np.linalg.norm(np.linalg.lstsq(Xs, Yc, rcond=None)[0])

    def test_bad_scaling(self, rep1):
        with pytest.raises(ValueError):
            ridge_fit(build_design(rep1.train, 1), scaling="bogus")


class TestNS:
    def test_zero_intensity_is_centered_ols(self, rep1):
        des = build_design(rep1.train, 2)
        Xc, Yc = des.X - des.X.mean(0), des.Y - des.Y.mean(0)
        ols = np.linalg.lstsq(Xc, Yc, rcond=None)[0].T
        np.testing.assert_allclose(ns_fit(des, intensity=0.0).B_hat, ols, atol=1e-10)

    def test_full_intensity_is_univariate_slopes(self, rep1):
        des = build_design(rep1.train, 2)
        Xc, Yc = des.X - des.X.mean(0), des.Y - des.Y.mean(0)
        slopes = (Xc.T @ Yc / np.sum(Xc**2, axis=0)[:, None]).T
        np.testing.assert_allclose(ns_fit(des, intensity=1.0).B_hat, slopes, atol=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError):
            ns_fit(_design(np.ones((2, 2)), np.ones((2, 2))))

    def test_intensity_range(self):
        with pytest.raises(ValueError):
            ns_fit(build_design(np.random.default_rng(0).normal(size=(20, 2)), 1), intensity=1.5)

    def test_intensity_on_independent_columns(self):
        # with independent columns the off-diagonal covariances are pure noise, so shrink hard
        Z = np.random.default_rng(1).normal(size=(40, 6))
        assert diagonal_target_intensity(Z) > 0.5

    def test_intensity_on_strong_correlation(self):
        rng = np.random.default_rng(2)
        f = rng.normal(size=(500, 1))
        Z = f + 0.1 * rng.normal(size=(500, 5))
        assert diagonal_target_intensity(Z) < 0.05

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        y = rng.normal(size=(80, 3)).cumsum(axis=0) * 0.1 + rng.normal(size=(80, 3))
        perm = np.array([2, 0, 1])
        a = ns_fit(build_design(y, 1)).B_hat
        b = ns_fit(build_design(y[:, perm], 1)).B_hat
        np.testing.assert_allclose(b, a[np.ix_(perm, perm)], atol=1e-10)

    def test_scenario2_paired_with_ridge(self):
        errs = []
        for i in range(3):
            rep = simulate_replication(scenario("2"), i)
            des = build_design(rep.train, 1)
            fit = ns_fit(des)
            assert 0.0 < fit.shrink_intensity < 1.0
            truth = coef_to_flat(rep.B_true_padded)
            e_ns = param_rmse(coef_to_flat(fit.B_hat), truth)
            e_ridge = param_rmse(coef_to_flat(ridge_fit(des).B_hat), truth)
            errs.append(abs(e_ns - e_ridge) / e_ridge)
        assert max(errs) <= 0.25
