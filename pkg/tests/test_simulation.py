import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from shrinkvar.simulation import (
    SCENARIOS,
    ScenarioConfig,
    draw_coefficients,
    export_replication,
    replication_seed,
    rescale_stationary,
    scenario,
    simulate_replication,
)
from shrinkvar.var_core import build_design, spectral_radius


def test_presets_match_design_table():
    s1, s2, s3 = (SCENARIOS[k] for k in "123")
    assert (s1.d, s1.p_star, s1.p_fit, s1.sigma_eps2) == (3, 1, 4, 0.05)
    assert (s2.d, s2.p_star, s2.p_fit, s2.sigma_eps2) == (20, 1, 1, 0.10)
    assert (s3.d, s3.p_star, s3.p_fit, s3.sigma_eps2) == (20, 1, 4, 0.10)
    for s in (s1, s2, s3):
        assert (s.sparsity, s.T_train, s.H, s.burn_in, s.n_rep) == (0.70, 180, 20, 50, 50)


def test_unknown_scenario():
    with pytest.raises(ValueError):
        scenario("7")


@pytest.mark.parametrize(
    "kw", [dict(sparsity=1.5), dict(sparsity=-0.1), dict(p_fit=0), dict(sigma_eps2=0.0), dict(d=0)]
)
def test_config_validation(kw):
    base = dict(name="x", d=2, p_star=1, p_fit=1, sparsity=0.5, sigma_eps2=0.1)
    with pytest.raises(ValueError):
        ScenarioConfig(**{**base, **kw})


class TestDrawCoefficients:
    def test_full_sparsity(self):
        np.testing.assert_array_equal(draw_coefficients(np.random.default_rng(0), 5, 1.0), 0.0)

    def test_no_sparsity(self):
        A = draw_coefficients(np.random.default_rng(0), 30, 0.0)
        assert np.all(A != 0) and np.all(np.abs(A) < 0.4)

    def test_zero_fraction(self):
        rng = np.random.default_rng(11)
        frac = np.mean([np.mean(draw_coefficients(rng, 20, 0.7) == 0) for _ in range(200)])
        assert abs(frac - 0.70) <= 0.01

    @pytest.mark.parametrize("s", [-0.01, 1.01])
    def test_bad_sparsity(self, s):
        with pytest.raises(ValueError):
            draw_coefficients(np.random.default_rng(0), 3, s)


class TestRescale:
    def test_scaled_identity(self):
        np.testing.assert_allclose(rescale_stationary(0.5 * np.eye(2)), np.eye(2) / 1.1, atol=1e-12)
        assert rescale_stationary(0.5 * np.eye(2))[0, 0] == pytest.approx(0.9091, abs=1e-4)

    def test_zero(self):
        np.testing.assert_array_equal(rescale_stationary(np.zeros((3, 3))), 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_radius(self, seed):
        A = draw_coefficients(np.random.default_rng(seed), 3, 0.3)
        assert spectral_radius(rescale_stationary(A)) == pytest.approx(1 / 1.1, abs=1e-6)


class TestSimulateReplication:
    cfg = scenario("1")

    def test_shapes(self):
        rep = simulate_replication(self.cfg, 0)
        assert rep.train.shape == (180, 3) and rep.test.shape == (20, 3)
        assert rep.B_true_padded.shape == (3, 12)
        np.testing.assert_array_equal(rep.B_true_padded[:, 3:], 0.0)
        np.testing.assert_array_equal(rep.B_true_padded[:, :3], rep.A1)
        assert rep.beta_true.shape == (36,)

    def test_deterministic(self):
        a, b = simulate_replication(self.cfg, 3), simulate_replication(self.cfg, 3)
        assert a.seed == b.seed
        for f in ("train", "test", "A1", "B_true_padded"):
            assert np.array_equal(getattr(a, f), getattr(b, f))

    def test_replications_and_scenarios_differ(self):
        assert replication_seed(self.cfg, 0) != replication_seed(self.cfg, 1)
        other = self.cfg.with_overrides(name="other")
        assert replication_seed(self.cfg, 0) != replication_seed(other, 0)

    def test_contiguous_split(self):
        rep = simulate_replication(self.cfg, 1)
        # the first test point follows the last training point through A1
        full = np.vstack([rep.train, rep.test])
        des = build_design(full, 1)
        resid = des.Y - des.X @ rep.A1.T
        assert np.std(resid) == pytest.approx(np.sqrt(0.05), rel=0.1)

    def test_stable_generator(self):
        for i in range(5):
            rep = simulate_replication(self.cfg, i)
            assert spectral_radius(rep.A1) < 1

    def test_noise_scale_is_linear(self):
        # same seed, smaller innovations: the whole path shrinks proportionally toward 0
        small = simulate_replication(self.cfg.with_overrides(sigma_eps2=0.05e-12), 2)
        big = simulate_replication(self.cfg, 2)
        np.testing.assert_allclose(small.train, big.train * 1e-6, rtol=1e-9, atol=1e-20)
        assert np.max(np.abs(small.train)) < 1e-5

    def test_noiseless_recursion_decays(self):
        rep = simulate_replication(self.cfg, 0)
        y = np.ones(3)
        norms = []
        for _ in range(200):
            y = rep.A1 @ y
            norms.append(np.linalg.norm(y))
        assert norms[-1] < 1e-6
        # block maxima decrease monotonically
        blocks = np.array(norms).reshape(20, 10).max(axis=1)
        assert np.all(np.diff(blocks) < 0)

    def test_lag1_autocovariance(self):
        cfg = self.cfg
        errs = []
        for i in range(50):
            rep = simulate_replication(cfg, i)
            y = rep.train
            g1 = y[1:].T @ y[:-1] / (len(y) - 1)
            g0 = solve_discrete_lyapunov(rep.A1, cfg.sigma_eps2 * np.eye(cfg.d))
            errs.append((g1, rep.A1 @ g0))
        pooled = np.mean([e[0] for e in errs], axis=0)
        target = np.mean([e[1] for e in errs], axis=0)
        rel = np.linalg.norm(pooled - target) / np.linalg.norm(target)
        assert rel < 0.15


def test_export(tmp_path):
    rep = simulate_replication(scenario("1"), 4)
    paths = export_replication(rep, tmp_path)
    assert [p.name for p in paths] == ["rep004_train.csv", "rep004_test.csv", "rep004_coef.csv"]
    train = np.loadtxt(paths[0], delimiter=",", skiprows=1)
    np.testing.assert_array_equal(train, rep.train)
    coef = np.loadtxt(paths[2], delimiter=",", skiprows=1)
    np.testing.assert_array_equal(coef, rep.B_true_padded)
