import numpy as np
import pytest

from fundlift.stats import (
    SeparationError,
    average_marginal_effects,
    cohens_kappa,
    fit_conditional_logit,
    fit_logistic,
    fit_ols,
    ks_test,
    pca,
    wald_test,
)


def logit(p):
    return np.log(p / (1 - p))


class TestLogistic:
    def test_intercept_only_balanced(self):
        y = np.array([0.0, 1.0] * 50)
        fit = fit_logistic(np.empty((100, 0)), y)
        assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-10)
        assert fit.mcfadden_r2 == pytest.approx(0.0, abs=1e-10)

    def test_saturated_binary_closed_form(self):
        # P(y|x=0) = 0.4 over 200 rows, P(y|x=1) = 0.8 over 200 rows
        x = np.repeat([0.0, 1.0], 200)
        y = np.concatenate([
            np.tile([1, 0, 0, 1, 0], 40),   # mean 0.4
            np.tile([1, 1, 1, 1, 0], 40),   # mean 0.8
        ]).astype(float)
        fit = fit_logistic(x.reshape(-1, 1), y)
        assert fit.coefficients[0] == pytest.approx(logit(0.4), abs=1e-8)
        assert fit.coefficients[1] == pytest.approx(logit(0.8) - logit(0.4), abs=1e-8)
        assert fit.gradient_norm < 1e-8

    def test_perfect_separation_detected(self):
        x = np.concatenate([-np.abs(np.random.default_rng(0).normal(size=50)) - 0.1,
                            np.abs(np.random.default_rng(1).normal(size=50)) + 0.1])
        y = (x > 0).astype(float)
        with pytest.raises(SeparationError):
            fit_logistic(x.reshape(-1, 1), y)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(300, 3))
        beta_true = np.array([0.3, -0.5, 0.8, 0.2])
        p = 1 / (1 + np.exp(-(beta_true[0] + X @ beta_true[1:])))
        y = (rng.random(300) < p).astype(float)
        Xd = np.column_stack([np.ones(300), X])

        def loglik(b):
            mu = 1 / (1 + np.exp(-(Xd @ b)))
            mu = np.clip(mu, 1e-12, 1 - 1e-12)
            return np.sum(y * np.log(mu) + (1 - y) * np.log(1 - mu))

        b0 = np.array([0.1, 0.2, -0.1, 0.05])
        mu = 1 / (1 + np.exp(-(Xd @ b0)))
        analytic = Xd.T @ (y - mu)
        eps = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = eps
            numeric = (loglik(b0 + e) - loglik(b0 - e)) / (2 * eps)
            assert numeric == pytest.approx(analytic[j], rel=1e-6)

    def test_missing_cells_rejected(self):
        X = np.array([[1.0], [np.nan], [2.0], [0.5]])
        with pytest.raises(ValueError, match="missing"):
            fit_logistic(X, np.array([0.0, 1.0, 0.0, 1.0]))


class TestAme:
    def test_binary_discrete_difference(self):
        x = np.repeat([0.0, 1.0], 200)
        y = np.concatenate([
            np.tile([1, 0, 0, 1, 0], 40),
            np.tile([1, 1, 1, 1, 0], 40),
        ]).astype(float)
        fit = fit_logistic(x.reshape(-1, 1), y)
        report = average_marginal_effects(fit, x.reshape(-1, 1), kinds=["binary"])
        assert report.rows[0].estimate == pytest.approx(0.8 - 0.4, abs=1e-8)

    def test_zero_coefficient_zero_ame(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(400, 2))
        y = (rng.random(400) < 0.5).astype(float)
        fit = fit_logistic(X, y)
        fit.coefficients[1] = 0.0
        report = average_marginal_effects(fit, X, kinds=["continuous", "continuous"])
        assert report.rows[0].estimate == 0.0

    def test_continuous_ame_matches_finite_difference_oracle(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(500, 2))
        p = 1 / (1 + np.exp(-(0.2 + X @ np.array([0.7, -0.4]))))
        y = (rng.random(500) < p).astype(float)
        fit = fit_logistic(X, y)
        report = average_marginal_effects(fit, X, kinds=["continuous", "continuous"])
        beta = fit.coefficients
        eps = 1e-7
        for j in range(2):
            Xp, Xm = X.copy(), X.copy()
            Xp[:, j] += eps
            Xm[:, j] -= eps
            pp = 1 / (1 + np.exp(-(beta[0] + Xp @ beta[1:])))
            pm = 1 / (1 + np.exp(-(beta[0] + Xm @ beta[1:])))
            oracle = np.mean((pp - pm) / (2 * eps))
            assert report.rows[j].estimate == pytest.approx(oracle, abs=1e-8)

    def test_binary_ame_equals_counterfactual_flip(self):
        rng = np.random.default_rng(8)
        X = np.column_stack([
            rng.integers(0, 2, size=400).astype(float), rng.normal(size=400),
        ])
        p = 1 / (1 + np.exp(-(-0.3 + X @ np.array([0.9, 0.5]))))
        y = (rng.random(400) < p).astype(float)
        fit = fit_logistic(X, y)
        report = average_marginal_effects(fit, X, kinds=["binary", "continuous"])
        beta = fit.coefficients
        X1, X0 = X.copy(), X.copy()
        X1[:, 0], X0[:, 0] = 1.0, 0.0
        p1 = 1 / (1 + np.exp(-(beta[0] + X1 @ beta[1:])))
        p0 = 1 / (1 + np.exp(-(beta[0] + X0 @ beta[1:])))
        assert report.rows[0].estimate == float(np.mean(p1 - p0))

    def test_undeclared_kind_rejected(self):
        x = np.repeat([0.0, 1.0], 50)
        y = np.tile([0, 1], 50).astype(float)
        fit = fit_logistic(x.reshape(-1, 1), y)
        with pytest.raises(ValueError, match="kind"):
            average_marginal_effects(fit, x.reshape(-1, 1), kinds=["mystery"])


class TestOls:
    def test_exact_line(self):
        x = np.arange(10, dtype=float)
        fit = fit_ols(x.reshape(-1, 1), 2 * x)
        assert fit.coefficients[1] == pytest.approx(2.0, abs=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_noisy_slope_within_three_ses(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=1000)
        y = x + rng.normal(0, 0.1, size=1000)
        fit = fit_ols(x.reshape(-1, 1), y)
        assert abs(fit.coefficients[1] - 1.0) < 3 * fit.std_errors[1]

    def test_duplicate_column_rank_error(self):
        x = np.arange(10, dtype=float)
        X = np.column_stack([x, x])
        with pytest.raises(ValueError, match="rank"):
            fit_ols(X, x)


class TestConditionalLogit:
    def test_closed_form_single_binary_difference(self):
        pairs = [(0, np.array([1.0]), np.array([0.0]))] * 83 \
            + [(1, np.array([1.0]), np.array([0.0]))] * 17
        fit = fit_conditional_logit(pairs)
        assert fit.coefficients[0] == pytest.approx(np.log(83 / 17), abs=1e-6)
        assert fit.pair_probabilities[0] == pytest.approx(0.83, abs=1e-8)

    def test_even_split_zero_coefficient(self):
        pairs = [(0, np.array([1.0]), np.array([0.0]))] * 50 \
            + [(1, np.array([1.0]), np.array([0.0]))] * 50
        fit = fit_conditional_logit(pairs)
        assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-10)

    def test_equals_intercept_free_logistic_on_differences(self):
        rng = np.random.default_rng(10)
        beta_true = np.array([0.9, -0.4])
        pairs = []
        for _ in range(400):
            a0 = rng.integers(0, 2, 2).astype(float)
            a1 = rng.integers(0, 2, 2).astype(float)
            u = (a0 - a1) @ beta_true
            chosen = 0 if rng.random() < 1 / (1 + np.exp(-u)) else 1
            pairs.append((chosen, a0, a1))
        fit = fit_conditional_logit(pairs)
        from fundlift.stats import _newton_logistic
        D = np.vstack([a0 - a1 for _, a0, a1 in pairs])
        yv = np.array([1.0 if c == 0 else 0.0 for c, _, _ in pairs])
        beta_direct, _, _, _, _ = _newton_logistic(D, yv)
        assert np.max(np.abs(fit.coefficients - beta_direct)) < 1e-10

    def test_probabilities_sum_to_one(self):
        pairs = (
            [(0, np.array([1.0, 0.0]), np.array([0.0, 1.0]))] * 30
            + [(1, np.array([1.0, 0.0]), np.array([0.0, 1.0]))] * 10
            + [(0, np.array([1.0, 0.0]), np.array([0.0, 0.0]))] * 25
            + [(1, np.array([1.0, 0.0]), np.array([0.0, 0.0]))] * 6
            + [(0, np.array([0.0, 1.0]), np.array([0.0, 0.0]))] * 18
            + [(1, np.array([0.0, 1.0]), np.array([0.0, 0.0]))] * 11
        )
        fit = fit_conditional_logit(pairs)
        p_first = fit.pair_probabilities
        assert np.all((p_first > 0) & (p_first < 1))

    def test_all_zero_differences_unidentified(self):
        pairs = [(0, np.array([1.0]), np.array([1.0]))] * 5
        with pytest.raises(ValueError, match="unidentified"):
            fit_conditional_logit(pairs)


class TestWald:
    class FakeFit:
        def __init__(self, beta, cov):
            self.coefficients = np.asarray(beta)
            self.covariance = np.asarray(cov)

    def test_equal_coefficients_zero_statistic(self):
        fit = self.FakeFit([1.5, 1.5], np.eye(2))
        stat, p = wald_test(fit, [1.0, -1.0])
        assert stat == 0.0 and p == 1.0

    def test_hand_case(self):
        fit = self.FakeFit([2.0, 0.0], np.eye(2))
        stat, p = wald_test(fit, [1.0, -1.0])
        assert stat == pytest.approx(2.0, abs=1e-12)
        assert 0 < p < 1

    def test_zero_variance_direction_errors(self):
        fit = self.FakeFit([1.0, 1.0], np.zeros((2, 2)))
        with pytest.raises(ValueError, match="variance"):
            wald_test(fit, [1.0, -1.0])


class TestPca:
    def test_collinear_first_ratio_one(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=200)
        X = np.column_stack([x, 2 * x])
        model = pca(X, k=1)
        assert model.explained_variance_ratios[0] == pytest.approx(1.0, abs=1e-10)

    def test_isotropic_ratios_half(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(20000, 2))
        model = pca(X, k=2)
        assert model.explained_variance_ratios[0] == pytest.approx(0.5, abs=0.05)
        assert model.explained_variance_ratios[1] == pytest.approx(0.5, abs=0.05)

    def test_ratios_sum_to_one_and_nonincreasing(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(100, 6)) @ rng.normal(size=(6, 6))
        model = pca(X, k=6)
        r = model.explained_variance_ratios
        assert r.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(r) <= 1e-12)

    def test_full_reconstruction(self):
        rng = np.random.default_rng(14)
        X = rng.normal(size=(60, 4))
        model = pca(X, k=4)
        Z = (X - model.means) / model.scales
        recon = model.transform(X) @ model.loadings.T
        assert np.max(np.abs(recon - Z)) < 1e-8

    def test_zero_variance_column_dropped_with_warning(self):
        rng = np.random.default_rng(15)
        X = np.column_stack([rng.normal(size=50), np.full(50, 3.0)])
        with pytest.warns(UserWarning, match="zero-variance"):
            model = pca(X, k=1)
        assert model.loadings.shape == (1, 1)

    def test_sign_convention(self):
        rng = np.random.default_rng(16)
        X = rng.normal(size=(300, 3))
        model = pca(X, k=3)
        for j in range(3):
            col = model.loadings[:, j]
            assert col[np.argmax(np.abs(col))] > 0


class TestKappa:
    def test_identical_lists(self):
        assert cohens_kappa([1, 0, 1], [1, 0, 1]) == 1.0

    def test_hand_case(self):
        a = [True, True, False, False]
        b = [True, False, False, False]
        assert cohens_kappa(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_independent_flips_near_zero(self):
        rng = np.random.default_rng(17)
        a = rng.integers(0, 2, 10000).tolist()
        b = rng.integers(0, 2, 10000).tolist()
        assert abs(cohens_kappa(a, b)) < 0.05

    def test_constant_equal_raters(self):
        assert cohens_kappa(["x"] * 5, ["x"] * 5) == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(18)
        a = rng.integers(0, 2, 100).tolist()
        b = rng.integers(0, 2, 100).tolist()
        assert cohens_kappa(a, b) == cohens_kappa(b, a)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            cohens_kappa([1], [1, 0])


class TestKs:
    def test_identical_samples(self):
        d, p = ks_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert d == 0.0 and p == 1.0

    def test_disjoint_supports(self):
        d, _ = ks_test([1, 2, 3, 4], [5, 6, 7, 8])
        assert d == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(19)
        a, b = rng.normal(size=80), rng.normal(1, 1, size=60)
        assert ks_test(a, b) == ks_test(b, a)

    def test_null_simulation_pass_rate(self):
        rng = np.random.default_rng(20)
        hits = 0
        for _ in range(100):
            a = rng.normal(size=500)
            b = rng.normal(size=500)
            _, p = ks_test(a, b)
            hits += p > 0.10
        assert hits >= 85

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            ks_test([], [1.0])
