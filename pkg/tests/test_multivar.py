import numpy as np
import pytest

from littrend import multivar as mv
from littrend.errors import DegenerateInputError, ValidationError


def stable_var_data(seed, T=400, coefs=None, k=2):
    rng = np.random.default_rng(seed)
    if coefs is None:
        coefs = np.array([[[0.5, 0.1], [-0.2, 0.3]]])
    p = coefs.shape[0]
    y = np.zeros((T, k))
    for t in range(p, T):
        y[t] = sum(coefs[l] @ y[t - 1 - l] for l in range(p)) + rng.standard_normal(k)
    return y


def random_stable_var(seed, k=2, p=2, radius=0.7):
    rng = np.random.default_rng(seed)
    while True:
        coefs = rng.uniform(-0.6, 0.6, size=(p, k, k))
        comp = mv._companion(coefs)
        if np.abs(np.linalg.eigvals(comp)).max() < radius:
            return coefs


def cointegrated_pair(seed, T=500, alpha=-0.5, drift=1.0, slope=2.0):
    rng = np.random.default_rng(seed)
    y = np.zeros(T)
    x = np.zeros(T)
    for t in range(1, T):
        x[t] = drift + x[t - 1] + rng.standard_normal()
        y[t] = y[t - 1] + alpha * (y[t - 1] - slope * x[t - 1]) + rng.standard_normal()
    return np.column_stack([y, x])


class TestFitVar:
    def test_noiseless_exact_identification(self):
        coefs = np.array([[[0.6, 0.2], [-0.1, 0.4]]])
        y = np.zeros((50, 2))
        y[0] = [1.0, -0.5]
        for t in range(1, 50):
            y[t] = coefs[0] @ y[t - 1] + np.array([0.3, -0.2])
        model = mv.fit_var(y, 1)
        assert np.allclose(model.coefs, coefs, atol=1e-10)
        assert np.allclose(model.intercept, [0.3, -0.2], atol=1e-10)

    def test_matches_per_equation_ols_oracle(self):
        for seed in range(20):
            y = stable_var_data(seed, T=150)
            model = mv.fit_var(y, 2)
            Z = np.column_stack([np.ones(148), y[1:-1], y[:-2]])
            for eq in range(2):
                oracle = np.linalg.lstsq(Z, y[2:, eq], rcond=None)[0]
                mine = np.concatenate(
                    [[model.intercept[eq]], model.coefs[0, eq], model.coefs[1, eq]]
                )
                assert np.allclose(mine, oracle, atol=1e-8)

    def test_white_noise_t_ratios_stay_small(self):
        small = 0
        for seed in range(40):
            rng = np.random.default_rng(900 + seed)
            y = rng.standard_normal((300, 2))
            model = mv.fit_var(y, 1)
            zz_inv = np.linalg.inv(model.design.T @ model.design)
            ok = True
            for eq in range(2):
                se = np.sqrt(model.sigma_u[eq, eq] * np.diag(zz_inv))
                b = np.concatenate([[model.intercept[eq]], model.coefs[0, eq]])
                ok &= bool((np.abs(b / se)[1:] < 3).all())
            small += ok
        assert small / 40 >= 0.90

    def test_residual_covariance_divisor(self):
        y = stable_var_data(0, T=100)
        model = mv.fit_var(y, 2)
        t_eff = 98
        expected = model.residuals.T @ model.residuals / (t_eff - (2 * 2 + 1))
        assert np.allclose(model.sigma_u, expected)

    def test_too_short_sample(self):
        with pytest.raises(DegenerateInputError):
            mv.fit_var(np.random.default_rng(0).standard_normal((5, 2)), 2)

    def test_stability_flag_matches_companion(self):
        y = stable_var_data(1)
        model = mv.fit_var(y, 1)
        moduli = np.abs(model.eigenvalues)
        assert model.is_stable == bool((moduli < 1 - 1e-10).all())


class TestSelectLag:
    def test_white_noise_prefers_zero_by_sbic(self):
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(100 + seed)
            report = mv.select_lag(rng.standard_normal((500, 2)), 3)
            wins += report.winners["sbic"] == 0
        assert wins / 100 >= 0.90

    def test_var2_detected_by_aic_and_fpe(self):
        A1 = np.array([[0.2, 0.1], [0.0, 0.15]])
        A2 = np.array([[0.5, -0.3], [0.2, 0.4]])
        aic = fpe = 0
        n = 200
        for seed in range(n):
            y = stable_var_data(200 + seed, T=500, coefs=np.stack([A1, A2]))
            report = mv.select_lag(y, 3)
            aic += report.winners["aic"] == 2
            fpe += report.winners["fpe"] == 2
        assert aic / n >= 0.90
        assert fpe / n >= 0.90

    def test_lr_column_is_two_delta_ll(self):
        y = stable_var_data(5, T=200)
        report = mv.select_lag(y, 2)
        rows = report.rows
        for prev, cur in zip(rows, rows[1:]):
            assert cur.lr == pytest.approx(2 * (cur.loglik - prev.loglik), abs=1e-10)
            assert cur.df == 4

    def test_degenerate_sample_length(self):
        with pytest.raises(DegenerateInputError):
            mv.select_lag(np.random.default_rng(0).standard_normal((9, 2)), 4)


class TestCointegration:
    def test_johansen_critical_value_lookup(self):
        data = np.cumsum(np.random.default_rng(0).standard_normal((120, 3)), axis=0)
        report = mv.cointegration(data, "Johansen", lags=2)
        assert [r.crit_5pct for r in report.rows[:3]] == [29.68, 15.41, 3.76]
        # two-variable sub-hypothesis values
        pair = mv.cointegration(data[:, :2], "Johansen", lags=2)
        assert [r.crit_5pct for r in pair.rows[:2]] == [15.41, 3.76]

    def test_trace_statistics_weakly_decreasing(self):
        for seed in range(10):
            data = np.cumsum(np.random.default_rng(seed).standard_normal((150, 3)), axis=0)
            report = mv.cointegration(data, "Johansen", lags=2)
            traces = [r.trace_stat for r in report.rows if r.trace_stat is not None]
            assert all(a >= b - 1e-10 for a, b in zip(traces, traces[1:]))
            eigs = [r.eigenvalue for r in report.rows if r.eigenvalue is not None]
            assert all(0.0 <= e < 1.0 for e in eigs)

    def test_rank_one_detection_rate(self):
        hits = 0
        for seed in range(200):
            report = mv.cointegration(cointegrated_pair(1000 + seed), "Johansen", lags=2)
            hits += report.selected_rank == 1
        assert hits / 200 >= 0.90

    def test_engle_granger_critical_values_and_first_stage(self):
        data = cointegrated_pair(3, T=300)
        data3 = np.column_stack([data, np.cumsum(np.random.default_rng(9).standard_normal(300))])
        report = mv.cointegration(data3, "EngleGranger", lags=1)
        assert report.critical_values == (-4.29, -3.74, -3.45)
        assert report.first_stage["nobs"] == 300
        assert set(report.rejects_no_cointegration) == {"1%", "5%", "10%"}

    def test_engle_granger_size_on_independent_walks(self):
        nonrej = 0
        for seed in range(500):
            rng = np.random.default_rng(2000 + seed)
            data = np.cumsum(rng.standard_normal((200, 3)), axis=0)
            report = mv.cointegration(data, "EngleGranger", lags=1)
            nonrej += not report.rejects_no_cointegration["5%"]
        assert 0.92 <= nonrej / 500 <= 0.98

    def test_engle_granger_two_walk_size_uses_two_variable_row(self):
        nonrej = 0
        for seed in range(300):
            rng = np.random.default_rng(4000 + seed)
            data = np.cumsum(rng.standard_normal((200, 2)), axis=0)
            report = mv.cointegration(data, "EngleGranger", lags=1)
            assert report.critical_values == (-3.90, -3.34, -3.04)
            nonrej += not report.rejects_no_cointegration["5%"]
        assert 0.90 <= nonrej / 300 <= 0.99

    def test_single_variable_rejected(self):
        with pytest.raises(ValidationError):
            mv.cointegration(np.random.default_rng(0).standard_normal((50, 1)))


class TestVecm:
    def test_rank_zero_reduces_to_difference_var(self):
        data = cointegrated_pair(42)
        vecm = mv.fit_vecm(data, p=3, r=0)
        var_diff = mv.fit_var(np.diff(data, axis=0), p=2)
        assert np.allclose(vecm.short_run, var_diff.coefs, atol=1e-8)
        assert np.allclose(vecm.intercept, var_diff.intercept, atol=1e-8)

    def test_beta_recovered_up_to_scale(self):
        rng = np.random.default_rng(5)
        x = np.cumsum(0.2 + rng.standard_normal(400))
        # machine-scale jitter keeps the levels matrix full rank, as the
        # cointegration error contract requires
        y = 2.0 * x + 1e-7 * rng.standard_normal(400)
        vecm = mv.fit_vecm(np.column_stack([y, x]), p=2, r=1)
        normalized = vecm.beta_normalized().ravel()
        assert normalized[0] == pytest.approx(1.0)
        assert normalized[1] == pytest.approx(-2.0, abs=1e-4)

    def test_companion_has_k_minus_r_unit_moduli(self):
        data = cointegrated_pair(11)
        vecm = mv.fit_vecm(data, p=2, r=1)
        assert vecm.unit_moduli_count(1e-6) == 1
        moduli = sorted(np.abs(vecm.eigenvalues), reverse=True)
        assert moduli[0] == pytest.approx(1.0, abs=1e-6)
        assert all(m < 1.0 - 1e-6 for m in moduli[1:])

    def test_rank_bounds(self):
        data = cointegrated_pair(0)
        with pytest.raises(ValidationError):
            mv.fit_vecm(data, p=2, r=2)


class TestGrangerWald:
    def test_size_on_independent_noise(self):
        rejections = 0
        n = 400
        for seed in range(n):
            rng = np.random.default_rng(3000 + seed)
            rows = mv.granger_wald(rng.standard_normal((500, 2)), 2, 1, "all_lags")
            row = next(r for r in rows if r.dependent == "y1" and r.excluded == "y2")
            rejections += row.p_value < 0.05
        assert 0.03 <= rejections / n <= 0.07

    def test_power_and_direction(self):
        forward = reverse = 0
        for seed in range(100):
            rng = np.random.default_rng(5000 + seed)
            x = rng.standard_normal(500)
            y = np.zeros(500)
            for t in range(1, 500):
                y[t] = 0.8 * x[t - 1] + rng.standard_normal()
            rows = mv.granger_wald(np.column_stack([y, x]), 2, 1, "all_lags", names=["y", "x"])
            forward += next(r for r in rows if (r.dependent, r.excluded) == ("y", "x")).p_value < 0.05
            reverse += next(r for r in rows if (r.dependent, r.excluded) == ("x", "y")).p_value < 0.05
        assert forward / 100 >= 0.99
        assert reverse / 100 <= 0.12

    def test_df_by_mode(self):
        data = stable_var_data(1, T=300)
        all_rows = mv.granger_wald(data, 2, 1, "all_lags")
        strict_rows = mv.granger_wald(data, 2, 1, "strict_TY")
        assert {r.df for r in all_rows if r.excluded != "ALL"} == {3}
        assert {r.df for r in strict_rows if r.excluded != "ALL"} == {2}

    def test_report_shape(self):
        data = stable_var_data(2, T=300)
        rows = mv.granger_wald(data, 2, 1, names=["rules", "external"])
        keys = [(r.dependent, r.excluded) for r in rows]
        assert keys == [
            ("rules", "external"),
            ("rules", "ALL"),
            ("external", "rules"),
            ("external", "ALL"),
        ]
        # in the two-variable system the ALL row equals the single exclusion
        assert rows[0].chi2 == pytest.approx(rows[1].chi2)


class TestImpulseResponse:
    def diagonal_model(self, a=0.7):
        data = stable_var_data(3, T=200)
        base = mv.fit_var(data, 1)
        coefs = np.array([[[a, 0.0], [0.0, a]]])
        return mv.VarModel(
            endog=base.endog, p=1, intercept=np.zeros(2), coefs=coefs,
            residuals=base.residuals, sigma_u=np.eye(2), sigma_ml=np.eye(2),
            design=base.design, var_names=["y1", "y2"],
        )

    def test_diagonal_closed_form(self):
        a = 0.7
        irf = mv.impulse_response(self.diagonal_model(a), 12, ortho=True, ci=None)
        steps = np.arange(13)
        assert np.allclose(irf.responses[:, 0, 0], a**steps, atol=1e-10)
        assert np.allclose(irf.responses[:, 1, 1], a**steps, atol=1e-10)
        assert np.allclose(irf.responses[:, 0, 1], 0.0, atol=1e-12)

    def test_stable_irf_decays(self):
        for seed in range(5):
            coefs = random_stable_var(seed, radius=0.9)
            data = stable_var_data(seed + 50, T=300, coefs=coefs)
            model = mv.fit_var(data, 2)
            if not model.is_stable:
                continue
            irf = mv.impulse_response(model, 200, ortho=False, ci=None)
            assert np.abs(irf.responses[200]).max() < 1e-6

    def test_bootstrap_band_coverage(self):
        A = np.array([[[0.6, 0.2], [-0.1, 0.5]]])
        P = np.linalg.cholesky(np.eye(2))
        true_paths = np.zeros((9, 2, 2))
        acc = np.eye(2)
        for h in range(9):
            true_paths[h] = acc @ P
            acc = A[0] @ acc
        inside = total = 0
        for seed in range(40):
            data = stable_var_data(600 + seed, T=500, coefs=A)
            model = mv.fit_var(data, 1)
            irf = mv.impulse_response(
                model, 8, ortho=True, ci="bootstrap", n_boot=200,
                rng=np.random.default_rng(9000 + seed),
            )
            hit = (true_paths >= irf.band_low) & (true_paths <= irf.band_high)
            inside += hit[1:].sum()
            total += hit[1:].size
        assert 0.88 <= inside / total <= 0.99

    def test_vecm_bands_refused_with_note(self):
        data = cointegrated_pair(8)
        vecm = mv.fit_vecm(data, p=2, r=1)
        irf = mv.impulse_response(vecm, 8, ci="bootstrap")
        assert irf.band_low is None and irf.band_high is None
        assert "bootstrap" in irf.band_note
        assert irf.responses.shape == (9, 2, 2)


class TestFevd:
    def test_diagonal_system_owns_its_variance(self):
        model = TestImpulseResponse().diagonal_model()
        res = mv.fevd(model, 6, ci=None)
        for s in range(1, 7):
            assert res.decomp[s, 0, 0] == pytest.approx(1.0)
            assert res.decomp[s, 0, 1] == pytest.approx(0.0)

    def test_cholesky_last_impulse_zero_through_step_one(self):
        data = stable_var_data(9, T=300, coefs=np.stack([
            np.array([[0.4, 0.2], [0.1, 0.3]]),
            np.array([[0.2, -0.1], [0.05, 0.15]]),
        ]))
        model = mv.fit_var(data, 2)
        res = mv.fevd(model, 8, ci="bootstrap", n_boot=40, rng=np.random.default_rng(0))
        assert res.decomp[0, 0, 1] == 0.0 and res.decomp[1, 0, 1] == 0.0
        assert res.std_errors[0, 0, 1] == 0.0 and res.std_errors[1, 0, 1] == 0.0
        assert res.band_high[1, 0, 1] == 0.0
        assert res.decomp[2, 0, 1] > 0.0

    def test_shares_sum_to_one_on_random_stable_instances(self):
        for seed in range(100):
            coefs = random_stable_var(seed)
            data = stable_var_data(seed + 700, T=200, coefs=coefs)
            model = mv.fit_var(data, 2)
            res = mv.fevd(model, 10, ci=None)
            sums = res.decomp[1:].sum(axis=2)
            assert np.abs(sums - 1.0).max() < 1e-8
            assert res.decomp.min() >= 0.0 and res.decomp.max() <= 1.0 + 1e-12


class TestDiagnostics:
    def test_gaussian_jb_accepts(self):
        ok = 0
        for seed in range(200):
            rng = np.random.default_rng(700 + seed)
            model = mv.fit_var(rng.standard_normal((10000, 2)), 1)
            diag = mv.diagnostics(model)
            joint = next(t for t in diag.normality if t.equation == "ALL")
            ok += joint.jb_p > 0.01
        assert ok / 200 >= 0.98

    def test_symmetric_skewness_tiny_at_huge_t(self):
        rng = np.random.default_rng(1)
        model = mv.fit_var(rng.standard_normal((1_000_000, 2)), 1)
        diag = mv.diagnostics(model)
        for t in diag.normality:
            if t.skewness is not None:
                assert abs(t.skewness) < 0.05

    def test_lm_df_is_k_squared(self):
        rng = np.random.default_rng(2)
        model3 = mv.fit_var(rng.standard_normal((200, 3)), 1)
        model2 = mv.fit_var(rng.standard_normal((200, 2)), 1)
        assert mv.diagnostics(model3).lm_autocorr[0].df == 9
        assert mv.diagnostics(model2).lm_autocorr[0].df == 4

    def test_joint_degrees_of_freedom(self):
        rng = np.random.default_rng(3)
        model = mv.fit_var(rng.standard_normal((500, 3)), 1)
        diag = mv.diagnostics(model)
        joint = next(t for t in diag.normality if t.equation == "ALL")
        assert joint.jb_df == 6 and joint.skew_df == 3 and joint.kurt_df == 3

    def test_stability_table_sorted_desc(self):
        data = stable_var_data(4, T=300)
        diag = mv.diagnostics(mv.fit_var(data, 2))
        moduli = [row.modulus for row in diag.stability]
        assert moduli == sorted(moduli, reverse=True)
