import numpy as np
import pytest

from littrend import dftables
from littrend.errors import DegenerateInputError, ValidationError
from littrend.trends import unit_root_battery, unit_root_test


def random_walks(n, T, seed):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.standard_normal((n, T)), axis=1)


def ar1(n, T, rho, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal((n, T))
    y = np.empty((n, T))
    y[:, 0] = e[:, 0]
    for t in range(1, T):
        y[:, t] = rho * y[:, t - 1] + e[:, t]
    return y


class TestAdf:
    def test_exact_linear_trend_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            unit_root_test(np.array([1.0, 2.0, 3.0, 4.0, 5.0]), "ADF", 3, 0)

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateInputError):
            unit_root_test(np.ones(30), "ADF", 2, 0)

    def test_too_short_series(self):
        with pytest.raises(DegenerateInputError):
            unit_root_test(np.arange(5.0) ** 1.3, "ADF", 2, 2)

    def test_pvalue_censoring(self):
        # strongly stationary series pushes p to the 0.01 floor
        y = ar1(1, 300, 0.1, 0)[0]
        report = unit_root_test(y, "ADF", 2, 0)
        assert report.p_value == 0.01
        assert report.censored
        assert report.p_label == "<0.01"

    def test_size_on_random_walks(self):
        walks = random_walks(300, 200, 11)
        rejections = sum(
            unit_root_test(w, "ADF", 2, 0).p_value < 0.05 for w in walks
        )
        assert 0.02 <= rejections / 300 <= 0.08

    def test_power_on_stationary_ar1(self):
        series = ar1(100, 200, 0.5, 12)
        rejections = sum(unit_root_test(s, "ADF", 2, 0).p_value < 0.05 for s in series)
        assert rejections / 100 >= 0.90


class TestPhillipsPerron:
    def test_shares_regression_core_with_adf(self):
        y = random_walks(1, 80, 3)[0]
        adf = unit_root_test(y, "ADF", 1, 0)
        pp = unit_root_test(y, "PP", 1, 2)
        assert pp.extras["tau_uncorrected"] == pytest.approx(adf.statistic, abs=1e-10)

    def test_zero_bandwidth_keeps_normalized_bias_uncorrected(self):
        y = random_walks(1, 120, 4)[0]
        pp = unit_root_test(y, "PP", 2, 0)
        # with bandwidth 0 the long-run variance is gamma_0, so no correction term
        assert pp.extras["z_tau"] == pytest.approx(pp.extras["tau_uncorrected"], abs=1e-10)

    def test_statistic_scale_is_normalized_bias(self):
        y = ar1(1, 200, 0.2, 5)[0]
        pp = unit_root_test(y, "PP", 2, 2)
        # T*(rho - 1) lives on a much larger scale than tau
        assert pp.statistic < -40
        assert pp.p_value == 0.01

    def test_type1_on_pure_walk_not_rejected_usually(self):
        walks = random_walks(200, 150, 6)
        rejections = sum(unit_root_test(w, "PP", 1, 2).p_value < 0.05 for w in walks)
        assert rejections / 200 <= 0.10


class TestKpss:
    def test_statistic_positive_for_nonconstant(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.standard_normal(40)
            assert unit_root_test(y, "KPSS", lag=2).statistic > 0

    def test_statistic_matches_bruteforce(self):
        y = np.random.default_rng(1).standard_normal(60)
        report = unit_root_test(y, "KPSS", lag=3)
        e = y - y.mean()
        s = np.cumsum(e)
        gamma = [e @ e / 60] + [e[j:] @ e[:-j] / 60 for j in range(1, 4)]
        lrv = gamma[0] + 2 * sum((1 - j / 4) * gamma[j] for j in range(1, 4))
        assert report.statistic == pytest.approx((s @ s) / (60**2 * lrv), rel=1e-12)

    def test_rejects_random_walk(self):
        walks = random_walks(100, 200, 7)
        rejections = sum(unit_root_test(w, "KPSS").p_value < 0.05 for w in walks)
        assert rejections / 100 >= 0.80

    def test_size_on_white_noise(self):
        rng = np.random.default_rng(8)
        rejections = sum(
            unit_root_test(rng.standard_normal(200), "KPSS").p_value < 0.05
            for _ in range(300)
        )
        assert 0.02 <= rejections / 300 <= 0.08

    def test_paper_style_interpolation(self):
        # the published interpolation grid reproduces the censored p shapes
        assert dftables.kpss_pvalue(0.6927) == pytest.approx(0.0142, abs=2e-4)
        assert dftables.kpss_pvalue(0.2160) == 0.10
        assert dftables.kpss_pvalue(5.0) == 0.01


class TestBattery:
    def test_layout(self):
        y = random_walks(1, 22, 9)[0]
        reports = unit_root_battery(y)
        kinds = [(r.test, r.model_type, r.lag) for r in reports]
        # ADF: 3 types x lags 0..2 (Newey-West bandwidth for T=22 is 2)
        assert kinds.count(("ADF", 1, 0)) == 1
        assert len([k for k in kinds if k[0] == "ADF"]) == 9
        assert len([k for k in kinds if k[0] == "PP"]) == 3
        assert kinds[-1] == ("KPSS", None, 2)

    def test_unknown_test_name(self):
        with pytest.raises(ValidationError):
            unit_root_test(np.arange(30.0) ** 1.1, "DF-GLS")
