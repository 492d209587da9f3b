"""Yearly prevalence series and their time-series diagnostics.

Covers the per-year aggregation of document-topic proportions, the
ADF/PP/KPSS unit-root battery (sharing one Dickey-Fuller regression core),
one-sided Kolmogorov-Smirnov dominance, kernel density summaries, and the
top-quantile concentration series with a polynomial trend fit.

All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dftables
from .corpus import DocumentRecord
from .errors import DegenerateInputError, ValidationError

KS_P_FLOOR = 2.2e-16

_CASE_BY_TYPE = {1: "none", 2: "drift", 3: "trend"}


def _normalize_model_type(model_type) -> int:
    if isinstance(model_type, str):
        label = model_type.lower().replace(" ", "")
        if label.startswith("type"):
            label = label[4:]
        try:
            model_type = int(label)
        except ValueError as exc:
            raise ValidationError(f"unknown model type: {model_type!r}") from exc
    if model_type not in (1, 2, 3):
        raise ValidationError(f"model type must be 1, 2 or 3, got {model_type!r}")
    return int(model_type)


# --- prevalence series --------------------------------------------------------


@dataclass
class PrevalenceSeries:
    """Yearly mean topic or category probabilities.

    ``values`` maps a series label to per-year means aligned with ``years``.
    Calendar years absent from the corpus are listed in ``missing_years``;
    they are reported, never interpolated.
    """

    years: np.ndarray
    values: dict[str, np.ndarray]
    doc_counts: np.ndarray
    category_map: dict[int, str] | None = None
    missing_years: list[int] = field(default_factory=list)

    def series(self, label: str) -> np.ndarray:
        if label not in self.values:
            raise ValidationError(f"no series labeled {label!r}")
        if self.missing_years:
            raise ValidationError(
                f"series has internal year gaps {self.missing_years}; refusing to "
                "hand it to tests that assume contiguous annual data"
            )
        return self.values[label]

    def to_rows(self) -> list[tuple[str, int, float]]:
        rows = []
        for label in self.values:
            for year, value in zip(self.years.tolist(), self.values[label].tolist()):
                rows.append((label, year, value))
        return rows


EXTERNAL_CATEGORY = "external"


def topic_label(k: int) -> str:
    """1-based topic label used in configs and reports."""
    return f"topic_{k + 1}"


def yearly_prevalence(
    theta: np.ndarray,
    records: list[DocumentRecord],
    category_map: dict[int, str] | None = None,
) -> PrevalenceSeries:
    """Average document-topic proportions by publication year.

    With ``category_map`` (1-based topic number -> category label), topic
    columns are summed into categories first; topics missing from the map
    land in the explicit ``external`` bucket.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != len(records):
        raise ValidationError(
            f"theta rows ({theta.shape[0] if theta.ndim == 2 else 'n/a'}) do not "
            f"align with records ({len(records)})"
        )
    n_topics = theta.shape[1]

    if category_map is None:
        columns = {topic_label(k): theta[:, k] for k in range(n_topics)}
    else:
        for topic_no in category_map:
            if not 1 <= topic_no <= n_topics:
                raise ValidationError(f"category_map topic {topic_no} out of range 1..{n_topics}")
        groups: dict[str, list[int]] = {}
        for k in range(n_topics):
            label = category_map.get(k + 1, EXTERNAL_CATEGORY)
            groups.setdefault(label, []).append(k)
        columns = {label: theta[:, idx].sum(axis=1) for label, idx in groups.items()}

    doc_years = np.array([rec.year for rec in records])
    years = np.unique(doc_years)
    doc_counts = np.array([(doc_years == y).sum() for y in years])
    values = {
        label: np.array([col[doc_years == y].mean() for y in years])
        for label, col in columns.items()
    }
    missing = [y for y in range(int(years[0]), int(years[-1]) + 1) if y not in set(years.tolist())]
    return PrevalenceSeries(
        years=years,
        values=values,
        doc_counts=doc_counts,
        category_map=category_map,
        missing_years=missing,
    )


# --- unit-root tests ----------------------------------------------------------


def newey_west_lag(T: int) -> int:
    """Bandwidth heuristic ``floor(4 * (T/100)^(2/9))``."""
    if T < 1:
        raise ValidationError(f"series length must be >= 1, got {T}")
    return int(math.floor(4.0 * (T / 100.0) ** (2.0 / 9.0)))


@dataclass
class UnitRootReport:
    test: str  # ADF | PP | KPSS
    model_type: int | None  # 1, 2, 3; None for KPSS
    lag: int
    statistic: float
    p_value: float
    censored: bool
    nobs: int
    extras: dict = field(default_factory=dict)

    @property
    def p_label(self) -> str:
        if self.censored:
            bound = self.p_value
            return f"<{bound:g}" if bound <= 0.05 else f">{bound:g}"
        return f"{self.p_value:.4f}"


def _deterministics(n: int, case: str) -> np.ndarray:
    cols = []
    if case in ("drift", "trend"):
        cols.append(np.ones(n))
    if case == "trend":
        cols.append(np.arange(1.0, n + 1))
    if not cols:
        return np.empty((n, 0))
    return np.column_stack(cols)


def _df_regression(y: np.ndarray, case: str, lag: int):
    """Dickey-Fuller regression of dy_t on y_{t-1}, lagged dys and deterministics.

    Returns the pieces both ADF and PP need: the level coefficient, its t
    statistic, standard error, residuals and the residual variance.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if not np.isfinite(y).all():
        raise ValidationError("series contains non-finite values")
    if len(y) < lag + 5:
        raise DegenerateInputError(f"series too short for lag {lag}: length {len(y)}")
    if np.ptp(y) == 0:
        raise DegenerateInputError("constant series")

    dy = np.diff(y)
    n = len(dy) - lag
    level = y[lag:-1]
    cols = [level]
    for j in range(1, lag + 1):
        cols.append(dy[lag - j : len(dy) - j])
    X = np.column_stack(cols + [_deterministics(n, case)]) if case != "none" else np.column_stack(cols)
    rhs = dy[lag:]
    k = X.shape[1]
    if n - k < 2:
        raise DegenerateInputError("too few observations for the requested regression")

    xtx = X.T @ X
    try:
        beta = np.linalg.solve(xtx, X.T @ rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInputError(f"singular Dickey-Fuller design: {exc}") from exc
    resid = rhs - X @ beta
    rss = float(resid @ resid)
    if rss <= 1e-14 * max(1.0, float(rhs @ rhs)):
        raise DegenerateInputError("zero residual variance in Dickey-Fuller regression")
    s2 = rss / (n - k)
    xtx_inv = np.linalg.inv(xtx)
    se_pi = math.sqrt(s2 * xtx_inv[0, 0])
    pi_hat = float(beta[0])
    return pi_hat, pi_hat / se_pi, se_pi, resid, s2, n


def _long_run_variance(resid: np.ndarray, bandwidth: int) -> tuple[float, float]:
    """Bartlett-kernel long-run variance of a residual series; also gamma_0."""
    n = len(resid)
    gamma0 = float(resid @ resid) / n
    lrv = gamma0
    for j in range(1, bandwidth + 1):
        gamma_j = float(resid[j:] @ resid[:-j]) / n
        lrv += 2.0 * (1.0 - j / (bandwidth + 1.0)) * gamma_j
    return lrv, gamma0


def unit_root_test(series: np.ndarray, test: str, model_type=2, lag: int | None = None) -> UnitRootReport:
    """Run one unit-root test.

    * ``ADF``: tau statistic from the augmented regression with ``lag``
      lagged differences; MacKinnon response-surface p-value censored to
      [0.01, 0.99].
    * ``PP``: the same regression without lagged differences; the reported
      statistic is the serial-correlation-corrected normalized bias Z_rho
      with a Bartlett long-run variance at bandwidth ``lag`` (the corrected
      t statistic Z_tau rides along in ``extras``).
    * ``KPSS``: level-stationarity statistic with the same long-run
      variance machinery; p censored to [0.01, 0.10]. ``model_type`` is
      ignored and recorded as None.
    """
    series = np.asarray(series, dtype=float)
    if lag is None:
        lag = newey_west_lag(len(series))
    if lag < 0:
        raise ValidationError("lag must be non-negative")
    name = test.upper()

    if name == "ADF":
        mt = _normalize_model_type(model_type)
        case = _CASE_BY_TYPE[mt]
        _, tau, _, _, _, n = _df_regression(series, case, lag)
        p = dftables.adf_tau_pvalue(tau, case)
        censored = p in (dftables.ADF_P_FLOOR, dftables.ADF_P_CEIL)
        return UnitRootReport("ADF", mt, lag, float(tau), p, censored, n)

    if name == "PP":
        mt = _normalize_model_type(model_type)
        case = _CASE_BY_TYPE[mt]
        pi_hat, tau, se_pi, resid, s2, n = _df_regression(series, case, 0)
        lrv, gamma0 = _long_run_variance(resid, lag)
        if lrv <= 0:
            raise DegenerateInputError("non-positive long-run variance")
        correction = n * n * se_pi * se_pi / s2
        z_rho = n * pi_hat - 0.5 * (lrv - gamma0) * correction
        z_tau = math.sqrt(gamma0 / lrv) * tau - (lrv - gamma0) / (2.0 * math.sqrt(lrv)) * (
            n * se_pi / math.sqrt(s2)
        )
        p = dftables.rho_pvalue(z_rho, case, n)
        censored = p in (dftables.ADF_P_FLOOR, dftables.ADF_P_CEIL)
        extras = {
            "z_tau": float(z_tau),
            "z_tau_pvalue": dftables.adf_tau_pvalue(z_tau, case),
            "tau_uncorrected": float(tau),
            "bandwidth_is_newey_west": True,
        }
        return UnitRootReport("PP", mt, lag, float(z_rho), p, censored, n, extras)

    if name == "KPSS":
        if np.ptp(np.asarray(series, dtype=float)) == 0:
            raise DegenerateInputError("constant series")
        if len(series) < lag + 5:
            raise DegenerateInputError(f"series too short for lag {lag}: length {len(series)}")
        resid = series - series.mean()
        n = len(series)
        partial = np.cumsum(resid)
        lrv, _ = _long_run_variance(resid, lag)
        if lrv <= 0:
            raise DegenerateInputError("non-positive long-run variance")
        stat = float(partial @ partial) / (n * n * lrv)
        p = dftables.kpss_pvalue(stat)
        censored = p in (dftables.KPSS_P_FLOOR, dftables.KPSS_P_CEIL)
        return UnitRootReport("KPSS", None, lag, stat, p, censored, n)

    raise ValidationError(f"unknown test {test!r} (expected ADF, PP or KPSS)")


def unit_root_battery(
    series: np.ndarray | PrevalenceSeries,
    label: str | None = None,
    adf_lags: tuple[int, ...] | None = None,
    pp_lag: int | None = None,
    kpss_lag: int | None = None,
) -> list[UnitRootReport]:
    """The battery used throughout the reports: ADF for every type at lags
    0..n*, then PP and KPSS at the Newey-West bandwidth."""
    if isinstance(series, PrevalenceSeries):
        if label is None:
            raise ValidationError("pass the series label when testing a PrevalenceSeries")
        values = series.series(label)
    else:
        values = np.asarray(series, dtype=float)
    nw = newey_west_lag(len(values))
    if adf_lags is None:
        adf_lags = tuple(range(nw + 1))
    pp_lag = nw if pp_lag is None else pp_lag
    kpss_lag = nw if kpss_lag is None else kpss_lag

    reports = []
    for mt in (1, 2, 3):
        for lag in adf_lags:
            reports.append(unit_root_test(values, "ADF", mt, lag))
    for mt in (1, 2, 3):
        reports.append(unit_root_test(values, "PP", mt, pp_lag))
    reports.append(unit_root_test(values, "KPSS", lag=kpss_lag))
    return reports


# --- distribution comparisons --------------------------------------------------


def ecdf(sample: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Right-continuous empirical CDF of ``sample`` evaluated at ``x``."""
    sample = np.sort(np.asarray(sample, dtype=float))
    return np.searchsorted(sample, x, side="right") / len(sample)


def ks_dominance_pvalue(d_plus: float, m: int, n: int) -> float:
    """Asymptotic one-sided KS p-value exp(-2 D^2 mn/(m+n)), floored at the
    machine-reportable 2.2e-16."""
    p = math.exp(-2.0 * d_plus * d_plus * m * n / (m + n))
    return max(p, KS_P_FLOOR)


def ks_dominance(sample_a: np.ndarray, sample_b: np.ndarray) -> tuple[float, float]:
    """One-sided Kolmogorov-Smirnov statistic D+ = sup_x (F_a - F_b) and its
    asymptotic p-value."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    d_plus = float(max(0.0, np.max(ecdf(a, grid) - ecdf(b, grid))))
    return d_plus, ks_dominance_pvalue(d_plus, a.size, b.size)


def density_curves(sample: np.ndarray, kind: str = "pdf") -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-kernel density (Silverman bandwidth, 512-point grid) or the
    empirical step CDF of a sample."""
    sample = np.asarray(sample, dtype=float)
    if sample.size < 2:
        raise ValidationError("sample must have at least two points")
    if kind == "cdf":
        xs = np.sort(sample)
        return xs, np.arange(1, len(xs) + 1) / len(xs)
    if kind != "pdf":
        raise ValidationError(f"unknown density kind {kind!r}")
    sd = sample.std(ddof=1)
    iqr = np.subtract(*np.percentile(sample, [75, 25]))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if spread <= 0:
        raise DegenerateInputError("degenerate sample: all values equal")
    h = 0.9 * spread * sample.size ** (-0.2)
    grid = np.linspace(sample.min() - 3 * h, sample.max() + 3 * h, 512)
    z = (grid[:, None] - sample[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (sample.size * h * math.sqrt(2 * math.pi))
    return grid, dens


# --- concentration series -------------------------------------------------------


@dataclass
class TopQuantileSeries:
    years: np.ndarray
    values: np.ndarray
    degree: int
    coefficients: np.ndarray  # ascending powers of (year - years[0])
    fitted: np.ndarray


def top_quantile_series(
    theta: np.ndarray, years: np.ndarray, degree: int = 3
) -> TopQuantileSeries:
    """Yearly mean of each document's largest topic probability, plus an OLS
    polynomial trend of the requested order."""
    theta = np.asarray(theta, dtype=float)
    years = np.asarray(years)
    if degree < 1:
        raise ValidationError("polynomial degree must be >= 1")
    if theta.shape[0] != len(years):
        raise ValidationError("theta rows do not align with years")
    peak = theta.max(axis=1)
    uniq = np.unique(years)
    series = np.array([peak[years == y].mean() for y in uniq])
    if len(uniq) <= degree + 1:
        raise DegenerateInputError(
            f"{len(uniq)} yearly points cannot support a degree-{degree} trend"
        )
    x = (uniq - uniq[0]).astype(float)
    design = np.vander(x, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, series, rcond=None)
    return TopQuantileSeries(uniq, series, degree, coef, design @ coef)
