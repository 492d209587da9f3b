"""Multivariate dynamics: VAR/VECM estimation, lag selection, cointegration,
Granger-Wald causality, impulse responses, FEVD, and residual diagnostics.

Conventions follow the standard multivariate time-series toolbox layout:
lag-selection statistics are computed on a common estimation sample; the
information criteria are per-observation; FEVD tables start at step 0, which
is identically zero by convention (the zero-step forecast error is zero) so
that the first propagation of a Cholesky-last shock shows up at step 2.

Estimation is deterministic and single-threaded; the bootstrap consumes an
explicit generator so replications are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import stats

from . import dftables
from .errors import DegenerateInputError, EstimationError, ValidationError

STABILITY_TOL = 1e-10
UNIT_MODULUS_TOL = 1e-6


def _as_matrix(data: np.ndarray) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValidationError("data must be a T x K matrix")
    if not np.isfinite(arr).all():
        raise ValidationError("data contains non-finite values")
    return arr


def _default_names(k: int, names: list[str] | None) -> list[str]:
    if names is None:
        return [f"y{i + 1}" for i in range(k)]
    if len(names) != k:
        raise ValidationError("variable name count does not match data columns")
    return list(names)


def _companion(coefs: np.ndarray) -> np.ndarray:
    p, k, _ = coefs.shape
    comp = np.zeros((k * p, k * p))
    comp[:k, :] = np.concatenate(coefs, axis=1)
    if p > 1:
        comp[k:, :-k] = np.eye(k * (p - 1))
    return comp


# --- VAR ----------------------------------------------------------------------


@dataclass
class VarModel:
    endog: np.ndarray
    p: int
    intercept: np.ndarray
    coefs: np.ndarray  # (p, K, K); coefs[l][i, j] = effect of var j, lag l+1, on var i
    residuals: np.ndarray
    sigma_u: np.ndarray  # small-sample divisor T_e - (K p + 1)
    sigma_ml: np.ndarray
    design: np.ndarray  # (T_e, 1 + K p) rows [1, y_{t-1}, ..., y_{t-p}]
    var_names: list[str]

    @property
    def k(self) -> int:
        return self.endog.shape[1]

    @property
    def nobs(self) -> int:
        return self.design.shape[0]

    @property
    def companion(self) -> np.ndarray:
        return _companion(self.coefs)

    @property
    def eigenvalues(self) -> np.ndarray:
        values = np.linalg.eigvals(self.companion)
        return values[np.argsort(-np.abs(values))]

    @property
    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.eigenvalues) < 1.0 - STABILITY_TOL))

    def ma_coefficients(self, horizon: int) -> np.ndarray:
        """MA representation Psi_0..Psi_h (Psi_0 = I)."""
        k = self.k
        psi = np.zeros((horizon + 1, k, k))
        psi[0] = np.eye(k)
        for h in range(1, horizon + 1):
            acc = np.zeros((k, k))
            for i in range(1, min(h, self.p) + 1):
                acc += self.coefs[i - 1] @ psi[h - i]
            psi[h] = acc
        return psi


def fit_var(data: np.ndarray, p: int, names: list[str] | None = None) -> VarModel:
    """Per-equation least squares with intercept; see VarModel for layout."""
    y = _as_matrix(data)
    T, k = y.shape
    if p < 1:
        raise ValidationError("lag order must be >= 1")
    if T <= k * p + 1:
        raise DegenerateInputError(f"sample of {T} cannot support a VAR({p}) in {k} variables")
    rows = T - p
    Z = np.ones((rows, 1 + k * p))
    for lag in range(1, p + 1):
        Z[:, 1 + (lag - 1) * k : 1 + lag * k] = y[p - lag : T - lag]
    Y = y[p:]
    ztz = Z.T @ Z
    cond = np.linalg.cond(ztz)
    if not np.isfinite(cond) or cond > 1e12:
        raise EstimationError("singular regressor cross-product in VAR estimation")
    B = np.linalg.solve(ztz, Z.T @ Y).T  # (K, 1 + K p)
    resid = Y - Z @ B.T
    dof = rows - (k * p + 1)
    if dof < 1:
        raise DegenerateInputError("no residual degrees of freedom")
    sigma_u = resid.T @ resid / dof
    sigma_ml = resid.T @ resid / rows
    coefs = np.stack([B[:, 1 + l * k : 1 + (l + 1) * k] for l in range(p)])
    return VarModel(
        endog=y,
        p=p,
        intercept=B[:, 0].copy(),
        coefs=coefs,
        residuals=resid,
        sigma_u=sigma_u,
        sigma_ml=sigma_ml,
        design=Z,
        var_names=_default_names(k, names),
    )


# --- lag selection --------------------------------------------------------------


@dataclass
class LagSelectionRow:
    lag: int
    loglik: float
    lr: float | None
    df: int | None
    p_value: float | None
    fpe: float
    aic: float
    hqic: float
    sbic: float


@dataclass
class LagSelectionReport:
    rows: list[LagSelectionRow]
    winners: dict[str, int | None]
    nobs: int


def _var_loglik_ml(sigma_ml: np.ndarray, t_eff: int) -> float:
    k = sigma_ml.shape[0]
    sign, logdet = np.linalg.slogdet(sigma_ml)
    if sign <= 0:
        raise EstimationError("residual covariance is not positive definite")
    return -0.5 * t_eff * (k * math.log(2 * math.pi) + logdet + k)


def select_lag(data: np.ndarray, max_lag: int, names: list[str] | None = None) -> LagSelectionReport:
    """Selection-order table (LL, sequential LR, FPE, AIC, HQIC, SBIC).

    Every candidate lag is estimated on the common sample that a VAR with
    ``max_lag`` lags would use; criteria are per-observation, and the LR
    winner is the largest lag whose sequential test rejects at 5%.
    """
    y = _as_matrix(data)
    T, k = y.shape
    if max_lag < 1:
        raise ValidationError("max_lag must be >= 1")
    t_eff = T - max_lag
    if t_eff <= k * max_lag + 1:
        raise DegenerateInputError(
            f"sample too short: {t_eff} common observations for up to {k * max_lag + 1} parameters"
        )
    common = y  # every lag conditions on the same max_lag presample rows

    rows: list[LagSelectionRow] = []
    prev_ll = None
    for lag in range(max_lag + 1):
        if lag == 0:
            resid = common[max_lag:] - common[max_lag:].mean(axis=0)
            sigma_ml = resid.T @ resid / t_eff
            m_per_eq = 1
        else:
            Z = np.ones((t_eff, 1 + k * lag))
            for j in range(1, lag + 1):
                Z[:, 1 + (j - 1) * k : 1 + j * k] = common[max_lag - j : max_lag - j + t_eff]
            Y = common[max_lag:]
            B = np.linalg.lstsq(Z, Y, rcond=None)[0]
            resid = Y - Z @ B
            sigma_ml = resid.T @ resid / t_eff
            m_per_eq = 1 + k * lag
        ll = _var_loglik_ml(sigma_ml, t_eff)
        n_params = k * m_per_eq
        sign, logdet = np.linalg.slogdet(sigma_ml)
        fpe = math.exp(logdet) * ((t_eff + m_per_eq) / (t_eff - m_per_eq)) ** k
        aic = -2.0 * ll / t_eff + 2.0 * n_params / t_eff
        hqic = -2.0 * ll / t_eff + 2.0 * math.log(math.log(t_eff)) * n_params / t_eff
        sbic = -2.0 * ll / t_eff + math.log(t_eff) * n_params / t_eff
        if prev_ll is None:
            lr = df = p_value = None
        else:
            lr = 2.0 * (ll - prev_ll)
            df = k * k
            p_value = float(stats.chi2.sf(lr, df))
        rows.append(LagSelectionRow(lag, ll, lr, df, p_value, fpe, aic, hqic, sbic))
        prev_ll = ll

    winners: dict[str, int | None] = {
        "fpe": min(rows, key=lambda r: r.fpe).lag,
        "aic": min(rows, key=lambda r: r.aic).lag,
        "hqic": min(rows, key=lambda r: r.hqic).lag,
        "sbic": min(rows, key=lambda r: r.sbic).lag,
    }
    lr_winner = None
    for row in reversed(rows):
        if row.p_value is not None and row.p_value < 0.05:
            lr_winner = row.lag
            break
    winners["lr"] = lr_winner
    return LagSelectionReport(rows=rows, winners=winners, nobs=t_eff)


# --- cointegration ---------------------------------------------------------------


@dataclass
class JohansenRow:
    rank: int
    n_params: int
    loglik: float
    eigenvalue: float | None
    trace_stat: float | None
    crit_5pct: float | None


@dataclass
class CointegrationReport:
    method: str
    rows: list[JohansenRow] = field(default_factory=list)
    selected_rank: int | None = None
    first_stage: dict | None = None
    residual_stat: float | None = None
    residual_lag: int | None = None
    critical_values: tuple[float, float, float] | None = None
    rejects_no_cointegration: dict[str, bool] | None = None
    nobs: int = 0


def _johansen_core(y: np.ndarray, p: int, det_spec: str):
    """Reduced-rank pieces: eigenvalues, eigenvectors (beta candidates), S
    matrices and the residual maker for the short-run part."""
    T, k = y.shape
    if p < 1:
        raise ValidationError("lag order must be >= 1")
    t_eff = T - p
    if t_eff <= k * p + 1:
        raise DegenerateInputError("sample too short for the Johansen procedure")
    dy = np.diff(y, axis=0)
    Z0 = dy[p - 1 :]  # T_e x K
    Z1 = y[p - 1 : T - 1]  # lagged levels
    blocks = [dy[p - 1 - j : T - 1 - j] for j in range(1, p)]
    if det_spec == "const":
        blocks.append(np.ones((t_eff, 1)))
    elif det_spec != "none":
        raise ValidationError(f"unsupported deterministic spec {det_spec!r}")
    if blocks:
        Z2 = np.column_stack(blocks)
        q, _ = np.linalg.qr(Z2)
        R0 = Z0 - q @ (q.T @ Z0)
        R1 = Z1 - q @ (q.T @ Z1)
    else:
        Z2 = np.empty((t_eff, 0))
        R0, R1 = Z0.copy(), Z1.copy()
    S00 = R0.T @ R0 / t_eff
    S11 = R1.T @ R1 / t_eff
    S01 = R0.T @ R1 / t_eff
    try:
        s00_inv = np.linalg.inv(S00)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("rank-deficient data in Johansen step") from exc
    A = S01.T @ s00_inv @ S01
    A = 0.5 * (A + A.T)
    try:
        eigvals, eigvecs = scipy.linalg.eigh(A, 0.5 * (S11 + S11.T))
    except scipy.linalg.LinAlgError as exc:
        raise EstimationError("Johansen eigenproblem failed") from exc
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, 1.0 - 1e-12)
    eigvecs = eigvecs[:, order]  # normalized so that V' S11 V = I
    return Z0, Z1, Z2, S00, S01, eigvals, eigvecs, t_eff


def cointegration(
    data: np.ndarray,
    method: str = "Johansen",
    lags: int = 2,
    det_spec: str = "const",
    names: list[str] | None = None,
) -> CointegrationReport:
    """Johansen trace test or the Engle-Granger two-step residual test.

    Johansen rows mirror the usual rank table: per tested rank the parameter
    count, log likelihood, next eigenvalue, trace statistic and the 5%
    critical value for the unrestricted-constant case. The selected rank is
    the first whose trace statistic falls below its critical value.
    """
    y = _as_matrix(data)
    T, k = y.shape
    if k < 2:
        raise ValidationError("cointegration tests need at least two variables")

    if method.lower() == "johansen":
        if det_spec != "const":
            raise ValidationError("critical values are tabulated for det_spec='const' only")
        _, _, _, S00, _, eigvals, _, t_eff = _johansen_core(y, lags, det_spec)
        sign, logdet_s00 = np.linalg.slogdet(S00)
        if sign <= 0:
            raise EstimationError("S00 not positive definite")
        base_params = k * k * (lags - 1) + k  # short-run matrices plus intercepts
        rows = []
        selected = None
        for r in range(k + 1):
            ll = -0.5 * t_eff * (
                k * math.log(2 * math.pi) + k + logdet_s00 + float(np.log(1 - eigvals[:r]).sum())
            )
            n_params = base_params + 2 * k * r - r * r
            if r < k:
                trace = -t_eff * float(np.log(1 - eigvals[r:]).sum())
                cv = dftables.johansen_trace_cv_5pct(k - r)
                if selected is None and trace < cv:
                    selected = r
            else:
                trace = cv = None
            rows.append(
                JohansenRow(
                    rank=r,
                    n_params=n_params,
                    loglik=ll,
                    eigenvalue=float(eigvals[r - 1]) if r > 0 else None,
                    trace_stat=trace,
                    crit_5pct=cv,
                )
            )
        return CointegrationReport(
            method="Johansen",
            rows=rows,
            selected_rank=selected if selected is not None else k,
            nobs=t_eff,
        )

    if method.lower() in ("englegranger", "engle-granger", "eg"):
        var_names = _default_names(k, names)
        X = np.column_stack([y[:, 1:], np.ones(T)])
        beta, *_ = np.linalg.lstsq(X, y[:, 0], rcond=None)
        resid = y[:, 0] - X @ beta
        rss = float(resid @ resid)
        tss = float(((y[:, 0] - y[:, 0].mean()) ** 2).sum())
        if tss <= 0:
            raise DegenerateInputError("dependent variable is constant")
        dof = T - k
        s2 = rss / dof
        xtx_inv = np.linalg.inv(X.T @ X)
        se = np.sqrt(np.diag(xtx_inv) * s2)
        r2 = 1.0 - rss / tss
        f_stat = (tss - rss) / (k - 1) / s2 if k > 1 else float("nan")
        first_stage = {
            "coefficients": dict(zip(var_names[1:] + ["const"], beta.tolist())),
            "std_errors": dict(zip(var_names[1:] + ["const"], se.tolist())),
            "r_squared": r2,
            "adj_r_squared": 1.0 - (1.0 - r2) * (T - 1) / dof,
            "f_statistic": f_stat,
            "nobs": T,
        }
        from .trends import _df_regression  # shared Dickey-Fuller core

        _, tau, _, _, _, _ = _df_regression(resid, "none", lags)
        cv = dftables.engle_granger_critical_values(k)
        rejects = {
            "1%": bool(tau < cv[0]),
            "5%": bool(tau < cv[1]),
            "10%": bool(tau < cv[2]),
        }
        return CointegrationReport(
            method="EngleGranger",
            first_stage=first_stage,
            residual_stat=float(tau),
            residual_lag=lags,
            critical_values=cv,
            rejects_no_cointegration=rejects,
            nobs=T,
        )

    raise ValidationError(f"unknown cointegration method {method!r}")


# --- VECM -----------------------------------------------------------------------


@dataclass
class VecmModel:
    endog: np.ndarray
    p: int  # lag order of the level representation
    rank: int
    alpha: np.ndarray  # K x r loadings
    beta: np.ndarray  # K x r cointegration vectors (beta' S11 beta = I scale)
    short_run: np.ndarray  # (p-1, K, K) coefficient matrices on lagged differences
    intercept: np.ndarray
    det_spec: str
    residuals: np.ndarray
    sigma_u: np.ndarray
    sigma_ml: np.ndarray
    design: np.ndarray
    loglik: float
    eigenvalues_johansen: np.ndarray
    var_names: list[str]

    @property
    def k(self) -> int:
        return self.endog.shape[1]

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]

    def level_coefs(self) -> tuple[np.ndarray, np.ndarray]:
        """Intercept and A_1..A_p of the implied level VAR."""
        k, p = self.k, self.p
        pi = self.alpha @ self.beta.T
        coefs = np.zeros((p, k, k))
        gammas = self.short_run
        if p == 1:
            coefs[0] = np.eye(k) + pi
        else:
            coefs[0] = np.eye(k) + pi + gammas[0]
            for i in range(1, p - 1):
                coefs[i] = gammas[i] - gammas[i - 1]
            coefs[p - 1] = -gammas[p - 2]
        return self.intercept.copy(), coefs

    @property
    def companion(self) -> np.ndarray:
        _, coefs = self.level_coefs()
        return _companion(coefs)

    @property
    def eigenvalues(self) -> np.ndarray:
        values = np.linalg.eigvals(self.companion)
        return values[np.argsort(-np.abs(values))]

    def unit_moduli_count(self, tol: float = UNIT_MODULUS_TOL) -> int:
        return int(np.sum(np.abs(np.abs(self.eigenvalues) - 1.0) < tol))

    def beta_normalized(self) -> np.ndarray:
        """Columns scaled so the leading coefficient is one (when nonzero)."""
        out = self.beta.copy()
        for j in range(out.shape[1]):
            lead = out[np.argmax(np.abs(out[:, j]) > 1e-12), j] if np.any(np.abs(out[:, j]) > 1e-12) else 1.0
            out[:, j] /= lead
        return out


def fit_vecm(
    data: np.ndarray,
    p: int,
    r: int,
    det_spec: str = "const",
    names: list[str] | None = None,
) -> VecmModel:
    """Johansen maximum-likelihood VECM with ``p`` level lags and rank ``r``.

    The companion form of the implied level VAR carries exactly K - r unit
    moduli (imposed by the reduced-rank structure).
    """
    y = _as_matrix(data)
    T, k = y.shape
    if not 0 <= r < k:
        raise ValidationError(f"rank must satisfy 0 <= r < {k}, got {r}")
    Z0, Z1, Z2, S00, S01, eigvals, eigvecs, t_eff = _johansen_core(y, p, det_spec)

    beta = eigvecs[:, :r] if r > 0 else np.zeros((k, 0))
    # alpha = S01 beta given the beta' S11 beta = I normalization
    alpha = S01 @ beta if r > 0 else np.zeros((k, 0))
    pi = alpha @ beta.T

    target = Z0 - Z1 @ pi.T
    if Z2.shape[1]:
        psi = np.linalg.lstsq(Z2, target, rcond=None)[0].T  # K x M
        resid = target - Z2 @ psi.T
    else:
        psi = np.zeros((k, 0))
        resid = target
    m = p - 1
    gammas = np.stack([psi[:, j * k : (j + 1) * k] for j in range(m)]) if m else np.zeros((0, k, k))
    intercept = psi[:, -1].copy() if det_spec == "const" else np.zeros(k)

    params_per_eq = k * m + (1 if det_spec == "const" else 0) + r
    dof = max(t_eff - params_per_eq, 1)
    sigma_u = resid.T @ resid / dof
    sigma_ml = resid.T @ resid / t_eff
    sign, logdet_s00 = np.linalg.slogdet(S00)
    loglik = -0.5 * t_eff * (
        k * math.log(2 * math.pi) + k + logdet_s00 + float(np.log(1 - eigvals[:r]).sum())
    )
    return VecmModel(
        endog=y,
        p=p,
        rank=r,
        alpha=alpha,
        beta=beta,
        short_run=gammas,
        intercept=intercept,
        det_spec=det_spec,
        residuals=resid,
        sigma_u=sigma_u,
        sigma_ml=sigma_ml,
        design=np.column_stack([Z1 @ beta, Z2]) if r > 0 else Z2,
        loglik=loglik,
        eigenvalues_johansen=eigvals,
        var_names=_default_names(k, names),
    )


# --- Granger-Wald ----------------------------------------------------------------


@dataclass
class GrangerRow:
    dependent: str
    excluded: str
    chi2: float
    df: int
    p_value: float


def granger_wald(
    data: np.ndarray,
    p: int,
    d_max: int = 1,
    mode: str = "all_lags",
    names: list[str] | None = None,
) -> list[GrangerRow]:
    """Toda-Yamamoto Granger causality in a level VAR(p + d_max).

    ``all_lags`` restricts every lag of the excluded variable (df = p +
    d_max); ``strict_TY`` restricts only the first ``p`` lags and leaves the
    augmentation lags untested. One row per ordered pair plus an ALL row per
    dependent variable.
    """
    if mode not in ("all_lags", "strict_TY"):
        raise ValidationError(f"unknown mode {mode!r}")
    if d_max < 0:
        raise ValidationError("d_max must be >= 0")
    model = fit_var(data, p + d_max, names=names)
    k = model.k
    tested_lags = p + d_max if mode == "all_lags" else p
    Z = model.design
    zz_inv = np.linalg.inv(Z.T @ Z)
    rows: list[GrangerRow] = []

    def eq_test(eq: int, causes: list[int]) -> tuple[float, int, float]:
        b_eq = np.concatenate([[model.intercept[eq]], np.concatenate(model.coefs[:, eq, :])])
        idx = [1 + lag * k + j for lag in range(tested_lags) for j in causes]
        R = np.zeros((len(idx), len(b_eq)))
        for row_i, col in enumerate(idx):
            R[row_i, col] = 1.0
        v_eq = model.sigma_u[eq, eq] * zz_inv
        rb = R @ b_eq
        middle = R @ v_eq @ R.T
        try:
            w = float(rb @ np.linalg.solve(middle, rb))
        except np.linalg.LinAlgError as exc:
            raise EstimationError("singular restriction covariance in Wald test") from exc
        df = len(idx)
        return w, df, float(stats.chi2.sf(w, df))

    for eq in range(k):
        for cause in range(k):
            if cause == eq:
                continue
            w, df, pv = eq_test(eq, [cause])
            rows.append(GrangerRow(model.var_names[eq], model.var_names[cause], w, df, pv))
        others = [j for j in range(k) if j != eq]
        w, df, pv = eq_test(eq, others)
        rows.append(GrangerRow(model.var_names[eq], "ALL", w, df, pv))
    return rows


# --- impulse responses and FEVD -----------------------------------------------


@dataclass
class ImpulseResponse:
    horizons: np.ndarray
    responses: np.ndarray  # (h+1, K, K): [step, response, impulse]
    ortho: bool
    var_names: list[str]
    band_low: np.ndarray | None = None
    band_high: np.ndarray | None = None
    band_note: str | None = None


def _ortho_factor(sigma: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("residual covariance is not positive definite") from exc


def _irf_paths(intercept, coefs, sigma, horizon, ortho) -> np.ndarray:
    p, k, _ = coefs.shape
    psi = np.zeros((horizon + 1, k, k))
    psi[0] = np.eye(k)
    for h in range(1, horizon + 1):
        for i in range(1, min(h, p) + 1):
            psi[h] += coefs[i - 1] @ psi[h - i]
    if ortho:
        P = _ortho_factor(sigma)
        return np.einsum("hij,jk->hik", psi, P)
    return psi


def _resample_var(model: VarModel, rng: np.random.Generator) -> np.ndarray:
    """Recursive-design residual bootstrap replication of the sample."""
    T, k = model.endog.shape
    resid = model.residuals - model.residuals.mean(axis=0)
    draw = resid[rng.integers(0, len(resid), size=len(resid))]
    sim = np.empty_like(model.endog)
    sim[: model.p] = model.endog[: model.p]
    for t in range(model.p, T):
        acc = model.intercept.copy()
        for l in range(model.p):
            acc += model.coefs[l] @ sim[t - 1 - l]
        sim[t] = acc + draw[t - model.p]
    return sim


def impulse_response(
    model: VarModel | VecmModel,
    horizon: int,
    ortho: bool = True,
    ci: str | None = None,
    n_boot: int = 500,
    level: float = 0.95,
    rng: np.random.Generator | None = None,
) -> ImpulseResponse:
    """Orthogonalized (Cholesky, declared variable order) impulse responses.

    VAR models support residual-bootstrap percentile bands; VECM responses
    are computed from the level representation and are returned without
    bands regardless of ``ci`` (the error-correction term distorts the
    bootstrap's error estimates), with an explanatory note.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    steps = np.arange(horizon + 1)
    if isinstance(model, VecmModel):
        intercept, coefs = model.level_coefs()
        paths = _irf_paths(intercept, coefs, model.sigma_u, horizon, ortho)
        note = None
        if ci is not None:
            note = (
                "confidence bands are not computed for VECM impulse responses; "
                "the error-correction term invalidates the residual bootstrap"
            )
        return ImpulseResponse(steps, paths, ortho, model.var_names, band_note=note)

    paths = _irf_paths(model.intercept, model.coefs, model.sigma_u, horizon, ortho)
    low = high = None
    if ci == "bootstrap":
        rng = rng or np.random.default_rng(0)
        draws = np.empty((n_boot,) + paths.shape)
        for b in range(n_boot):
            sim = _resample_var(model, rng)
            refit = fit_var(sim, model.p)
            draws[b] = _irf_paths(refit.intercept, refit.coefs, refit.sigma_u, horizon, ortho)
        tail = (1.0 - level) / 2.0
        low = np.quantile(draws, tail, axis=0)
        high = np.quantile(draws, 1.0 - tail, axis=0)
    elif ci is not None:
        raise ValidationError(f"unknown ci mode {ci!r}")
    return ImpulseResponse(steps, paths, ortho, model.var_names, low, high)


@dataclass
class FevdResult:
    steps: np.ndarray
    decomp: np.ndarray  # (h+1, K, K): [step, response, impulse]; step 0 is zero
    var_names: list[str]
    std_errors: np.ndarray | None = None
    band_low: np.ndarray | None = None
    band_high: np.ndarray | None = None


def _fevd_decomp(intercept, coefs, sigma, horizon) -> np.ndarray:
    k = sigma.shape[0]
    ortho = _irf_paths(intercept, coefs, sigma, max(horizon - 1, 0), True)
    contrib = np.cumsum(ortho**2, axis=0)  # contrib[s-1] covers steps 1..s
    decomp = np.zeros((horizon + 1, k, k))
    for s in range(1, horizon + 1):
        mse = contrib[s - 1].sum(axis=1)
        decomp[s] = contrib[s - 1] / mse[:, None]
    return decomp


def fevd(
    model: VarModel,
    horizon: int,
    ci: str | None = "bootstrap",
    n_boot: int = 500,
    level: float = 0.95,
    rng: np.random.Generator | None = None,
) -> FevdResult:
    """Forecast-error variance decomposition, steps 0..horizon.

    Step s decomposes the s-step-ahead forecast error; step 0 is identically
    zero by convention, and for s >= 1 the shares across impulses sum to one
    per response variable. Bootstrap standard errors and percentile bands
    use the same recursive-design resampling as the impulse responses.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    if not isinstance(model, VarModel):
        raise ValidationError("fevd expects a fitted VAR model")
    decomp = _fevd_decomp(model.intercept, model.coefs, model.sigma_u, horizon)
    steps = np.arange(horizon + 1)
    se = low = high = None
    if ci == "bootstrap":
        rng = rng or np.random.default_rng(0)
        draws = np.empty((n_boot,) + decomp.shape)
        for b in range(n_boot):
            sim = _resample_var(model, rng)
            refit = fit_var(sim, model.p)
            draws[b] = _fevd_decomp(refit.intercept, refit.coefs, refit.sigma_u, horizon)
        se = draws.std(axis=0, ddof=1)
        tail = (1.0 - level) / 2.0
        low = np.quantile(draws, tail, axis=0)
        high = np.quantile(draws, 1.0 - tail, axis=0)
    elif ci is not None:
        raise ValidationError(f"unknown ci mode {ci!r}")
    return FevdResult(steps, decomp, model.var_names, se, low, high)


# --- diagnostics -----------------------------------------------------------------


@dataclass
class StabilityRow:
    real: float
    imag: float
    modulus: float


@dataclass
class NormalityTest:
    equation: str
    skewness: float | None
    kurtosis: float | None
    jarque_bera: float
    jb_df: int
    jb_p: float
    skew_stat: float
    skew_df: int
    skew_p: float
    kurt_stat: float
    kurt_df: int
    kurt_p: float


@dataclass
class LmAutocorrRow:
    lag: int
    chi2: float
    df: int
    p_value: float


@dataclass
class DiagnosticsReport:
    stability: list[StabilityRow]
    is_stable: bool
    unit_moduli: int
    normality: list[NormalityTest]
    lm_autocorr: list[LmAutocorrRow]


def diagnostics(model: VarModel | VecmModel, lm_lags: tuple[int, ...] = (1, 2)) -> DiagnosticsReport:
    """Companion-eigenvalue stability table, per-equation and joint
    Jarque-Bera / skewness / kurtosis tests on orthogonalized residuals, and
    the multivariate LM autocorrelation test (df = K^2 per lag)."""
    eigenvalues = model.eigenvalues
    stability = [
        StabilityRow(float(ev.real), float(ev.imag), float(abs(ev))) for ev in eigenvalues
    ]
    unit_moduli = int(np.sum(np.abs(np.abs(eigenvalues) - 1.0) < UNIT_MODULUS_TOL))
    is_stable = bool(np.all(np.abs(eigenvalues) < 1.0 - STABILITY_TOL))

    resid = model.residuals
    t_eff, k = resid.shape
    if t_eff < 8:
        raise DegenerateInputError("too few residuals for diagnostics")
    P = _ortho_factor(model.sigma_ml)
    std = np.linalg.solve(P, resid.T).T

    normality: list[NormalityTest] = []
    jb_sum = skew_sum = kurt_sum = 0.0
    for i in range(k):
        u = std[:, i] - std[:, i].mean()
        m2 = float(np.mean(u**2))
        g1 = float(np.mean(u**3)) / m2**1.5
        g2 = float(np.mean(u**4)) / m2**2
        skew_stat = t_eff * g1 * g1 / 6.0
        kurt_stat = t_eff * (g2 - 3.0) ** 2 / 24.0
        jb = skew_stat + kurt_stat
        jb_sum += jb
        skew_sum += skew_stat
        kurt_sum += kurt_stat
        normality.append(
            NormalityTest(
                equation=model.var_names[i],
                skewness=g1,
                kurtosis=g2,
                jarque_bera=jb,
                jb_df=2,
                jb_p=float(stats.chi2.sf(jb, 2)),
                skew_stat=skew_stat,
                skew_df=1,
                skew_p=float(stats.chi2.sf(skew_stat, 1)),
                kurt_stat=kurt_stat,
                kurt_df=1,
                kurt_p=float(stats.chi2.sf(kurt_stat, 1)),
            )
        )
    normality.append(
        NormalityTest(
            equation="ALL",
            skewness=None,
            kurtosis=None,
            jarque_bera=jb_sum,
            jb_df=2 * k,
            jb_p=float(stats.chi2.sf(jb_sum, 2 * k)),
            skew_stat=skew_sum,
            skew_df=k,
            skew_p=float(stats.chi2.sf(skew_sum, k)),
            kurt_stat=kurt_sum,
            kurt_df=k,
            kurt_p=float(stats.chi2.sf(kurt_sum, k)),
        )
    )

    Z = model.design
    sign, logdet_r = np.linalg.slogdet(model.sigma_ml)
    lm_rows: list[LmAutocorrRow] = []
    for lag in lm_lags:
        lagged = np.zeros_like(resid)
        if lag < t_eff:
            lagged[lag:] = resid[:-lag]
        aug = np.column_stack([Z, lagged])
        gamma = np.linalg.lstsq(aug, resid, rcond=None)[0]
        u = resid - aug @ gamma
        sigma_u_aux = u.T @ u / t_eff
        sign_u, logdet_u = np.linalg.slogdet(sigma_u_aux)
        if sign_u <= 0:
            raise EstimationError("singular auxiliary covariance in LM test")
        d = aug.shape[1]
        lm = (t_eff - d - 0.5) * (logdet_r - logdet_u)
        df = k * k
        lm_rows.append(LmAutocorrRow(lag, float(lm), df, float(stats.chi2.sf(lm, df))))

    return DiagnosticsReport(
        stability=stability,
        is_stable=is_stable,
        unit_moduli=unit_moduli,
        normality=normality,
        lm_autocorr=lm_rows,
    )
