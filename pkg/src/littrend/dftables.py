"""Embedded distribution tables for the unit-root and cointegration tests.

Versioned constants, consumed as givens by the test code:

* ``TAU_*``: MacKinnon's response-surface polynomials for Dickey-Fuller
  tau statistics (MacKinnon 1994, with the 2010 updates), single unit root.
  The p-value is ``Phi(poly(stat))`` with a small-/large-p branch.
* ``RHO_*``: quantiles of the normalized-bias statistic ``n*(rho_hat - 1)``
  for the three deterministic cases, simulated at 400k replications per
  sample size by ``tools/gen_df_rho_tables.py`` (spot-checked against the
  classic published values, e.g. 5%: -8.1 / -14.1 / -21.8 asymptotically).
* ``KPSS_*``: upper-tail quantiles of the level-stationarity KPSS statistic.
* ``JOHANSEN_TRACE_CV5``: 5% trace-test critical values for the
  unrestricted-constant case (Johansen-Juselius / Osterwald-Lenum tables).
* ``ENGLE_GRANGER_CV``: residual Dickey-Fuller critical values adjusted for
  the first-stage estimation, per total variable count (Davidson-MacKinnon
  tables, no-trend case).

p-values from the tau surfaces are censored to [0.01, 0.99] and KPSS
p-values to [0.01, 0.10], mirroring how the source tables are bounded.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .errors import ValidationError

# --- MacKinnon tau response surfaces (single unit root) ---------------------

TAU_STAR = {"none": -1.04, "drift": -1.61, "trend": -2.89}
TAU_MIN = {"none": -19.04, "drift": -18.83, "trend": -16.18}
TAU_MAX = {"none": np.inf, "drift": 2.74, "trend": 0.70}

TAU_SMALLP = {
    "none": np.array([0.6344, 1.2378, 0.032496]),
    "drift": np.array([2.1659, 1.4412, 0.038269]),
    "trend": np.array([3.2512, 1.6047, 0.049588]),
}

TAU_LARGEP = {
    "none": np.array([0.4797, 0.93557, -0.06999, 0.033066]),
    "drift": np.array([1.7339, 0.93202, -0.12745, -0.010368]),
    "trend": np.array([2.5261, 0.61654, -0.37956, -0.060285]),
}

ADF_P_FLOOR = 0.01
ADF_P_CEIL = 0.99


def adf_tau_pvalue(stat: float, case: str) -> float:
    """Approximate p-value of a Dickey-Fuller tau statistic, censored."""
    if case not in TAU_STAR:
        raise ValidationError(f"unknown deterministic case: {case!r}")
    if stat > TAU_MAX[case]:
        return ADF_P_CEIL
    if stat < TAU_MIN[case]:
        return ADF_P_FLOOR
    coef = TAU_SMALLP[case] if stat <= TAU_STAR[case] else TAU_LARGEP[case]
    p = float(norm.cdf(np.polyval(coef[::-1], stat)))
    return float(min(max(p, ADF_P_FLOOR), ADF_P_CEIL))


# --- normalized-bias (rho) quantiles, simulated ------------------------------

RHO_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
# effective regression sample sizes of the simulated rows
RHO_NOBS = np.array([24, 49, 99, 249, 499, 2499])

RHO_QUANTILES = {
    "none": np.array([
        [-11.4471, -9.0169, -7.0488, -5.1225, 0.9717, 1.3502, 1.7127, 2.1962],
        [-12.5331, -9.6414, -7.5176, -5.3979, 0.9507, 1.3223, 1.6712, 2.1214],
        [-12.9535, -9.9992, -7.7606, -5.5543, 0.9398, 1.3013, 1.6288, 2.0654],
        [-13.3998, -10.2968, -7.9337, -5.6586, 0.9269, 1.2847, 1.6162, 2.0460],
        [-13.6073, -10.3677, -7.9822, -5.6754, 0.9278, 1.2883, 1.6116, 2.0364],
        [-13.6742, -10.4027, -8.0108, -5.6944, 0.9309, 1.2857, 1.6069, 2.0335],
    ]),
    "drift": np.array([
        [-16.5562, -14.0400, -11.9904, -9.8487, -0.7259, -0.0071, 0.6078, 1.3135],
        [-18.4564, -15.3998, -13.0242, -10.5139, -0.7856, -0.0686, 0.5271, 1.1983],
        [-19.4449, -16.1344, -13.5599, -10.8755, -0.8139, -0.1051, 0.4642, 1.1061],
        [-20.1703, -16.5666, -13.8427, -11.1004, -0.8280, -0.1273, 0.4404, 1.0765],
        [-20.3546, -16.7079, -13.9417, -11.1446, -0.8374, -0.1370, 0.4188, 1.0681],
        [-20.5877, -16.9373, -14.0933, -11.2676, -0.8549, -0.1541, 0.4162, 1.0578],
    ]),
    "trend": np.array([
        [-21.7980, -19.2993, -17.2401, -14.9792, -3.5099, -2.4096, -1.5019, -0.5062],
        [-25.1805, -21.9339, -19.3278, -16.5379, -3.6268, -2.5463, -1.6624, -0.6524],
        [-27.1302, -23.4235, -20.4759, -17.3646, -3.7166, -2.6178, -1.7352, -0.7792],
        [-28.4894, -24.4625, -21.2193, -17.8862, -3.7477, -2.6670, -1.7863, -0.8216],
        [-28.8504, -24.7423, -21.4566, -18.0581, -3.7538, -2.6558, -1.7772, -0.8243],
        [-29.1641, -24.9500, -21.6327, -18.2144, -3.7423, -2.6491, -1.7804, -0.8389],
    ]),
}


def rho_pvalue(stat: float, case: str, nobs: int) -> float:
    """p-value of the normalized-bias statistic by bilinear interpolation.

    Interpolates across sample size first, then across the quantile grid,
    censoring to [0.01, 0.99] outside the tabulated range.
    """
    if case not in RHO_QUANTILES:
        raise ValidationError(f"unknown deterministic case: {case!r}")
    table = RHO_QUANTILES[case]
    n = float(np.clip(nobs, RHO_NOBS[0], RHO_NOBS[-1]))
    row = np.array([np.interp(n, RHO_NOBS, table[:, j]) for j in range(table.shape[1])])
    # quantiles are increasing in the probability level
    p = float(np.interp(stat, row, RHO_PROBS))
    return float(min(max(p, ADF_P_FLOOR), ADF_P_CEIL))


# --- KPSS level-stationarity quantiles ---------------------------------------

KPSS_STATS = np.array([0.347, 0.463, 0.574, 0.739])
KPSS_PROBS = np.array([0.10, 0.05, 0.025, 0.01])
KPSS_P_FLOOR = 0.01
KPSS_P_CEIL = 0.10


def kpss_pvalue(stat: float) -> float:
    """KPSS (level) p-value by interpolation, censored to [0.01, 0.10]."""
    p = float(np.interp(stat, KPSS_STATS, KPSS_PROBS))
    return float(min(max(p, KPSS_P_FLOOR), KPSS_P_CEIL))


# --- Johansen trace critical values (unrestricted constant), 5% --------------

# index i holds the value for n - r = i + 1 remaining common trends
JOHANSEN_TRACE_CV5 = np.array([3.76, 15.41, 29.68, 47.21, 68.52, 94.15])


def johansen_trace_cv_5pct(n_minus_r: int) -> float:
    if not 1 <= n_minus_r <= len(JOHANSEN_TRACE_CV5):
        raise ValidationError(f"no trace critical value tabulated for n-r={n_minus_r}")
    return float(JOHANSEN_TRACE_CV5[n_minus_r - 1])


# --- Engle-Granger adjusted Dickey-Fuller critical values --------------------

# keyed by the total number of variables (regressand plus regressors),
# (1%, 5%, 10%) columns, no-trend case
ENGLE_GRANGER_CV = {
    2: (-3.90, -3.34, -3.04),
    3: (-4.29, -3.74, -3.45),
    4: (-4.64, -4.10, -3.81),
    5: (-4.96, -4.42, -4.13),
    6: (-5.25, -4.71, -4.42),
}


def engle_granger_critical_values(n_vars: int) -> tuple[float, float, float]:
    if n_vars not in ENGLE_GRANGER_CV:
        raise ValidationError(
            f"no Engle-Granger critical values tabulated for {n_vars} variables"
        )
    return ENGLE_GRANGER_CV[n_vars]
