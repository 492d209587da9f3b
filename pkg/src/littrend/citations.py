"""Cross-section regressions of transformed citations-per-year on topic shares.

One fit per topic: the transformed outcome is regressed on the log topic
share and an open-access dummy, with author dummies and year-x-journal fixed
effects (absorbed by the within transformation, numerically identical to the
dummy-expanded model). Standard errors are clustered on the year-x-journal
cells with the small-sample factor G/(G-1) * (N-1)/(N-K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import DocumentRecord
from .errors import DegenerateInputError, ValidationError

TOPIC_SHARE_FLOOR = 1e-12

TRANSFORMS = ("LogCY", "Log1pCY", "IHS")


def transform_citations(citations: float, years_since_pub: float, mode: str) -> float | None:
    """Transform citations-per-year; returns None when LogCY hits zero counts
    (the caller drops such rows instead of propagating a NaN)."""
    if years_since_pub <= 0:
        raise ValidationError(f"years_since_pub must be positive, got {years_since_pub}")
    cy = citations / years_since_pub
    if cy < 0:
        raise ValidationError("negative citations")
    if mode == "LogCY":
        return math.log(cy) if cy > 0 else None
    if mode == "Log1pCY":
        return math.log1p(cy)
    if mode == "IHS":
        # log(x + sqrt(x^2 + 1)); asinh evaluates it accurately near zero
        return math.asinh(cy)
    raise ValidationError(f"unknown transform {mode!r} (expected one of {TRANSFORMS})")


@dataclass
class RegressionFit:
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    n: int
    dropped: int
    r_squared: float
    within_r_squared: float
    n_clusters: int
    fixed_effects: str
    transform: str
    topic_label: str

    def coefficient(self, name: str) -> float:
        return self.coefficients[name]


def _dummies(labels: list, drop_first: bool) -> tuple[np.ndarray, list[str]]:
    levels = sorted(set(labels), key=str)
    kept = levels[1:] if drop_first else levels
    mat = np.zeros((len(labels), len(kept)))
    pos = {lev: j for j, lev in enumerate(kept)}
    for i, lab in enumerate(labels):
        j = pos.get(lab)
        if j is not None:
            mat[i, j] = 1.0
    return mat, [str(lev) for lev in kept]


def _demean_by(groups: np.ndarray, *arrays: np.ndarray) -> tuple[np.ndarray, ...]:
    out = []
    for arr in arrays:
        arr = arr.astype(float).copy()
        flat = arr if arr.ndim == 2 else arr[:, None]
        for g in np.unique(groups):
            mask = groups == g
            flat[mask] -= flat[mask].mean(axis=0)
        out.append(arr)
    return tuple(out)


def fit_citation_model(
    records: list[DocumentRecord],
    theta: np.ndarray,
    topic_index: int,
    transform: str = "IHS",
    reference_year: int | None = None,
) -> RegressionFit:
    """Fit the citation regression for one topic (0-based column of theta).

    ``years_since_pub`` is (reference_year - publication_year) + 1, with the
    reference year defaulting to the latest year in the records.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[0] != len(records):
        raise ValidationError("theta rows do not align with records")
    if not 0 <= topic_index < theta.shape[1]:
        raise ValidationError(f"topic_index {topic_index} out of range")
    if reference_year is None:
        reference_year = max(rec.year for rec in records)

    shares = np.maximum(theta[:, topic_index], TOPIC_SHARE_FLOOR)
    y_rows, keep = [], []
    for i, rec in enumerate(records):
        value = transform_citations(rec.citation_count, reference_year - rec.year + 1, transform)
        if value is None:
            continue
        y_rows.append(value)
        keep.append(i)
    dropped = len(records) - len(keep)
    if len(keep) < 4:
        raise DegenerateInputError("too few usable rows after transform drops")
    kept_records = [records[i] for i in keep]
    y = np.asarray(y_rows)

    x_main = np.column_stack(
        [
            np.log(shares[keep]),
            np.array([1.0 if r.open_access else 0.0 for r in kept_records]),
        ]
    )
    main_names = [f"log_{_label(topic_index)}", "open_access"]
    authors = [r.corresponding_author or "(missing)" for r in kept_records]
    author_mat, author_levels = _dummies(authors, drop_first=True)
    X = np.column_stack([x_main, author_mat])
    names = main_names + [f"author:{lev}" for lev in author_levels]

    cells = np.array([f"{r.year}\x00{r.journal}" for r in kept_records])
    cell_ids, cluster_idx = np.unique(cells, return_inverse=True)
    n_clusters = len(cell_ids)
    if n_clusters < 2:
        raise DegenerateInputError("need at least two year x journal clusters")

    Xd, yd = _demean_by(cluster_idx, X, y)
    col_scale = np.sqrt((Xd * Xd).sum(axis=0))
    dead = col_scale <= 1e-10 * max(1.0, math.sqrt(len(y)))
    if dead[:2].any():
        which = [main_names[j] for j in range(2) if dead[j]]
        raise DegenerateInputError(f"zero variance after demeaning: {which}")
    if dead.any():
        # drop collinear author dummies (authors nested within a single cell)
        keep_cols = ~dead
        X, Xd = X[:, keep_cols], Xd[:, keep_cols]
        names = [nm for nm, k in zip(names, keep_cols) if k]

    n, k_x = Xd.shape
    k_full = k_x + n_clusters
    if n - k_full < 1:
        raise DegenerateInputError(
            f"model is saturated: {n} rows, {k_full} parameters including fixed effects"
        )

    beta, *_ = np.linalg.lstsq(Xd, yd, rcond=None)
    resid = yd - Xd @ beta

    xtx_inv = np.linalg.pinv(Xd.T @ Xd)
    meat = np.zeros((k_x, k_x))
    for g in range(n_clusters):
        mask = cluster_idx == g
        s = Xd[mask].T @ resid[mask]
        meat += np.outer(s, s)
    correction = (n_clusters / (n_clusters - 1.0)) * ((n - 1.0) / (n - k_full))
    vcov = correction * xtx_inv @ meat @ xtx_inv
    std_errors = np.sqrt(np.clip(np.diag(vcov), 0.0, None))

    rss = float(resid @ resid)
    tss_full = float(((y - y.mean()) ** 2).sum())
    tss_within = float((yd * yd).sum())
    if tss_full <= 0 or tss_within <= 0:
        raise DegenerateInputError("outcome has no variance")

    return RegressionFit(
        coefficients=dict(zip(names, beta.tolist())),
        std_errors=dict(zip(names, std_errors.tolist())),
        n=n,
        dropped=dropped,
        r_squared=1.0 - rss / tss_full,
        within_r_squared=1.0 - rss / tss_within,
        n_clusters=n_clusters,
        fixed_effects="year x journal",
        transform=transform,
        topic_label=_label(topic_index),
    )


def _label(topic_index: int) -> str:
    return f"topic_{topic_index + 1}"
