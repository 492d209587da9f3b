"""Covariate-aware mixed-membership topic model fit by variational EM.

The generative story: each document draws a position eta in (K-1)-space from
a logistic normal centered at X_d Gamma, maps it to topic proportions theta
through a softmax with the last topic as reference, and draws every token's
topic from theta and the token itself from that topic's word distribution.

Fitting alternates a per-document E-step (token posteriors plus a damped
Newton ascent on eta, executed by the shared kernel) with closed-form M-step
updates for the topic-word matrix, the ridge-penalized covariate
coefficients, and the prior covariance. Every block update maximizes the
same penalized objective, so the recorded bound trace is non-decreasing up
to floating-point noise.

The E-step is embarrassingly parallel across documents; the implementation
runs it as a single deterministic sweep so fits are reproducible bit for bit
for a given seed. ``k_scan`` may fit different K values concurrently since
fits share nothing.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels
from .corpus import DocumentRecord, ProcessedCorpus, JOURNAL_TYPES
from .errors import DegenerateInputError, EstimationError, ValidationError

DEFAULT_K_RANGE = (5, 40)
DEFAULT_MAX_ITERATIONS = 75
DEFAULT_FREX_WEIGHT = 0.7
DEFAULT_COHERENCE_WORDS = 10

_CENTERING_TOL = 1e-9


# --- covariate design -----------------------------------------------------------


@dataclass
class CovariateDesign:
    """Mean-zero covariate matrix for topic prevalence."""

    rows: np.ndarray  # D x P, centered columns
    names: list[str]
    encoding_note: str = ""

    @property
    def n_docs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.rows.shape[1]

    def validate(self) -> None:
        if self.rows.ndim != 2:
            raise ValidationError("covariate rows must be a 2-D matrix")
        if self.rows.shape[1] != len(self.names):
            raise ValidationError("covariate names do not match columns")
        if self.rows.shape[1] == 0:
            return
        means = np.abs(self.rows.mean(axis=0))
        if (means > _CENTERING_TOL).any():
            raise ValidationError(f"covariate columns are not mean-zero (max |mean| {means.max():g})")
        norms = np.abs(self.rows).max(axis=0)
        if (norms == 0).any():
            dead = [self.names[j] for j in np.flatnonzero(norms == 0)]
            raise ValidationError(f"constant covariate columns: {dead}")

    @classmethod
    def intercept_only(cls, n_docs: int) -> "CovariateDesign":
        return cls(rows=np.zeros((n_docs, 0)), names=[], encoding_note="intercept only")

    @classmethod
    def from_records(
        cls,
        records: list[DocumentRecord],
        use_year: bool = True,
        use_journal_type: bool = True,
    ) -> "CovariateDesign":
        """Year as a centered linear term, journal type one-hot with the
        first observed category as the dropped baseline; all columns centered."""
        cols: list[np.ndarray] = []
        names: list[str] = []
        notes: list[str] = []
        if use_year:
            years = np.array([rec.year for rec in records], dtype=float)
            cols.append(years - years.mean())
            names.append("year")
            notes.append("year centered")
        if use_journal_type:
            observed = [jt for jt in JOURNAL_TYPES if any(r.journal_type == jt for r in records)]
            if len(observed) < 2:
                raise ValidationError("journal_type covariate needs at least two observed types")
            baseline = observed[0]
            for jt in observed[1:]:
                indicator = np.array([1.0 if r.journal_type == jt else 0.0 for r in records])
                cols.append(indicator - indicator.mean())
                names.append(f"journal_type:{jt}")
            notes.append(f"journal_type one-hot, baseline {baseline}, centered")
        rows = np.column_stack(cols) if cols else np.zeros((len(records), 0))
        design = cls(rows=rows, names=names, encoding_note="; ".join(notes))
        design.validate()
        return design


# --- fit ------------------------------------------------------------------------


@dataclass
class FitOptions:
    """Knobs for :func:`fit`.

    ``init`` selects how beta starts: ``random`` (seeded random-partition
    document clustering, the default), ``spectral`` (anchor words), or
    ``dirichlet`` (plain per-term Dirichlet columns; mainly of historical
    interest since it starts EM at a near-symmetric saddle).
    """

    max_iterations: int = DEFAULT_MAX_ITERATIONS
    tolerance: float = 1e-5
    seed: int = 0
    init: str = "random"
    gamma_ridge: float = 1.0
    inner_iterations: int = 10
    sigma_burnin: int = 5  # iterations before the prior covariance starts updating
    debug_validate: bool = False  # check row-stochasticity every iteration

    def config_hash(self) -> str:
        payload = json.dumps(self.__dict__, sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class TopicModelFit:
    k: int
    beta: np.ndarray  # K x V, rows sum to one
    theta: np.ndarray  # D x K, rows sum to one
    gamma: np.ndarray  # P x (K-1)
    sigma: np.ndarray  # (K-1) x (K-1)
    bound_trace: list[float]
    seed: int
    iterations_used: int
    converged: bool
    vocabulary: list[str]
    eta: np.ndarray  # D x (K-1) posterior modes
    eta_cov: np.ndarray  # D x (K-1) x (K-1) posterior covariances
    config_hash: str = ""

    def validate(self, atol: float = 1e-8) -> None:
        if not np.allclose(self.beta.sum(axis=1), 1.0, atol=atol):
            raise ValidationError("beta rows do not sum to one")
        if (self.beta < 0).any():
            raise ValidationError("negative beta entry")
        if not np.allclose(self.theta.sum(axis=1), 1.0, atol=atol):
            raise ValidationError("theta rows do not sum to one")
        if (self.theta < 0).any():
            raise ValidationError("negative theta entry")
        if not np.allclose(self.sigma, self.sigma.T, atol=1e-10):
            raise ValidationError("sigma is not symmetric")
        if np.linalg.eigvalsh(self.sigma).min() < -1e-10:
            raise ValidationError("sigma is not positive semi-definite")
        diffs = np.diff(self.bound_trace)
        if len(diffs) and diffs.min() < -1e-6:
            raise ValidationError(f"bound decreased by {-diffs.min():g}")

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            version=np.array([1]),
            beta=self.beta,
            theta=self.theta,
            gamma=self.gamma,
            sigma=self.sigma,
            bound_trace=np.asarray(self.bound_trace),
            seed=np.array([self.seed]),
            iterations_used=np.array([self.iterations_used]),
            converged=np.array([self.converged]),
            vocabulary=np.array(self.vocabulary, dtype=object),
            eta=self.eta,
            eta_cov=self.eta_cov,
            config_hash=np.array([self.config_hash], dtype=object),
        )

    @classmethod
    def load(cls, path) -> "TopicModelFit":
        with np.load(path, allow_pickle=True) as archive:
            if int(archive["version"][0]) != 1:
                raise ValidationError("unsupported fit archive version")
            fit = cls(
                k=archive["beta"].shape[0],
                beta=archive["beta"],
                theta=archive["theta"],
                gamma=archive["gamma"],
                sigma=archive["sigma"],
                bound_trace=archive["bound_trace"].tolist(),
                seed=int(archive["seed"][0]),
                iterations_used=int(archive["iterations_used"][0]),
                converged=bool(archive["converged"][0]),
                vocabulary=[str(w) for w in archive["vocabulary"]],
                eta=archive["eta"],
                eta_cov=archive["eta_cov"],
                config_hash=str(archive["config_hash"][0]),
            )
        fit.validate()
        return fit


def _csr_parts(corpus: ProcessedCorpus):
    counts = corpus.counts.tocsr()
    return (
        counts.indptr.astype(np.int64),
        counts.indices.astype(np.int64),
        counts.data.astype(np.float64),
    )


def _term_keyed_init(vocabulary: list[str], k: int, seed: int, concentration: float = 0.1) -> np.ndarray:
    """Seeded sparse Dirichlet init keyed by term identity, so permuting the
    vocabulary permutes the initial beta columns with it."""
    V = len(vocabulary)
    beta = np.empty((k, V))
    for v, term in enumerate(vocabulary):
        tag = int.from_bytes(hashlib.sha256(term.encode()).digest()[:8], "big")
        col_rng = np.random.default_rng(np.random.SeedSequence((seed, tag)))
        beta[:, v] = col_rng.gamma(concentration, size=k) + 1e-12
    return beta / beta.sum(axis=1, keepdims=True)


def _cluster_init(corpus: ProcessedCorpus, k: int, seed: int, rounds: int = 5) -> np.ndarray:
    """Seeded random-partition init: assign documents to K groups at random,
    sharpen with a few spherical k-means rounds, and aggregate each group's
    counts into a topic row.

    Plain per-column Dirichlet draws start EM at a near-symmetric saddle it
    escapes only sluggishly; starting from document clusters gives the
    topic-word rows first-order contrast from the outset. All steps depend
    on documents, not on vocabulary order, so permuting vocabulary columns
    permutes the init with them.
    """
    X = corpus.counts.astype(np.float64).tocsr()
    D, V = X.shape
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    inv = 1.0 / np.maximum(norms, 1e-300)
    Xn = X.multiply(inv[:, None]).tocsr()

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x636C7573)))
    assign = rng.integers(0, k, size=D)
    for c in range(k):
        if not (assign == c).any():
            assign[c % D] = c
    global_mean = np.asarray(Xn.mean(axis=0)).ravel()
    centroids = np.tile(global_mean, (k, 1))
    for _ in range(rounds):
        for c in range(k):
            mask = assign == c
            if mask.any():
                centroids[c] = np.asarray(Xn[mask].mean(axis=0)).ravel()
        lens = np.linalg.norm(centroids, axis=1, keepdims=True)
        centroids /= np.maximum(lens, 1e-300)
        assign = np.asarray(Xn @ centroids.T).argmax(axis=1)

    beta = np.empty((k, V))
    totals = np.asarray(X.sum(axis=0)).ravel()
    fallback = (totals + 0.1) / (totals + 0.1).sum()
    for c in range(k):
        mask = assign == c
        if mask.any():
            row = np.asarray(X[mask].sum(axis=0)).ravel() + 0.1
            beta[c] = row / row.sum()
        else:
            beta[c] = fallback
    return beta


def _spectral_init(corpus: ProcessedCorpus, k: int) -> np.ndarray:
    """Anchor-word initialization: greedy farthest-point anchors on the
    row-normalized word co-occurrence matrix, then one least-squares recovery
    of the topic-word rows (clipped to the simplex)."""
    X = corpus.counts.astype(float)
    n_d = np.asarray(X.sum(axis=1)).ravel()
    scale = 1.0 / np.maximum(n_d * np.maximum(n_d - 1.0, 1.0), 1.0)
    scaled = X.multiply(scale[:, None]).tocsr()
    Q = np.asarray((scaled.T @ X).todense()) - np.diag(np.asarray(scaled.sum(axis=0)).ravel())
    Q = np.maximum(Q, 0.0)
    row_sums = Q.sum(axis=1)
    keep = row_sums > 0
    Qbar = np.zeros_like(Q)
    Qbar[keep] = Q[keep] / row_sums[keep, None]

    anchors: list[int] = []
    basis: list[np.ndarray] = []
    residual = Qbar.copy()
    for _ in range(k):
        norms = (residual * residual).sum(axis=1)
        norms[anchors] = -1.0
        a = int(np.argmax(norms))
        anchors.append(a)
        v = residual[a]
        norm = math.sqrt(float(v @ v))
        if norm < 1e-12:
            break
        v = v / norm
        basis.append(v)
        residual = residual - np.outer(residual @ v, v)
    while len(anchors) < k:
        anchors.append(int(np.argmax(row_sums)))

    A = Qbar[anchors]  # k x V rows span the topic simplex approximately
    coeffs, *_ = np.linalg.lstsq(A.T, Qbar.T, rcond=None)
    weights = np.clip(coeffs.T, 0.0, None)  # V x k: p(topic | word)
    word_prob = np.asarray(X.sum(axis=0)).ravel()
    word_prob = word_prob / word_prob.sum()
    beta = (weights * word_prob[:, None]).T
    beta += 1e-8
    return beta / beta.sum(axis=1, keepdims=True)


def fit(
    corpus: ProcessedCorpus,
    X: CovariateDesign | None,
    k: int,
    opts: FitOptions | None = None,
) -> TopicModelFit:
    """Fit a K-topic model; see the module docstring for the scheme."""
    opts = opts or FitOptions()
    D, V = corpus.counts.shape
    if not 2 <= k <= V:
        raise ValidationError(f"topic count must satisfy 2 <= K <= {V}, got {k}")
    if D < k:
        raise ValidationError(f"need at least K={k} documents, have {D}")
    if X is None:
        X = CovariateDesign.intercept_only(D)
    X.validate()
    if X.n_docs != D:
        raise ValidationError("covariate rows do not align with corpus documents")
    P = X.n_covariates
    if P:
        if np.linalg.matrix_rank(X.rows) < P:
            raise DegenerateInputError("design matrix is rank-deficient")

    km1 = k - 1
    if opts.init == "random":
        beta = _cluster_init(corpus, k, opts.seed)
    elif opts.init == "dirichlet":
        beta = _term_keyed_init(corpus.vocabulary, k, opts.seed)
    elif opts.init == "spectral":
        beta = _spectral_init(corpus, k)
    else:
        raise ValidationError(f"unknown init mode {opts.init!r}")

    gamma = np.zeros((P, km1))
    sigma = np.eye(km1)
    etas = np.zeros((D, km1))
    indptr, indices, data = _csr_parts(corpus)

    ridge = opts.gamma_ridge
    iw_scale = 0.01 * np.eye(km1)
    iw_df_term = km1 + 2 + km1 + 1  # weak inverse-Wishart keeps sigma positive definite
    xtx = X.rows.T @ X.rows if P else None

    bound_trace: list[float] = []
    neg_hess = np.zeros((D, km1, km1))
    theta = np.full((D, k), 1.0 / k)
    iterations = 0
    converged = False
    for iteration in range(opts.max_iterations):
        iterations = iteration + 1
        mus = X.rows @ gamma if P else np.zeros((D, km1))
        sign, logdet = np.linalg.slogdet(sigma)
        if sign <= 0:
            raise EstimationError(f"sigma lost positive definiteness at iteration {iteration}")
        sigma_inv = np.linalg.inv(sigma)

        doc_terms, beta_acc, neg_hess, theta = _kernels.stm_estep(
            indptr, indices, data, beta, mus, etas, sigma_inv,
            float(logdet), opts.inner_iterations, 1e-9,
        )
        penalty = -0.5 * ridge * float(np.trace(sigma_inv @ gamma.T @ gamma)) if P else 0.0
        penalty -= 0.5 * (P * logdet if P else 0.0)
        penalty -= 0.5 * (iw_df_term * logdet + float(np.trace(sigma_inv @ iw_scale)))
        bound = float(doc_terms) + penalty
        if not math.isfinite(bound):
            raise EstimationError(f"non-finite objective at iteration {iteration}")
        bound_trace.append(bound)

        # M-step: exact maximizers of the same objective; sigma is held at its
        # start value for a few iterations so documents spread out before the
        # prior tightens (skipping one block update keeps the ascent valid)
        beta = beta_acc / beta_acc.sum(axis=1, keepdims=True)
        if P:
            gamma = np.linalg.solve(xtx + ridge * np.eye(P), X.rows.T @ etas)
        if iteration + 1 >= opts.sigma_burnin:
            if P:
                resid = etas - X.rows @ gamma
                scatter = resid.T @ resid + ridge * gamma.T @ gamma + iw_scale
            else:
                scatter = etas.T @ etas + iw_scale
            sigma = scatter / (D + P + iw_df_term)
            sigma = 0.5 * (sigma + sigma.T)

        if opts.debug_validate:
            if not np.allclose(beta.sum(axis=1), 1.0, atol=1e-8):
                raise EstimationError(f"beta rows left the simplex at iteration {iteration}")
            if not np.allclose(theta.sum(axis=1), 1.0, atol=1e-8):
                raise EstimationError(f"theta rows left the simplex at iteration {iteration}")

        if iteration > 0:
            prev = bound_trace[-2]
            if abs(bound - prev) / (abs(prev) + 1e-10) < opts.tolerance:
                converged = True
                break

    eta_cov = np.linalg.inv(neg_hess)
    result = TopicModelFit(
        k=k,
        beta=beta,
        theta=theta,
        gamma=gamma,
        sigma=sigma,
        bound_trace=bound_trace,
        seed=opts.seed,
        iterations_used=iterations,
        converged=converged,
        vocabulary=list(corpus.vocabulary),
        eta=etas,
        eta_cov=eta_cov,
        config_hash=opts.config_hash(),
    )
    result.validate()
    return result


# --- topic summaries --------------------------------------------------------------


def _ranked(values: np.ndarray) -> np.ndarray:
    """Descending order with vocabulary-index tie-break."""
    return np.lexsort((np.arange(len(values)), -values))


def exclusivity_scores(beta: np.ndarray) -> np.ndarray:
    """Share of each word's probability mass owned by each topic (K x V)."""
    return beta / np.maximum(beta.sum(axis=0, keepdims=True), 1e-300)


def frex_scores(beta: np.ndarray, weight: float = DEFAULT_FREX_WEIGHT) -> np.ndarray:
    """Weighted harmonic mean of the within-topic ECDFs of frequency and
    exclusivity; ``weight`` is the exclusivity side."""
    if not 0.0 <= weight <= 1.0:
        raise ValidationError("FREX weight must lie in [0, 1]")
    K, V = beta.shape
    ex = exclusivity_scores(beta)
    out = np.empty_like(beta)
    for k in range(K):
        freq_cdf = stats.rankdata(beta[k], method="max") / V
        ex_cdf = stats.rankdata(ex[k], method="max") / V
        out[k] = 1.0 / (weight / ex_cdf + (1.0 - weight) / freq_cdf)
    return out


def top_words(
    fit: TopicModelFit,
    n: int,
    metric: str = "HighestProb",
    weight: float = DEFAULT_FREX_WEIGHT,
) -> list[list[str]]:
    """Per-topic ranked word lists under HighestProb or FREX."""
    V = fit.beta.shape[1]
    if not 1 <= n <= V:
        raise ValidationError(f"n must be in [1, {V}]")
    if metric == "HighestProb":
        scores = fit.beta
    elif metric == "FREX":
        scores = frex_scores(fit.beta, weight)
    else:
        raise ValidationError(f"unknown ranking metric {metric!r}")
    vocab = np.asarray(fit.vocabulary, dtype=object)
    return [[str(w) for w in vocab[_ranked(scores[k])[:n]]] for k in range(fit.k)]


@dataclass
class CoherenceExclusivity:
    semantic_coherence: np.ndarray  # per topic, <= 0
    exclusivity: np.ndarray  # per topic, > 0
    m: int

    @property
    def mean_coherence(self) -> float:
        return float(self.semantic_coherence.mean())

    @property
    def mean_exclusivity(self) -> float:
        return float(self.exclusivity.mean())


def coherence_exclusivity(
    fit: TopicModelFit,
    corpus: ProcessedCorpus,
    m: int = DEFAULT_COHERENCE_WORDS,
) -> CoherenceExclusivity:
    """Semantic coherence over top-M HighestProb words (document
    co-occurrence log-ratios) and mean exclusivity over top-M FREX words."""
    V = corpus.counts.shape[1]
    if m > V:
        raise ValidationError(f"M={m} exceeds vocabulary size {V}")
    binary = (corpus.counts > 0).astype(np.int64).tocsc()
    doc_freq = np.asarray(binary.sum(axis=0)).ravel()
    ex = exclusivity_scores(fit.beta)
    frex = frex_scores(fit.beta)

    sc = np.zeros(fit.k)
    exc = np.zeros(fit.k)
    for k in range(fit.k):
        top = _ranked(fit.beta[k])[:m]
        cols = binary[:, top].toarray()
        co = cols.T @ cols
        total = 0.0
        for i in range(1, len(top)):
            for j in range(i):
                total += math.log((co[i, j] + 1.0) / doc_freq[top[j]])
        sc[k] = total
        top_frex = _ranked(frex[k])[:m]
        exc[k] = ex[k, top_frex].mean()
    return CoherenceExclusivity(semantic_coherence=sc, exclusivity=exc, m=m)


# --- K selection -------------------------------------------------------------------


@dataclass
class KSelectionRow:
    k: int
    coherence: float
    exclusivity: float
    ser: float
    delta_ser: float | None
    weighted_delta: float | None
    improved: bool  # weighted delta < 0 flags an improvement in one measure


@dataclass
class KSelectionReport:
    rows: list[KSelectionRow]
    highlight_k: int | None

    def row(self, k: int) -> KSelectionRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise ValidationError(f"K={k} not in scan")


def ser_table(pairs: list[tuple[int, float, float]]) -> list[KSelectionRow]:
    """Build the SER / delta / weighted-delta rows from (K, SC, EX) triples."""
    rows: list[KSelectionRow] = []
    prev_ser = None
    for k, sc, ex in pairs:
        if ex <= 0:
            raise ValidationError("exclusivity must be positive")
        ser = sc / ex
        if prev_ser is None:
            rows.append(KSelectionRow(k, sc, ex, ser, None, None, False))
        else:
            delta = ser - prev_ser
            weighted = delta / ser
            rows.append(KSelectionRow(k, sc, ex, ser, delta, weighted, weighted < 0))
        prev_ser = ser
    return rows


def k_scan(
    corpus: ProcessedCorpus,
    X: CovariateDesign | None,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
    opts: FitOptions | None = None,
    m: int = DEFAULT_COHERENCE_WORDS,
) -> KSelectionReport:
    """Fit every K in the range with a common seed and tabulate the
    coherence/exclusivity ratio diagnostics.

    The report is meant for a human decision; the only automation is the
    non-binding highlight (best coherence among improvement-flagged rows).
    """
    lo, hi = k_range
    V = corpus.counts.shape[1]
    if not (2 <= lo <= hi <= V):
        raise ValidationError(f"scan range must satisfy 2 <= lo <= hi <= {V}")
    opts = opts or FitOptions()
    pairs = []
    for k in range(lo, hi + 1):
        fitted = fit(corpus, X, k, opts)
        quality = coherence_exclusivity(fitted, corpus, m=min(m, V))
        pairs.append((k, quality.mean_coherence, quality.mean_exclusivity))
    rows = ser_table(pairs)
    flagged = [row for row in rows if row.improved]
    highlight = max(flagged, key=lambda r: r.coherence).k if flagged else None
    return KSelectionReport(rows=rows, highlight_k=highlight)


# --- covariate effects ---------------------------------------------------------------


@dataclass
class EffectEstimate:
    topic: int  # 0-based topic index
    covariate: str
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    method: str

    @property
    def topic_label(self) -> str:
        return f"topic_{self.topic + 1}"


def estimate_effect(
    fit: TopicModelFit,
    X: CovariateDesign,
    covariate: str,
    uncertainty: str = "analytic",
    draws: int = 100,
    seed: int = 0,
) -> list[EffectEstimate]:
    """Per-topic linear regression of prevalence on the covariates.

    ``analytic`` reports OLS standard errors; ``simulation`` resamples eta
    from the per-document posterior normal, refits the regression per draw,
    and aggregates the coefficient draws.
    """
    X.validate()
    if X.n_docs != fit.theta.shape[0]:
        raise ValidationError("covariate rows do not align with the fit")
    names = ["intercept"] + list(X.names)
    if covariate not in names:
        raise ValidationError(f"unknown covariate {covariate!r} (have {names})")
    col = names.index(covariate)
    design = np.column_stack([np.ones(X.n_docs), X.rows])
    n, p = design.shape
    if np.linalg.matrix_rank(design) < p:
        raise DegenerateInputError("design matrix is rank-deficient")
    if n <= p:
        raise DegenerateInputError("more parameters than documents")
    xtx_inv = np.linalg.inv(design.T @ design)

    def ols(y: np.ndarray) -> tuple[float, float]:
        coef = xtx_inv @ (design.T @ y)
        resid = y - design @ coef
        s2 = float(resid @ resid) / (n - p)
        return float(coef[col]), math.sqrt(s2 * xtx_inv[col, col])

    estimates: list[EffectEstimate] = []
    if uncertainty == "analytic":
        for k in range(fit.k):
            est, se = ols(fit.theta[:, k])
            half = 1.959963984540054 * se
            estimates.append(
                EffectEstimate(k, covariate, est, se, est - half, est + half, "analytic")
            )
        return estimates

    if uncertainty != "simulation":
        raise ValidationError(f"unknown uncertainty mode {uncertainty!r}")
    rng = np.random.default_rng(seed)
    km1 = fit.k - 1
    chol = np.linalg.cholesky(fit.eta_cov + 1e-12 * np.eye(km1))
    coef_draws = np.empty((draws, fit.k))
    for b in range(draws):
        noise = rng.standard_normal((X.n_docs, km1))
        eta_b = fit.eta + np.einsum("dij,dj->di", chol, noise)
        full = np.column_stack([eta_b, np.zeros(X.n_docs)])
        full -= full.max(axis=1, keepdims=True)
        theta_b = np.exp(full)
        theta_b /= theta_b.sum(axis=1, keepdims=True)
        coefs = xtx_inv @ (design.T @ theta_b)
        coef_draws[b] = coefs[col]
    for k in range(fit.k):
        sample = coef_draws[:, k]
        est = float(sample.mean())
        se = float(sample.std(ddof=1))
        lo_q, hi_q = np.percentile(sample, [2.5, 97.5])
        lo_q, hi_q = min(lo_q, est), max(hi_q, est)
        estimates.append(EffectEstimate(k, covariate, est, se, float(lo_q), float(hi_q), "simulation"))
    return estimates
