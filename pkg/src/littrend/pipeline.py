"""End-to-end orchestration: config, staged execution, manifest, reports.

A run executes the enabled stages in dependency order (corpus, topics, then
trends / citations / multivar / embeddings), writing every artifact under
the output directory and recording a SHA-256 per artifact in
``manifest.json``. All randomness flows from the global seed through named
substreams, and wall-clock timings live in a separate ``timings.json`` so
that rerunning with the same config and seed reproduces the manifest byte
for byte. A failing stage leaves a ``FAILED_<stage>`` marker next to
whatever artifacts it managed to write.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import citations as cit
from . import multivar as mv
from . import topicmodel as tm
from . import trends as tr
from ._kernels import backend_name
from .corpus import (
    DocumentRecord,
    ProcessedCorpus,
    StopwordConfig,
    clean_records,
    load_records,
    select_subset,
)
from .embeddings import EmbeddingModel, similarity_series, train_pvdbow
from .errors import LittrendError, ValidationError

ALL_STAGES = ("corpus", "topics", "trends", "citations", "multivar", "embeddings")

REPORT_SECTIONS = (
    "prevalence",
    "k_selection",
    "effects",
    "concentration",
    "dominance",
    "unitroot",
    "citations",
    "lag_selection",
    "cointegration",
    "granger",
    "irf",
    "fevd",
    "diagnostics",
    "similarity",
)


class StageError(LittrendError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def substream(seed: int, name: str) -> int:
    """Stable named substream of the global seed."""
    tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "big")
    return int(np.random.SeedSequence((seed, tag)).generate_state(1)[0])


@dataclass
class PipelineConfig:
    records_path: Path
    schema: dict[str, str]
    out_dir: Path
    seed: int = 0
    year_range: tuple[int, int] = (2000, 2021)
    operators: list[str] = field(default_factory=lambda: ["collusion", "collusive", "cartel", "bidding ring"])
    stopword_base: Path | None = None
    stopword_custom: Path | None = None
    covariate_year: bool = True
    covariate_journal_type: bool = True
    k: int | None = None
    k_range: tuple[int, int] | None = None
    max_iterations: int = tm.DEFAULT_MAX_ITERATIONS
    tolerance: float = 1e-5
    init: str = "random"
    effect_covariate: str = "year"
    category_map_path: Path | None = None
    dominance_series: str | None = None
    dominance_split_year: int | None = None
    citation_transforms: tuple[str, ...] = ("LogCY", "Log1pCY", "IHS")
    mv_variables: list[str] = field(default_factory=list)
    mv_var_variables: list[str] | None = None
    mv_lags: int = 2
    mv_d_max: int = 1
    mv_rank: int | None = None
    mv_horizon: int = 8
    mv_bootstrap: int = 500
    mv_log: bool = True
    granger_mode: str = "all_lags"
    emb_dim: int = 50
    emb_iterations: int = 20
    emb_negative: int = 5
    stages: tuple[str, ...] = ALL_STAGES

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}")
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        base = path.parent

        def respath(value):
            if value in (None, ""):
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p

        inp = raw.get("input", {})
        topics = raw.get("topics", {})
        trends_cfg = raw.get("trends", {})
        cites = raw.get("citations", {})
        multi = raw.get("multivar", {})
        emb = raw.get("embeddings", {})
        stops = raw.get("stopwords", {})
        cov = raw.get("covariates", {})
        dominance = trends_cfg.get("dominance") or {}

        cfg = cls(
            records_path=respath(inp.get("records")) or Path(""),
            schema={str(k): str(v) for k, v in (inp.get("schema") or {}).items()},
            out_dir=respath(raw.get("output")) or base / "out",
            seed=int(raw.get("seed", 0)),
            year_range=tuple(inp.get("year_range", (2000, 2021))),
            operators=list(raw.get("operators", ["collusion", "collusive", "cartel", "bidding ring"])),
            stopword_base=respath(stops.get("base")),
            stopword_custom=respath(stops.get("custom")),
            covariate_year=bool(cov.get("year", True)),
            covariate_journal_type=bool(cov.get("journal_type", True)),
            k=topics.get("k"),
            k_range=tuple(topics["k_range"]) if topics.get("k_range") else None,
            max_iterations=int(topics.get("max_iterations", tm.DEFAULT_MAX_ITERATIONS)),
            tolerance=float(topics.get("tolerance", 1e-5)),
            init=str(topics.get("init", "random")),
            effect_covariate=str(topics.get("effect_covariate", "year")),
            category_map_path=respath(raw.get("category_map")),
            dominance_series=dominance.get("series"),
            dominance_split_year=dominance.get("split_year"),
            citation_transforms=tuple(cites.get("transforms", ("LogCY", "Log1pCY", "IHS"))),
            mv_variables=list(multi.get("variables", [])),
            mv_var_variables=list(multi["var_variables"]) if multi.get("var_variables") else None,
            mv_lags=int(multi.get("lags", 2)),
            mv_d_max=int(multi.get("d_max", 1)),
            mv_rank=multi.get("rank"),
            mv_horizon=int(multi.get("horizon", 8)),
            mv_bootstrap=int(multi.get("bootstrap", 500)),
            mv_log=bool(multi.get("log", True)),
            granger_mode=str(multi.get("granger_mode", "all_lags")),
            emb_dim=int(emb.get("dim", 50)),
            emb_iterations=int(emb.get("iterations", 20)),
            emb_negative=int(emb.get("negative", 5)),
            stages=tuple(raw.get("stages", ALL_STAGES)),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not str(self.records_path):
            raise ValidationError("config is missing input.records")
        if not Path(self.records_path).is_file():
            raise ValidationError(f"input records file not found: {self.records_path}")
        for label, p in (("stopwords.base", self.stopword_base),
                         ("stopwords.custom", self.stopword_custom),
                         ("category_map", self.category_map_path)):
            if p is not None and not Path(p).is_file():
                raise ValidationError(f"{label} file not found: {p}")
        missing = [f for f in ("id", "abstract", "year", "journal") if f not in self.schema]
        if missing:
            raise ValidationError(f"schema missing required fields: {missing}")
        if not -(2**63) <= self.seed < 2**63:
            raise ValidationError("seed must fit in 64 bits")
        unknown = [s for s in self.stages if s not in ALL_STAGES]
        if unknown:
            raise ValidationError(f"unknown stages: {unknown} (known: {list(ALL_STAGES)})")
        if self.k is None and self.k_range is None:
            raise ValidationError("topics.k or topics.k_range must be set")
        for t in self.citation_transforms:
            if t not in cit.TRANSFORMS:
                raise ValidationError(f"unknown citation transform {t!r}")
        if "multivar" in self.stages and len(self.mv_variables) < 2:
            raise ValidationError("multivar stage needs at least two category variables")
        if ("trends" in self.stages or "multivar" in self.stages) and self.category_map_path is None:
            if self.mv_variables:
                raise ValidationError("multivar variables are category labels; set category_map")

    def config_hash(self) -> str:
        payload = {k: str(v) for k, v in dataclasses.asdict(self).items()}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def stopwords(self) -> StopwordConfig:
        if self.stopword_base is None and self.stopword_custom is None:
            return StopwordConfig.default()
        default = StopwordConfig.default()
        base = (
            frozenset(_readwords(self.stopword_base))
            if self.stopword_base is not None
            else default.base_list
        )
        custom = (
            frozenset(_readwords(self.stopword_custom))
            if self.stopword_custom is not None
            else default.custom_list
        )
        return StopwordConfig(base_list=base, custom_list=custom)

    def category_map(self) -> dict[int, str] | None:
        if self.category_map_path is None:
            return None
        raw = yaml.safe_load(Path(self.category_map_path).read_text(encoding="utf-8")) or {}
        try:
            return {int(k): str(v) for k, v in raw.items()}
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad category_map file {self.category_map_path}: {exc}") from exc


def _readwords(path):
    from .corpus import read_wordlist

    return read_wordlist(path)


# --- artifact helpers ------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


class RunState:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[Path] = []
        self.warnings: list[str] = []
        self.timings: dict[str, float] = {}

    def path(self, rel: str) -> Path:
        p = self.out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def register(self, path: Path) -> Path:
        if path not in self.artifacts:
            self.artifacts.append(path)
        return path

    def write_tsv(self, rel: str, header: list[str], rows: list[list]) -> Path:
        path = self.path(rel)
        with path.open("w", encoding="utf-8") as fh:
            fh.write("\t".join(header) + "\n")
            for row in rows:
                fh.write("\t".join(_fmt(v) for v in row) + "\n")
        return self.register(path)

    def write_json(self, rel: str, payload) -> Path:
        path = self.path(rel)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return self.register(path)


def _records_to_jsonl(state: RunState, records: list[DocumentRecord]) -> Path:
    path = state.path("corpus/records.jsonl")
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(dataclasses.asdict(rec), sort_keys=True) + "\n")
    return state.register(path)


def _records_from_jsonl(path: Path) -> list[DocumentRecord]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            raw = json.loads(line)
            raw["keywords"] = tuple(raw["keywords"])
            records.append(DocumentRecord(**raw))
    return records


def _load_stage_inputs(state: RunState):
    corpus_dir = state.out / "corpus" / "archive"
    records_path = state.out / "corpus" / "records.jsonl"
    if not corpus_dir.is_dir() or not records_path.is_file():
        raise ValidationError("corpus stage artifacts missing; run the corpus stage first")
    return ProcessedCorpus.load(corpus_dir), _records_from_jsonl(records_path)


def _load_fit(state: RunState) -> tm.TopicModelFit:
    fit_path = state.out / "topics" / "fit.npz"
    if not fit_path.is_file():
        raise ValidationError("topic fit missing; run the topics stage first")
    return tm.TopicModelFit.load(fit_path)


# --- stages -----------------------------------------------------------------------


def stage_corpus(state: RunState) -> None:
    cfg = state.config
    loaded = load_records(cfg.records_path, cfg.schema, year_range=cfg.year_range)
    state.warnings.extend(loaded.warnings)
    selected = select_subset(loaded.records, cfg.operators)
    if not selected:
        raise ValidationError("no records match the operator list")
    corpus, kept = clean_records(selected, cfg.stopwords())
    archive = state.path("corpus/archive")
    corpus.save(archive)
    for name in ("vocabulary.txt", "docs.txt", "counts.tsv", "manifest.json"):
        state.register(archive / name)
    _records_to_jsonl(state, kept)
    state.write_json(
        "corpus/summary.json",
        {
            "loaded": len(loaded.records),
            "selected": len(selected),
            "documents": corpus.n_documents,
            "terms": corpus.n_terms,
            "tokens": corpus.n_tokens,
            "dropped_no_abstract": loaded.dropped_no_abstract,
            "dropped_out_of_range": loaded.dropped_out_of_range,
            "dropped_empty": corpus.dropped_empty,
        },
    )


def _design(cfg: PipelineConfig, records: list[DocumentRecord]) -> tm.CovariateDesign:
    if not cfg.covariate_year and not cfg.covariate_journal_type:
        return tm.CovariateDesign.intercept_only(len(records))
    return tm.CovariateDesign.from_records(
        records, use_year=cfg.covariate_year, use_journal_type=cfg.covariate_journal_type
    )


def _fit_options(cfg: PipelineConfig) -> tm.FitOptions:
    return tm.FitOptions(
        max_iterations=cfg.max_iterations,
        tolerance=cfg.tolerance,
        seed=substream(cfg.seed, "topic-fit"),
        init=cfg.init,
    )


def stage_select_k(state: RunState) -> None:
    cfg = state.config
    if cfg.k_range is None:
        raise ValidationError("topics.k_range is not set; nothing to scan")
    corpus, records = _load_stage_inputs(state)
    report = tm.k_scan(corpus, _design(cfg, records), cfg.k_range, _fit_options(cfg))
    rows = [
        [r.k, r.coherence, r.exclusivity, r.ser, r.delta_ser, r.weighted_delta, r.improved]
        for r in report.rows
    ]
    state.write_tsv(
        "topics/k_selection.tsv",
        ["K", "SC", "EX", "SER", "dSER", "wSER", "flag"],
        rows,
    )
    state.write_json("topics/k_highlight.json", {"highlight_k": report.highlight_k})


def stage_fit_topics(state: RunState) -> None:
    cfg = state.config
    if cfg.k is None:
        raise ValidationError("topics.k is not set; cannot fit a single model")
    corpus, records = _load_stage_inputs(state)
    design = _design(cfg, records)
    fit = tm.fit(corpus, design, cfg.k, _fit_options(cfg))
    fit_path = state.path("topics/fit.npz")
    fit.save(fit_path)
    state.register(fit_path)

    rows = []
    for metric in ("HighestProb", "FREX"):
        words = tm.top_words(fit, n=min(7, corpus.n_terms), metric=metric)
        for k, wlist in enumerate(words):
            rows.append([tr.topic_label(k), metric, ", ".join(wlist)])
    state.write_tsv("topics/top_words.tsv", ["topic", "metric", "words"], rows)

    quality = tm.coherence_exclusivity(fit, corpus, m=min(tm.DEFAULT_COHERENCE_WORDS, corpus.n_terms))
    state.write_tsv(
        "topics/quality.tsv",
        ["topic", "semantic_coherence", "exclusivity"],
        [
            [tr.topic_label(k), quality.semantic_coherence[k], quality.exclusivity[k]]
            for k in range(fit.k)
        ],
    )

    covariate = cfg.effect_covariate
    names = ["intercept"] + design.names
    if covariate in names:
        effects = tm.estimate_effect(fit, design, covariate, uncertainty="analytic")
        state.write_tsv(
            "topics/effects.tsv",
            ["topic", "covariate", "estimate", "std_error", "ci_low", "ci_high", "method"],
            [
                [e.topic_label, e.covariate, e.estimate, e.std_error, e.ci_low, e.ci_high, e.method]
                for e in effects
            ],
        )
    else:
        state.warnings.append(f"effect covariate {covariate!r} not in design; skipped effects table")


def stage_topics(state: RunState) -> None:
    if state.config.k_range is not None:
        stage_select_k(state)
    if state.config.k is not None:
        stage_fit_topics(state)


def stage_trends(state: RunState) -> None:
    cfg = state.config
    _, records = _load_stage_inputs(state)
    fit = _load_fit(state)
    series = tr.yearly_prevalence(fit.theta, records)
    state.write_tsv(
        "trends/prevalence_topics.tsv",
        ["series", "year", "mean_prevalence", "documents"],
        [
            [label, int(y), v, int(n)]
            for label in series.values
            for y, v, n in zip(series.years, series.values[label], series.doc_counts)
        ],
    )
    if series.missing_years:
        state.warnings.append(f"prevalence series has gap years: {series.missing_years}")

    cat_map = cfg.category_map()
    if cat_map:
        cat_series = tr.yearly_prevalence(fit.theta, records, cat_map)
        state.write_tsv(
            "trends/prevalence_categories.tsv",
            ["series", "year", "mean_prevalence", "documents"],
            [
                [label, int(y), v, int(n)]
                for label in cat_series.values
                for y, v, n in zip(cat_series.years, cat_series.values[label], cat_series.doc_counts)
            ],
        )

    years = np.array([rec.year for rec in records])
    concentration = tr.top_quantile_series(fit.theta, years, degree=3)
    state.write_tsv(
        "trends/concentration.tsv",
        ["year", "mean_top_share", "fitted"],
        [
            [int(y), v, f]
            for y, v, f in zip(concentration.years, concentration.values, concentration.fitted)
        ],
    )
    state.write_json(
        "trends/concentration_trend.json",
        {"degree": concentration.degree, "coefficients": concentration.coefficients.tolist()},
    )

    if cfg.dominance_series and cfg.dominance_split_year and cat_map:
        cat_series = tr.yearly_prevalence(fit.theta, records, cat_map)
        if cfg.dominance_series not in cat_series.values:
            raise ValidationError(f"dominance series {cfg.dominance_series!r} not in categories")
        label = cfg.dominance_series
        member = [k - 1 for k, lab in cat_map.items() if lab == label]
        if not member:  # the implicit bucket of unmapped topics
            member = [k for k in range(fit.k) if (k + 1) not in cat_map]
        col = fit.theta[:, member].sum(axis=1)
        log_col = np.log(np.maximum(col, 1e-12))
        early = log_col[years <= cfg.dominance_split_year]
        late = log_col[years > cfg.dominance_split_year]
        d_plus, p = tr.ks_dominance(early, late)
        state.write_json(
            "trends/dominance.json",
            {
                "series": label,
                "split_year": cfg.dominance_split_year,
                "n_early": int(early.size),
                "n_late": int(late.size),
                "d_plus": d_plus,
                "p_value": p,
            },
        )
        rows = []
        for name, sample in (("early", early), ("late", late)):
            gx, gy = tr.density_curves(sample, "pdf")
            rows.extend([[name, "pdf", x, y] for x, y in zip(gx, gy)])
            cx, cy = tr.density_curves(sample, "cdf")
            rows.extend([[name, "cdf", x, y] for x, y in zip(cx, cy)])
        state.write_tsv("trends/densities.tsv", ["window", "kind", "x", "value"], rows)


def stage_unitroot(state: RunState) -> None:
    cfg = state.config
    _, records = _load_stage_inputs(state)
    fit = _load_fit(state)
    target_series: dict[str, np.ndarray] = {}

    cat_map = cfg.category_map()
    if cat_map:
        cat_series = tr.yearly_prevalence(fit.theta, records, cat_map)
        if cat_series.missing_years:
            raise ValidationError(f"category series has gap years: {cat_series.missing_years}")
        for label, values in cat_series.values.items():
            target_series[f"category:{label}"] = values
    years = np.array([rec.year for rec in records])
    concentration = tr.top_quantile_series(fit.theta, years, degree=3)
    target_series["concentration"] = concentration.values
    sim_path = state.out / "embeddings" / "similarity.tsv"
    if sim_path.is_file():
        sim_rows = [line.split("\t") for line in sim_path.read_text().splitlines()[1:]]
        target_series["similarity"] = np.array([float(r[1]) for r in sim_rows])

    rows = []
    for label, values in target_series.items():
        for report in tr.unit_root_battery(values):
            rows.append(
                [
                    label,
                    report.test,
                    f"type{report.model_type}" if report.model_type else "--",
                    report.lag,
                    report.statistic,
                    report.p_value,
                    report.p_label,
                ]
            )
    state.write_tsv(
        "trends/unitroot.tsv",
        ["series", "test", "type", "lag", "statistic", "p_value", "p_label"],
        rows,
    )


def stage_citations(state: RunState) -> None:
    cfg = state.config
    _, records = _load_stage_inputs(state)
    fit = _load_fit(state)
    rows = []
    for topic_index in range(fit.k):
        for transform in cfg.citation_transforms:
            result = cit.fit_citation_model(records, fit.theta, topic_index, transform)
            name = f"log_{result.topic_label}"
            rows.append(
                [
                    result.topic_label,
                    transform,
                    result.coefficients[name],
                    result.std_errors[name],
                    result.n,
                    result.dropped,
                    result.r_squared,
                    result.within_r_squared,
                    result.n_clusters,
                ]
            )
    state.write_tsv(
        "citations/citations.tsv",
        ["topic", "transform", "coefficient", "std_error", "N", "dropped", "r2", "within_r2", "clusters"],
        rows,
    )


def _multivar_series(state: RunState) -> tuple[np.ndarray, list[str], np.ndarray]:
    cfg = state.config
    _, records = _load_stage_inputs(state)
    fit = _load_fit(state)
    cat_map = cfg.category_map()
    if not cat_map:
        raise ValidationError("multivar stage requires a category_map")
    series = tr.yearly_prevalence(fit.theta, records, cat_map)
    if series.missing_years:
        raise ValidationError(f"category series has gap years: {series.missing_years}")
    for label in cfg.mv_variables:
        if label not in series.values:
            raise ValidationError(f"multivar variable {label!r} not among categories {sorted(series.values)}")
    data = np.column_stack([series.values[label] for label in cfg.mv_variables])
    if cfg.mv_log:
        data = np.log(np.maximum(data, 1e-12))
    return data, list(cfg.mv_variables), series.years


def _subset(data: np.ndarray, names: list[str], wanted: list[str]) -> tuple[np.ndarray, list[str]]:
    idx = [names.index(w) for w in wanted]
    return data[:, idx], list(wanted)


def stage_multivar(state: RunState, only: set[str] | None = None) -> None:
    cfg = state.config
    data, names, _years = _multivar_series(state)
    var_names = cfg.mv_var_variables or names
    var_data, var_names = _subset(data, names, var_names)
    p_var = cfg.mv_lags + cfg.mv_d_max
    rng = np.random.default_rng(substream(cfg.seed, "bootstrap"))

    def wanted(section: str) -> bool:
        return only is None or section in only

    if wanted("lag_selection"):
        report = mv.select_lag(data, max(cfg.mv_lags + 1, 2))
        rows = [
            [r.lag, r.loglik, r.lr, r.df, r.p_value, r.fpe, r.aic, r.hqic, r.sbic]
            for r in report.rows
        ]
        state.write_tsv(
            "multivar/lag_selection.tsv",
            ["lag", "LL", "LR", "df", "p", "FPE", "AIC", "HQIC", "SBIC"],
            rows,
        )
        state.write_json("multivar/lag_winners.json", report.winners)

    selected_rank = cfg.mv_rank
    if wanted("cointegration") or (wanted("vecm") and selected_rank is None):
        johansen = mv.cointegration(data, "Johansen", lags=cfg.mv_lags, names=names)
        if wanted("cointegration"):
            state.write_tsv(
                "multivar/cointegration_johansen.tsv",
                ["rank", "params", "LL", "eigenvalue", "trace_stat", "crit_5pct"],
                [
                    [r.rank, r.n_params, r.loglik, r.eigenvalue, r.trace_stat, r.crit_5pct]
                    for r in johansen.rows
                ],
            )
            eg = mv.cointegration(data, "EngleGranger", lags=1, names=names)
            state.write_json(
                "multivar/cointegration_eg.json",
                {
                    "first_stage": eg.first_stage,
                    "residual_stat": eg.residual_stat,
                    "residual_lag": eg.residual_lag,
                    "critical_values": list(eg.critical_values),
                    "rejects_no_cointegration": eg.rejects_no_cointegration,
                },
            )
        if selected_rank is None:
            selected_rank = johansen.selected_rank if johansen.selected_rank < data.shape[1] else data.shape[1] - 1

    if wanted("vecm"):
        vecm = mv.fit_vecm(data, cfg.mv_lags, selected_rank, names=names)
        diag = mv.diagnostics(vecm)
        state.write_tsv(
            "multivar/vecm_eigenvalues.tsv",
            ["real", "imag", "modulus"],
            [[r.real, r.imag, r.modulus] for r in diag.stability],
        )
        _write_diagnostics(state, "multivar/vecm_diagnostics.tsv", diag)
        state.write_json(
            "multivar/vecm_meta.json",
            {
                "rank": vecm.rank,
                "lags": vecm.p,
                "variables": names,
                "log_series": cfg.mv_log,
                "unit_moduli": vecm.unit_moduli_count(),
                "beta_normalized": vecm.beta_normalized().tolist(),
                "loglik": vecm.loglik,
            },
        )
        irf_vecm = mv.impulse_response(vecm, cfg.mv_horizon, ortho=True, ci="bootstrap")
        _write_irf(state, "multivar/irf_vecm.tsv", irf_vecm)

    if wanted("var") or wanted("granger") or wanted("irf") or wanted("fevd"):
        model = mv.fit_var(var_data, p_var, names=var_names)
        if wanted("var"):
            diag = mv.diagnostics(model)
            _write_diagnostics(state, "multivar/var_diagnostics.tsv", diag)
            state.write_tsv(
                "multivar/var_eigenvalues.tsv",
                ["real", "imag", "modulus"],
                [[r.real, r.imag, r.modulus] for r in diag.stability],
            )
            state.write_json(
                "multivar/var_meta.json",
                {
                    "lags": p_var,
                    "toda_yamamoto_base_lags": cfg.mv_lags,
                    "d_max": cfg.mv_d_max,
                    "variables": var_names,
                    "log_series": cfg.mv_log,
                    "cholesky_order": var_names,
                    "stable": diag.is_stable,
                },
            )
        if wanted("granger"):
            rows = mv.granger_wald(var_data, cfg.mv_lags, cfg.mv_d_max, cfg.granger_mode, names=var_names)
            state.write_tsv(
                "multivar/granger.tsv",
                ["dependent", "excluded", "chi2", "df", "p"],
                [[r.dependent, r.excluded, r.chi2, r.df, r.p_value] for r in rows],
            )
        if wanted("irf"):
            irf = mv.impulse_response(
                model, cfg.mv_horizon, ortho=True, ci="bootstrap",
                n_boot=cfg.mv_bootstrap, rng=rng,
            )
            _write_irf(state, "multivar/irf_var.tsv", irf)
        if wanted("fevd"):
            result = mv.fevd(
                model, cfg.mv_horizon, ci="bootstrap", n_boot=cfg.mv_bootstrap, rng=rng
            )
            rows = []
            for s in result.steps.tolist():
                for i, resp in enumerate(result.var_names):
                    for j, imp in enumerate(result.var_names):
                        rows.append(
                            [
                                s,
                                imp,
                                resp,
                                result.decomp[s, i, j],
                                result.std_errors[s, i, j] if result.std_errors is not None else None,
                                result.band_low[s, i, j] if result.band_low is not None else None,
                                result.band_high[s, i, j] if result.band_high is not None else None,
                            ]
                        )
            state.write_tsv(
                "multivar/fevd.tsv",
                ["step", "impulse", "response", "share", "std_error", "ci_low", "ci_high"],
                rows,
            )


def _write_irf(state: RunState, rel: str, irf: mv.ImpulseResponse) -> None:
    rows = []
    for s in irf.horizons.tolist():
        for i, resp in enumerate(irf.var_names):
            for j, imp in enumerate(irf.var_names):
                rows.append(
                    [
                        s,
                        imp,
                        resp,
                        irf.responses[s, i, j],
                        irf.band_low[s, i, j] if irf.band_low is not None else None,
                        irf.band_high[s, i, j] if irf.band_high is not None else None,
                    ]
                )
    state.write_tsv(rel, ["step", "impulse", "response", "response_value", "ci_low", "ci_high"], rows)
    if irf.band_note:
        state.write_json(rel.replace(".tsv", "_note.json"), {"note": irf.band_note})


def _write_diagnostics(state: RunState, rel: str, diag: mv.DiagnosticsReport) -> None:
    rows = []
    for test in diag.normality:
        rows.append(["jarque_bera", test.equation, test.jarque_bera, test.jb_df, test.jb_p])
        rows.append(["skewness", test.equation, test.skew_stat, test.skew_df, test.skew_p])
        rows.append(["kurtosis", test.equation, test.kurt_stat, test.kurt_df, test.kurt_p])
    for lm in diag.lm_autocorr:
        rows.append(["lm_autocorr", f"lag {lm.lag}", lm.chi2, lm.df, lm.p_value])
    rows.append(["stable", "ALL", None, None, None if diag.is_stable else 0.0])
    state.write_tsv(rel, ["test", "equation", "statistic", "df", "p"], rows)


def stage_embeddings(state: RunState) -> None:
    cfg = state.config
    corpus, records = _load_stage_inputs(state)
    model = train_pvdbow(
        corpus,
        dim=cfg.emb_dim,
        iterations=cfg.emb_iterations,
        negative=cfg.emb_negative,
        seed=substream(cfg.seed, "embedding"),
    )
    path = state.path("embeddings/model.npz")
    model.save(path)
    state.register(path)
    sims = similarity_series(model, records)
    state.write_tsv(
        "embeddings/similarity.tsv",
        ["year", "mean_similarity"],
        [[int(y), v] for y, v in zip(sims.years, sims.values)],
    )
    if sims.skipped_years:
        state.warnings.append(f"similarity series skipped years with <2 papers: {sims.skipped_years}")


_STAGE_FUNCS = {
    "corpus": stage_corpus,
    "topics": stage_topics,
    "trends": stage_trends,
    "citations": stage_citations,
    "multivar": stage_multivar,
    "embeddings": stage_embeddings,
}


@dataclass
class RunResult:
    manifest_path: Path
    manifest: dict
    timings: dict[str, float]


def run(config: PipelineConfig) -> RunResult:
    """Execute the enabled stages and write the manifest."""
    config.validate()
    state = RunState(config)
    ordered = [s for s in ALL_STAGES if s in config.stages]
    for stage in ordered:
        started = time.perf_counter()
        try:
            _STAGE_FUNCS[stage](state)
            if stage == "trends":
                stage_unitroot(state)
            if stage == "embeddings" and "trends" in config.stages:
                # similarity battery once the series exists
                stage_unitroot(state)
        except Exception as exc:
            marker = state.path(f"FAILED_{stage}")
            marker.write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
            raise StageError(stage, exc) from exc
        state.timings[stage] = time.perf_counter() - started

    artifacts = {}
    for path in sorted(state.artifacts):
        rel = path.relative_to(state.out).as_posix()
        artifacts[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    manifest = {
        "version": 1,
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "backend": backend_name(),
        "stages": ordered,
        "artifacts": artifacts,
        "warnings": state.warnings,
    }
    manifest_path = state.path("manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    timings_path = state.path("timings.json")
    timings_path.write_text(json.dumps(state.timings, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return RunResult(manifest_path=manifest_path, manifest=manifest, timings=state.timings)


# --- report emission ----------------------------------------------------------------


_SECTION_SOURCES = {
    "prevalence": ("trends/prevalence_topics.tsv", "trends/prevalence_categories.tsv"),
    "k_selection": ("topics/k_selection.tsv",),
    "effects": ("topics/effects.tsv",),
    "concentration": ("trends/concentration.tsv",),
    "dominance": ("trends/dominance.json", "trends/densities.tsv"),
    "unitroot": ("trends/unitroot.tsv",),
    "citations": ("citations/citations.tsv",),
    "lag_selection": ("multivar/lag_selection.tsv",),
    "cointegration": ("multivar/cointegration_johansen.tsv", "multivar/cointegration_eg.json"),
    "granger": ("multivar/granger.tsv",),
    "irf": ("multivar/irf_var.tsv", "multivar/irf_vecm.tsv"),
    "fevd": ("multivar/fevd.tsv",),
    "diagnostics": ("multivar/var_diagnostics.tsv", "multivar/vecm_diagnostics.tsv"),
    "similarity": ("embeddings/similarity.tsv",),
}


def _read_tsv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:]]


def _plotdata_rows(section: str, path: Path) -> list[list[str]]:
    header, rows = _read_tsv(path)
    idx = {name: i for i, name in enumerate(header)}
    out = []
    if section in ("prevalence",):
        for r in rows:
            out.append([r[idx["series"]], r[idx["year"]], r[idx["mean_prevalence"]], "", ""])
    elif section == "concentration":
        for r in rows:
            out.append(["mean_top_share", r[idx["year"]], r[idx["mean_top_share"]], "", ""])
            out.append(["fitted", r[idx["year"]], r[idx["fitted"]], "", ""])
    elif section == "similarity":
        for r in rows:
            out.append(["mean_similarity", r[idx["year"]], r[idx["mean_similarity"]], "", ""])
    elif section == "k_selection":
        for r in rows:
            for metric in ("SC", "EX", "SER", "dSER", "wSER"):
                if r[idx[metric]]:
                    out.append([metric, r[idx["K"]], r[idx[metric]], "", ""])
    elif section == "irf":
        for r in rows:
            label = f"{r[idx['impulse']]}->{r[idx['response']]}"
            out.append([label, r[idx["step"]], r[idx["response_value"]],
                        r[idx["ci_low"]], r[idx["ci_high"]]])
    elif section == "fevd":
        for r in rows:
            label = f"{r[idx['impulse']]}->{r[idx['response']]}"
            out.append([label, r[idx["step"]], r[idx["share"]], r[idx["ci_low"]], r[idx["ci_high"]]])
    elif section == "effects":
        for r in rows:
            out.append([r[idx["topic"]], r[idx["covariate"]], r[idx["estimate"]],
                        r[idx["ci_low"]], r[idx["ci_high"]]])
    elif section == "citations":
        for r in rows:
            coef = float(r[idx["coefficient"]])
            se = float(r[idx["std_error"]])
            out.append(
                [
                    f"{r[idx['topic']]}:{r[idx['transform']]}",
                    r[idx["topic"]].replace("topic_", ""),
                    f"{coef:.10g}",
                    f"{coef - 1.959963984540054 * se:.10g}",
                    f"{coef + 1.959963984540054 * se:.10g}",
                ]
            )
    elif section == "dominance" and path.suffix == ".tsv":
        for r in rows:
            out.append([f"{r[0]}:{r[1]}", r[2], r[3], "", ""])
    elif section in ("unitroot", "lag_selection", "granger", "diagnostics", "cointegration"):
        # table-like sections have no natural x/y; emit rows under the section label
        for r in rows:
            out.append([section, r[0], "\t".join(r[1:]), "", ""])
    return out


def emit_report(out_dir: str | Path, fmt: str = "tables", sections: list[str] | None = None) -> list[Path]:
    """Render run artifacts as report files.

    ``tables`` copies each artifact table; ``plotdata`` rewrites the
    plottable sections as long-form (series, x, y, band_low, band_high).
    Requesting a section whose artifacts are missing is an error.
    """
    out = Path(out_dir)
    if fmt not in ("tables", "plotdata"):
        raise ValidationError(f"unknown report format {fmt!r}")
    wanted = list(sections) if sections else [
        s for s in REPORT_SECTIONS if any((out / rel).is_file() for rel in _SECTION_SOURCES[s])
    ]
    written: list[Path] = []
    report_dir = out / "report" / fmt
    report_dir.mkdir(parents=True, exist_ok=True)
    for section in wanted:
        if section not in _SECTION_SOURCES:
            raise ValidationError(f"unknown report section {section!r}")
        sources = [out / rel for rel in _SECTION_SOURCES[section] if (out / rel).is_file()]
        if not sources:
            raise ValidationError(f"section {section!r} has no artifacts in {out}")
        for src in sources:
            if fmt == "tables":
                dst = report_dir / f"{section}__{src.name}"
                dst.write_bytes(src.read_bytes())
                written.append(dst)
            else:
                if src.suffix == ".json" and section == "dominance":
                    dst = report_dir / f"{section}__{src.stem}.json"
                    dst.write_bytes(src.read_bytes())
                    written.append(dst)
                    continue
                rows = _plotdata_rows(section, src)
                dst = report_dir / f"{section}__{src.stem}.csv"
                with dst.open("w", encoding="utf-8") as fh:
                    fh.write("series,x,y,band_low,band_high\n")
                    for row in rows:
                        fh.write(",".join(str(v) for v in row) + "\n")
                written.append(dst)
    return written
