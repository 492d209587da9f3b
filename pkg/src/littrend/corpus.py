"""Corpus ingestion, operator filtering, and document-term matrix construction.

The functions here are pure: they take immutable inputs and return new
objects, so per-document preprocessing can safely run in parallel. The
expensive step in practice is :func:`preprocess`, which lowercases, strips
punctuation, removes stopwords and Porter-stems the remaining tokens.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateInputError, ValidationError
from .stemming import stem

JOURNAL_TYPES = ("Top5", "GeneralInterest", "Field", "IndustrialOrganization", "Antitrust")

# short codes commonly used in journal-type columns
_JOURNAL_TYPE_ALIASES = {
    "t5": "Top5",
    "gi": "GeneralInterest",
    "fi": "Field",
    "io": "IndustrialOrganization",
    "at": "Antitrust",
}

PAPER_TYPES = ("Theory", "Empirics", "Experiment", "Policy")

REQUIRED_FIELDS = ("id", "abstract", "year", "journal")
OPTIONAL_FIELDS = (
    "title",
    "keywords",
    "journal_type",
    "citation_count",
    "open_access",
    "corresponding_author",
    "author_team",
    "paper_type",
)


@dataclass(frozen=True)
class DocumentRecord:
    """One bibliographic item."""

    id: str
    title: str
    abstract: str
    keywords: tuple[str, ...]
    year: int
    journal: str
    journal_type: str | None
    citation_count: int
    open_access: bool
    corresponding_author: str | None = None
    paper_type: str | None = None


@dataclass(frozen=True)
class StopwordConfig:
    """Base (SMART) plus custom stopword sets, all lowercase."""

    base_list: frozenset[str]
    custom_list: frozenset[str]

    @property
    def words(self) -> frozenset[str]:
        return self.base_list | self.custom_list

    @classmethod
    def default(cls) -> "StopwordConfig":
        """Vendored SMART list plus the boilerplate/operator custom list."""
        base = _read_wordlist_text(
            resources.files("littrend.data").joinpath("smart_stopwords.txt").read_text()
        )
        custom = _read_wordlist_text(
            resources.files("littrend.data").joinpath("custom_stopwords.txt").read_text()
        )
        return cls(base_list=frozenset(base), custom_list=frozenset(custom))

    @classmethod
    def from_files(cls, base_path: str | Path, custom_path: str | Path) -> "StopwordConfig":
        return cls(
            base_list=frozenset(read_wordlist(base_path)),
            custom_list=frozenset(read_wordlist(custom_path)),
        )


def _read_wordlist_text(text: str) -> list[str]:
    words = []
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.append(word)
    return words


def read_wordlist(path: str | Path) -> list[str]:
    """Read a one-word-per-line stopword file ('#' lines are comments)."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"stopword file not found: {path}")
    return _read_wordlist_text(path.read_text(encoding="utf-8"))


@dataclass
class LoadResult:
    """Records plus the drop/warning summary produced while loading."""

    records: list[DocumentRecord]
    dropped_no_abstract: int = 0
    dropped_out_of_range: int = 0
    warnings: list[str] = field(default_factory=list)


def _fold_ascii(text: str) -> str:
    # decompose accents, drop anything that does not survive ASCII encoding
    return unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")


def _parse_bool(raw: str) -> bool:
    return raw.strip().lower() not in ("", "0", "no", "n", "false")


def _parse_journal_type(raw: str) -> str | None:
    label = raw.strip()
    if not label:
        return None
    if label in JOURNAL_TYPES:
        return label
    alias = _JOURNAL_TYPE_ALIASES.get(label.lower())
    if alias is None:
        raise ValidationError(f"unknown journal_type label: {label!r}")
    return alias


def _parse_paper_type(raw: str) -> str | None:
    label = raw.strip()
    if not label:
        return None
    for name in PAPER_TYPES:
        if label.lower() == name.lower():
            return name
    raise ValidationError(f"unknown paper_type label: {label!r}")


def _rows_from_file(path: Path) -> list[dict]:
    """Yield dict rows from a CSV/TSV export or a JSON-lines file."""
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        rows = []
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"{path}:{i + 1}: bad JSON row: {exc}") from exc
        return rows
    delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh, delimiter=delimiter))


def load_records(
    path: str | Path,
    schema: dict[str, str],
    year_range: tuple[int, int] = (2000, 2021),
) -> LoadResult:
    """Load bibliographic records from a delimited or JSON-lines export.

    ``schema`` maps record fields to column names in the export; ``id``,
    ``abstract``, ``year`` and ``journal`` are required. Rows with an empty
    abstract are dropped and counted, as are rows outside ``year_range``.
    A missing corresponding author falls back to the mapped author-team
    column when one is configured.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"input file not found: {path}")
    missing = [f for f in REQUIRED_FIELDS if f not in schema]
    if missing:
        raise ValidationError(f"schema is missing required fields: {missing}")

    result = LoadResult(records=[])
    seen_ids: set[str] = set()
    for i, row in enumerate(_rows_from_file(path)):
        where = f"{path.name} row {i + 1}"

        def col(fieldname: str) -> str:
            column = schema.get(fieldname)
            if column is None:
                return ""
            value = row.get(column, "")
            if value is None:
                return ""
            if isinstance(value, list):
                return ";".join(str(v) for v in value)
            return str(value)

        doc_id = col("id").strip()
        if not doc_id:
            raise ValidationError(f"{where}: empty id")
        if doc_id in seen_ids:
            raise ValidationError(f"{where}: duplicate id {doc_id!r}")
        seen_ids.add(doc_id)

        abstract = col("abstract").strip()
        if not abstract:
            result.dropped_no_abstract += 1
            continue

        try:
            year = int(float(col("year")))
        except ValueError as exc:
            raise ValidationError(f"{where}: unparsable year {col('year')!r}") from exc
        if not (year_range[0] <= year <= year_range[1]):
            result.dropped_out_of_range += 1
            continue

        raw_citations = col("citation_count").strip()
        citations = int(float(raw_citations)) if raw_citations else 0
        if citations < 0:
            raise ValidationError(f"{where}: negative citation_count {citations}")

        corresponding = col("corresponding_author").strip() or None
        if corresponding is None:
            # author-team fallback for records without a corresponding author
            corresponding = col("author_team").strip() or None

        keywords = tuple(k.strip() for k in col("keywords").split(";") if k.strip())
        try:
            journal_type = _parse_journal_type(col("journal_type"))
            paper_type = _parse_paper_type(col("paper_type"))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc

        result.records.append(
            DocumentRecord(
                id=doc_id,
                title=col("title").strip(),
                abstract=abstract,
                keywords=keywords,
                year=year,
                journal=col("journal").strip(),
                journal_type=journal_type,
                citation_count=citations,
                open_access=_parse_bool(col("open_access")),
                corresponding_author=corresponding,
                paper_type=paper_type,
            )
        )
    if result.dropped_no_abstract:
        result.warnings.append(f"dropped {result.dropped_no_abstract} rows without an abstract")
    if result.dropped_out_of_range:
        result.warnings.append(
            f"dropped {result.dropped_out_of_range} rows outside years {year_range[0]}-{year_range[1]}"
        )
    return result


def _operator_pattern(operators: list[str]) -> re.Pattern:
    # each operator token is a word-boundary-anchored prefix, so declensions
    # like "cartels" match "cartel" while "cartography" does not
    parts = []
    for op in operators:
        tokens = op.lower().split()
        if not tokens:
            continue
        parts.append(r"\b" + r"\w*\s+".join(re.escape(t) for t in tokens) + r"\w*")
    if not parts:
        raise ValidationError("operator list is empty")
    return re.compile("|".join(parts))


def select_subset(records: list[DocumentRecord], operators: list[str]) -> list[DocumentRecord]:
    """Keep records where at least one operator matches title, abstract or keywords."""
    pattern = _operator_pattern(operators)
    selected = []
    for rec in records:
        haystack = " \n ".join([rec.title, rec.abstract, *rec.keywords]).lower()
        if pattern.search(haystack):
            selected.append(rec)
    return selected


_TOKEN_RE = re.compile(r"[a-z]+(?:-[a-z]+)*")


def preprocess(text: str, config: StopwordConfig) -> list[str]:
    """Clean one text into an ordered list of term stems.

    Lowercase, fold to ASCII, split on non-alphabetic characters (keeping
    hyphens that join two alphabetic runs), drop stopwords, Porter-stem the
    rest.
    """
    folded = _fold_ascii(text).lower()
    stops = config.words
    return [stem(tok) for tok in _TOKEN_RE.findall(folded) if tok not in stops]


@dataclass
class ProcessedCorpus:
    """Vocabulary plus sparse document-term counts after cleaning."""

    vocabulary: list[str]
    counts: sp.csr_matrix
    doc_ids: list[str]
    dropped_empty: int = 0

    @property
    def n_documents(self) -> int:
        return self.counts.shape[0]

    @property
    def n_terms(self) -> int:
        return self.counts.shape[1]

    @property
    def n_tokens(self) -> int:
        return int(self.counts.sum())

    def validate(self) -> None:
        if self.counts.shape != (len(self.doc_ids), len(self.vocabulary)):
            raise ValidationError("counts shape does not match doc_ids/vocabulary")
        row_tokens = np.asarray(self.counts.sum(axis=1)).ravel()
        if (row_tokens <= 0).any():
            raise ValidationError("corpus contains an empty document row")
        if (self.counts.data < 0).any():
            raise ValidationError("negative term count")

    def save(self, path: str | Path) -> None:
        """Write the corpus archive: vocabulary, triplets, docs, manifest."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        (path / "vocabulary.txt").write_text("\n".join(self.vocabulary) + "\n", encoding="utf-8")
        (path / "docs.txt").write_text("\n".join(self.doc_ids) + "\n", encoding="utf-8")
        coo = self.counts.tocoo()
        with (path / "counts.tsv").open("w", encoding="utf-8") as fh:
            fh.write("doc\tterm\tcount\n")
            for d, t, c in sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())):
                fh.write(f"{d}\t{t}\t{c}\n")
        manifest = {
            "documents": self.n_documents,
            "terms": self.n_terms,
            "tokens": self.n_tokens,
            "dropped_empty": self.dropped_empty,
        }
        (path / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ProcessedCorpus":
        path = Path(path)
        vocabulary = (path / "vocabulary.txt").read_text(encoding="utf-8").splitlines()
        doc_ids = (path / "docs.txt").read_text(encoding="utf-8").splitlines()
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
        rows, cols, data = [], [], []
        with (path / "counts.tsv").open(encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                d, t, c = line.split("\t")
                rows.append(int(d))
                cols.append(int(t))
                data.append(int(c))
        counts = sp.csr_matrix(
            (data, (rows, cols)), shape=(len(doc_ids), len(vocabulary)), dtype=np.int64
        )
        corpus = cls(
            vocabulary=vocabulary,
            counts=counts,
            doc_ids=doc_ids,
            dropped_empty=int(manifest.get("dropped_empty", 0)),
        )
        corpus.validate()
        return corpus


def build_matrix(docs: list[tuple[str, list[str]]]) -> ProcessedCorpus:
    """Assemble the document-term matrix from per-document stem lists.

    Documents with zero stems are dropped and counted; the vocabulary is the
    sorted set of distinct stems.
    """
    nonempty = [(doc_id, stems) for doc_id, stems in docs if stems]
    dropped = len(docs) - len(nonempty)
    if not nonempty:
        raise DegenerateInputError("all documents are empty after preprocessing")
    ids = [doc_id for doc_id, _ in nonempty]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate document id passed to build_matrix")

    vocabulary = sorted({s for _, stems in nonempty for s in stems})
    index = {term: i for i, term in enumerate(vocabulary)}
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for _, stems in nonempty:
        term_counts = Counter(stems)
        for term in sorted(term_counts):
            indices.append(index[term])
            data.append(term_counts[term])
        indptr.append(len(indices))
    counts = sp.csr_matrix(
        (np.asarray(data, dtype=np.int64), np.asarray(indices), np.asarray(indptr)),
        shape=(len(ids), len(vocabulary)),
    )
    corpus = ProcessedCorpus(
        vocabulary=vocabulary, counts=counts, doc_ids=ids, dropped_empty=dropped
    )
    corpus.validate()
    return corpus


def clean_records(
    records: list[DocumentRecord],
    stopwords: StopwordConfig | None = None,
) -> tuple[ProcessedCorpus, list[DocumentRecord]]:
    """Preprocess record abstracts and build the matrix.

    Returns the corpus and the records aligned with its rows (records whose
    abstract is empty after cleaning are dropped from both).
    """
    stopwords = stopwords or StopwordConfig.default()
    stemmed = [(rec.id, preprocess(rec.abstract, stopwords)) for rec in records]
    corpus = build_matrix(stemmed)
    kept = set(corpus.doc_ids)
    aligned = [rec for rec in records if rec.id in kept]
    return corpus, aligned
