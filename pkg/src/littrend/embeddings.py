"""Paragraph-vector (distributed bag of words) embeddings and similarity series.

A document vector is trained to predict the document's own tokens against
negative-sampled noise words; no word order is used. Training is
single-threaded and fully deterministic for a given seed (the parallel speed
of the numba backend comes from compiling the same sequential loop, not from
threading). The yearly similarity series averages, per paper, the similarity
to every other same-year paper, then averages per year.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import DocumentRecord, ProcessedCorpus
from .errors import DegenerateInputError, ValidationError

DEFAULT_DIM = 50
DEFAULT_ITERATIONS = 20
DEFAULT_NEGATIVE = 5
DEFAULT_LR_START = 0.025
DEFAULT_LR_END = 0.0001
NOISE_POWER = 0.75


@dataclass
class EmbeddingModel:
    dim: int
    iterations: int
    doc_vectors: np.ndarray  # D x dim
    seed: int
    doc_ids: list[str]
    vocabulary_size: int
    epoch_losses: np.ndarray
    backend: str = ""

    def validate(self) -> None:
        if self.dim < 2:
            raise ValidationError("embedding dimension must be >= 2")
        if self.doc_vectors.shape != (len(self.doc_ids), self.dim):
            raise ValidationError("doc_vectors shape mismatch")
        if not np.isfinite(self.doc_vectors).all():
            raise ValidationError("non-finite document vector")

    def unit_vectors(self) -> np.ndarray:
        norms = np.linalg.norm(self.doc_vectors, axis=1, keepdims=True)
        if (norms == 0).any():
            raise DegenerateInputError("zero-norm document vector cannot be normalized")
        return self.doc_vectors / norms

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            version=np.array([1]),
            dim=np.array([self.dim]),
            iterations=np.array([self.iterations]),
            doc_vectors=self.doc_vectors,
            seed=np.array([self.seed]),
            doc_ids=np.array(self.doc_ids, dtype=object),
            vocabulary_size=np.array([self.vocabulary_size]),
            epoch_losses=self.epoch_losses,
            backend=np.array([self.backend], dtype=object),
        )

    @classmethod
    def load(cls, path) -> "EmbeddingModel":
        with np.load(path, allow_pickle=True) as archive:
            model = cls(
                dim=int(archive["dim"][0]),
                iterations=int(archive["iterations"][0]),
                doc_vectors=archive["doc_vectors"],
                seed=int(archive["seed"][0]),
                doc_ids=[str(i) for i in archive["doc_ids"]],
                vocabulary_size=int(archive["vocabulary_size"][0]),
                epoch_losses=archive["epoch_losses"],
                backend=str(archive["backend"][0]),
            )
        model.validate()
        return model


def train_pvdbow(
    corpus: ProcessedCorpus,
    dim: int = DEFAULT_DIM,
    iterations: int = DEFAULT_ITERATIONS,
    negative: int = DEFAULT_NEGATIVE,
    lr_start: float = DEFAULT_LR_START,
    lr_end: float = DEFAULT_LR_END,
    seed: int = 0,
) -> EmbeddingModel:
    """Train document vectors by negative-sampling SGD over the corpus."""
    D, V = corpus.counts.shape
    if D < 2:
        raise ValidationError("need at least two documents")
    if dim > V:
        raise ValidationError(f"dimension {dim} exceeds vocabulary size {V}")
    if dim < 2:
        raise ValidationError("dimension must be >= 2")
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")

    rng = np.random.default_rng(seed)
    doc_vecs = (rng.random((D, dim)) - 0.5) / dim
    word_vecs = np.zeros((V, dim))
    freq = np.asarray(corpus.counts.sum(axis=0)).ravel().astype(float)
    noise = freq**NOISE_POWER
    noise_cdf = np.cumsum(noise / noise.sum())

    csr = corpus.counts.tocsr()
    losses = _kernels.pvdbow_train(
        csr.indptr.astype(np.int64),
        csr.indices.astype(np.int64),
        csr.data.astype(np.float64),
        doc_vecs,
        word_vecs,
        noise_cdf,
        iterations,
        negative,
        lr_start,
        lr_end,
        _kernels.mix_seed(seed),
    )
    model = EmbeddingModel(
        dim=dim,
        iterations=iterations,
        doc_vectors=doc_vecs,
        seed=seed,
        doc_ids=list(corpus.doc_ids),
        vocabulary_size=V,
        epoch_losses=np.asarray(losses),
        backend=_kernels.backend_name(),
    )
    model.validate()
    return model


@dataclass
class SimilaritySeries:
    years: np.ndarray
    values: np.ndarray
    skipped_years: list[int] = field(default_factory=list)
    normalized: bool = True


def similarity_series(
    model: EmbeddingModel,
    records: list[DocumentRecord],
    normalize: bool = True,
) -> SimilaritySeries:
    """Yearly mean pairwise similarity of same-year papers.

    For every paper the mean inner product with all other papers of its year
    is computed first, then averaged per year. Vectors are unit-normalized
    unless ``normalize`` is False (the literal raw-inner-product reading).
    Years with fewer than two papers are omitted and reported.
    """
    index = {doc_id: i for i, doc_id in enumerate(model.doc_ids)}
    missing = [rec.id for rec in records if rec.id not in index]
    if missing:
        raise ValidationError(f"records without a trained vector: {missing[:5]}")
    vectors = model.unit_vectors() if normalize else model.doc_vectors

    by_year: dict[int, list[int]] = {}
    for rec in records:
        by_year.setdefault(rec.year, []).append(index[rec.id])

    years, values, skipped = [], [], []
    for year in sorted(by_year):
        rows = by_year[year]
        if len(rows) < 2:
            skipped.append(year)
            continue
        U = vectors[rows]
        sims = U @ U.T
        n = len(rows)
        per_paper = (sims.sum(axis=1) - np.diag(sims)) / (n - 1)
        years.append(year)
        values.append(float(per_paper.mean()))
    if not years:
        raise DegenerateInputError("no year has at least two documents")
    return SimilaritySeries(
        years=np.asarray(years), values=np.asarray(values), skipped_years=skipped,
        normalized=normalize,
    )
