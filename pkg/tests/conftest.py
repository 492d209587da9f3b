"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from littrend.corpus import DocumentRecord, ProcessedCorpus


def two_topic_corpus(seed: int = 7, n_docs: int = 200, half_vocab: int = 25, tokens: int = 40):
    """Corpus drawn from the model's own generative story with two topics on
    disjoint vocabulary halves; returns (corpus, true_beta, true_theta)."""
    rng = np.random.default_rng(seed)
    V = 2 * half_vocab
    true_beta = np.zeros((2, V))
    true_beta[0, :half_vocab] = 1.0 / half_vocab
    true_beta[1, half_vocab:] = 1.0 / half_vocab
    eta = rng.normal(0.0, 1.0, size=n_docs)
    theta = np.column_stack([np.exp(eta), np.ones(n_docs)])
    theta /= theta.sum(axis=1, keepdims=True)
    rows = []
    for d in range(n_docs):
        from_first = rng.random(tokens) < theta[d, 0]
        words = np.where(
            from_first,
            rng.integers(0, half_vocab, tokens),
            rng.integers(half_vocab, V, tokens),
        )
        rows.append(np.bincount(words, minlength=V))
    corpus = ProcessedCorpus(
        vocabulary=[f"w{i:03d}" for i in range(V)],
        counts=sp.csr_matrix(np.asarray(rows)),
        doc_ids=[f"d{i}" for i in range(n_docs)],
    )
    corpus.validate()
    return corpus, true_beta, theta


def aligned_tv(beta: np.ndarray, true_beta: np.ndarray) -> float:
    """Mean total-variation distance under the better of the two alignments."""
    tv = lambda a, b: 0.5 * np.abs(a - b).sum()  # noqa: E731
    straight = (tv(beta[0], true_beta[0]) + tv(beta[1], true_beta[1])) / 2
    crossed = (tv(beta[0], true_beta[1]) + tv(beta[1], true_beta[0])) / 2
    return min(straight, crossed)


def record(i: int, year: int, journal: str = "J", **kw) -> DocumentRecord:
    defaults = dict(
        id=f"r{i}",
        title="",
        abstract="collusion text",
        keywords=(),
        year=year,
        journal=journal,
        journal_type=None,
        citation_count=0,
        open_access=False,
        corresponding_author=None,
        paper_type=None,
    )
    defaults.update(kw)
    return DocumentRecord(**defaults)


@pytest.fixture(scope="session")
def small_two_topic():
    return two_topic_corpus()
