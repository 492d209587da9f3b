"""Deterministic synthetic bibliographic corpus for demos and tests.

Documents mix four word themes whose weights drift over the years, so the
downstream trend and causality machinery has signal to find. Every abstract
mentions a selection operator ("cartel"/"collusion"), mirroring how the real
corpus is filtered; those words are custom stopwords, so they never reach
the topic model's vocabulary.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .corpus import DocumentRecord

THEMES = {
    "auction": [
        "auction", "bid", "bidder", "procurement", "tender", "revenue",
        "sealed", "winner", "reserve", "bidding",
    ],
    "enforcement": [
        "leniency", "fine", "penalty", "enforcement", "deterrence",
        "prosecution", "authority", "infringement", "sanction", "compliance",
    ],
    "pricing": [
        "price", "market", "demand", "consumer", "retail", "margin",
        "gasoline", "elasticity", "markup", "pass-through",
    ],
    "theory": [
        "equilibrium", "game", "signal", "strategy", "payoff", "incentive",
        "commitment", "repeated", "deviation", "punishment",
    ],
}

JOURNALS = [
    ("Industrial Organization Journal", "IndustrialOrganization"),
    ("Journal of Market Studies", "Field"),
    ("Antitrust Review", "Antitrust"),
    ("Competition Policy Forum", "Antitrust"),
    ("Economic Letters Quarterly", "GeneralInterest"),
    ("Top Economics Review", "Top5"),
]

AUTHORS = [
    "Adler", "Bergmann", "Castillo", "Dvorak", "Eriksen", "Fontaine",
    "Grimaldi", "Haas", "Iversen", "Jablonski", "Kovacs", "Lindqvist",
    "Moreau", "Novak", "Oliveira",
]

OPERATOR_SENTENCES = [
    "We study collusion among firms in this setting.",
    "The cartel under investigation operated for a decade.",
    "Evidence of collusive conduct shapes the analysis.",
    "A bidding ring is documented in the procurement data.",
]

GLUE = ["the", "of", "and", "in", "for", "with", "that", "this"]

SYNTHETIC_SCHEMA = {
    "id": "id",
    "title": "title",
    "abstract": "abstract",
    "keywords": "keywords",
    "year": "year",
    "journal": "journal",
    "journal_type": "journal_type",
    "citation_count": "citations",
    "open_access": "open_access",
    "corresponding_author": "author",
}


def _theme_weights(year: int, year_range: tuple[int, int], rng) -> np.ndarray:
    lo, hi = year_range
    t = (year - lo) / max(hi - lo, 1)
    base = np.array(
        [
            0.15 + 0.05 * np.sin(3.0 * t),  # auction: fluctuating
            0.10 + 0.45 * t,  # enforcement: rising
            0.45 - 0.30 * t,  # pricing: declining
            0.30 - 0.10 * t,  # theory: mild decline
        ]
    )
    base = np.clip(base + rng.normal(0.0, 0.03, size=4), 0.02, None)
    return base / base.sum()


def make_synthetic_records(
    n_docs: int = 120,
    seed: int = 0,
    year_range: tuple[int, int] = (2000, 2021),
) -> list[DocumentRecord]:
    rng = np.random.default_rng(seed)
    theme_names = list(THEMES)
    records = []
    lo, hi = year_range
    for i in range(n_docs):
        year = int(rng.integers(lo, hi + 1))
        weights = _theme_weights(year, year_range, rng)
        n_words = int(rng.integers(45, 80))
        theme_choice = rng.choice(len(theme_names), size=n_words, p=weights)
        words = []
        for tc in theme_choice:
            pool = THEMES[theme_names[tc]]
            words.append(pool[int(rng.integers(0, len(pool)))])
            if rng.random() < 0.35:
                words.append(GLUE[int(rng.integers(0, len(GLUE)))])
        sentence = OPERATOR_SENTENCES[int(rng.integers(0, len(OPERATOR_SENTENCES)))]
        abstract = sentence + " " + " ".join(words) + "."
        dominant = theme_names[int(np.argmax(weights))]
        title = f"On {dominant} dynamics in concentrated markets ({i})"
        journal, journal_type = JOURNALS[int(rng.integers(0, len(JOURNALS)))]
        age = hi - year + 1
        zero_cite = rng.random() < 0.12
        citations = 0 if zero_cite else int(rng.poisson(1.5 * age))
        records.append(
            DocumentRecord(
                id=f"S{i:04d}",
                title=title,
                abstract=abstract,
                keywords=tuple(rng.choice(THEMES[dominant], size=2, replace=False)),
                year=year,
                journal=journal,
                journal_type=journal_type,
                citation_count=citations,
                open_access=bool(rng.random() < 0.3),
                corresponding_author=AUTHORS[int(rng.integers(0, len(AUTHORS)))],
                paper_type=None,
            )
        )
    return records


def write_synthetic_export(
    path: str | Path,
    n_docs: int = 120,
    seed: int = 0,
    year_range: tuple[int, int] = (2000, 2021),
) -> Path:
    """Write the synthetic corpus as a CSV export matching SYNTHETIC_SCHEMA."""
    path = Path(path)
    records = make_synthetic_records(n_docs=n_docs, seed=seed, year_range=year_range)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(SYNTHETIC_SCHEMA.values()))
        for rec in records:
            writer.writerow(
                [
                    rec.id,
                    rec.title,
                    rec.abstract,
                    ";".join(rec.keywords),
                    rec.year,
                    rec.journal,
                    rec.journal_type,
                    rec.citation_count,
                    "yes" if rec.open_access else "no",
                    rec.corresponding_author,
                ]
            )
    return path


# category map matching the four synthetic themes once a model with K >= 4
# is fitted; topics are matched to themes by their top words at runtime, so
# this static map is only a sensible default for demo configs
DEFAULT_CATEGORY_MAP = {1: "rules", 2: "rules", 3: "market", 4: "market"}
