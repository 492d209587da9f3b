"""littrend: topic-trend analytics for bibliographic corpora.

Turns exported bibliographic records into quantitative trend analyses:
covariate-aware topic modeling with a principled topic-count scan, yearly
prevalence series with unit-root and dominance testing, citation
regressions with clustered errors, VAR/VECM causality analysis, and
document-embedding similarity series.
"""

from .corpus import (
    DocumentRecord,
    ProcessedCorpus,
    StopwordConfig,
    build_matrix,
    clean_records,
    load_records,
    preprocess,
    select_subset,
)
from .errors import DegenerateInputError, EstimationError, LittrendError, ValidationError
from .topicmodel import CovariateDesign, FitOptions, TopicModelFit, fit, k_scan, top_words

__version__ = "0.1.0"

__all__ = [
    "DocumentRecord",
    "ProcessedCorpus",
    "StopwordConfig",
    "build_matrix",
    "clean_records",
    "load_records",
    "preprocess",
    "select_subset",
    "CovariateDesign",
    "FitOptions",
    "TopicModelFit",
    "fit",
    "k_scan",
    "top_words",
    "LittrendError",
    "ValidationError",
    "DegenerateInputError",
    "EstimationError",
    "__version__",
]
