"""Shared exception types."""


class LittrendError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LittrendError):
    """Invalid user input: bad config values, malformed files, missing paths."""


class DegenerateInputError(LittrendError):
    """Data that makes an estimator ill-posed (constant series, zero-variance
    regressor, rank-deficient design, all-empty documents)."""


class EstimationError(LittrendError):
    """Numerical failure during estimation (singular systems, non-finite
    objective); carries enough context to locate the failing step."""
