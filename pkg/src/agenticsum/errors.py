"""Exception hierarchy shared across the engine.

Backend errors wrap anything that goes wrong while talking to a model
backend; engine errors signal contract violations inside the pipeline
itself (bad configuration, malformed inputs, degenerate outputs).
"""

from __future__ import annotations


class AgenticSumError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(AgenticSumError):
    """A configuration value is outside its documented range."""


class SegmentationError(AgenticSumError):
    """Sentence segmentation or token-to-sentence mapping failed structurally."""


class EmptyDocumentError(AgenticSumError):
    """An operation that requires at least one sentence received none."""


class GroundingError(AgenticSumError):
    """Attention grounding could not be computed (empty span, bad indices)."""


class DegenerateSummaryError(AgenticSumError):
    """A summary collapsed to zero spans, so span statistics are undefined."""


class UndefinedTestError(AgenticSumError):
    """A statistical test has no defined value for the given sample."""


class JudgeParseError(AgenticSumError):
    """A judge response is missing one of the required score lines."""


class JudgeValidationError(AgenticSumError):
    """A judge response carries a score outside the 1-5 scale."""


class BackendError(AgenticSumError):
    """Base class for model-backend failures."""


class TransportError(BackendError):
    """The backend could not be reached or returned a malformed payload."""


class CapacityError(BackendError):
    """The prompt exceeds the backend's context window."""


class VerdictParseError(BackendError):
    """An entailment response could not be parsed into a verdict.

    Carries the raw payload for diagnostics.
    """

    def __init__(self, message: str, raw: object = None):
        super().__init__(message)
        self.raw = raw
