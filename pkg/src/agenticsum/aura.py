"""Attention grounding scores.

A generated token's grounding is the head-averaged fraction of its
attention mass that lands on source-document positions:

    score = (1/H) * sum_h [ sum_{i in input} A[h, i] /
                            (sum_i A[h, i] + eps) ]

Span grounding averages token scores over the span's token index set;
summary grounding averages span scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from agenticsum.backend.base import EntailmentVerdict, StepAttention
from agenticsum.errors import DegenerateSummaryError, GroundingError


def token_aura(step: StepAttention, eps: float = 1e-8) -> float:
    """Grounding score of one generated token, in [0, 1)."""
    if eps <= 0:
        raise GroundingError("eps must be positive")
    weights = step.weights
    if weights.shape[1] == 0:
        raise GroundingError("step attention covers no positions")
    idx = np.asarray(step.input_positions, dtype=np.intp)
    if idx.size:
        if idx.min() < 0 or idx.max() >= weights.shape[1]:
            raise GroundingError(
                f"input positions outside [0, {weights.shape[1]})"
            )
        num = weights[:, idx].sum(axis=1)
    else:
        num = np.zeros(weights.shape[0])
    den = weights.sum(axis=1) + eps
    return float(np.mean(num / den))


def span_aura(token_scores: Sequence[float], token_indices: Sequence[int]) -> float:
    """Mean token grounding over a span's token index set."""
    if len(token_indices) == 0:
        raise GroundingError("a span must own at least one token")
    picked = []
    for i in token_indices:
        if not 0 <= i < len(token_scores):
            raise GroundingError(f"token index {i} outside the score table")
        picked.append(token_scores[i])
    return float(np.mean(picked))


@dataclass(frozen=True)
class TokenGrounding:
    """Grounding score of one generated token (1-based step)."""

    step: int
    score: float


@dataclass(frozen=True)
class SpanGrounding:
    """Per-span detection record: grounding score plus entailment bit.

    ``grounding_source`` says where ``a`` came from: "attention" for
    scores computed from generation-step attention, "carried" for spans
    preserved verbatim across a revision, "entailment" for the verdict's
    raw support score, "default" when no signal was available.
    """

    span_index: int
    text: str
    token_indices: tuple[int, ...]
    a: float
    h: int
    flagged: bool
    verdict: EntailmentVerdict
    grounding_source: str = "attention"


def mean_grounding(spans: Sequence[SpanGrounding]) -> float:
    """Summary-level grounding: the mean span score.

    Uses fsum so serialized traces recompute the value bit-for-bit.
    """
    if not spans:
        raise DegenerateSummaryError(
            "mean grounding of a summary with no spans is undefined"
        )
    return float(math.fsum(s.a for s in spans) / len(spans))
