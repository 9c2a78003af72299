"""Model-backend contract: shared result types and the operation surface.

Every backend implements the same four operations (generate,
sentence_attention, entail, revise) so the pipeline can swap a seeded
mock for a remote model service without touching orchestration code.

Prompts mark the grounded source with DOCUMENT_OPEN / DOCUMENT_CLOSE
lines; a backend reports which prompt token positions fall inside that
block as ``input_positions``. When no markers are present, the entire
prompt counts as source.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass

import numpy as np

DOCUMENT_OPEN = "[DOCUMENT]"
DOCUMENT_CLOSE = "[/DOCUMENT]"


def locate_document_block(prompt: str) -> tuple[int, int] | None:
    """Char range of the text between the document markers, or None."""
    open_at = prompt.find(DOCUMENT_OPEN)
    if open_at < 0:
        return None
    start = open_at + len(DOCUMENT_OPEN)
    end = prompt.find(DOCUMENT_CLOSE, start)
    if end < 0:
        return None
    return start, end


class EntailmentLabel(enum.Enum):
    ENTAILED = "Entailed"
    NOT_ENTAILED = "Not Entailed"


@dataclass(frozen=True)
class TokenSpan:
    """A token with char offsets into the text it was produced from."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class DecodingParams:
    max_new_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass
class AttentionTensor:
    """Self-attention over one sentence, shape (heads, tokens, tokens)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 3 or w.shape[1] != w.shape[2]:
            raise ValueError(f"expected shape (H, T, T), got {w.shape}")
        if not np.isfinite(w).all():
            raise ValueError("attention weights must be finite")
        if (w < 0).any():
            raise ValueError("attention weights must be non-negative")
        self.weights = w

    @property
    def heads(self) -> int:
        return self.weights.shape[0]

    @property
    def tokens(self) -> int:
        return self.weights.shape[1]


@dataclass
class StepAttention:
    """Attention paid by one generated token to everything visible to it.

    ``step`` is 1-based; at step t the visible context holds the prompt's
    tokens plus the t-1 previously generated tokens, so ``weights`` has
    shape (heads, context_len + step - 1).
    """

    step: int
    weights: np.ndarray
    input_positions: tuple[int, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"expected shape (H, L), got {w.shape}")
        if not np.isfinite(w).all():
            raise ValueError("attention weights must be finite")
        if (w < 0).any():
            raise ValueError("attention weights must be non-negative")
        self.weights = w
        self.input_positions = tuple(int(p) for p in self.input_positions)


@dataclass
class GenerationResult:
    """Generated text plus the per-step attention needed for grounding."""

    text: str
    tokens: tuple[TokenSpan, ...]
    step_attentions: tuple[StepAttention, ...]
    input_positions: tuple[int, ...]
    context_length: int

    def __post_init__(self):
        self.tokens = tuple(self.tokens)
        self.step_attentions = tuple(self.step_attentions)
        self.input_positions = tuple(int(p) for p in self.input_positions)
        if len(self.step_attentions) != len(self.tokens):
            raise ValueError(
                "one StepAttention per generated token: "
                f"{len(self.step_attentions)} != {len(self.tokens)}"
            )
        prev_end = 0
        for tok in self.tokens:
            if not (0 <= tok.start <= tok.end <= len(self.text)):
                raise ValueError(f"token offsets {tok} outside text")
            if tok.start < prev_end:
                raise ValueError(f"token {tok} overlaps its predecessor")
            prev_end = tok.end
        for g, sa in enumerate(self.step_attentions):
            if sa.step != g + 1:
                raise ValueError(f"step attention {g} carries step {sa.step}")
            expected = self.context_length + g
            if sa.weights.shape[1] != expected:
                raise ValueError(
                    f"step {sa.step} attends over {sa.weights.shape[1]} "
                    f"positions, expected {expected}"
                )


@dataclass(frozen=True)
class EntailmentVerdict:
    """Span-level entailment assessment against a document."""

    label: EntailmentLabel
    explanation: str = ""
    problematic_spans: tuple[str, ...] = ()
    raw_score: float | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "problematic_spans", tuple(self.problematic_spans)
        )
        if self.label is EntailmentLabel.ENTAILED and self.problematic_spans:
            raise ValueError("an Entailed verdict cannot carry problematic spans")


class ModelBackend(abc.ABC):
    """Operation surface shared by all backends."""

    @abc.abstractmethod
    def generate(self, prompt: str, params: DecodingParams) -> GenerationResult:
        """Generate a continuation of ``prompt`` with step attentions."""

    @abc.abstractmethod
    def sentence_attention(self, text: str) -> AttentionTensor:
        """Self-attention tensor over one non-empty sentence."""

    @abc.abstractmethod
    def entail(self, document: str, span: str) -> EntailmentVerdict:
        """Judge whether ``span`` is strictly entailed by ``document``."""

    @abc.abstractmethod
    def revise(self, document: str, summary: str, flagged_spans: list[str]) -> str:
        """Rewrite ``summary`` so the flagged spans are supported by
        ``document``; everything else must be preserved."""

    @abc.abstractmethod
    def describe(self) -> dict:
        """Identity payload recorded into run manifests."""
