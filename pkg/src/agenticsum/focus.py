"""Attention-based input compression.

Each sentence receives a salience score from its self-attention tensor;
the top ``k = clamp(floor(r * m), 1, m)`` sentences survive in original
document order. Two scorers ship:

- ``verbatim``: mean attention mass per (head, query) pair. For
  row-stochastic attention this is identically 1 for every sentence, a
  known degeneracy kept for fidelity with the defining formula.
- ``received``: maximum per-token received mass (column sums), which
  actually discriminates between sentences under normalized attention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from agenticsum.backend.base import AttentionTensor, ModelBackend
from agenticsum.errors import ConfigError, EmptyDocumentError, GroundingError
from agenticsum.segmentation import Document, SentenceUnit

# Absorbs binary representation error in r * m (e.g. 0.7 * 10 ->
# 6.999...96) so floor matches exact decimal arithmetic.
_FLOOR_GUARD = 1e-9

SCORER_NAMES = ("verbatim", "received")


def salience_score(attn: AttentionTensor) -> float:
    """Mean attention mass per (head, query) pair: sum(A) / (H * T)."""
    if attn.tokens == 0:
        raise GroundingError("salience of an empty sentence is undefined")
    return float(attn.weights.sum() / (attn.heads * attn.tokens))


def received_token_scores(attn: AttentionTensor) -> np.ndarray:
    """Per-token received mass: column sums over heads and queries,
    normalized by H * T."""
    if attn.tokens == 0:
        raise GroundingError("salience of an empty sentence is undefined")
    return attn.weights.sum(axis=(0, 1)) / (attn.heads * attn.tokens)


def salience_score_received(attn: AttentionTensor) -> float:
    """Sentence salience under the received-mass variant: the maximum
    per-token received mass."""
    return float(received_token_scores(attn).max())


_SCORERS = {
    "verbatim": salience_score,
    "received": salience_score_received,
}


def target_keep_count(ratio: float, sentence_count: int) -> int:
    """clamp(floor(ratio * sentence_count), 1, sentence_count)."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"compression ratio must be in (0, 1], got {ratio}")
    if sentence_count < 1:
        raise EmptyDocumentError("cannot compress a document with no sentences")
    k = math.floor(ratio * sentence_count + _FLOOR_GUARD)
    return max(1, min(k, sentence_count))


@dataclass
class CompressedDocument:
    """The surviving sentences of a document, in original order."""

    source: Document
    kept: tuple[SentenceUnit, ...]
    scores: tuple[float, ...]
    ratio: float
    k: int

    @property
    def kept_indices(self) -> tuple[int, ...]:
        return tuple(u.index for u in self.kept)

    @property
    def text(self) -> str:
        """Reconstructed text of the surviving sentences.

        Adjacent survivors keep their original separator (so identity
        compression reproduces the source exactly, including any leading
        or trailing text); elisions collapse to a newline.
        """
        src = self.source.text
        total = len(self.source.sentences)
        if not self.kept:
            return ""
        parts = []
        if self.kept[0].index == 0:
            parts.append(src[: self.kept[0].char_start])
        for prev, curr in zip(self.kept, self.kept[1:]):
            parts.append(prev.text)
            if curr.index == prev.index + 1:
                parts.append(src[prev.char_end : curr.char_start])
            else:
                parts.append("\n")
        parts.append(self.kept[-1].text)
        if self.kept[-1].index == total - 1:
            parts.append(src[self.kept[-1].char_end :])
        return "".join(parts)


def compress(
    doc: Document,
    ratio: float,
    backend: ModelBackend,
    scorer: str = "verbatim",
) -> CompressedDocument:
    """Keep the top-k salient sentences of ``doc`` in original order.

    Ranking is by descending score with sentence index as the
    deterministic tie-break, which makes kept sets nest as the ratio
    grows.
    """
    if scorer not in _SCORERS:
        raise ConfigError(f"unknown scorer {scorer!r}, expected {SCORER_NAMES}")
    k = target_keep_count(ratio, len(doc.sentences))
    score_fn = _SCORERS[scorer]
    scores = tuple(
        score_fn(backend.sentence_attention(u.text)) for u in doc.sentences
    )
    ranked = sorted(
        range(len(doc.sentences)), key=lambda j: (-scores[j], j)
    )
    kept_indices = sorted(ranked[:k])
    return CompressedDocument(
        source=doc,
        kept=tuple(doc.sentences[j] for j in kept_indices),
        scores=scores,
        ratio=ratio,
        k=k,
    )
