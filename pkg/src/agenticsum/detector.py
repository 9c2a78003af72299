"""Span-level hallucination detection.

Each summary sentence (span) gets two independent signals that are
never collapsed into one:

- ``a``: attention grounding against the conditioning context the
  summary was generated from;
- ``h``: strict entailment against the full original document.

A span is flagged when ``h == 1`` or ``a < tau``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from agenticsum import templateio
from agenticsum.aura import SpanGrounding, span_aura, token_aura
from agenticsum.backend.base import (
    EntailmentLabel,
    EntailmentVerdict,
    GenerationResult,
    ModelBackend,
)
from agenticsum.errors import DegenerateSummaryError, GroundingError, VerdictParseError
from agenticsum.segmentation import (
    Document,
    iter_token_spans,
    map_token_spans,
    normalize_span,
    split_sentences,
)

_LABEL_RE = re.compile(
    r"Entailment\s+Label\s*:\s*\**\s*(Not\s+Entailed|Entailed)", re.IGNORECASE
)
_EXPLANATION_RE = re.compile(
    r"Explanation\s*:\s*(.*?)(?:\n\s*[-*]?\s*Problematic\s+Spans|\Z)",
    re.IGNORECASE | re.DOTALL,
)
_SPANS_SECTION_RE = re.compile(
    r"Problematic\s+Spans(?:\s*\([^)]*\))?\s*:\s*(.*)\Z", re.IGNORECASE | re.DOTALL
)
_QUOTED_RE = re.compile(r"``(.+?)''|\"([^\"]+)\"|'([^']+)'")


@dataclass(frozen=True)
class HallucinationSet:
    """Flagged spans of one refinement state.

    ``members`` pairs each flagged span's index with its normalized
    identity; cross-iteration comparisons use identities alone.
    """

    iteration: int
    members: tuple[tuple[int, str], ...]

    @property
    def identities(self) -> frozenset[str]:
        return frozenset(norm for _, norm in self.members)

    @property
    def is_empty(self) -> bool:
        return not self.members

    def __len__(self) -> int:
        return len(self.members)


def is_flagged(a: float, h: int, tau: float) -> bool:
    """Flag rule: entailment failure or weak attention grounding."""
    return h == 1 or a < tau


def flag_spans(
    spans: Sequence[SpanGrounding], tau: float, iteration: int = 0
) -> HallucinationSet:
    """Recompute the flagged set from raw (a, h) signals."""
    members = tuple(
        (s.span_index, normalize_span(s.text))
        for s in spans
        if is_flagged(s.a, s.h, tau)
    )
    return HallucinationSet(iteration=iteration, members=members)


def build_entailment_prompt(document_text: str, span_text: str) -> str:
    """Strict-entailment prompt for one summary span."""
    return templateio.render(
        "entailment", {"document": document_text, "summary": span_text}
    )


def _parse_span_list(section: str) -> tuple[str, ...]:
    bracketed = re.search(r"\[(.*?)\]", section, re.DOTALL)
    if bracketed:
        body = bracketed.group(1)
    else:
        lines = section.strip().splitlines()
        body = lines[0] if lines else ""
    quoted = [
        next(g for g in m.groups() if g is not None)
        for m in _QUOTED_RE.finditer(body)
    ]
    if quoted:
        return tuple(s.strip() for s in quoted if s.strip())
    stripped = body.strip()
    if not stripped or stripped.casefold() in {"none", "n/a", "-", "[]"}:
        return ()
    return tuple(p.strip() for p in stripped.split(",") if p.strip())


def parse_entailment_response(text: str) -> EntailmentVerdict:
    """Parse a raw entailment response into a verdict.

    The label line is searched anywhere in the response; a missing or
    self-contradictory response raises VerdictParseError.
    """
    label_match = _LABEL_RE.search(text)
    if label_match is None:
        raise VerdictParseError("no Entailment Label line found", raw=text)
    raw_label = " ".join(label_match.group(1).split()).casefold()
    label = (
        EntailmentLabel.NOT_ENTAILED
        if raw_label == "not entailed"
        else EntailmentLabel.ENTAILED
    )
    explanation_match = _EXPLANATION_RE.search(text)
    explanation = explanation_match.group(1).strip() if explanation_match else ""
    spans_match = _SPANS_SECTION_RE.search(text)
    spans = _parse_span_list(spans_match.group(1)) if spans_match else ()
    if label is EntailmentLabel.ENTAILED and spans:
        raise VerdictParseError(
            "response is Entailed but lists problematic spans", raw=text
        )
    return EntailmentVerdict(
        label=label, explanation=explanation, problematic_spans=spans
    )


def _entailment_bit(verdict: EntailmentVerdict) -> int:
    return 1 if verdict.label is EntailmentLabel.NOT_ENTAILED else 0


def detect(
    summary_gen: GenerationResult,
    document: Document,
    backend: ModelBackend,
    tau: float,
    eps_stab: float = 1e-8,
    iteration: int = 0,
) -> tuple[list[SpanGrounding], HallucinationSet]:
    """Detect hallucinated spans in a freshly generated summary.

    Grounding scores come from the generation's step attentions (the
    conditioning context); entailment always checks against the full
    original document.
    """
    units = split_sentences(summary_gen.text)
    if not units:
        raise DegenerateSummaryError("generated summary has no spans")
    offsets = [(t.start, t.end) for t in summary_gen.tokens]
    index_map = map_token_spans(offsets, units, text_length=len(summary_gen.text))
    token_scores = [token_aura(sa, eps_stab) for sa in summary_gen.step_attentions]

    groundings: list[SpanGrounding] = []
    for unit in units:
        idx = index_map.tokens_for(unit.index)
        if not idx:
            raise GroundingError(
                f"span {unit.index} owns no generated tokens; cannot ground it"
            )
        a = span_aura(token_scores, idx)
        verdict = backend.entail(document.text, unit.text)
        h = _entailment_bit(verdict)
        groundings.append(
            SpanGrounding(
                span_index=unit.index,
                text=unit.text,
                token_indices=idx,
                a=a,
                h=h,
                flagged=is_flagged(a, h, tau),
                verdict=verdict,
                grounding_source="attention",
            )
        )
    return groundings, flag_spans(groundings, tau, iteration)


def detect_text(
    document: Document,
    summary_text: str,
    backend: ModelBackend,
    tau: float,
    iteration: int = 0,
    carried: Mapping[str, float] | None = None,
) -> tuple[list[SpanGrounding], HallucinationSet]:
    """Detect hallucinated spans in a summary given only as text.

    Revised summaries have no generation-step attention, so grounding
    falls back along a documented chain: a score carried from a span
    preserved verbatim, else the entailment verdict's raw support
    score, else a neutral 1.0 (entailment alone governs).
    """
    units = split_sentences(summary_text)
    if not units:
        raise DegenerateSummaryError("summary has no spans")
    offsets = iter_token_spans(summary_text)
    index_map = map_token_spans(offsets, units, text_length=len(summary_text))

    groundings: list[SpanGrounding] = []
    for unit in units:
        verdict = backend.entail(document.text, unit.text)
        h = _entailment_bit(verdict)
        norm = normalize_span(unit.text)
        if carried is not None and norm in carried:
            a, source = carried[norm], "carried"
        elif verdict.raw_score is not None:
            a, source = float(verdict.raw_score), "entailment"
        else:
            a, source = 1.0, "default"
        groundings.append(
            SpanGrounding(
                span_index=unit.index,
                text=unit.text,
                token_indices=index_map.tokens_for(unit.index),
                a=a,
                h=h,
                flagged=is_flagged(a, h, tau),
                verdict=verdict,
                grounding_source=source,
            )
        )
    return groundings, flag_spans(groundings, tau, iteration)
