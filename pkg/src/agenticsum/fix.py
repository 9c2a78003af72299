"""Targeted span repair.

The fix step asks the backend to revise exactly the flagged spans of
the current summary against the compressed document while preserving
everything else verbatim. It is only ever invoked with a non-empty
flagged set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from agenticsum import templateio
from agenticsum.backend.base import ModelBackend
from agenticsum.detector import HallucinationSet
from agenticsum.errors import DegenerateSummaryError
from agenticsum.focus import CompressedDocument
from agenticsum.segmentation import normalize_span, split_sentences

if TYPE_CHECKING:
    from agenticsum.supervisor import RefinementState


@dataclass(frozen=True)
class FixResult:
    """A revision plus which flagged identities survived it verbatim."""

    text: str
    surviving_flagged: tuple[str, ...]


def build_fix_prompt(
    document_text: str, summary_text: str, flagged_spans: list[str]
) -> str:
    """Revision prompt enumerating the flagged spans one per line."""
    if not flagged_spans:
        raise ValueError("a fix prompt requires at least one flagged span")
    enumerated = "\n".join(
        f"{i}. {span}" for i, span in enumerate(flagged_spans, start=1)
    )
    return templateio.render(
        "fix",
        {
            "document": document_text,
            "summary": summary_text,
            "flagged_spans": enumerated,
        },
    )


def fix(
    d_reduced: CompressedDocument,
    summary_state: "RefinementState",
    hset: HallucinationSet,
    backend: ModelBackend,
) -> FixResult:
    """Revise the flagged spans of ``summary_state`` and report which
    flagged identities are still present afterwards."""
    if hset.is_empty:
        raise ValueError("fix requires a non-empty flagged set")
    by_index = {s.span_index: s for s in summary_state.spans}
    flagged_texts = [by_index[i].text for i, _ in hset.members]
    revised = backend.revise(d_reduced.text, summary_state.summary, flagged_texts)
    if not revised.strip():
        raise DegenerateSummaryError("revision produced an empty summary")
    revised_norms = {normalize_span(u.text) for u in split_sentences(revised)}
    surviving = tuple(
        norm for _, norm in hset.members if norm in revised_norms
    )
    return FixResult(text=revised, surviving_flagged=surviving)
