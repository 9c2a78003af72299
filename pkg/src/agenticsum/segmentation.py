"""Sentence segmentation with exact character-offset bookkeeping.

Every sentence unit is a trimmed substring of its parent text addressed
by character offsets (not bytes), so downstream spans always point back
to their origin. Splitting is rule-based and deterministic:

- terminators '.', '?', '!' end a sentence when followed by whitespace
  and an uppercase letter, or by end of text;
- a fixed abbreviation list suppresses false splits after '.';
- blank lines always separate sentences;
- structured header lines of the form "<TAG> value" are standalone units.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from agenticsum.errors import SegmentationError

# Trailing tokens ending in '.' that do not close a sentence.
_ABBREVIATIONS = frozenset(
    {"dr.", "mr.", "ms.", "mrs.", "vs.", "e.g.", "i.e.", "pt."}
)

_TERMINATORS = frozenset(".?!")

_HEADER_RE = re.compile(r"\s*<[A-Za-z_][A-Za-z0-9_]*>")

_TOKEN_RE = re.compile(r"\S+")

_TERMINAL_PUNCT = ".!?"


@dataclass(frozen=True)
class SentenceUnit:
    """One sentence-level unit addressed into its parent text."""

    index: int
    char_start: int
    char_end: int
    text: str


@dataclass(frozen=True)
class Document:
    """A source document together with its sentence segmentation."""

    doc_id: str
    text: str
    sentences: tuple[SentenceUnit, ...]

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        return cls(doc_id=doc_id, text=text, sentences=tuple(split_sentences(text)))


@dataclass(frozen=True)
class SpanIndexMap:
    """Token indices grouped by the sentence containing each token's start."""

    sets: tuple[tuple[int, ...], ...]
    unassigned: tuple[int, ...]

    def tokens_for(self, sentence_index: int) -> tuple[int, ...]:
        return self.sets[sentence_index]


def normalize_span(text: str) -> str:
    """Canonical span identity: case-folded, whitespace-collapsed,
    terminal punctuation stripped."""
    collapsed = " ".join(text.split()).casefold()
    return collapsed.rstrip(_TERMINAL_PUNCT).rstrip()


def iter_token_spans(text: str) -> list[tuple[int, int]]:
    """Whitespace-delimited token (start, end) offsets, in order."""
    return [(m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _line_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for m in re.finditer(r"\n", text):
        spans.append((start, m.start()))
        start = m.end()
    spans.append((start, len(text)))
    return spans


def _segments(text: str) -> list[tuple[int, int]]:
    """Line-structural segments: header lines alone, plain-line runs merged,
    blank lines discarded."""
    segments: list[tuple[int, int]] = []
    run: list[tuple[int, int]] = []

    def flush() -> None:
        if run:
            segments.append((run[0][0], run[-1][1]))
            run.clear()

    for a, b in _line_spans(text):
        line = text[a:b]
        if not line.strip():
            flush()
        elif _HEADER_RE.match(line):
            flush()
            segments.append((a, b))
        else:
            run.append((a, b))
    flush()
    return segments


def _is_abbreviation(text: str, seg_start: int, end: int) -> bool:
    """True when the token ending at ``end`` (inclusive of its '.') is a
    known abbreviation."""
    m = re.search(r"(\S+)\Z", text[seg_start:end])
    if m is None:
        return False
    token = m.group(1).casefold().lstrip("([{'\"")
    return token in _ABBREVIATIONS


def _is_boundary(text: str, pos: int, seg_end: int) -> bool:
    """True when a terminator run ending just before ``pos`` closes a
    sentence: end of segment, or whitespace followed by an uppercase letter."""
    if pos >= seg_end:
        return True
    if not text[pos].isspace():
        return False
    k = pos
    while k < seg_end and text[k].isspace():
        k += 1
    return k >= seg_end or text[k].isupper()


def _terminator_splits(text: str, a: int, b: int) -> list[tuple[int, int]]:
    units = []
    start = a
    i = a
    while i < b:
        if text[i] in _TERMINATORS:
            j = i
            while j + 1 < b and text[j + 1] in _TERMINATORS:
                j += 1
            end = j + 1
            single_period = j == i and text[i] == "."
            if _is_boundary(text, end, b) and not (
                single_period and _is_abbreviation(text, a, end)
            ):
                units.append((start, end))
                start = end
            i = end
        else:
            i += 1
    if start < b:
        units.append((start, b))
    return units


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def split_sentences(text: str) -> list[SentenceUnit]:
    """Segment ``text`` into ordered, non-overlapping sentence units.

    Units are trimmed substrings; concatenating them with the original
    inter-unit characters reconstructs the input exactly.
    """
    units: list[SentenceUnit] = []
    for a, b in _segments(text):
        for s, e in _terminator_splits(text, a, b):
            s, e = _trim(text, s, e)
            if s < e:
                units.append(SentenceUnit(len(units), s, e, text[s:e]))
    return units


def map_token_spans(
    token_offsets: Sequence[tuple[int, int]],
    sentences: Sequence[SentenceUnit],
    text_length: int | None = None,
) -> SpanIndexMap:
    """Assign tokens to sentences by the sentence containing each token's
    char_start.

    Zero-width tokens (specials) are never assigned. Tokens must be sorted
    and non-overlapping; a token extending past the text is a structural
    error.
    """
    limit = text_length
    if limit is None:
        limit = max((u.char_end for u in sentences), default=0)

    starts = [u.char_start for u in sentences]
    ends = [u.char_end for u in sentences]

    sets: list[list[int]] = [[] for _ in sentences]
    unassigned: list[int] = []
    prev_start = -1
    prev_end = 0
    cursor = 0
    for idx, (ts, te) in enumerate(token_offsets):
        if ts > te:
            raise SegmentationError(f"token {idx} has negative extent ({ts}, {te})")
        if te > limit:
            raise SegmentationError(
                f"token {idx} ends at {te}, past text length {limit}"
            )
        if ts < prev_start:
            raise SegmentationError(f"token {idx} is out of order")
        prev_start = ts
        if ts < te:
            if ts < prev_end:
                raise SegmentationError(f"token {idx} overlaps its predecessor")
            prev_end = te
        if ts == te:
            unassigned.append(idx)
            continue
        while cursor < len(sentences) and ends[cursor] <= ts:
            cursor += 1
        if cursor < len(sentences) and starts[cursor] <= ts:
            sets[cursor].append(idx)
        else:
            unassigned.append(idx)

    return SpanIndexMap(
        sets=tuple(tuple(s) for s in sets),
        unassigned=tuple(unassigned),
    )
