"""Lexical overlap metrics and the judge-prompt tooling.

BLEU uses modified (clipped) n-gram precision with a brevity penalty
and no smoothing; BLEU-2 is the geometric mean of 1- and 2-gram
precisions times the brevity penalty. ROUGE-L reports LCS-based
precision, recall, and F1. All scores are scaled to 0-100.

Tokenization for metrics: case-fold, then split into alphanumeric runs
and single punctuation marks.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from agenticsum import _kernels, templateio
from agenticsum.errors import JudgeParseError, JudgeValidationError

_METRIC_TOKEN_RE = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")

_JUDGE_KEYS = ("Hallucination", "Factual", "Complete", "Coherent")
_JUDGE_LINE_RE = re.compile(
    r"^\s*(Hallucination|Factual|Complete|Coherent)\s*:\s*(-?\d+)\s*$",
    re.MULTILINE,
)


def metric_tokens(text: str) -> list[str]:
    """Case-folded tokens split on whitespace and punctuation boundaries."""
    return _METRIC_TOKEN_RE.findall(text.casefold())


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_precision(hyp: list[str], ref: list[str], n: int) -> float:
    hyp_counts = _ngrams(hyp, n)
    total = sum(hyp_counts.values())
    if total == 0:
        return 0.0
    ref_counts = _ngrams(ref, n)
    clipped = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    return clipped / total


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len == 0:
        return 0.0
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def bleu_1(hypothesis: str, reference: str) -> float:
    """BLEU-1 on a 0-100 scale: clipped unigram precision times BP."""
    hyp, ref = metric_tokens(hypothesis), metric_tokens(reference)
    if not hyp:
        return 0.0
    return 100.0 * brevity_penalty(len(hyp), len(ref)) * _clipped_precision(hyp, ref, 1)


def bleu_2(hypothesis: str, reference: str) -> float:
    """BLEU-2 on a 0-100 scale: BP times the geometric mean of the
    clipped 1- and 2-gram precisions, no smoothing."""
    hyp, ref = metric_tokens(hypothesis), metric_tokens(reference)
    if not hyp:
        return 0.0
    p1 = _clipped_precision(hyp, ref, 1)
    p2 = _clipped_precision(hyp, ref, 2)
    if p1 == 0.0 or p2 == 0.0:
        return 0.0
    return 100.0 * brevity_penalty(len(hyp), len(ref)) * math.sqrt(p1 * p2)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def rouge_l(hypothesis: str, reference: str) -> RougeScore:
    """ROUGE-L precision/recall/F1 on a 0-100 scale."""
    hyp, ref = metric_tokens(hypothesis), metric_tokens(reference)
    if not hyp or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    vocab: dict[str, int] = {}
    hyp_ids = [vocab.setdefault(t, len(vocab)) for t in hyp]
    ref_ids = [vocab.setdefault(t, len(vocab)) for t in ref]
    lcs = _kernels.lcs_length(hyp_ids, ref_ids)
    precision = lcs / len(hyp)
    recall = lcs / len(ref)
    if precision + recall == 0.0:
        return RougeScore(0.0, 0.0, 0.0)
    f1 = 2.0 * precision * recall / (precision + recall)
    return RougeScore(100.0 * precision, 100.0 * recall, 100.0 * f1)


def build_judge_prompt(source_document: str, generated_summary: str) -> str:
    """Four-criterion scoring prompt for a document/summary pair."""
    return templateio.render(
        "judge",
        {
            "SOURCE_DOCUMENT": source_document,
            "GENERATED_SUMMARY": generated_summary,
        },
    )


@dataclass(frozen=True)
class JudgeScores:
    hallucination: int
    factual: int
    complete: int
    coherent: int


def parse_judge_scores(text: str) -> JudgeScores:
    """Parse the strict key-value judge output.

    Lines are scanned anywhere in the response (prose preambles are
    tolerated); the first occurrence of each key wins. A missing key is
    a parse error; a score outside 1-5 is a validation error.
    """
    found: dict[str, int] = {}
    for match in _JUDGE_LINE_RE.finditer(text):
        key, value = match.group(1), int(match.group(2))
        found.setdefault(key, value)
    missing = [k for k in _JUDGE_KEYS if k not in found]
    if missing:
        raise JudgeParseError(f"missing score lines: {', '.join(missing)}")
    for key in _JUDGE_KEYS:
        if not 1 <= found[key] <= 5:
            raise JudgeValidationError(
                f"{key} score {found[key]} outside the 1-5 scale"
            )
    return JudgeScores(
        hallucination=found["Hallucination"],
        factual=found["Factual"],
        complete=found["Complete"],
        coherent=found["Coherent"],
    )
