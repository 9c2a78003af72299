"""Seeded mock backend: a pure function of (inputs, seed).

Generation is extractive copy of the highest-mock-salience sentences
from the prompt's document block, attention tensors come from a seeded
64-bit hash pushed through a row softmax, entailment is a lexical
containment rule, and revision deletes unsupported flagged spans while
preserving everything else byte-identically. Identical inputs and seed
give identical outputs across runs and platforms.
"""

from __future__ import annotations

import hashlib
import re

from agenticsum import _kernels
from agenticsum.backend.base import (
    AttentionTensor,
    DecodingParams,
    EntailmentLabel,
    EntailmentVerdict,
    GenerationResult,
    ModelBackend,
    StepAttention,
    TokenSpan,
    locate_document_block,
)
from agenticsum.errors import CapacityError
from agenticsum.segmentation import (
    iter_token_spans,
    normalize_span,
    split_sentences,
)

_WORD_RE_TEXT = r"[a-z0-9]+"

_STOPWORDS = frozenset(
    """
    a an the and or but nor of in on at to for with without from by as is are
    was were be been being has have had do does did he she it they his her
    its their this that these those there here no not any all some such then
    than so if s t
    """.split()
)


def _word_tokens(text: str) -> list[tuple[str, int, int]]:
    """Lowercased alphanumeric word tokens with char offsets."""
    return [
        (m.group(0), m.start(), m.end())
        for m in re.finditer(_WORD_RE_TEXT, text.casefold())
    ]


class MockBackend(ModelBackend):
    """Deterministic in-process backend used for tests and offline runs.

    Args:
        seed: stream selector; every operation is keyed on it.
        heads: number of attention heads synthesized.
        context_limit: maximum prompt length in whitespace tokens.
        input_boost: extra attention mass placed on a copied token's
            source position, as a multiple of the visible context length.
        inject_spans: sentences appended verbatim to every generation,
            used to simulate fabricated content in fixtures.
    """

    def __init__(
        self,
        seed: int = 0,
        heads: int = 4,
        context_limit: int = 4096,
        input_boost: float = 3.0,
        inject_spans: tuple[str, ...] = (),
    ):
        if heads < 1:
            raise ValueError("heads must be positive")
        if context_limit < 1:
            raise ValueError("context_limit must be positive")
        self.seed = int(seed)
        self.heads = int(heads)
        self.context_limit = int(context_limit)
        self.input_boost = float(input_boost)
        self.inject_spans = tuple(inject_spans)

    # -- keying ---------------------------------------------------------

    def _key(self, *parts: str) -> int:
        digest = hashlib.blake2b(digest_size=8)
        digest.update(str(self.seed).encode("ascii"))
        for part in parts:
            digest.update(b"\x1f")
            digest.update(part.encode("utf-8", "surrogatepass"))
        return int.from_bytes(digest.digest(), "little")

    def _uniform01(self, *parts: str) -> float:
        return (self._key(*parts) >> 11) * (1.0 / 9007199254740992.0)

    def generation_salience(self, sentence_text: str) -> float:
        """Salience the generator assigns to a candidate sentence."""
        return self._uniform01("draft-salience", normalize_span(sentence_text))

    # -- operations -----------------------------------------------------

    def sentence_attention(self, text: str) -> AttentionTensor:
        tokens = iter_token_spans(text)
        if not tokens:
            raise ValueError("sentence_attention requires a non-empty sentence")
        weights = _kernels.hashed_softmax_attention(
            self._key("attn", text), self.heads, len(tokens)
        )
        return AttentionTensor(weights=weights)

    def generate(self, prompt: str, params: DecodingParams) -> GenerationResult:
        prompt_tokens = iter_token_spans(prompt)
        if len(prompt_tokens) > self.context_limit:
            raise CapacityError(
                f"prompt holds {len(prompt_tokens)} tokens, "
                f"context limit is {self.context_limit}"
            )
        block = locate_document_block(prompt)
        doc_start, doc_end = block if block else (0, len(prompt))
        input_positions = tuple(
            i
            for i, (ts, _) in enumerate(prompt_tokens)
            if doc_start <= ts < doc_end
        )

        selected = self._select_sentences(prompt[doc_start:doc_end], params)
        pieces = [u.text for u in selected] + list(self.inject_spans)
        out_text = " ".join(pieces)

        # Source prompt position of every copied output token; injected
        # tokens have no source.
        pos_by_start = {ts: i for i, (ts, _) in enumerate(prompt_tokens)}
        sources: list[int | None] = []
        for unit in selected:
            for ts, _ in iter_token_spans(unit.text):
                sources.append(pos_by_start.get(doc_start + unit.char_start + ts))
        for span in self.inject_spans:
            sources.extend([None] * len(iter_token_spans(span)))

        out_tokens = tuple(
            TokenSpan(out_text[s:e], s, e) for s, e in iter_token_spans(out_text)
        )
        if len(sources) != len(out_tokens):
            raise AssertionError("token bookkeeping diverged from output text")

        input_set = set(input_positions)
        fallback = next(
            (i for i in range(len(prompt_tokens)) if i not in input_set), None
        )
        steps = tuple(
            self._step_attention(
                prompt, out_text, g, len(prompt_tokens), sources[g],
                fallback, input_positions,
            )
            for g in range(len(out_tokens))
        )
        return GenerationResult(
            text=out_text,
            tokens=out_tokens,
            step_attentions=steps,
            input_positions=input_positions,
            context_length=len(prompt_tokens),
        )

    def _select_sentences(self, doc_text: str, params: DecodingParams):
        """Extractive selection: take sentences in descending mock salience
        while the token budget lasts (always at least one), then restore
        document order."""
        sentences = split_sentences(doc_text)
        if not sentences:
            return []
        ranked = sorted(
            sentences,
            key=lambda u: (-self.generation_salience(u.text), u.index),
        )
        selected = []
        used = 0
        for unit in ranked:
            n = len(iter_token_spans(unit.text))
            if selected and used + n > params.max_new_tokens:
                break
            selected.append(unit)
            used += n
        selected.sort(key=lambda u: u.index)
        return selected

    def _step_attention(
        self,
        prompt: str,
        out_text: str,
        g: int,
        context_length: int,
        source: int | None,
        fallback: int | None,
        input_positions: tuple[int, ...],
    ) -> StepAttention:
        length = context_length + g
        noise = _kernels.hashed_uniform(
            self._key("step", prompt, out_text, str(g)), (self.heads, length)
        )
        weights = 0.05 + 0.95 * noise
        boost_at = source if source is not None else fallback
        if boost_at is not None:
            weights[:, boost_at] += self.input_boost * length
        weights /= weights.sum(axis=1, keepdims=True)
        return StepAttention(
            step=g + 1, weights=weights, input_positions=input_positions
        )

    def entail(self, document: str, span: str) -> EntailmentVerdict:
        doc_vocab = {w for w, _, _ in _word_tokens(document)}
        words = _word_tokens(span)
        content = [(w, a, b) for w, a, b in words if w not in _STOPWORDS]
        if not content:
            return EntailmentVerdict(
                label=EntailmentLabel.ENTAILED,
                explanation="The span carries no content tokens to check.",
                raw_score=1.0,
            )
        supported = sum(1 for w, _, _ in content if w in doc_vocab)
        score = supported / len(content)
        if supported == len(content):
            return EntailmentVerdict(
                label=EntailmentLabel.ENTAILED,
                explanation="Every content token appears in the document.",
                raw_score=score,
            )
        phrase = self._longest_unsupported_phrase(span, words, doc_vocab)
        return EntailmentVerdict(
            label=EntailmentLabel.NOT_ENTAILED,
            explanation=f'The document does not support "{phrase}".',
            problematic_spans=(phrase,),
            raw_score=score,
        )

    @staticmethod
    def _longest_unsupported_phrase(span, words, doc_vocab) -> str:
        """Longest contiguous phrase whose content tokens are all absent
        from the document; stopwords neither support nor break a run."""
        runs: list[tuple[int, int]] = []  # char ranges
        run_start = None
        run_end = None
        for w, a, b in words:
            if w in _STOPWORDS:
                continue
            if w in doc_vocab:
                if run_start is not None:
                    runs.append((run_start, run_end))
                    run_start = None
            else:
                if run_start is None:
                    run_start = a
                run_end = b
        if run_start is not None:
            runs.append((run_start, run_end))
        best = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
        return span[best[0] : best[1]]

    def revise(self, document: str, summary: str, flagged_spans: list[str]) -> str:
        if not flagged_spans:
            raise ValueError("revise requires at least one flagged span")
        flagged = {normalize_span(s) for s in flagged_spans}
        kept = []
        for unit in split_sentences(summary):
            if normalize_span(unit.text) in flagged:
                verdict = self.entail(document, unit.text)
                if verdict.label is EntailmentLabel.NOT_ENTAILED:
                    continue
            kept.append(unit.text)
        return " ".join(kept)

    def describe(self) -> dict:
        return {
            "kind": "mock",
            "model_id": "mock-extractive-v1",
            "seed": self.seed,
            "heads": self.heads,
            "context_limit": self.context_limit,
            "attention_layer": -1,
        }
