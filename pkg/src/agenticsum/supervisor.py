"""Supervised iterative refinement.

The pipeline compresses the document, drafts a summary, detects
hallucinated spans, and repairs them until one of the halting rules
fires. Halting is checked in a fixed order: flagged set empty, mean
grounding converged, no new flagged spans, iteration budget exhausted.

Modes:
    vanilla    generate from the full document; no detection or repair.
    draft      compress + generate + detect; no repair.
    fix_nosup  exactly one detect -> fix -> detect pass; the convergence
               and no-new-span rules are disabled.
    full       the complete supervised loop.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from agenticsum import templateio
from agenticsum.aura import SpanGrounding, mean_grounding
from agenticsum.backend.base import DecodingParams, ModelBackend
from agenticsum.detector import HallucinationSet, detect, detect_text, flag_spans
from agenticsum.errors import ConfigError, DegenerateSummaryError
from agenticsum.fix import fix
from agenticsum.focus import SCORER_NAMES, compress
from agenticsum.segmentation import Document, normalize_span
from agenticsum.templateio import build_draft_prompt


class Mode(enum.Enum):
    VANILLA = "vanilla"
    DRAFT = "draft"
    FIX_NOSUP = "fix_nosup"
    FULL = "full"


class HaltReason(enum.Enum):
    EMPTY_HSET = "empty_hset"
    CONVERGED = "converged"
    NO_NEW_SPANS = "no_new_spans"
    BUDGET = "budget"
    DEGENERATE = "degenerate"
    VANILLA = "vanilla"


@dataclass
class PipelineConfig:
    r: float = 0.6
    tau: float = 0.5
    eps_conv: float = 0.01
    eps_stab: float = 1e-8
    t_max: int = 3
    mode: Mode = Mode.FULL
    scorer: str = "verbatim"
    max_new_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self):
        if isinstance(self.mode, str):
            try:
                self.mode = Mode(self.mode)
            except ValueError:
                raise ConfigError(f"unknown mode {self.mode!r}") from None
        if not 0.0 < self.r <= 1.0:
            raise ConfigError(f"r must be in (0, 1], got {self.r}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must be in [0, 1], got {self.tau}")
        if self.eps_conv <= 0:
            raise ConfigError(f"eps_conv must be positive, got {self.eps_conv}")
        if self.eps_stab <= 0:
            raise ConfigError(f"eps_stab must be positive, got {self.eps_stab}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be at least 1, got {self.t_max}")
        if self.scorer not in SCORER_NAMES:
            raise ConfigError(
                f"unknown scorer {self.scorer!r}, expected {SCORER_NAMES}"
            )
        if self.max_new_tokens < 1:
            raise ConfigError("max_new_tokens must be positive")
        if self.temperature < 0:
            raise ConfigError("temperature must be non-negative")

    def decoding_params(self) -> DecodingParams:
        return DecodingParams(
            max_new_tokens=self.max_new_tokens, temperature=self.temperature
        )

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "tau": self.tau,
            "eps_conv": self.eps_conv,
            "eps_stab": self.eps_stab,
            "t_max": self.t_max,
            "mode": self.mode.value,
            "scorer": self.scorer,
            "max_new_tokens": self.max_new_tokens,
            "temperature": self.temperature,
        }


@dataclass(frozen=True)
class RefinementState:
    """One iteration's summary with its detection results."""

    t: int
    summary: str
    spans: tuple[SpanGrounding, ...]
    a_bar: float | None
    hset: HallucinationSet

    @classmethod
    def build(
        cls, t: int, summary: str, spans: Sequence[SpanGrounding], tau: float
    ) -> "RefinementState":
        spans = tuple(spans)
        a_bar = mean_grounding(spans) if spans else None
        return cls(
            t=t,
            summary=summary,
            spans=spans,
            a_bar=a_bar,
            hset=flag_spans(spans, tau, iteration=t),
        )


@dataclass(frozen=True)
class HaltDecision:
    halt: bool
    reason: HaltReason | None = None


@dataclass
class RefinementTrace:
    """Full audit record of one pipeline run."""

    doc_id: str
    config: dict
    states: tuple[RefinementState, ...]
    halt_reason: HaltReason
    final_summary: str
    manifest: dict = field(default_factory=dict)


def _budget(cfg: PipelineConfig) -> int:
    if cfg.mode is Mode.DRAFT:
        return 0
    if cfg.mode is Mode.FIX_NOSUP:
        return 1
    return cfg.t_max


def should_halt(
    curr: RefinementState, prev: RefinementState | None, cfg: PipelineConfig
) -> HaltDecision:
    """Fixed-order halting rules over the current and previous states."""
    if curr.hset.is_empty:
        return HaltDecision(True, HaltReason.EMPTY_HSET)
    if prev is not None and cfg.mode is not Mode.FIX_NOSUP:
        if abs(curr.a_bar - prev.a_bar) < cfg.eps_conv:
            return HaltDecision(True, HaltReason.CONVERGED)
        if curr.hset.identities <= prev.hset.identities:
            return HaltDecision(True, HaltReason.NO_NEW_SPANS)
    if curr.t >= _budget(cfg):
        return HaltDecision(True, HaltReason.BUDGET)
    return HaltDecision(False, None)


def _manifest(backend: ModelBackend, cfg: PipelineConfig) -> dict:
    return {
        "backend": backend.describe(),
        "templates": dict(templateio.TEMPLATE_VERSIONS),
        "grounding_context": "full" if cfg.mode is Mode.VANILLA else "reduced",
    }


def run_pipeline(
    doc: Document, cfg: PipelineConfig, backend: ModelBackend
) -> RefinementTrace:
    """Run one document through the configured pipeline mode."""
    manifest = _manifest(backend, cfg)

    if cfg.mode is Mode.VANILLA:
        gen = backend.generate(build_draft_prompt(doc.text), cfg.decoding_params())
        state = RefinementState(
            t=0,
            summary=gen.text,
            spans=(),
            a_bar=None,
            hset=HallucinationSet(iteration=0, members=()),
        )
        return RefinementTrace(
            doc_id=doc.doc_id,
            config=cfg.to_dict(),
            states=(state,),
            halt_reason=HaltReason.VANILLA,
            final_summary=gen.text,
            manifest=manifest,
        )

    d_reduced = compress(doc, cfg.r, backend, cfg.scorer)
    gen = backend.generate(build_draft_prompt(d_reduced.text), cfg.decoding_params())

    def finished(states, reason, final):
        return RefinementTrace(
            doc_id=doc.doc_id,
            config=cfg.to_dict(),
            states=tuple(states),
            halt_reason=reason,
            final_summary=final,
            manifest=manifest,
        )

    try:
        spans, hset = detect(
            gen, doc, backend, cfg.tau, cfg.eps_stab, iteration=0
        )
    except DegenerateSummaryError:
        state = RefinementState(
            t=0,
            summary=gen.text,
            spans=(),
            a_bar=None,
            hset=HallucinationSet(iteration=0, members=()),
        )
        return finished([state], HaltReason.DEGENERATE, gen.text)

    states = [
        RefinementState(
            t=0, summary=gen.text, spans=tuple(spans),
            a_bar=mean_grounding(spans), hset=hset,
        )
    ]

    while True:
        curr = states[-1]
        prev = states[-2] if len(states) > 1 else None
        decision = should_halt(curr, prev, cfg)
        if decision.halt:
            return finished(states, decision.reason, curr.summary)
        try:
            fix_result = fix(d_reduced, curr, curr.hset, backend)
            carried = {normalize_span(s.text): s.a for s in curr.spans}
            spans, hset = detect_text(
                doc,
                fix_result.text,
                backend,
                cfg.tau,
                iteration=curr.t + 1,
                carried=carried,
            )
        except DegenerateSummaryError:
            # Keep the last non-empty summary as the final output.
            return finished(states, HaltReason.DEGENERATE, curr.summary)
        states.append(
            RefinementState(
                t=curr.t + 1,
                summary=fix_result.text,
                spans=tuple(spans),
                a_bar=mean_grounding(spans),
                hset=hset,
            )
        )
