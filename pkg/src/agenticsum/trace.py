"""Trace serialization: the "agenticsum-trace/1" JSON schema.

Serialization is canonical (sorted keys, fixed separators), so
serialize(parse(serialize(x))) is byte-identical to serialize(x).
Every trace embeds the run manifest (backend identity, template
versions) and enough raw span data to recompute its own per-state
aggregates, which ``validate_trace`` checks.
"""

from __future__ import annotations

import json
import math

from agenticsum.detector import is_flagged
from agenticsum.segmentation import normalize_span
from agenticsum.supervisor import RefinementTrace

TRACE_SCHEMA = "agenticsum-trace/1"

_REQUIRED_KEYS = (
    "schema",
    "doc_id",
    "config",
    "manifest",
    "states",
    "halt_reason",
    "final_summary",
)
_STATE_KEYS = ("t", "summary", "spans", "a_bar", "hset")
_SPAN_KEYS = ("text", "a", "h", "flagged")


def trace_to_dict(trace: RefinementTrace) -> dict:
    states = []
    for state in trace.states:
        states.append(
            {
                "t": state.t,
                "summary": state.summary,
                "spans": [
                    {
                        "text": s.text,
                        "a": s.a,
                        "h": s.h,
                        "flagged": s.flagged,
                        "grounding_source": s.grounding_source,
                    }
                    for s in state.spans
                ],
                "a_bar": state.a_bar,
                "hset": sorted(state.hset.identities),
            }
        )
    return {
        "schema": TRACE_SCHEMA,
        "doc_id": trace.doc_id,
        "config": trace.config,
        "manifest": trace.manifest,
        "states": states,
        "halt_reason": trace.halt_reason.value,
        "final_summary": trace.final_summary,
    }


def dumps(trace_dict: dict) -> str:
    """Canonical JSON encoding of a trace dict."""
    return json.dumps(
        trace_dict, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )


def parse_trace(data: str | bytes | dict) -> dict:
    """Parse and structurally validate a serialized trace."""
    if isinstance(data, (str, bytes)):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace is not valid JSON: {exc}") from exc
    else:
        obj = data
    if not isinstance(obj, dict):
        raise ValueError("trace must be a JSON object")
    missing = [k for k in _REQUIRED_KEYS if k not in obj]
    if missing:
        raise ValueError(f"trace missing keys: {', '.join(missing)}")
    if obj["schema"] != TRACE_SCHEMA:
        raise ValueError(
            f"unsupported trace schema {obj['schema']!r}, expected {TRACE_SCHEMA!r}"
        )
    for state in obj["states"]:
        state_missing = [k for k in _STATE_KEYS if k not in state]
        if state_missing:
            raise ValueError(
                f"state missing keys: {', '.join(state_missing)}"
            )
        for span in state["spans"]:
            span_missing = [k for k in _SPAN_KEYS if k not in span]
            if span_missing:
                raise ValueError(
                    f"span missing keys: {', '.join(span_missing)}"
                )
    return obj


def validate_trace(trace_dict: dict) -> None:
    """Check internal consistency: per-state aggregates must recompute
    exactly from the recorded span data."""
    obj = parse_trace(trace_dict)
    tau = obj["config"]["tau"]
    for state in obj["states"]:
        spans = state["spans"]
        if spans:
            expected = float(math.fsum(s["a"] for s in spans) / len(spans))
            if state["a_bar"] is None or not _close(state["a_bar"], expected):
                raise ValueError(
                    f"state {state['t']}: a_bar {state['a_bar']} does not "
                    f"recompute from spans ({expected})"
                )
        elif state["a_bar"] is not None:
            raise ValueError(
                f"state {state['t']}: a_bar must be null without spans"
            )
        for span in spans:
            if span["flagged"] != is_flagged(span["a"], span["h"], tau):
                raise ValueError(
                    f"state {state['t']}: span flag does not recompute"
                )
        expected_hset = sorted(
            {normalize_span(s["text"]) for s in spans if s["flagged"]}
        )
        if expected_hset != sorted(state["hset"]):
            raise ValueError(
                f"state {state['t']}: hset does not recompute from spans"
            )


def _close(a: float, b: float) -> bool:
    return a == b or abs(a - b) <= 1e-12
