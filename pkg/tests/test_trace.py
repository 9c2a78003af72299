"""Trace serialization, parsing, and self-consistency validation."""

from __future__ import annotations

import copy
import json

import pytest

from agenticsum.backend import MockBackend
from agenticsum.segmentation import Document
from agenticsum.supervisor import Mode, PipelineConfig, run_pipeline
from agenticsum.trace import (
    TRACE_SCHEMA,
    dumps,
    parse_trace,
    trace_to_dict,
    validate_trace,
)

NOTE = (
    "The patient presented with persistent headaches. "
    "Imaging revealed a small mass lesion. "
    "Biopsy confirmed a benign neurogenic tumor. "
    "Discharge planning was completed."
)

FABRICATED = "The patient has a history of deep vein thrombosis."


@pytest.fixture
def refinement_trace():
    backend = MockBackend(seed=7, inject_spans=(FABRICATED,))
    doc = Document.from_text("note-7", NOTE)
    return run_pipeline(doc, PipelineConfig(), backend)


class TestTraceToDict:
    def test_top_level_shape(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        assert obj["schema"] == TRACE_SCHEMA
        assert obj["doc_id"] == "note-7"
        assert obj["halt_reason"] == "empty_hset"
        assert obj["final_summary"] == refinement_trace.final_summary
        assert obj["config"]["tau"] == 0.5
        assert obj["manifest"]["backend"]["kind"] == "mock"

    def test_states_carry_span_records(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        assert [s["t"] for s in obj["states"]] == [0, 1]
        first = obj["states"][0]
        assert first["summary"]
        assert first["a_bar"] == pytest.approx(
            sum(s["a"] for s in first["spans"]) / len(first["spans"])
        )
        for span in first["spans"]:
            assert set(span) == {"text", "a", "h", "flagged", "grounding_source"}
        assert first["hset"] == sorted(first["hset"])

    def test_json_round_trip_is_byte_stable(self, refinement_trace):
        text = dumps(trace_to_dict(refinement_trace))
        again = dumps(parse_trace(text))
        assert again == text

    def test_canonical_encoding(self, refinement_trace):
        text = dumps(trace_to_dict(refinement_trace))
        assert ": " not in text  # compact separators
        obj = json.loads(text)
        assert list(obj) == sorted(obj)


class TestParseTrace:
    def test_accepts_dict_and_text(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        assert parse_trace(obj) == parse_trace(dumps(obj))

    def test_rejects_invalid_json(self):
        with pytest.raises(ValueError, match="not valid JSON"):
            parse_trace("{nope")

    def test_rejects_non_object(self):
        with pytest.raises(ValueError, match="JSON object"):
            parse_trace("[1, 2]")

    def test_rejects_missing_keys(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        del obj["final_summary"]
        with pytest.raises(ValueError, match="final_summary"):
            parse_trace(obj)

    def test_rejects_unknown_schema(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        obj["schema"] = "agenticsum-trace/2"
        with pytest.raises(ValueError, match="schema"):
            parse_trace(obj)

    def test_rejects_incomplete_span(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        del obj["states"][0]["spans"][0]["a"]
        with pytest.raises(ValueError, match="span missing"):
            parse_trace(obj)


class TestValidateTrace:
    def test_pipeline_output_validates(self, refinement_trace):
        validate_trace(trace_to_dict(refinement_trace))

    def test_vanilla_trace_validates(self):
        backend = MockBackend(seed=7)
        doc = Document.from_text("note", NOTE)
        trace = run_pipeline(doc, PipelineConfig(mode=Mode.VANILLA), backend)
        obj = trace_to_dict(trace)
        assert obj["states"][0]["a_bar"] is None
        assert obj["states"][0]["spans"] == []
        validate_trace(obj)

    def test_perturbed_a_bar_rejected(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        obj["states"][0]["a_bar"] += 1e-6
        with pytest.raises(ValueError, match="a_bar"):
            validate_trace(obj)

    def test_flipped_flag_rejected(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        span = obj["states"][0]["spans"][0]
        span["flagged"] = not span["flagged"]
        with pytest.raises(ValueError, match="flag"):
            validate_trace(obj)

    def test_hset_mismatch_rejected(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        obj["states"][0]["hset"] = ["some other identity"]
        with pytest.raises(ValueError, match="hset"):
            validate_trace(obj)

    def test_spurious_a_bar_on_empty_state_rejected(self, refinement_trace):
        obj = trace_to_dict(refinement_trace)
        obj["states"][0]["spans"] = []
        obj["states"][0]["hset"] = []
        with pytest.raises(ValueError, match="null"):
            validate_trace(obj)

    def test_flag_recompute_uses_config_tau(self, refinement_trace):
        # Raising tau after the fact invalidates recorded flags.
        obj = copy.deepcopy(trace_to_dict(refinement_trace))
        unflagged = [
            s for s in obj["states"][0]["spans"] if not s["flagged"]
        ]
        assert unflagged
        obj["config"]["tau"] = 0.999999
        with pytest.raises(ValueError):
            validate_trace(obj)
