"""Salience scoring and top-k sentence compression."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from agenticsum.backend import AttentionTensor, MockBackend
from agenticsum.errors import ConfigError, EmptyDocumentError
from agenticsum.focus import (
    SCORER_NAMES,
    compress,
    received_token_scores,
    salience_score,
    salience_score_received,
    target_keep_count,
)
from agenticsum.segmentation import Document


def salience_brute(weights: np.ndarray) -> float:
    """Triple-sum definition, written out term by term."""
    h_count, t_count, _ = weights.shape
    total = 0.0
    for h in range(h_count):
        for i in range(t_count):
            for j in range(t_count):
                total += weights[h, i, j]
    return total / (h_count * t_count)


class TestSalienceScore:
    def test_hand_case(self):
        attn = AttentionTensor(np.array([[[0.9, 0.1], [0.4, 0.6]]]))
        assert salience_score(attn) == pytest.approx(1.0, abs=1e-12)

    def test_row_stochastic_degeneracy(self):
        # Every row summing to one forces the score to exactly H*T/(H*T).
        rng = np.random.default_rng(2)
        for _ in range(100):
            h, t = rng.integers(1, 5), rng.integers(1, 9)
            raw = rng.random((h, t, t)) + 1e-3
            raw /= raw.sum(axis=-1, keepdims=True)
            score = salience_score(AttentionTensor(raw))
            assert score == pytest.approx(1.0, abs=1e-9)

    def test_matches_brute_sum_on_unnormalized_tensors(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            h, t = rng.integers(1, 4), rng.integers(1, 7)
            raw = rng.random((h, t, t))
            attn = AttentionTensor(raw)
            assert salience_score(attn) == pytest.approx(
                salience_brute(raw), abs=1e-12
            )


class TestReceivedScores:
    def test_uniform_attention_gives_uniform_columns(self):
        t = 3
        attn = AttentionTensor(np.full((2, t, t), 1.0 / t))
        scores = received_token_scores(attn)
        np.testing.assert_allclose(scores, [1 / 3] * 3, atol=1e-12)
        assert salience_score_received(attn) == pytest.approx(1 / 3)

    def test_single_sink_column_concentrates_mass(self):
        t = 4
        weights = np.zeros((2, t, t))
        weights[:, :, 0] = 1.0
        attn = AttentionTensor(weights)
        scores = received_token_scores(attn)
        assert scores[0] == pytest.approx(1.0)
        np.testing.assert_allclose(scores[1:], 0.0, atol=1e-12)

    def test_discriminates_on_mock_attention(self):
        attn = MockBackend(seed=6).sentence_attention("alpha beta gamma")
        scores = received_token_scores(attn)
        assert len(set(np.round(scores, 12))) > 1


class TestTargetKeepCount:
    def test_fraction_oracle(self):
        for m in range(1, 30):
            for num in range(1, 11):
                r = num / 10
                exact = int(Fraction(num, 10) * m)
                expected = max(1, min(exact, m))
                assert target_keep_count(r, m) == expected, (r, m)

    def test_binary_representation_edge(self):
        # 0.7 * 10 evaluates below 7.0 in binary floats; the guard keeps
        # the decimal-exact answer.
        assert target_keep_count(0.7, 10) == 7

    def test_floor_not_round(self):
        assert target_keep_count(0.6, 4) == 2
        assert target_keep_count(0.5, 5) == 2

    def test_lower_clamp(self):
        assert target_keep_count(0.1, 3) == 1

    def test_identity_ratio(self):
        assert target_keep_count(1.0, 7) == 7

    def test_invalid_ratio(self):
        for r in (0.0, -0.5, 1.5):
            with pytest.raises(ConfigError):
                target_keep_count(r, 5)

    def test_empty_document(self):
        with pytest.raises(EmptyDocumentError):
            target_keep_count(0.5, 0)


NOTE = (
    "The patient presented with fever. "
    "Blood cultures were drawn on admission. "
    "Antibiotics were started empirically. "
    "Fever resolved within two days. "
    "She was discharged home in stable condition."
)


class TestCompress:
    def test_kept_in_document_order(self):
        doc = Document.from_text("note", NOTE)
        comp = compress(doc, 0.6, MockBackend(seed=1), scorer="received")
        assert comp.k == 3
        assert list(comp.kept_indices) == sorted(comp.kept_indices)
        assert len(comp.kept) == 3

    def test_min_kept_score_beats_max_dropped(self):
        doc = Document.from_text("note", NOTE)
        comp = compress(doc, 0.6, MockBackend(seed=1), scorer="received")
        kept = set(comp.kept_indices)
        kept_scores = [comp.scores[j] for j in kept]
        dropped_scores = [
            comp.scores[j] for j in range(len(doc.sentences)) if j not in kept
        ]
        assert min(kept_scores) >= max(dropped_scores)

    def test_kept_sets_nest_as_ratio_grows(self):
        doc = Document.from_text("note", NOTE)
        backend = MockBackend(seed=1)
        previous: set[int] = set()
        for r in (0.2, 0.4, 0.6, 0.8, 1.0):
            kept = set(compress(doc, r, backend, scorer="received").kept_indices)
            assert previous <= kept
            previous = kept

    def test_identity_ratio_reproduces_text(self):
        text = "  Leading space. Middle one.\n\nTrailing block.  "
        doc = Document.from_text("note", text)
        comp = compress(doc, 1.0, MockBackend(seed=1))
        assert comp.text == text

    def test_elision_collapses_to_newline(self):
        doc = Document.from_text("note", "Aa bb. Cc dd. Ee ff.")
        comp = compress(doc, 0.4, MockBackend(seed=1), scorer="received")
        assert comp.k == 1
        assert "\n" not in comp.text  # single survivor, no elisions joined
        comp2 = compress(doc, 0.7, MockBackend(seed=1), scorer="received")
        if comp2.kept_indices == (0, 2):
            assert comp2.text == "Aa bb.\nEe ff."

    def test_verbatim_scorer_ties_keep_leading_sentences(self):
        # The degenerate scorer gives every sentence 1.0, so the index
        # tie-break keeps a prefix of the document.
        doc = Document.from_text("note", NOTE)
        comp = compress(doc, 0.6, MockBackend(seed=1), scorer="verbatim")
        assert comp.kept_indices == (0, 1, 2)
        assert all(s == pytest.approx(1.0, abs=1e-9) for s in comp.scores)

    def test_unknown_scorer_rejected(self):
        doc = Document.from_text("note", NOTE)
        with pytest.raises(ConfigError):
            compress(doc, 0.5, MockBackend(seed=1), scorer="middle-out")
        assert set(SCORER_NAMES) == {"verbatim", "received"}


@settings(max_examples=60, deadline=None)
@given(
    weights=npst.arrays(
        dtype=np.float64,
        shape=st.tuples(
            st.integers(1, 3), st.integers(1, 6), st.integers(1, 6)
        ).map(lambda s: (s[0], s[1], s[1])),
        elements=st.floats(0.0, 4.0, allow_nan=False),
    )
)
def test_salience_property_matches_brute(weights):
    attn = AttentionTensor(weights)
    assert salience_score(attn) == pytest.approx(salience_brute(weights), abs=1e-9)
    received = received_token_scores(attn)
    assert received.shape == (weights.shape[1],)
    assert salience_score_received(attn) == pytest.approx(received.max(), abs=0)
