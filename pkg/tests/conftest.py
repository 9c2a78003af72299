"""Shared fixtures: sample clinical texts and a call-recording backend."""

from __future__ import annotations

import pytest

from agenticsum.backend.base import ModelBackend
from agenticsum.segmentation import Document

ONCOLOGY_NOTE = """Patient was in good health until 10 days ago.
She developed persistent headaches and intermittent blurred vision.
Imaging showed a small mass lesion in the posterior fossa.
Pathology later confirmed a benign neurogenic tumor.
She was discharged with outpatient follow-up scheduled."""

PSYCH_NOTE = """Patient admitted with persistent nausea and poor oral intake.
He reports that symptoms began after a recent change in medication.
Electroconvulsive therapy was discussed with the treatment team.
He was started on a scheduled antiemetic regimen.
Vital signs remained stable throughout the admission."""

HEADER_NOTE = """<SEX> F
<SERVICE> SURGERY
<ALLERGIES> No known drug allergies
The patient has a long history of GERD. She underwent elective repair.
Recovery was uneventful. She was discharged home on day two."""


@pytest.fixture
def oncology_doc() -> Document:
    return Document.from_text("oncology", ONCOLOGY_NOTE)


@pytest.fixture
def psych_doc() -> Document:
    return Document.from_text("psych", PSYCH_NOTE)


@pytest.fixture
def header_doc() -> Document:
    return Document.from_text("header", HEADER_NOTE)


class RecordingBackend(ModelBackend):
    """Delegating wrapper that logs every operation call."""

    def __init__(self, inner: ModelBackend):
        self.inner = inner
        self.calls: list[tuple] = []

    def generate(self, prompt, params):
        self.calls.append(("generate", prompt))
        return self.inner.generate(prompt, params)

    def sentence_attention(self, text):
        self.calls.append(("sentence_attention", text))
        return self.inner.sentence_attention(text)

    def entail(self, document, span):
        self.calls.append(("entail", document, span))
        return self.inner.entail(document, span)

    def revise(self, document, summary, flagged_spans):
        self.calls.append(("revise", document, summary, tuple(flagged_spans)))
        return self.inner.revise(document, summary, flagged_spans)

    def describe(self):
        return self.inner.describe()

    def count(self, op: str) -> int:
        return sum(1 for call in self.calls if call[0] == op)
