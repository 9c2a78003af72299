"""Attention-guided multi-agent summarization with span-level repair.

The pipeline compresses a document by attention salience, drafts a
summary, detects weakly grounded or non-entailed spans, and repairs
them under supervised halting rules. Backends are swappable: a seeded
deterministic mock for offline work and a remote HTTP sidecar client.
"""

from agenticsum.segmentation import Document, SentenceUnit, split_sentences
from agenticsum.supervisor import (
    HaltReason,
    Mode,
    PipelineConfig,
    RefinementState,
    RefinementTrace,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "Document",
    "HaltReason",
    "Mode",
    "PipelineConfig",
    "RefinementState",
    "RefinementTrace",
    "SentenceUnit",
    "run_pipeline",
    "split_sentences",
    "__version__",
]
