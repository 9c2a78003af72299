"""Model backends: shared contract, seeded mock, remote HTTP client."""

from agenticsum.backend.base import (
    DOCUMENT_CLOSE,
    DOCUMENT_OPEN,
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
from agenticsum.backend.mock import MockBackend
from agenticsum.backend.remote import RemoteBackend, decode_weights

__all__ = [
    "DOCUMENT_CLOSE",
    "DOCUMENT_OPEN",
    "AttentionTensor",
    "DecodingParams",
    "EntailmentLabel",
    "EntailmentVerdict",
    "GenerationResult",
    "ModelBackend",
    "MockBackend",
    "RemoteBackend",
    "StepAttention",
    "TokenSpan",
    "decode_weights",
    "locate_document_block",
]
