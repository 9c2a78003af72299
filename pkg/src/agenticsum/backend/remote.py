"""HTTP client for a model sidecar speaking the /v1 wire protocol.

Endpoints:
    POST /v1/generate            {prompt, max_new_tokens, temperature,
                                  return_attentions, encoding}
    POST /v1/sentence_attention  {text, encoding}
    POST /v1/entail              {document, span}
    POST /v1/revise              {document, summary, flagged_spans}
    GET  /v1/health              -> {status, model_id, attention_layer}

Attention payloads are either nested JSON lists or, when the server
honors the advertised "b64f32" encoding, little-endian float32 buffers
as {"encoding": "b64f32", "shape": [...], "data": "<base64>"}.
"""

from __future__ import annotations

import base64

import httpx
import numpy as np

from agenticsum.backend.base import (
    AttentionTensor,
    DecodingParams,
    EntailmentLabel,
    EntailmentVerdict,
    GenerationResult,
    ModelBackend,
    StepAttention,
    TokenSpan,
)
from agenticsum.errors import CapacityError, TransportError, VerdictParseError

_WIRE_ENCODING = "b64f32"


def decode_weights(obj) -> np.ndarray:
    """Decode a wire attention payload (nested lists or b64f32 buffer)."""
    if isinstance(obj, dict):
        if obj.get("encoding") != _WIRE_ENCODING:
            raise TransportError(
                f"unknown attention encoding {obj.get('encoding')!r}"
            )
        try:
            shape = tuple(int(d) for d in obj["shape"])
            buf = base64.b64decode(obj["data"])
            arr = np.frombuffer(buf, dtype="<f4").astype(np.float64)
            return arr.reshape(shape)
        except (KeyError, ValueError, TypeError) as exc:
            raise TransportError(f"malformed {_WIRE_ENCODING} payload: {exc}")
    try:
        return np.asarray(obj, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise TransportError(f"malformed attention payload: {exc}")


def _parse_label(value) -> EntailmentLabel:
    if isinstance(value, str):
        folded = " ".join(value.split()).casefold()
        for label in EntailmentLabel:
            if folded == label.value.casefold():
                return label
    raise VerdictParseError(f"unrecognized entailment label {value!r}", raw=value)


class RemoteBackend(ModelBackend):
    """Client-side adapter satisfying the same contract as the mock."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(
            base_url=self.base_url, timeout=timeout
        )

    # -- transport ------------------------------------------------------

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        try:
            response = self._client.request(method, path, json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"{method} {path} failed: {exc}") from exc
        if response.status_code == 413:
            raise CapacityError(f"{path}: {response.text}")
        if response.status_code >= 400:
            raise TransportError(
                f"{method} {path} returned {response.status_code}: "
                f"{response.text[:500]}"
            )
        try:
            body = response.json()
        except ValueError as exc:
            raise TransportError(f"{path} returned non-JSON body") from exc
        if not isinstance(body, dict):
            raise TransportError(f"{path} returned a non-object body")
        return body

    def _post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)

    # -- operations -----------------------------------------------------

    def generate(self, prompt: str, params: DecodingParams) -> GenerationResult:
        body = self._post(
            "/v1/generate",
            {
                "prompt": prompt,
                "max_new_tokens": params.max_new_tokens,
                "temperature": params.temperature,
                "return_attentions": True,
                "encoding": _WIRE_ENCODING,
            },
        )
        try:
            text = body["text"]
            tokens = tuple(
                TokenSpan(t["text"], int(t["start"]), int(t["end"]))
                for t in body["tokens"]
            )
            input_positions = tuple(int(p) for p in body["input_positions"])
            steps = tuple(
                StepAttention(
                    step=int(entry["step"]),
                    weights=decode_weights(entry["heads"]),
                    input_positions=input_positions,
                )
                for entry in body["step_attentions"]
            )
            if "context_length" in body:
                context_length = int(body["context_length"])
            else:
                # L_1 = context_length for the first generated token
                context_length = steps[0].weights.shape[1] if steps else 0
            return GenerationResult(
                text=text,
                tokens=tokens,
                step_attentions=steps,
                input_positions=input_positions,
                context_length=context_length,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed /v1/generate response: {exc}") from exc

    def sentence_attention(self, text: str) -> AttentionTensor:
        body = self._post(
            "/v1/sentence_attention",
            {"text": text, "encoding": _WIRE_ENCODING},
        )
        try:
            weights = decode_weights(body["weights"])
            tensor = AttentionTensor(weights=weights)
            if tensor.heads != int(body["heads"]) or tensor.tokens != int(
                body["tokens"]
            ):
                raise ValueError("declared shape disagrees with payload")
            return tensor
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(
                f"malformed /v1/sentence_attention response: {exc}"
            ) from exc

    def entail(self, document: str, span: str) -> EntailmentVerdict:
        body = self._post("/v1/entail", {"document": document, "span": span})
        label = _parse_label(body.get("label"))
        spans = body.get("problematic_spans") or []
        if not isinstance(spans, list):
            raise VerdictParseError("problematic_spans must be a list", raw=body)
        score = body.get("score")
        try:
            return EntailmentVerdict(
                label=label,
                explanation=str(body.get("explanation", "")),
                problematic_spans=tuple(str(s) for s in spans),
                raw_score=None if score is None else float(score),
            )
        except ValueError as exc:
            raise VerdictParseError(str(exc), raw=body) from exc

    def revise(self, document: str, summary: str, flagged_spans: list[str]) -> str:
        if not flagged_spans:
            raise ValueError("revise requires at least one flagged span")
        body = self._post(
            "/v1/revise",
            {
                "document": document,
                "summary": summary,
                "flagged_spans": list(flagged_spans),
            },
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise TransportError("/v1/revise response lacks a text field")
        return text

    def health(self) -> dict:
        return self._request("GET", "/v1/health")

    def describe(self) -> dict:
        info: dict = {"kind": "remote", "url": self.base_url}
        try:
            info.update(self.health())
        except TransportError:
            info["status"] = "unreachable"
        return info

    def close(self) -> None:
        self._client.close()
