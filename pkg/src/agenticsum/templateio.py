"""Versioned prompt-template assets and substitution.

Templates ship as package data and are addressed by logical name; the
active version of each is recorded into run manifests so traces stay
attributable to the exact prompt text that produced them.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Mapping

from agenticsum.backend.base import DOCUMENT_CLOSE, DOCUMENT_OPEN

TEMPLATE_VERSIONS: dict[str, str] = {
    "draft": "v1",
    "entailment": "v1",
    "fix": "v1",
    "judge": "v1",
}


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    try:
        version = TEMPLATE_VERSIONS[name]
    except KeyError:
        raise KeyError(f"unknown template {name!r}") from None
    path = resources.files("agenticsum.templates").joinpath(f"{name}_{version}.txt")
    return path.read_text(encoding="utf-8")


def render(name: str, mapping: Mapping[str, str]) -> str:
    """Substitute {slot} placeholders in a single pass.

    Single-pass substitution keeps the operation byte-stable even when a
    value itself contains brace-delimited text.
    """
    template = load_template(name)
    pattern = re.compile(
        "|".join(re.escape("{" + key + "}") for key in sorted(mapping))
    )
    return pattern.sub(lambda m: mapping[m.group(0)[1:-1]], template)


def build_draft_prompt(document_text: str) -> str:
    """Prompt asking for an initial summary grounded in ``document_text``.

    The document sits between DOCUMENT_OPEN/DOCUMENT_CLOSE markers so
    backends can report source token positions.
    """
    prompt = render("draft", {"document": document_text})
    assert DOCUMENT_OPEN in prompt and DOCUMENT_CLOSE in prompt
    return prompt
