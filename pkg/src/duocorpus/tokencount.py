"""Token counting adapters.

Counting is pluggable so tests and desk runs stay dependency-free while
production runs can load the actual model tokenizer. Both adapters honor
the same contract: deterministic, ``count("") == 0``, and concatenation
never yields more than the sum of the parts plus a small seam tolerance.
"""

from __future__ import annotations

import re
from typing import Protocol, runtime_checkable


@runtime_checkable
class TokenizerAdapter(Protocol):
    name: str

    def count(self, text: str) -> int: ...


_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class ReferenceTokenizer:
    """Whitespace + punctuation splitting. No model file, fully deterministic."""

    name = "reference"

    def count(self, text: str) -> int:
        return len(_TOKEN_RE.findall(text))

    def tokens(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text)


class TokenizerFileAdapter:
    """Counts with an external tokenizer definition file (HF ``tokenizer.json``).

    Requires the ``tokenizers`` package; import is deferred so the default
    install never needs it.
    """

    def __init__(self, path: str):
        from tokenizers import Tokenizer

        self._tok = Tokenizer.from_file(str(path))
        self.name = f"file:{path}"

    def count(self, text: str) -> int:
        if not text:
            return 0
        return len(self._tok.encode(text).ids)


def make_tokenizer(spec: str) -> TokenizerAdapter:
    """Build an adapter from a config string: ``reference`` or ``file:<path>``."""
    if spec == "reference":
        return ReferenceTokenizer()
    if spec.startswith("file:"):
        return TokenizerFileAdapter(spec[len("file:"):])
    raise ValueError(f"unknown tokenizer spec: {spec!r}")
