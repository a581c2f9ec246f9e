"""Corpus loading, normalization to the canonical sample schema, and dedup.

Input corpora are line-delimited JSON in one of three accepted shapes,
selected by ``schema_hint``:

* ``messages_json``:     {"messages": [{"role": ..., "content": ...}, ...], ...}
* ``prompt_completion``: {"prompt": ..., "completion": ...}
* ``qa_pair``:           {"question": ..., "answer": ...}

All shapes accept optional top-level fields ``source``, ``language``,
``task_type``, ``difficulty``, ``purity_score``, ``provenance_flags``,
``lineage`` and ``interaction_type``; the canonical sample JSONL emitted by
this package round-trips through ``messages_json``.

Malformed records never abort a stream: they are skipped and counted.
"""

from __future__ import annotations

import hashlib
import json
import logging
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .tokencount import ReferenceTokenizer, TokenizerAdapter

logger = logging.getLogger(__name__)

DEFAULT_LONG_PROMPT_THRESHOLD = 2_048

SCHEMA_HINTS = ("messages_json", "prompt_completion", "qa_pair")

# provenance flag values
FLAG_TRANSLATED = "translated"
FLAG_THINK_AUGMENTED = "think_augmented"


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class Language(str, Enum):
    EN = "en"
    FR = "fr"
    UNKNOWN = "unknown"


class InteractionType(str, Enum):
    SINGLE_TURN = "single_turn"
    MULTI_TURN = "multi_turn"
    LONG_CONTEXT = "long_context"


class MalformedRecordError(ValueError):
    """Raised when a raw record fails schema validation."""


class InputError(RuntimeError):
    """Fatal input problem (unreadable path, unknown schema hint)."""


def normalize_text(text: str) -> str:
    """Unicode NFC plus outer whitespace trim. Case is preserved."""
    return unicodedata.normalize("NFC", text).strip()


@dataclass
class Message:
    role: Role
    content: str

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}


@dataclass
class Sample:
    """One training example in canonical form."""

    id: str
    source: str
    language: Language
    interaction_type: InteractionType
    messages: list[Message]
    question_text: str
    token_count: int
    task_type: str | None = None
    difficulty: str | None = None
    purity_score: float | None = None
    provenance_flags: set[str] = field(default_factory=set)
    lineage: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "language": self.language.value,
            "interaction_type": self.interaction_type.value,
            "messages": [m.to_dict() for m in self.messages],
            "question_text": self.question_text,
            "token_count": self.token_count,
            "task_type": self.task_type,
            "difficulty": self.difficulty,
            "purity_score": self.purity_score,
            "provenance_flags": sorted(self.provenance_flags),
            "lineage": self.lineage,
        }


def serialize_for_counting(messages: Iterable[Message]) -> str:
    """Canonical text whose token count defines ``Sample.token_count``."""
    return "\n".join(f"{m.role.value}: {m.content}" for m in messages)


def count_sample_tokens(messages: Iterable[Message], tokenizer: TokenizerAdapter) -> int:
    return tokenizer.count(serialize_for_counting(messages))


def compute_sample_id(question_text: str, messages: Iterable[Message]) -> str:
    """Content hash over the normalized question and all message contents in order."""
    h = hashlib.sha256()
    h.update(normalize_text(question_text).encode("utf-8"))
    for m in messages:
        h.update(b"\x1f")
        h.update(normalize_text(m.content).encode("utf-8"))
    return h.hexdigest()[:16]


def _validate_messages(messages: list[Message]) -> None:
    if not messages:
        raise MalformedRecordError("no messages")
    for m in messages:
        if not m.content.strip():
            raise MalformedRecordError("empty message content")
    idx = 0
    if messages[0].role is Role.SYSTEM:
        idx = 1
    rest = messages[idx:]
    if not rest or rest[0].role is not Role.USER:
        raise MalformedRecordError("no user message")
    for i, m in enumerate(rest):
        expected = Role.USER if i % 2 == 0 else Role.ASSISTANT
        if m.role is not expected:
            raise MalformedRecordError(f"roles do not alternate at position {idx + i}")
    if rest[-1].role is not Role.ASSISTANT:
        raise MalformedRecordError("conversation does not end with an assistant turn")


def infer_interaction_type(
    messages: list[Message],
    question_text: str,
    tokenizer: TokenizerAdapter,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
) -> InteractionType:
    """More than one user turn is multi-turn; a single long question is long-context."""
    user_turns = sum(1 for m in messages if m.role is Role.USER)
    if user_turns > 1:
        return InteractionType.MULTI_TURN
    if tokenizer.count(question_text) > long_prompt_threshold:
        return InteractionType.LONG_CONTEXT
    return InteractionType.SINGLE_TURN


def build_sample(
    messages: list[Message],
    source: str,
    tokenizer: TokenizerAdapter,
    *,
    language: Language = Language.UNKNOWN,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
    interaction_type: InteractionType | None = None,
    task_type: str | None = None,
    difficulty: str | None = None,
    purity_score: float | None = None,
    provenance_flags: set[str] | None = None,
    lineage: str | None = None,
) -> Sample:
    """Validate messages and derive the computed sample fields."""
    messages = [Message(m.role, normalize_text(m.content)) for m in messages]
    _validate_messages(messages)
    question_text = next(m.content for m in messages if m.role is Role.USER)
    if interaction_type is None:
        interaction_type = infer_interaction_type(
            messages, question_text, tokenizer, long_prompt_threshold
        )
    return Sample(
        id=compute_sample_id(question_text, messages),
        source=source,
        language=language,
        interaction_type=interaction_type,
        messages=messages,
        question_text=question_text,
        token_count=count_sample_tokens(messages, tokenizer),
        task_type=task_type,
        difficulty=difficulty,
        purity_score=purity_score,
        provenance_flags=set(provenance_flags or ()),
        lineage=lineage,
    )


def _parse_messages(raw: dict) -> list[Message]:
    msgs = raw.get("messages")
    if not isinstance(msgs, list) or not msgs:
        raise MalformedRecordError("missing messages list")
    out = []
    for m in msgs:
        if not isinstance(m, dict):
            raise MalformedRecordError("message is not an object")
        try:
            role = Role(m.get("role"))
        except ValueError:
            raise MalformedRecordError(f"bad role {m.get('role')!r}") from None
        content = m.get("content")
        if not isinstance(content, str):
            raise MalformedRecordError("message content is not a string")
        out.append(Message(role, content))
    return out


def _pair_messages(raw: dict, q_key: str, a_key: str) -> list[Message]:
    question = raw.get(q_key)
    answer = raw.get(a_key)
    if not isinstance(question, str) or not isinstance(answer, str):
        raise MalformedRecordError(f"missing {q_key}/{a_key} strings")
    return [Message(Role.USER, question), Message(Role.ASSISTANT, answer)]


def normalize_record(
    raw: dict,
    schema_hint: str,
    *,
    default_source: str,
    tokenizer: TokenizerAdapter,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
) -> Sample:
    """Turn one raw record into a canonical Sample, or raise MalformedRecordError."""
    if not isinstance(raw, dict):
        raise MalformedRecordError("record is not a JSON object")
    if schema_hint == "messages_json":
        messages = _parse_messages(raw)
    elif schema_hint == "prompt_completion":
        messages = _pair_messages(raw, "prompt", "completion")
    elif schema_hint == "qa_pair":
        messages = _pair_messages(raw, "question", "answer")
    else:
        raise InputError(f"unknown schema_hint: {schema_hint!r}")

    language = Language.UNKNOWN
    if raw.get("language") in (Language.EN.value, Language.FR.value):
        language = Language(raw["language"])
    interaction_type = None
    if raw.get("interaction_type") is not None:
        try:
            interaction_type = InteractionType(raw["interaction_type"])
        except ValueError:
            raise MalformedRecordError(
                f"bad interaction_type {raw['interaction_type']!r}"
            ) from None
    purity = raw.get("purity_score")
    if purity is not None:
        purity = float(purity)
        if not 0.0 <= purity <= 1.0:
            raise MalformedRecordError(f"purity_score out of range: {purity}")

    return build_sample(
        messages,
        source=str(raw.get("source") or default_source),
        tokenizer=tokenizer,
        language=language,
        long_prompt_threshold=long_prompt_threshold,
        interaction_type=interaction_type,
        task_type=raw.get("task_type"),
        difficulty=raw.get("difficulty"),
        purity_score=purity,
        provenance_flags=set(raw.get("provenance_flags") or ()),
        lineage=raw.get("lineage"),
    )


@dataclass
class StreamCounters:
    skipped: int = 0
    duplicates: int = 0
    contaminated: int = 0


class CorpusStream:
    """An ordered stream of Samples plus running drop counters.

    The counters are shared across derived streams (dedup, decontaminate) so
    a single bookkeeping object describes the whole chain.
    """

    def __init__(self, samples: Iterable[Sample], counters: StreamCounters | None = None):
        self._samples = samples
        self.counters = counters or StreamCounters()

    def __iter__(self) -> Iterator[Sample]:
        return iter(self._samples)

    @property
    def skipped(self) -> int:
        return self.counters.skipped

    def collect(self) -> list[Sample]:
        return list(self)


def load_corpus(
    path: str | Path,
    schema_hint: str,
    *,
    source: str | None = None,
    tokenizer: TokenizerAdapter | None = None,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
) -> CorpusStream:
    """Stream canonical Samples from a JSONL file, skipping malformed records."""
    if schema_hint not in SCHEMA_HINTS:
        raise InputError(f"unknown schema_hint: {schema_hint!r}")
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    tokenizer = tokenizer or ReferenceTokenizer()
    default_source = source or path.stem
    counters = StreamCounters()

    def generate() -> Iterator[Sample]:
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    yield normalize_record(
                        raw,
                        schema_hint,
                        default_source=default_source,
                        tokenizer=tokenizer,
                        long_prompt_threshold=long_prompt_threshold,
                    )
                except (json.JSONDecodeError, MalformedRecordError) as exc:
                    counters.skipped += 1
                    logger.debug("skipping %s:%d: %s", path, lineno, exc)

    return CorpusStream(generate(), counters)


def stream_of(samples: Iterable[Sample]) -> CorpusStream:
    return CorpusStream(samples)


def dedup(stream: CorpusStream) -> CorpusStream:
    """Keep the first sample per normalized question text, preserving order."""
    counters = stream.counters

    def generate() -> Iterator[Sample]:
        seen: set[str] = set()
        for sample in stream:
            key = normalize_text(sample.question_text)
            if key in seen:
                counters.duplicates += 1
                continue
            seen.add(key)
            yield sample

    return CorpusStream(generate(), counters)


def decontaminate(stream: CorpusStream, benchmark_questions: set[str]) -> CorpusStream:
    """Drop samples whose normalized question appears in the benchmark set."""
    counters = stream.counters
    blocked = {normalize_text(q) for q in benchmark_questions}

    def generate() -> Iterator[Sample]:
        for sample in stream:
            if normalize_text(sample.question_text) in blocked:
                counters.contaminated += 1
                continue
            yield sample

    return CorpusStream(generate(), counters)


def sample_from_dict(raw: dict, tokenizer: TokenizerAdapter) -> Sample:
    return normalize_record(
        raw, "messages_json", default_source=str(raw.get("source", "unknown")), tokenizer=tokenizer
    )


def write_samples_jsonl(samples: Iterable[Sample], path: str | Path) -> int:
    """Write canonical sample JSONL with stable field order. Returns line count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_samples_jsonl(path: str | Path, tokenizer: TokenizerAdapter | None = None) -> list[Sample]:
    tokenizer = tokenizer or ReferenceTokenizer()
    stream = load_corpus(path, "messages_json", tokenizer=tokenizer)
    samples = stream.collect()
    if stream.skipped:
        raise InputError(f"{stream.skipped} malformed lines in canonical file {path}")
    return samples
