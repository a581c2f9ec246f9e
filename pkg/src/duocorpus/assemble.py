"""Final dataset rendering, emission, and composition accounting.

Assistant turns are rendered in the canonical think-delimited form
``<think>\\n{chain}\\n</think>\\n{solution}``; the delimiters' whitespace is
fixed so emission is checksum-stable and render/parse round-trips are exact.
The manifest counts samples and tokens per (language, source,
interaction_type) group; grand totals are sums of the rows by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import (
    InteractionType,
    Language,
    Message,
    Role,
    Sample,
    build_sample,
    normalize_text,
    serialize_for_counting,
)
from .reflection import THINK_CLOSE, THINK_OPEN, extract_think_span
from .tokencount import TokenizerAdapter

EMIT_FORMATS = ("chat_jsonl", "plain_jsonl")


class AssemblyError(RuntimeError):
    pass


def split_assistant_content(content: str) -> tuple[str, str]:
    """Recover (chain, solution) from an assistant turn.

    Requires exactly one think span, nothing but whitespace before it, and a
    non-empty solution. Only the single framing newline on each side of the
    chain and before the solution is consumed; inner bytes are preserved.
    """
    if content.count(THINK_OPEN) != 1 or content.count(THINK_CLOSE) != 1:
        raise ValueError("assistant turn must contain exactly one think span")
    split = extract_think_span(content)
    if not split.terminated or split.think is None:
        raise ValueError("think span is not terminated")
    pre = content[: content.find(THINK_OPEN)]
    if pre.strip():
        raise ValueError("text precedes the think span")
    chain = split.think
    chain = chain[1:] if chain.startswith("\n") else chain
    chain = chain[:-1] if chain.endswith("\n") else chain
    after = content[content.find(THINK_CLOSE) + len(THINK_CLOSE):]
    solution = after[1:] if after.startswith("\n") else after
    if not solution.strip():
        raise ValueError("solution text is empty")
    return chain, solution


def render_assistant_content(chain: str, solution: str) -> str:
    return f"{THINK_OPEN}\n{chain}\n{THINK_CLOSE}\n{solution}"


@dataclass
class TrainingRecord:
    messages: list[Message]
    language: Language
    interaction_type: InteractionType
    source: str
    provenance_flags: set[str] = field(default_factory=set)

    def to_chat_dict(self) -> dict:
        return {
            "messages": [m.to_dict() for m in self.messages],
            "meta": {
                "language": self.language.value,
                "source": self.source,
                "interaction_type": self.interaction_type.value,
                "provenance_flags": sorted(self.provenance_flags),
            },
        }


def render_training_record(sample: Sample) -> TrainingRecord:
    """Canonicalize every assistant turn of a sample into a TrainingRecord."""
    messages = []
    for m in sample.messages:
        if m.role is Role.ASSISTANT:
            try:
                chain, solution = split_assistant_content(m.content)
            except ValueError as exc:
                raise AssemblyError(f"sample {sample.id}: {exc}") from None
            messages.append(Message(m.role, render_assistant_content(chain, solution)))
        else:
            messages.append(m)
    return TrainingRecord(
        messages=messages,
        language=sample.language,
        interaction_type=sample.interaction_type,
        source=sample.source,
        provenance_flags=set(sample.provenance_flags),
    )


def canonicalize_sample(sample: Sample, tokenizer: TokenizerAdapter) -> Sample:
    """Rewrite a sample's assistant turns in canonical think form.

    Already-canonical samples come back unchanged (same id); otherwise the
    derived fields are recomputed over the new bytes.
    """
    record = render_training_record(sample)
    if all(a.content == b.content for a, b in zip(record.messages, sample.messages)):
        return sample
    return build_sample(
        record.messages,
        source=sample.source,
        tokenizer=tokenizer,
        language=sample.language,
        interaction_type=sample.interaction_type,
        task_type=sample.task_type,
        difficulty=sample.difficulty,
        purity_score=sample.purity_score,
        provenance_flags=set(sample.provenance_flags),
        lineage=sample.lineage,
    )


def check_unique(samples: Iterable[Sample]) -> None:
    """Final duplicate guard over ids and normalized question texts."""
    seen_ids: set[str] = set()
    seen_questions: set[str] = set()
    for s in samples:
        if s.id in seen_ids:
            raise AssemblyError(f"duplicate sample id {s.id}")
        key = normalize_text(s.question_text)
        if key in seen_questions:
            raise AssemblyError(f"duplicate question text in sample {s.id}")
        seen_ids.add(s.id)
        seen_questions.add(key)


# ---------------------------------------------------------------------------
# manifest

@dataclass
class ManifestRow:
    language: str
    source: str
    interaction_type: str
    sample_count: int
    token_total: int

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "source": self.source,
            "interaction_type": self.interaction_type,
            "sample_count": self.sample_count,
            "token_total": self.token_total,
        }


@dataclass
class DatasetManifest:
    rows: list[ManifestRow]
    checksums: dict[str, str] = field(default_factory=dict)

    @property
    def total_samples(self) -> int:
        return sum(r.sample_count for r in self.rows)

    @property
    def total_tokens(self) -> int:
        return sum(r.token_total for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "total_samples": self.total_samples,
            "total_tokens": self.total_tokens,
            "checksums": dict(sorted(self.checksums.items())),
        }

    def table(self) -> str:
        """Aligned plain-text composition table."""
        header = ("Language", "Source", "Type", "#Samples", "Total tokens")
        body = [
            (
                r.language,
                r.source,
                r.interaction_type,
                f"{r.sample_count:,}",
                f"{r.token_total:,}",
            )
            for r in self.rows
        ]
        totals = ("Total", "-", "-", f"{self.total_samples:,}", f"{self.total_tokens:,}")
        widths = [
            max(len(row[i]) for row in [header, *body, totals]) for i in range(5)
        ]

        def fmt(row: tuple[str, ...]) -> str:
            return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()

        rule = "-" * (sum(widths) + 8)
        return "\n".join([fmt(header), rule, *map(fmt, body), rule, fmt(totals)])


def build_manifest(
    records: Sequence[TrainingRecord],
    tokenizer: TokenizerAdapter,
) -> DatasetManifest:
    """One row per (language, source, interaction_type), sorted lexicographically."""
    groups: dict[tuple[str, str, str], list[int]] = {}
    for record in records:
        key = (record.language.value, record.source, record.interaction_type.value)
        count = tokenizer.count(serialize_for_counting(record.messages))
        groups.setdefault(key, []).append(count)
    rows = [
        ManifestRow(lang, source, itype, len(counts), sum(counts))
        for (lang, source, itype), counts in sorted(groups.items())
    ]
    return DatasetManifest(rows)


def write_manifest(manifest: DatasetManifest, json_path: str | Path, text_path: str | Path | None = None) -> None:
    json_path = Path(json_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(
        json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    if text_path is not None:
        Path(text_path).write_text(manifest.table() + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> DatasetManifest:
    raw = json.loads(Path(path).read_text("utf-8"))
    manifest = DatasetManifest(
        rows=[
            ManifestRow(
                r["language"], r["source"], r["interaction_type"],
                r["sample_count"], r["token_total"],
            )
            for r in raw["rows"]
        ],
        checksums=dict(raw.get("checksums", {})),
    )
    if manifest.total_samples != raw["total_samples"] or manifest.total_tokens != raw["total_tokens"]:
        raise AssemblyError(f"manifest totals in {path} do not match its rows")
    return manifest


# ---------------------------------------------------------------------------
# emission

def emit_dataset(
    samples: Sequence[Sample],
    path: str | Path,
    format: str = "chat_jsonl",
) -> str:
    """Write one dataset file with stable field order; returns its sha256.

    chat_jsonl lines hold messages plus a meta block; plain_jsonl lines hold
    the full canonical sample fields and round-trip through the loader.
    """
    if format not in EMIT_FORMATS:
        raise ValueError(f"unknown dataset format: {format!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256()
    with path.open("w", encoding="utf-8") as fh:
        for sample in samples:
            if format == "chat_jsonl":
                payload = render_training_record(sample).to_chat_dict()
            else:
                payload = sample.to_dict()
            line = json.dumps(payload, ensure_ascii=False) + "\n"
            fh.write(line)
            digest.update(line.encode("utf-8"))
    return digest.hexdigest()
