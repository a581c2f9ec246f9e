"""Reflection analysis of model reasoning traces.

A trace is split into a think span (between ``<think>`` and ``</think>``) and
the visible rest. Within the think span we count reflection keywords, i.e.
self-reconsideration markers such as "wait" or "let me verify", keeping each
surface variant (attached trailing punctuation) as its own row. Each trace is
graded correct / incorrect / incorrect_out_of_context against a gold label,
and results aggregate into a per-variant table, per-class reflection means,
and a per-(model, benchmark) outcome distribution.

Keyword matching rules:

* multi-word phrases are matched as substrings, case-insensitive, and the
  words they cover cannot also count as single-keyword hits;
* single keywords match whole whitespace-split tokens only,
  case-insensitive; a token's surrounding punctuation is ignored for the
  match, while the trailing punctuation stays in the reported variant
  ("wait," and "wait." are distinct variants of "wait").
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"

DEFAULT_REFLECTION_KEYWORDS = (
    "wait",
    "recheck",
    "retry",
    "alternatively",
    "however",
    "verify",
    "actually",
    "let me think",
    "let me verify",
)

ANSWER_FORMATS = ("boxed_math", "multiple_choice", "free_text")

_TOKEN_RE = re.compile(r"\S+")
_EDGE_PUNCT_RE = re.compile(r"^\W+|\W+$", re.UNICODE)


class Correctness(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    OUT_OF_CONTEXT = "incorrect_out_of_context"


class Finish(str, Enum):
    STOPPED = "stopped"
    LENGTH_TRUNCATED = "length_truncated"


@dataclass
class ThinkSplit:
    think: str | None
    rest: str | None
    terminated: bool


def extract_think_span(text: str) -> ThinkSplit:
    """Split a raw trace around its first think span. Total: never raises.

    No opening tag: the whole text is the rest. An opening tag without a
    closing one is an unterminated span: everything after the tag is think
    text and there is no rest. Text before the opening tag joins the rest;
    any later spans stay in the rest verbatim.
    """
    start = text.find(THINK_OPEN)
    if start == -1:
        return ThinkSplit(think=None, rest=text, terminated=True)
    after_open = text[start + len(THINK_OPEN):]
    end = after_open.find(THINK_CLOSE)
    if end == -1:
        return ThinkSplit(think=after_open, rest=None, terminated=False)
    rest = text[:start] + after_open[end + len(THINK_CLOSE):]
    return ThinkSplit(think=after_open[:end], rest=rest, terminated=True)


def _strip_edge_punct(token: str) -> str:
    return _EDGE_PUNCT_RE.sub("", token)


def count_reflections(
    text: str,
    keywords: Sequence[str] = DEFAULT_REFLECTION_KEYWORDS,
) -> dict[str, int]:
    """Count keyword occurrences in text, keyed by lowercase surface variant.

    Phrase keywords report the phrase itself as the variant; single keywords
    report the token with leading punctuation stripped and trailing
    punctuation kept.
    """
    lowered = text.lower()
    counts: dict[str, int] = {}
    covered: list[tuple[int, int]] = []

    phrases = sorted((k for k in keywords if " " in k), key=len, reverse=True)
    singles = set(k for k in keywords if " " not in k)

    for phrase in phrases:
        start = 0
        while True:
            pos = lowered.find(phrase, start)
            if pos == -1:
                break
            span = (pos, pos + len(phrase))
            if not any(s < span[1] and span[0] < e for s, e in covered):
                counts[phrase] = counts.get(phrase, 0) + 1
                covered.append(span)
            start = pos + 1

    if singles:
        for match in _TOKEN_RE.finditer(lowered):
            s, e = match.span()
            if any(cs < e and s < ce for cs, ce in covered):
                continue
            token = match.group()
            if _strip_edge_punct(token) in singles:
                variant = token.lstrip("\"'`([{«¿¡")
                counts[variant] = counts.get(variant, 0) + 1

    return counts


# ---------------------------------------------------------------------------
# answer extraction and grading

_CHOICE_RE = re.compile(
    r"(?:answer|réponse|option|choice)\s*(?:is|:|est)?\s*\(?([A-D])\)?\b"
    r"|^\(?([A-D])\)?[.):]?\s*$",
    re.IGNORECASE | re.MULTILINE,
)


def parse_boxed_spans(text: str) -> list[str]:
    """All balanced ``\\boxed{...}`` payloads, in order of appearance."""
    spans = []
    i = 0
    marker = "\\boxed{"
    while True:
        start = text.find(marker, i)
        if start == -1:
            return spans
        j = start + len(marker)
        depth = 1
        k = j
        while k < len(text) and depth:
            if text[k] == "{":
                depth += 1
            elif text[k] == "}":
                depth -= 1
            k += 1
        if depth == 0:
            spans.append(text[j:k - 1])
            i = k
        else:
            i = start + 1


def extract_answer(rest: str, task_kind: str = "boxed_math") -> str | None:
    """Pull the final answer out of the visible rest; None when absent."""
    if task_kind == "boxed_math":
        spans = parse_boxed_spans(rest)
        return spans[-1].strip() if spans else None
    if task_kind == "multiple_choice":
        found = None
        for m in _CHOICE_RE.finditer(rest):
            found = (m.group(1) or m.group(2)).upper()
        return found
    if task_kind == "free_text":
        lines = [ln.strip() for ln in rest.splitlines() if ln.strip()]
        return lines[-1] if lines else None
    raise ValueError(f"unknown task_kind: {task_kind!r}")


@dataclass
class EquivalenceRule:
    """Answer comparison: exact match after light normalization.

    decimal_comma treats "4,5" and "4.5" as the same number, which matters
    for French-formatted numerics.
    """

    case_sensitive: bool = False
    decimal_comma: bool = True

    def normalize(self, answer: str) -> str:
        out = " ".join(answer.split())
        if self.decimal_comma:
            out = re.sub(r"(?<=\d),(?=\d)", ".", out)
        if not self.case_sensitive:
            out = out.lower()
        return out

    def matches(self, got: str, expected: str) -> bool:
        return self.normalize(got) == self.normalize(expected)


@dataclass
class TraceRecord:
    """One model generation paired with its gold label and analysis results."""

    raw_output: str
    gold_label: str
    id: str = ""
    benchmark: str = ""
    model: str = ""
    finish: Finish = Finish.STOPPED
    task_kind: str = "boxed_math"
    think_text: str | None = None
    answer_text: str | None = None
    extracted_answer: str | None = None
    terminated: bool = True
    correctness: Correctness | None = None
    reflection_counts: dict[str, int] = field(default_factory=dict)

    @property
    def total_reflections(self) -> int:
        return sum(self.reflection_counts.values())

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "benchmark": self.benchmark,
            "model": self.model,
            "finish": self.finish.value,
            "task_kind": self.task_kind,
            "terminated": self.terminated,
            "extracted_answer": self.extracted_answer,
            "gold_label": self.gold_label,
            "correctness": self.correctness.value if self.correctness else None,
            "reflection_counts": dict(sorted(self.reflection_counts.items())),
        }


def classify_response(rec: TraceRecord, rule: EquivalenceRule | None = None) -> Correctness:
    """Grade an analyzed record.

    A gold-matching extracted answer is correct, even under truncation.
    Otherwise any of (no extractable answer, unterminated think span,
    length-truncated finish) is out-of-context; what remains is incorrect.
    """
    rule = rule or EquivalenceRule()
    if rec.extracted_answer is not None and rule.matches(rec.extracted_answer, rec.gold_label):
        return Correctness.CORRECT
    if (
        rec.extracted_answer is None
        or not rec.terminated
        or rec.finish is Finish.LENGTH_TRUNCATED
    ):
        return Correctness.OUT_OF_CONTEXT
    return Correctness.INCORRECT


def analyze_trace(
    rec: TraceRecord,
    keywords: Sequence[str] = DEFAULT_REFLECTION_KEYWORDS,
    rule: EquivalenceRule | None = None,
) -> TraceRecord:
    """Fill a record's derived fields in place: split, count, extract, grade."""
    split = extract_think_span(rec.raw_output)
    rec.think_text = split.think
    rec.answer_text = split.rest
    rec.terminated = split.terminated
    rec.reflection_counts = count_reflections(split.think or "", keywords)
    rec.extracted_answer = (
        extract_answer(split.rest, rec.task_kind) if split.rest is not None else None
    )
    rec.correctness = classify_response(rec, rule)
    return rec


# ---------------------------------------------------------------------------
# aggregation

@dataclass
class VariantRow:
    variant: str
    correct: int = 0
    incorrect: int = 0

    @property
    def total(self) -> int:
        return self.correct + self.incorrect

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "total": self.total,
        }


@dataclass
class DistributionRow:
    model: str
    benchmark: str
    n_traces: int
    counts: dict[str, int]
    fractions: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "benchmark": self.benchmark,
            "n_traces": self.n_traces,
            "counts": self.counts,
            "fractions": self.fractions,
        }


@dataclass
class ReflectionReport:
    rows: list[VariantRow]
    class_counts: dict[str, int]
    class_means: dict[str, float]
    distributions: list[DistributionRow]
    n_traces: int

    @property
    def total_reflections(self) -> int:
        return sum(r.total for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "class_counts": self.class_counts,
            "class_means": self.class_means,
            "total_reflections": self.total_reflections,
            "variants": [r.to_dict() for r in self.rows],
            "distributions": [d.to_dict() for d in self.distributions],
        }


def aggregate(records: Iterable[TraceRecord]) -> ReflectionReport:
    """Combine analyzed records into the report.

    The per-variant table has two outcome columns, so out-of-context traces
    fold into the incorrect column there; class counts, means, and the
    per-(model, benchmark) distributions keep all three classes apart. Rows
    sort by total descending, then variant ascending. Empty input yields an
    empty report, never NaNs.
    """
    by_variant: dict[str, VariantRow] = {}
    class_counts = {c.value: 0 for c in Correctness}
    class_refl = {c.value: 0 for c in Correctness}
    by_group: dict[tuple[str, str], dict[str, int]] = {}
    n = 0
    for rec in records:
        if rec.correctness is None:
            raise ValueError(f"record {rec.id!r} was not classified")
        n += 1
        cls = rec.correctness.value
        class_counts[cls] += 1
        class_refl[cls] += rec.total_reflections
        group = by_group.setdefault(
            (rec.model, rec.benchmark), {c.value: 0 for c in Correctness}
        )
        group[cls] += 1
        for variant, count in rec.reflection_counts.items():
            row = by_variant.setdefault(variant, VariantRow(variant))
            if rec.correctness is Correctness.CORRECT:
                row.correct += count
            else:
                row.incorrect += count

    rows = sorted(by_variant.values(), key=lambda r: (-r.total, r.variant))
    class_means = {
        cls: class_refl[cls] / count
        for cls, count in class_counts.items()
        if count > 0
    }
    distributions = [
        DistributionRow(
            model=model,
            benchmark=benchmark,
            n_traces=sum(counts.values()),
            counts=counts,
            fractions={
                cls: cnt / sum(counts.values()) for cls, cnt in counts.items()
            },
        )
        for (model, benchmark), counts in sorted(by_group.items())
    ]
    return ReflectionReport(
        rows=rows,
        class_counts=class_counts,
        class_means=class_means,
        distributions=distributions,
        n_traces=n,
    )


# ---------------------------------------------------------------------------
# file interfaces

def load_predictions(path: str | Path) -> list[TraceRecord]:
    """Read predictions JSONL into unanalyzed TraceRecords.

    Required fields: raw_output, gold_label. Optional: id, benchmark, model,
    finish, task_kind.
    """
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                records.append(
                    TraceRecord(
                        raw_output=raw["raw_output"],
                        gold_label=str(raw["gold_label"]),
                        id=str(raw.get("id", lineno)),
                        benchmark=str(raw.get("benchmark", "")),
                        model=str(raw.get("model", "")),
                        finish=Finish(raw.get("finish", "stopped")),
                        task_kind=str(raw.get("task_kind", "boxed_math")),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad prediction record: {exc}") from None
    return records


def analyze_predictions(
    records: Iterable[TraceRecord],
    keywords: Sequence[str] = DEFAULT_REFLECTION_KEYWORDS,
    rule: EquivalenceRule | None = None,
) -> ReflectionReport:
    return aggregate(analyze_trace(rec, keywords, rule) for rec in records)


def write_report_json(report: ReflectionReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def write_variant_csv(report: ReflectionReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "correct", "incorrect", "total"])
        for row in report.rows:
            writer.writerow([row.variant, row.correct, row.incorrect, row.total])


def write_distribution_csv(report: ReflectionReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    classes = [c.value for c in Correctness]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "benchmark", "n_traces"]
            + classes
            + [f"frac_{c}" for c in classes]
        )
        for dist in report.distributions:
            writer.writerow(
                [dist.model, dist.benchmark, dist.n_traces]
                + [dist.counts[c] for c in classes]
                + [f"{dist.fractions[c]:.6f}" for c in classes]
            )
