"""Length and language-purity filtering, and pool partitioning.

Both thresholds are inclusive: a sample exactly at the token cap or exactly
at the purity threshold is kept. Length is checked before purity, so a
sample failing both reports too_long. A scorer crash drops the sample as
low purity rather than aborting the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .ingest import Language, Sample, count_sample_tokens, serialize_for_counting
from .langid import LanguageIdScorer
from .tokencount import TokenizerAdapter

logger = logging.getLogger(__name__)

DEFAULT_MAX_TOKENS = 16_384
DEFAULT_PURITY_THRESHOLD = 0.95

PURITY_SCOPES = ("full", "question")


class FilterReason(str, Enum):
    OK = "ok"
    TOO_LONG = "too_long"
    LOW_PURITY = "low_purity"
    WRONG_LANGUAGE = "wrong_language"


@dataclass
class FilterOutcome:
    reason: FilterReason
    sample_id: str
    token_count: int
    language: Language | None = None
    confidence: float | None = None

    @property
    def kept(self) -> bool:
        return self.reason is FilterReason.OK

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "reason": self.reason.value,
            "token_count": self.token_count,
            "language": self.language.value if self.language else None,
            "confidence": self.confidence,
        }


def length_filter(
    sample: Sample,
    tokenizer: TokenizerAdapter,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> FilterOutcome:
    """Recount under the active tokenizer, record it, keep iff count <= cap."""
    sample.token_count = count_sample_tokens(sample.messages, tokenizer)
    reason = FilterReason.OK if sample.token_count <= max_tokens else FilterReason.TOO_LONG
    return FilterOutcome(reason, sample.id, sample.token_count)


def _scored_text(sample: Sample, purity_scope: str) -> str:
    if purity_scope not in PURITY_SCOPES:
        raise ValueError(f"unknown purity_scope: {purity_scope!r}")
    if purity_scope == "question":
        return sample.question_text
    return serialize_for_counting(sample.messages)


def purity_filter(
    sample: Sample,
    scorer: LanguageIdScorer,
    expected: Language,
    threshold: float = DEFAULT_PURITY_THRESHOLD,
    purity_scope: str = "full",
) -> FilterOutcome:
    """Keep iff the scorer identifies ``expected`` with confidence >= threshold.

    The measured (language, confidence) pair is recorded on the sample either
    way; a kept sample also adopts the identified language.
    """
    try:
        identified, confidence = scorer.score(_scored_text(sample, purity_scope))
    except ValueError:
        raise
    except Exception as exc:
        logger.warning("scorer failed on sample %s: %s", sample.id, exc)
        identified, confidence = Language.UNKNOWN, 0.0
    sample.purity_score = confidence
    if identified is not expected:
        reason = FilterReason.WRONG_LANGUAGE
    elif confidence >= threshold:
        reason = FilterReason.OK
        sample.language = identified
    else:
        reason = FilterReason.LOW_PURITY
    return FilterOutcome(reason, sample.id, sample.token_count, identified, confidence)


def detect_and_filter_purity(
    sample: Sample,
    scorer: LanguageIdScorer,
    threshold: float = DEFAULT_PURITY_THRESHOLD,
    purity_scope: str = "full",
) -> FilterOutcome:
    """Purity check when no language is declared upfront.

    The scorer's identification is taken as the expected language; text that
    identifies as neither target language is a wrong_language reject. A
    declared language, when present, is verified instead of adopted.
    """
    if sample.language in (Language.EN, Language.FR):
        return purity_filter(sample, scorer, sample.language, threshold, purity_scope)
    try:
        identified, confidence = scorer.score(_scored_text(sample, purity_scope))
    except ValueError:
        raise
    except Exception as exc:
        logger.warning("scorer failed on sample %s: %s", sample.id, exc)
        identified, confidence = Language.UNKNOWN, 0.0
    sample.purity_score = confidence
    if identified is Language.UNKNOWN:
        reason = FilterReason.WRONG_LANGUAGE
    elif confidence >= threshold:
        reason = FilterReason.OK
        sample.language = identified
    else:
        reason = FilterReason.LOW_PURITY
    return FilterOutcome(reason, sample.id, sample.token_count, identified, confidence)


@dataclass
class PoolPartition:
    english: list[Sample] = field(default_factory=list)
    french: list[Sample] = field(default_factory=list)
    rejects: list[FilterOutcome] = field(default_factory=list)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.english), len(self.french), len(self.rejects)


def partition_pools(
    samples: Iterable[Sample],
    *,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    purity_threshold: float = DEFAULT_PURITY_THRESHOLD,
) -> PoolPartition:
    """Route already-measured samples into English/French pools or rejects.

    Every input lands in exactly one output. Samples must carry a recorded
    purity_score; an unmeasured sample is rejected.
    """
    out = PoolPartition()
    for sample in samples:
        purity = sample.purity_score if sample.purity_score is not None else 0.0
        if sample.token_count > max_tokens:
            out.rejects.append(
                FilterOutcome(FilterReason.TOO_LONG, sample.id, sample.token_count)
            )
        elif sample.language not in (Language.EN, Language.FR):
            out.rejects.append(
                FilterOutcome(
                    FilterReason.WRONG_LANGUAGE, sample.id, sample.token_count,
                    sample.language, purity,
                )
            )
        elif purity < purity_threshold:
            out.rejects.append(
                FilterOutcome(
                    FilterReason.LOW_PURITY, sample.id, sample.token_count,
                    sample.language, purity,
                )
            )
        elif sample.language is Language.EN:
            out.english.append(sample)
        else:
            out.french.append(sample)
    return out


@dataclass
class FilterReport:
    kept: list[Sample] = field(default_factory=list)
    rejected: list[FilterOutcome] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out = {r.value: 0 for r in FilterReason}
        out[FilterReason.OK.value] = len(self.kept)
        for outcome in self.rejected:
            out[outcome.reason.value] += 1
        return out


def run_filter_stage(
    samples: Iterable[Sample],
    tokenizer: TokenizerAdapter,
    scorer: LanguageIdScorer,
    *,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    purity_threshold: float = DEFAULT_PURITY_THRESHOLD,
    purity_scope: str = "full",
) -> FilterReport:
    """Apply length then purity over a stream; kept samples carry measurements."""
    report = FilterReport()
    for sample in samples:
        outcome = length_filter(sample, tokenizer, max_tokens)
        if outcome.kept:
            outcome = detect_and_filter_purity(sample, scorer, purity_threshold, purity_scope)
        if outcome.kept:
            report.kept.append(sample)
        else:
            report.rejected.append(outcome)
    return report
