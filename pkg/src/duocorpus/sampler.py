"""Weighted bilingual subset selection with a translation fallback.

Selection is sequential weighted sampling without replacement: each draw
picks an item with probability proportional to the remaining weights.
Reasoning-labeled items carry weight w, the rest weight 1. In fixed mode w
is the configured value; in target-share mode (the default) w is solved by
bisection so the expected number of reasoning draws hits the configured
share for the exact pool at hand, since no single fixed weight does that for
arbitrary pool compositions.

When the French pool falls short of the target, all of it is kept and the
gap is filled by translating weighted draws from the English pool; translated
originals leave the English pool, failed translations return to it and a
replacement is drawn.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import CurationConfig
from .ingest import Sample
from .llm import AnnotationError

logger = logging.getLogger(__name__)

WEIGHT_BOUNDS = (1e-3, 1e3)


class PoolExhaustedError(RuntimeError):
    """More draws requested than items available."""


class InfeasibleCorpusError(RuntimeError):
    """The filtered pools cannot satisfy the configured targets."""

    def __init__(self, n_english: int, n_french: int, target: int, detail: str):
        super().__init__(
            f"{detail} (|E|={n_english}, |F|={n_french}, target={target}/language)"
        )
        self.n_english = n_english
        self.n_french = n_french
        self.target = target


def is_reasoning(sample: Sample, config: CurationConfig) -> bool:
    if config.weight_key == "difficulty":
        return sample.difficulty == "reasoning"
    return sample.task_type in config.reasoning_task_types


@dataclass
class WeightedPool:
    items: list[Sample]
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.items) != len(self.weights):
            raise ValueError("items and weights must be parallel")
        if len(self.weights) and self.weights.min() <= 0:
            raise ValueError("weights must be positive")


def make_pool(samples: Sequence[Sample], config: CurationConfig, weight: float) -> WeightedPool:
    weights = np.array(
        [weight if is_reasoning(s, config) else 1.0 for s in samples], dtype=float
    )
    return WeightedPool(list(samples), weights)


class AuditLog:
    """Append-only record of every draw: enough to replay a selection."""

    def __init__(self):
        self.entries: list[dict] = []

    def record(self, pool: str, draw_index: int, sample_id: str, weight: float) -> None:
        self.entries.append(
            {
                "seed_counter": len(self.entries),
                "pool": pool,
                "draw_index": draw_index,
                "sample_id": sample_id,
                "weight": weight,
            }
        )

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def _draw_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    """One weighted draw over the positive entries; caller zeroes the winner."""
    active = np.flatnonzero(weights > 0)
    if active.size == 0:
        raise PoolExhaustedError("no items left to draw")
    cum = np.cumsum(weights[active])
    u = rng.random() * cum[-1]
    pos = int(np.searchsorted(cum, u, side="right"))
    pos = min(pos, active.size - 1)
    return int(active[pos])


def weighted_sample_without_replacement(
    pool: WeightedPool,
    n: int,
    rng: np.random.Generator,
    *,
    audit: AuditLog | None = None,
    pool_name: str = "pool",
) -> list[Sample]:
    """Draw n distinct items, each step proportional to remaining weights."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > len(pool.items):
        raise PoolExhaustedError(f"requested {n} draws from a pool of {len(pool.items)}")
    weights = pool.weights.copy()
    out = []
    for k in range(n):
        idx = _draw_index(weights, rng)
        if audit is not None:
            audit.record(pool_name, k, pool.items[idx].id, float(weights[idx]))
        weights[idx] = 0.0
        out.append(pool.items[idx])
    return out


# ---------------------------------------------------------------------------
# target-share weight solving

def expected_reasoning_count(
    n_reasoning: int, n_other: int, draws: int, weight: float
) -> float:
    """Exact E[# reasoning items] for sequential weighted draws.

    Dynamic program over the number of reasoning items drawn so far; the
    per-step pick probability is w*(R-r) / (w*(R-r) + (O-(t-r))).
    """
    if draws == 0 or n_reasoning == 0:
        return 0.0
    if draws > n_reasoning + n_other:
        raise ValueError("draws exceed pool size")
    p = np.zeros(draws + 1)
    p[0] = 1.0
    for t in range(draws):
        r = np.arange(t + 1)
        rem_r = np.clip(n_reasoning - r, 0, None).astype(float)
        rem_o = np.clip(n_other - (t - r), 0, None).astype(float)
        total = weight * rem_r + rem_o
        pick = np.where(total > 0, weight * rem_r / np.maximum(total, 1e-300), 0.0)
        nxt = np.zeros(t + 2)
        nxt[1:] += p[: t + 1] * pick
        nxt[: t + 1] += p[: t + 1] * (1.0 - pick)
        p = nxt
    return float(np.arange(draws + 1) @ p)


def solve_reasoning_weight(
    n_reasoning: int,
    n_other: int,
    draws: int,
    target_reasoning: float,
    bounds: tuple[float, float] = WEIGHT_BOUNDS,
) -> float:
    """Bisection on the monotone map weight -> expected reasoning draws.

    Unattainable targets clamp to the nearest bound with a warning; notably
    a reasoning-heavy pool can demand a weight below 1.
    """
    lo, hi = bounds
    if draws == 0 or n_reasoning == 0 or n_other == 0:
        return 1.0
    e_lo = expected_reasoning_count(n_reasoning, n_other, draws, lo)
    e_hi = expected_reasoning_count(n_reasoning, n_other, draws, hi)
    if target_reasoning <= e_lo:
        logger.warning(
            "reasoning target %.1f below attainable minimum %.1f; weight clamped",
            target_reasoning, e_lo,
        )
        return lo
    if target_reasoning >= e_hi:
        logger.warning(
            "reasoning target %.1f above attainable maximum %.1f; weight clamped",
            target_reasoning, e_hi,
        )
        return hi
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if expected_reasoning_count(n_reasoning, n_other, draws, mid) < target_reasoning:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _solve_weight_for(
    samples: Sequence[Sample],
    config: CurationConfig,
    draws: int,
    target_reasoning: float,
) -> float:
    if config.weight_mode == "fixed":
        return config.w_reasoning
    n_reasoning = sum(1 for s in samples if is_reasoning(s, config))
    n_other = len(samples) - n_reasoning
    weight = solve_reasoning_weight(n_reasoning, n_other, draws, target_reasoning)
    if weight < 1.0:
        logger.warning(
            "solved reasoning weight %.4f is below 1 (reasoning-heavy pool)", weight
        )
    return weight


# ---------------------------------------------------------------------------
# bilingual construction

@dataclass
class SelectionResult:
    english: list[Sample]
    french: list[Sample]
    audit: AuditLog
    translation_requests: int = 0
    translation_failures: int = 0
    solved_weights: dict[str, float] = field(default_factory=dict)


def build_bilingual_dataset(
    english: Sequence[Sample],
    french: Sequence[Sample],
    config: CurationConfig,
    *,
    translate: Callable[[Sample], Sample] | None = None,
    translate_many: Callable[[list[Sample]], list[Sample | None]] | None = None,
    validate: Callable[[Sample], bool] | None = None,
    rng: np.random.Generator | None = None,
) -> SelectionResult:
    """Select target_per_language samples per language.

    French first: either a weighted draw from F, or, on shortfall, all of F
    plus translated weighted draws from E (translated originals leave E).
    English second, from whatever remains of E. Failed or invalid
    translations put the original back and cost a replacement draw, so the
    final counts are exact whenever the pools are feasible.
    """
    english = list(english)
    french = list(french)
    target = config.target_per_language
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    validate = validate or (lambda _s: True)
    audit = AuditLog()
    result = SelectionResult([], [], audit)

    shortfall = max(0, target - len(french))
    minimum_english = target + shortfall
    if len(english) < minimum_english or len(english) + len(french) < 2 * target:
        raise InfeasibleCorpusError(
            len(english), len(french), target,
            "pools cannot supply both language subsets",
        )
    if shortfall and translate is None and translate_many is None:
        raise ValueError("French shortfall requires a translate callable")

    def translate_one(sample: Sample) -> Sample | None:
        try:
            return translate(sample)
        except AnnotationError as exc:
            logger.warning("translation failed for %s: %s", sample.id, exc)
            return None

    if translate_many is None and translate is not None:
        def translate_many(batch: list[Sample]) -> list[Sample | None]:
            return [translate_one(s) for s in batch]

    if not shortfall:
        weight = _solve_weight_for(french, config, target, config.p_reasoning * target)
        result.solved_weights["french"] = weight
        pool = make_pool(french, config, weight)
        result.french = weighted_sample_without_replacement(
            pool, target, rng, audit=audit, pool_name="french"
        )
    else:
        result.french = list(french)
        reasoning_in_f = sum(1 for s in french if is_reasoning(s, config))
        needed = config.p_reasoning * target - reasoning_in_f
        needed = min(max(needed, 0.0), float(shortfall))
        weight = _solve_weight_for(english, config, shortfall, needed)
        result.solved_weights["translation"] = weight

        weights = np.array(
            [weight if is_reasoning(s, config) else 1.0 for s in english], dtype=float
        )
        removed: set[int] = set()

        def draw_one(k: int) -> int:
            idx = _draw_index(weights, rng)
            audit.record("english_for_translation", k, english[idx].id, float(weights[idx]))
            weights[idx] = 0.0
            return idx

        batch = [draw_one(k) for k in range(shortfall)]
        translated_batch = translate_many([english[i] for i in batch])
        result.translation_requests += len(batch)

        pending = list(zip(batch, translated_batch))
        draw_counter = shortfall
        while pending:
            idx, translated = pending.pop(0)
            if translated is not None and validate(translated):
                result.french.append(translated)
                removed.add(idx)
                continue
            result.translation_failures += 1
            logger.warning(
                "translation of %s rejected; drawing a replacement", english[idx].id
            )
            replacement = draw_one(draw_counter)
            draw_counter += 1
            result.translation_requests += 1
            pending.append((replacement, translate_many([english[replacement]])[0]))

        remaining = [s for i, s in enumerate(english) if i not in removed]
        english = remaining

    weight = _solve_weight_for(english, config, target, config.p_reasoning * target)
    result.solved_weights["english"] = weight
    pool = make_pool(english, config, weight)
    result.english = weighted_sample_without_replacement(
        pool, target, rng, audit=audit, pool_name="english"
    )

    english_ids = {s.id for s in result.english}
    for s in result.french:
        if s.lineage is not None and s.lineage in english_ids:
            raise RuntimeError(
                f"translation {s.id} and its original {s.lineage} both selected"
            )
    return result


# ---------------------------------------------------------------------------
# distribution check

@dataclass
class LanguageDistribution:
    language: str
    n: int
    n_reasoning: int
    share: float | None
    within_band: bool
    task_type_counts: dict[str, int]
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "n": self.n,
            "n_reasoning": self.n_reasoning,
            "share": self.share,
            "within_band": self.within_band,
            "task_type_counts": self.task_type_counts,
            "error": self.error,
        }


@dataclass
class DistributionReport:
    languages: list[LanguageDistribution]
    p_reasoning: float
    band: float

    @property
    def passed(self) -> bool:
        return bool(self.languages) and all(l.within_band for l in self.languages)

    def to_dict(self) -> dict:
        return {
            "p_reasoning": self.p_reasoning,
            "band": self.band,
            "passed": self.passed,
            "languages": [l.to_dict() for l in self.languages],
        }


def check_distribution(
    subsets: dict[str, Iterable[Sample]],
    config: CurationConfig,
) -> DistributionReport:
    """Reasoning share per language against p_reasoning with a tolerance band."""
    rows = []
    for language, samples in sorted(subsets.items()):
        samples = list(samples)
        task_counts: dict[str, int] = {}
        for s in samples:
            key = s.task_type or "unlabeled"
            task_counts[key] = task_counts.get(key, 0) + 1
        if not samples:
            rows.append(
                LanguageDistribution(
                    language, 0, 0, None, False, task_counts, error="empty subset"
                )
            )
            continue
        n_reasoning = sum(1 for s in samples if is_reasoning(s, config))
        share = n_reasoning / len(samples)
        rows.append(
            LanguageDistribution(
                language,
                len(samples),
                n_reasoning,
                share,
                abs(share - config.p_reasoning) <= config.distribution_band,
                dict(sorted(task_counts.items())),
            )
        )
    return DistributionReport(rows, config.p_reasoning, config.distribution_band)
