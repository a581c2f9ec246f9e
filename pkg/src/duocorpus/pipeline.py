"""Stage orchestration over checksummed artifacts.

Five stages (ingest, filter, annotate, sample, assemble) each read the
previous stage's JSONL artifact and write their own under ``out_dir``. A
stage records its input checksum, output checksum and the active config
fingerprint in ``state.json``; on a repeat run it is skipped unless either
the input bytes or the config changed. Artifacts contain no timestamps, so
a fixed corpus, config and seed reproduce byte-identical datasets.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .annotate import (
    Annotator,
    SampleTooLongError,
    augment_reasoning,
    translate_to_french,
)
from .assemble import (
    build_manifest,
    canonicalize_sample,
    check_unique,
    emit_dataset,
    load_manifest,
    render_training_record,
    write_manifest,
)
from .config import PipelineConfig
from .filters import partition_pools, purity_filter, run_filter_stage
from .ingest import (
    Language,
    Sample,
    load_corpus,
    read_samples_jsonl,
    stream_of,
    dedup,
    decontaminate,
    write_samples_jsonl,
)
from .langid import make_scorer
from .llm import AnnotationCache, map_concurrent, make_client
from .reflection import (
    analyze_predictions,
    load_predictions,
    write_distribution_csv,
    write_report_json,
    write_variant_csv,
)
from .sampler import build_bilingual_dataset, check_distribution
from .tokencount import make_tokenizer

logger = logging.getLogger(__name__)

STAGES = ("ingest", "filter", "annotate", "sample", "assemble")

ARTIFACTS = {
    "ingest": ("ingest.jsonl", "ingest_counters.json"),
    "filter": ("filter.jsonl", "filter_rejects.jsonl", "filter_counts.json"),
    "annotate": ("annotate.jsonl", "annotate_rejects.jsonl"),
    "sample": ("selected_en.jsonl", "selected_fr.jsonl", "audit.jsonl", "selection.json"),
    "assemble": (
        "dataset_chat.jsonl",
        "dataset_plain.jsonl",
        "manifest.json",
        "manifest.txt",
        "distribution.json",
    ),
}

REFLECTION_FILES = (
    "reflection_report.json",
    "reflection_variants.csv",
    "reflection_distributions.csv",
)


class PipelineError(RuntimeError):
    """Missing artifact, missing input file, or broken pipeline state."""


def file_checksum(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def files_checksum(paths: list[Path]) -> str:
    """Order-sensitive combined checksum over several files."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(file_checksum(path).encode("ascii"))
    return digest.hexdigest()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class StageState:
    stage: str
    input_checksum: str
    output_checksum: str
    config_fingerprint: str
    started_at: str
    finished_at: str

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_checksum": self.input_checksum,
            "output_checksum": self.output_checksum,
            "config_fingerprint": self.config_fingerprint,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "StageState":
        return cls(
            stage=raw["stage"],
            input_checksum=raw["input_checksum"],
            output_checksum=raw["output_checksum"],
            config_fingerprint=raw["config_fingerprint"],
            started_at=raw["started_at"],
            finished_at=raw["finished_at"],
        )


def load_benchmark_questions(paths: list[str]) -> set[str]:
    """Benchmark questions from plain-text (one per line) or JSONL files."""
    questions: set[str] = set()
    for raw_path in paths:
        path = Path(raw_path)
        if not path.is_file():
            raise PipelineError(f"benchmark file not found: {path}")
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if path.suffix == ".jsonl":
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise PipelineError(f"{path}:{lineno}: bad benchmark line: {exc}")
                value = record.get("question") if isinstance(record, dict) else record
                if isinstance(value, str) and value.strip():
                    questions.add(value)
            else:
                questions.add(line)
    return questions


class Pipeline:
    """Runs stages against one config, caching results between invocations."""

    def __init__(self, config: PipelineConfig):
        self.config = config.validate()
        self.out_dir = Path(config.out_dir)
        self.tokenizer = make_tokenizer(config.tokenizer)
        self.scorer = make_scorer(config.scorer)
        self._annotator: Annotator | None = None

    # -- shared plumbing ----------------------------------------------------

    def path(self, name: str) -> Path:
        return self.out_dir / name

    @property
    def state_path(self) -> Path:
        return self.path("state.json")

    def load_states(self) -> dict[str, StageState]:
        if not self.state_path.is_file():
            return {}
        raw = json.loads(self.state_path.read_text(encoding="utf-8"))
        return {name: StageState.from_dict(entry) for name, entry in raw.items()}

    def _save_state(self, state: StageState) -> None:
        states = self.load_states()
        states[state.stage] = state
        self.out_dir.mkdir(parents=True, exist_ok=True)
        payload = {name: s.to_dict() for name, s in sorted(states.items())}
        self.state_path.write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )

    def annotator(self) -> Annotator:
        if self._annotator is None:
            llm = self.config.llm
            client = make_client(
                llm.mode,
                endpoint=llm.endpoint,
                model=llm.model,
                retries=llm.retries,
                backoff=llm.backoff,
                budget=llm.budget,
            )
            cache_path = self.config.cache_path or str(self.path("annotation_cache.jsonl"))
            self.out_dir.mkdir(parents=True, exist_ok=True)
            self._annotator = Annotator(client, AnnotationCache(cache_path))
        return self._annotator

    def stage_inputs(self, stage: str) -> list[Path]:
        if stage == "ingest":
            return [Path(s.path) for s in self.config.sources] + [
                Path(b) for b in self.config.benchmarks
            ]
        upstream = {"filter": "ingest.jsonl", "annotate": "filter.jsonl",
                    "sample": "annotate.jsonl"}
        if stage in upstream:
            return [self.path(upstream[stage])]
        if stage == "assemble":
            return [self.path("selected_en.jsonl"), self.path("selected_fr.jsonl")]
        raise PipelineError(f"unknown stage: {stage!r}")

    def stage_outputs(self, stage: str) -> list[Path]:
        return [self.path(name) for name in ARTIFACTS[stage]]

    def _input_checksum(self, stage: str) -> str:
        paths = self.stage_inputs(stage)
        for p in paths:
            if not p.is_file():
                raise PipelineError(
                    f"missing input {p} for stage {stage!r}; run the earlier stages first"
                )
        return files_checksum(paths)

    def run_stage(self, stage: str, force: bool = False) -> StageState:
        if stage not in STAGES:
            raise PipelineError(f"unknown stage: {stage!r}")
        input_checksum = self._input_checksum(stage)
        fingerprint = self.config.fingerprint()
        previous = self.load_states().get(stage)
        outputs_present = all(p.is_file() for p in self.stage_outputs(stage))
        if (
            not force
            and previous is not None
            and previous.input_checksum == input_checksum
            and previous.config_fingerprint == fingerprint
            and outputs_present
        ):
            logger.info("stage %s unchanged; skipping", stage)
            return previous

        started = _utcnow()
        t0 = time.monotonic()
        getattr(self, f"_run_{stage}")()
        logger.info("stage %s finished in %.1fs", stage, time.monotonic() - t0)
        state = StageState(
            stage=stage,
            input_checksum=input_checksum,
            output_checksum=files_checksum(self.stage_outputs(stage)),
            config_fingerprint=fingerprint,
            started_at=started,
            finished_at=_utcnow(),
        )
        self._save_state(state)
        return state

    def run(self, stages: list[str] | None = None, force: bool = False) -> dict[str, StageState]:
        selected = list(stages) if stages else list(STAGES)
        unknown = [s for s in selected if s not in STAGES]
        if unknown:
            raise PipelineError(f"unknown stages: {', '.join(unknown)}")
        ordered = [s for s in STAGES if s in selected]
        return {stage: self.run_stage(stage, force=force) for stage in ordered}

    def _write_json(self, name: str, payload: dict) -> None:
        self.path(name).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    # -- stages --------------------------------------------------------------

    def _run_ingest(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        cur = self.config.curation
        loaded: list[Sample] = []
        skipped = 0
        for source in self.config.sources:
            stream = load_corpus(
                source.path,
                source.schema,
                source=source.name,
                tokenizer=self.tokenizer,
                long_prompt_threshold=cur.long_prompt_threshold,
            )
            loaded.extend(stream.collect())
            skipped += stream.skipped
        stream = dedup(stream_of(loaded))
        stream = decontaminate(stream, load_benchmark_questions(self.config.benchmarks))
        kept = stream.collect()
        write_samples_jsonl(kept, self.path("ingest.jsonl"))
        self._write_json(
            "ingest_counters.json",
            {
                "loaded": len(loaded),
                "skipped_malformed": skipped,
                "duplicates": stream.counters.duplicates,
                "contaminated": stream.counters.contaminated,
                "kept": len(kept),
            },
        )

    def _run_filter(self) -> None:
        cur = self.config.curation
        samples = read_samples_jsonl(self.path("ingest.jsonl"), self.tokenizer)
        report = run_filter_stage(
            samples,
            self.tokenizer,
            self.scorer,
            max_tokens=cur.max_tokens,
            purity_threshold=cur.purity_threshold,
            purity_scope=cur.purity_scope,
        )
        write_samples_jsonl(report.kept, self.path("filter.jsonl"))
        with self.path("filter_rejects.jsonl").open("w", encoding="utf-8") as fh:
            for outcome in report.rejected:
                fh.write(json.dumps(outcome.to_dict(), ensure_ascii=False) + "\n")
        self._write_json("filter_counts.json", report.counts)

    def _run_annotate(self) -> None:
        cur = self.config.curation
        samples = read_samples_jsonl(self.path("filter.jsonl"), self.tokenizer)
        annotator = self.annotator()

        def annotate_one(sample: Sample) -> tuple[Sample | None, dict | None]:
            try:
                out = augment_reasoning(
                    sample,
                    annotator,
                    self.tokenizer,
                    max_tokens=cur.max_tokens,
                    long_prompt_threshold=cur.long_prompt_threshold,
                )
            except SampleTooLongError as exc:
                return None, {
                    "sample_id": sample.id,
                    "reason": "too_long_after_augmentation",
                    "token_count": exc.token_count,
                }
            difficulty = annotator.classify_difficulty(out.question_text)
            out.difficulty = difficulty.value if difficulty else None
            task = annotator.categorize_task(out.question_text)
            out.task_type = task.value if task else None
            return out, None

        results = map_concurrent(annotate_one, samples, self.config.llm.concurrency)
        kept = [sample for sample, _reject in results if sample is not None]
        rejects = [reject for _sample, reject in results if reject is not None]
        write_samples_jsonl(kept, self.path("annotate.jsonl"))
        with self.path("annotate_rejects.jsonl").open("w", encoding="utf-8") as fh:
            for reject in rejects:
                fh.write(json.dumps(reject, ensure_ascii=False) + "\n")

    def _run_sample(self) -> None:
        cur = self.config.curation
        samples = read_samples_jsonl(self.path("annotate.jsonl"), self.tokenizer)
        pools = partition_pools(
            samples, max_tokens=cur.max_tokens, purity_threshold=cur.purity_threshold
        )
        annotator = self.annotator()

        def translate(sample: Sample) -> Sample:
            return translate_to_french(
                sample, annotator, self.tokenizer, cur.long_prompt_threshold
            )

        def validate(sample: Sample) -> bool:
            if sample.token_count > cur.max_tokens:
                logger.warning("translation of %s is over the token cap", sample.lineage)
                return False
            return purity_filter(
                sample, self.scorer, Language.FR, cur.purity_threshold, cur.purity_scope
            ).kept

        result = build_bilingual_dataset(
            pools.english,
            pools.french,
            cur,
            translate=translate,
            validate=validate,
            rng=np.random.default_rng(cur.seed),
        )
        write_samples_jsonl(result.english, self.path("selected_en.jsonl"))
        write_samples_jsonl(result.french, self.path("selected_fr.jsonl"))
        result.audit.write(self.path("audit.jsonl"))
        self._write_json(
            "selection.json",
            {
                "pool_english": len(pools.english),
                "pool_french": len(pools.french),
                "pool_rejects": len(pools.rejects),
                "translation_requests": result.translation_requests,
                "translation_failures": result.translation_failures,
                "solved_weights": result.solved_weights,
            },
        )

    def _run_assemble(self) -> None:
        cur = self.config.curation
        english = read_samples_jsonl(self.path("selected_en.jsonl"), self.tokenizer)
        french = read_samples_jsonl(self.path("selected_fr.jsonl"), self.tokenizer)
        english = [canonicalize_sample(s, self.tokenizer) for s in english]
        french = [canonicalize_sample(s, self.tokenizer) for s in french]
        combined = english + french
        check_unique(combined)

        chat_path = self.path("dataset_chat.jsonl")
        plain_path = self.path("dataset_plain.jsonl")
        checksums = {
            chat_path.name: emit_dataset(combined, chat_path, "chat_jsonl"),
            plain_path.name: emit_dataset(combined, plain_path, "plain_jsonl"),
        }
        manifest = build_manifest(
            [render_training_record(s) for s in combined], self.tokenizer
        )
        manifest.checksums = checksums
        write_manifest(manifest, self.path("manifest.json"), self.path("manifest.txt"))

        distribution = check_distribution({"en": english, "fr": french}, cur)
        if not distribution.passed:
            logger.warning("reasoning/daily distribution is outside the tolerance band")
        self._write_json("distribution.json", distribution.to_dict())

    # -- reports and analysis -------------------------------------------------

    def report(self) -> str:
        manifest_path = self.path("manifest.json")
        distribution_path = self.path("distribution.json")
        for path in (manifest_path, distribution_path):
            if not path.is_file():
                raise PipelineError(f"missing report input {path}; run the pipeline first")
        manifest = load_manifest(manifest_path)
        distribution = json.loads(distribution_path.read_text(encoding="utf-8"))

        lines = [manifest.table(), ""]
        band = distribution["band"]
        target = distribution["p_reasoning"]
        lines.append(
            f"Reasoning share target {target:.0%} (tolerance ±{band * 100:.0f}pp):"
        )
        for row in distribution["languages"]:
            if row.get("error"):
                lines.append(f"  {row['language']}: {row['error']}")
                continue
            verdict = "ok" if row["within_band"] else "OUT OF BAND"
            lines.append(
                f"  {row['language']}: {row['n']} samples, "
                f"{row['n_reasoning']} reasoning ({row['share']:.1%}) {verdict}"
            )

        reflection_path = self.path("reflection_report.json")
        if reflection_path.is_file():
            reflection = json.loads(reflection_path.read_text(encoding="utf-8"))
            lines.append("")
            lines.append(
                f"Reflection analysis over {reflection['n_traces']} traces "
                f"({reflection['total_reflections']} keyword hits):"
            )
            for row in reflection["variants"][:10]:
                lines.append(
                    f"  {row['variant']!r}: {row['correct']} correct, "
                    f"{row['incorrect']} incorrect, {row['total']} total"
                )
            means = reflection.get("class_means", {})
            if means:
                rendered = ", ".join(f"{k}={v:.2f}" for k, v in sorted(means.items()))
                lines.append(f"  mean reflections per trace: {rendered}")
        return "\n".join(lines)

    def analyze(self, predictions_path: str | Path, keywords: list[str] | None = None):
        records = load_predictions(predictions_path)
        if keywords:
            report = analyze_predictions(records, keywords)
        else:
            report = analyze_predictions(records)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        write_report_json(report, self.path("reflection_report.json"))
        write_variant_csv(report, self.path("reflection_variants.csv"))
        write_distribution_csv(report, self.path("reflection_distributions.csv"))
        return report
