"""Run configuration: curation thresholds, sources, and service settings.

Config files are YAML (JSON works too, being a YAML subset). Validation is
field-level: every problem is reported with its key path, and unknown keys
are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

WEIGHT_MODES = ("target_share", "fixed")
WEIGHT_KEYS = ("difficulty", "task_type")

DEFAULT_REASONING_TASK_TYPES = (
    "mathematical_reasoning",
    "problem_solving",
    "critical_evaluation",
    "analysis",
)


class ConfigError(ValueError):
    """Invalid configuration; carries one message per offending field."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class CurationConfig:
    max_tokens: int = 16_384
    purity_threshold: float = 0.95
    p_reasoning: float = 0.6
    w_reasoning: float = 1.5
    target_per_language: int = 1_000
    seed: int = 0
    long_prompt_threshold: int = 2_048
    weight_mode: str = "target_share"
    weight_key: str = "difficulty"
    reasoning_task_types: tuple[str, ...] = DEFAULT_REASONING_TASK_TYPES
    distribution_band: float = 0.05
    purity_scope: str = "full"

    def problems(self) -> list[str]:
        out = []
        if self.max_tokens < 1:
            out.append(f"curation.max_tokens must be >= 1, got {self.max_tokens}")
        if not 0.0 < self.purity_threshold <= 1.0:
            out.append(
                f"curation.purity_threshold must be in (0, 1], got {self.purity_threshold}"
            )
        if not 0.0 < self.p_reasoning < 1.0:
            out.append(f"curation.p_reasoning must be in (0, 1), got {self.p_reasoning}")
        if self.w_reasoning <= 1.0:
            out.append(f"curation.w_reasoning must be > 1, got {self.w_reasoning}")
        if self.target_per_language < 1:
            out.append(
                f"curation.target_per_language must be >= 1, got {self.target_per_language}"
            )
        if self.long_prompt_threshold < 1:
            out.append(
                f"curation.long_prompt_threshold must be >= 1, got {self.long_prompt_threshold}"
            )
        if self.weight_mode not in WEIGHT_MODES:
            out.append(f"curation.weight_mode must be one of {WEIGHT_MODES}")
        if self.weight_key not in WEIGHT_KEYS:
            out.append(f"curation.weight_key must be one of {WEIGHT_KEYS}")
        if not 0.0 <= self.distribution_band < 1.0:
            out.append(
                f"curation.distribution_band must be in [0, 1), got {self.distribution_band}"
            )
        if self.purity_scope not in ("full", "question"):
            out.append("curation.purity_scope must be 'full' or 'question'")
        return out


@dataclass
class LlmSettings:
    mode: str = "mock"
    endpoint: str | None = None
    model: str = "default"
    retries: int = 3
    backoff: float = 0.5
    concurrency: int = 8
    budget: int | None = None

    def problems(self) -> list[str]:
        out = []
        if not (self.mode in ("live", "mock") or self.mode.startswith("mock:")):
            out.append(f"llm.mode must be 'live', 'mock' or 'mock:<fixture>', got {self.mode!r}")
        if self.retries < 0:
            out.append(f"llm.retries must be >= 0, got {self.retries}")
        if self.backoff < 0:
            out.append(f"llm.backoff must be >= 0, got {self.backoff}")
        if self.concurrency < 1:
            out.append(f"llm.concurrency must be >= 1, got {self.concurrency}")
        if self.budget is not None and self.budget < 0:
            out.append(f"llm.budget must be >= 0, got {self.budget}")
        return out


@dataclass
class SourceSpec:
    path: str
    schema: str = "messages_json"
    name: str | None = None

    def problems(self, index: int) -> list[str]:
        out = []
        if not self.path:
            out.append(f"sources[{index}].path is required")
        if self.schema not in ("messages_json", "prompt_completion", "qa_pair"):
            out.append(f"sources[{index}].schema is not a known shape: {self.schema!r}")
        return out


@dataclass
class PipelineConfig:
    curation: CurationConfig = field(default_factory=CurationConfig)
    llm: LlmSettings = field(default_factory=LlmSettings)
    sources: list[SourceSpec] = field(default_factory=list)
    benchmarks: list[str] = field(default_factory=list)
    out_dir: str = "artifacts"
    tokenizer: str = "reference"
    scorer: str = "stopword"
    cache_path: str | None = None

    def problems(self) -> list[str]:
        out = self.curation.problems() + self.llm.problems()
        if not self.sources:
            out.append("sources must list at least one corpus file")
        for i, src in enumerate(self.sources):
            out.extend(src.problems(i))
        if not self.out_dir:
            out.append("out_dir is required")
        return out

    def validate(self) -> "PipelineConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def to_dict(self) -> dict:
        return {
            "curation": {
                f.name: (
                    list(getattr(self.curation, f.name))
                    if f.name == "reasoning_task_types"
                    else getattr(self.curation, f.name)
                )
                for f in fields(CurationConfig)
            },
            "llm": {f.name: getattr(self.llm, f.name) for f in fields(LlmSettings)},
            "sources": [
                {"path": s.path, "schema": s.schema, "name": s.name} for s in self.sources
            ],
            "benchmarks": list(self.benchmarks),
            "out_dir": self.out_dir,
            "tokenizer": self.tokenizer,
            "scorer": self.scorer,
            "cache_path": self.cache_path,
        }

    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _build_section(cls, raw: Any, prefix: str, problems: list[str]):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        problems.append(f"{prefix} must be a mapping")
        return cls()
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            problems.append(f"{prefix}.{key} is not a recognized setting")
            continue
        if key == "reasoning_task_types":
            if not isinstance(value, (list, tuple)):
                problems.append(f"{prefix}.{key} must be a list")
                continue
            value = tuple(str(v) for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        problems.append(f"{prefix}: {exc}")
        return cls()


def parse_config(raw: dict, base_dir: Path | None = None) -> PipelineConfig:
    """Build and validate a PipelineConfig from a parsed mapping.

    Relative source/benchmark/output paths resolve against base_dir.
    """
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a mapping"])

    known_top = {"curation", "llm", "sources", "benchmarks", "out_dir", "tokenizer",
                 "scorer", "cache_path"}
    for key in raw:
        if key not in known_top:
            problems.append(f"{key} is not a recognized setting")

    curation = _build_section(CurationConfig, raw.get("curation"), "curation", problems)
    llm = _build_section(LlmSettings, raw.get("llm"), "llm", problems)

    def resolve(p: str) -> str:
        if base_dir is None:
            return p
        return str((base_dir / p).resolve()) if not Path(p).is_absolute() else p

    sources = []
    raw_sources = raw.get("sources", [])
    if not isinstance(raw_sources, list):
        problems.append("sources must be a list")
        raw_sources = []
    for i, entry in enumerate(raw_sources):
        if isinstance(entry, str):
            sources.append(SourceSpec(path=resolve(entry)))
        elif isinstance(entry, dict):
            extra = set(entry) - {"path", "schema", "name"}
            if extra:
                problems.append(f"sources[{i}] has unrecognized keys: {sorted(extra)}")
            sources.append(
                SourceSpec(
                    path=resolve(str(entry.get("path", ""))),
                    schema=str(entry.get("schema", "messages_json")),
                    name=entry.get("name"),
                )
            )
        else:
            problems.append(f"sources[{i}] must be a path or a mapping")

    benchmarks = raw.get("benchmarks", [])
    if not isinstance(benchmarks, list):
        problems.append("benchmarks must be a list of paths")
        benchmarks = []
    benchmarks = [resolve(str(b)) for b in benchmarks]

    config = PipelineConfig(
        curation=curation,
        llm=llm,
        sources=sources,
        benchmarks=benchmarks,
        out_dir=resolve(str(raw.get("out_dir", "artifacts"))),
        tokenizer=str(raw.get("tokenizer", "reference")),
        scorer=str(raw.get("scorer", "stopword")),
        cache_path=(
            resolve(str(raw["cache_path"])) if raw.get("cache_path") else None
        ),
    )
    problems.extend(config.problems())
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    try:
        raw = yaml.safe_load(path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError([f"config does not parse: {exc}"]) from None
    return parse_config(raw, base_dir=path.parent)
