"""LLM-driven annotation: task labels, difficulty labels, translation, and
think-span augmentation.

Prompts ship as package asset files and are sent verbatim as system prompts.
Label responses must end in a ``\\boxed{...}`` span; a missing span earns one
re-query and then a hard failure, while a present-but-invalid label is
recorded and leaves the sample unlabeled. All parsed results go through the
annotation cache so identical content is never paid for twice.
"""

from __future__ import annotations

import logging
import re
from enum import Enum
from importlib import resources

from .ingest import (
    FLAG_THINK_AUGMENTED,
    FLAG_TRANSLATED,
    Language,
    Message,
    Sample,
    build_sample,
)
from .ingest import DEFAULT_LONG_PROMPT_THRESHOLD
from .llm import AnnotationCache, AnnotationError, LlmClient, LlmRequest
from .reflection import THINK_OPEN, parse_boxed_spans
from .tokencount import TokenizerAdapter

logger = logging.getLogger(__name__)

DEFAULT_MAX_TOKENS = 16_384

PROMPT_FILES = {
    "translate": "translate_to_french.txt",
    "augment": "augment_thinking.txt",
    "difficulty": "classify_difficulty.txt",
    "task_type": "classify_task_type.txt",
}

_prompt_cache: dict[str, str] = {}


def load_prompt(kind: str) -> str:
    if kind not in _prompt_cache:
        filename = PROMPT_FILES[kind]
        _prompt_cache[kind] = (
            resources.files("duocorpus.prompts").joinpath(filename).read_text("utf-8")
        )
    return _prompt_cache[kind]


class TaskType(str, Enum):
    INFORMATION_RETRIEVAL = "information_retrieval"
    PROBLEM_SOLVING = "problem_solving"
    CREATIVE_GENERATION = "creative_generation"
    ANALYSIS = "analysis"
    MATHEMATICAL_REASONING = "mathematical_reasoning"
    PROCEDURAL_GUIDANCE = "procedural_guidance"
    CRITICAL_EVALUATION = "critical_evaluation"
    CONCEPTUAL_EXPLANATION = "conceptual_explanation"
    SYNTHESIS = "synthesis"
    INTERACTIVE_SIMULATION = "interactive_simulation"


class Difficulty(str, Enum):
    REASONING = "reasoning"
    UNDERSTANDING = "understanding"


class SampleTooLongError(RuntimeError):
    """Augmentation pushed a sample past the token cap."""

    def __init__(self, sample_id: str, token_count: int, max_tokens: int):
        super().__init__(
            f"sample {sample_id} is {token_count} tokens after augmentation "
            f"(cap {max_tokens})"
        )
        self.sample_id = sample_id
        self.token_count = token_count


def parse_boxed(text: str) -> str | None:
    """Content of the LAST balanced ``\\boxed{...}`` span, or None."""
    spans = parse_boxed_spans(text)
    return spans[-1] if spans else None


def normalize_label(raw: str) -> str:
    return re.sub(r"[\s\-]+", "_", raw.strip().lower())


class Annotator:
    """Runs the four annotation prompts against a client, with caching."""

    def __init__(
        self,
        client: LlmClient,
        cache: AnnotationCache | None = None,
        *,
        temperature: float = 0.0,
        max_response_tokens: int = 4096,
    ):
        self.client = client
        self.cache = cache
        self.temperature = temperature
        self.max_response_tokens = max_response_tokens

    def _request(self, kind: str, content: str) -> LlmRequest:
        return LlmRequest(
            prompt_id=kind,
            system_prompt=load_prompt(kind),
            user_content=content,
            temperature=self.temperature,
            max_tokens=self.max_response_tokens,
        )

    def _boxed_label(self, kind: str, content: str) -> str:
        """Boxed span from a label call; one re-query before giving up."""
        response = self.client.complete(self._request(kind, content))
        boxed = parse_boxed(response.content)
        if boxed is None:
            logger.warning("%s response had no boxed span; re-querying", kind)
            response = self.client.complete(self._request(kind, content))
            boxed = parse_boxed(response.content)
        if boxed is None:
            raise AnnotationError(f"{kind} response has no boxed label after re-query")
        return boxed

    def _classify(self, kind: str, question: str, valid: frozenset[str]) -> str | None:
        if self.cache is not None:
            hit = self.cache.get(kind, question)
            if hit is not None:
                return hit["label"]
        label = normalize_label(self._boxed_label(kind, question))
        if label not in valid:
            logger.warning("%s label %r is not in the closed enum; left unlabeled", kind, label)
            label = None
        if self.cache is not None:
            self.cache.put(kind, question, {"label": label})
        return label

    def categorize_task(self, question: str) -> TaskType | None:
        label = self._classify(
            "task_type", question, frozenset(t.value for t in TaskType)
        )
        return TaskType(label) if label else None

    def classify_difficulty(self, question: str) -> Difficulty | None:
        label = self._classify(
            "difficulty", question, frozenset(d.value for d in Difficulty)
        )
        return Difficulty(label) if label else None

    def translate_text(self, text: str) -> str:
        if self.cache is not None:
            hit = self.cache.get("translate", text)
            if hit is not None:
                return hit["text"]
        translated = self.client.complete(self._request("translate", text)).content.strip()
        if not translated:
            raise AnnotationError("empty translation")
        if self.cache is not None:
            self.cache.put("translate", text, {"text": translated})
        return translated

    def thinking_chain(self, question: str, answer: str) -> str:
        content = f"Question:\n{question}\n\nAnswer:\n{answer}"
        if self.cache is not None:
            hit = self.cache.get("augment", content)
            if hit is not None:
                return hit["text"]
        chain = self.client.complete(self._request("augment", content)).content.strip()
        if not chain:
            raise AnnotationError("empty reasoning chain")
        if self.cache is not None:
            self.cache.put("augment", content, {"text": chain})
        return chain


def categorize_task(question: str, client: LlmClient) -> TaskType | None:
    return Annotator(client).categorize_task(question)


def classify_difficulty(question: str, client: LlmClient) -> Difficulty | None:
    return Annotator(client).classify_difficulty(question)


def translate_to_french(
    sample: Sample,
    annotator: Annotator,
    tokenizer: TokenizerAdapter,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
) -> Sample:
    """Translate every message of an English sample; recompute derived fields.

    The original id survives as lineage; the purity score is cleared because
    the translation must be re-validated before use.
    """
    if sample.language is not Language.EN:
        raise ValueError(f"sample {sample.id} is not English")
    messages = [
        Message(m.role, annotator.translate_text(m.content)) for m in sample.messages
    ]
    return build_sample(
        messages,
        source=sample.source,
        tokenizer=tokenizer,
        language=Language.FR,
        long_prompt_threshold=long_prompt_threshold,
        task_type=sample.task_type,
        difficulty=sample.difficulty,
        purity_score=None,
        provenance_flags=sample.provenance_flags | {FLAG_TRANSLATED},
        lineage=sample.id,
    )


def has_think_span(sample: Sample) -> bool:
    return all(
        THINK_OPEN in m.content for m in sample.messages if m.role.value == "assistant"
    )


def augment_reasoning(
    sample: Sample,
    annotator: Annotator,
    tokenizer: TokenizerAdapter,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    long_prompt_threshold: int = DEFAULT_LONG_PROMPT_THRESHOLD,
) -> Sample:
    """Prefix a generated think span to each bare assistant turn.

    No-op when every assistant turn already has one. The original answer is
    kept verbatim after the closing tag.
    """
    changed = False
    messages = []
    for m in sample.messages:
        if m.role.value == "assistant" and THINK_OPEN not in m.content:
            chain = annotator.thinking_chain(sample.question_text, m.content)
            messages.append(Message(m.role, f"<think>\n{chain}\n</think>\n{m.content}"))
            changed = True
        else:
            messages.append(m)
    if not changed:
        return sample
    out = build_sample(
        messages,
        source=sample.source,
        tokenizer=tokenizer,
        language=sample.language,
        long_prompt_threshold=long_prompt_threshold,
        interaction_type=sample.interaction_type,
        task_type=sample.task_type,
        difficulty=sample.difficulty,
        purity_score=sample.purity_score,
        provenance_flags=sample.provenance_flags | {FLAG_THINK_AUGMENTED},
        lineage=sample.id,
    )
    if out.token_count > max_tokens:
        raise SampleTooLongError(sample.id, out.token_count, max_tokens)
    return out
