from __future__ import annotations

import pytest

from duocorpus import (
    AnnotationCache,
    AnnotationError,
    Annotator,
    Difficulty,
    InteractionType,
    Language,
    LlmResponse,
    Message,
    MockLlmClient,
    Role,
    SampleTooLongError,
    TaskType,
    augment_reasoning,
    build_sample,
    translate_to_french,
)
from duocorpus.annotate import (
    PROMPT_FILES,
    has_think_span,
    load_prompt,
    normalize_label,
    parse_boxed,
)
from duocorpus.ingest import FLAG_THINK_AUGMENTED, FLAG_TRANSLATED

from util import TOK, en_daily_sample, en_reasoning_sample, make_sample


class ScriptedClient:
    """Plays back queued response strings; counts calls."""

    def __init__(self, script):
        self.script = list(script)
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        return LlmResponse(self.script.pop(0))


def test_prompt_assets_load():
    for kind in PROMPT_FILES:
        text = load_prompt(kind)
        assert len(text) > 100
    assert "French" in load_prompt("translate") or "français" in load_prompt("translate")
    assert "\\boxed" in load_prompt("difficulty")
    assert "\\boxed" in load_prompt("task_type")


def test_parse_boxed_takes_last_span():
    assert parse_boxed("a \\boxed{one} b \\boxed{two}") == "two"
    assert parse_boxed("nested \\boxed{a{b}c}") == "a{b}c"
    assert parse_boxed("none here") is None
    assert parse_boxed("open \\boxed{never closed") is None


def test_normalize_label():
    assert normalize_label(" Mathematical Reasoning ") == "mathematical_reasoning"
    assert normalize_label("Problem-Solving") == "problem_solving"
    assert normalize_label("UNDERSTANDING") == "understanding"
    assert normalize_label("a  b\tc") == "a_b_c"


def test_classify_difficulty_and_task(tmp_path):
    annotator = Annotator(MockLlmClient(), AnnotationCache(tmp_path / "c.jsonl"))
    assert annotator.classify_difficulty("Solve 12 * 12.") is Difficulty.REASONING
    assert annotator.classify_difficulty("How do you greet a guest?") is Difficulty.UNDERSTANDING
    assert annotator.categorize_task("Please solve this equation.") is TaskType.MATHEMATICAL_REASONING


def test_classification_cache_coherence(tmp_path):
    client = MockLlmClient()
    annotator = Annotator(client, AnnotationCache(tmp_path / "c.jsonl"))
    q = "Solve 5 + 5."
    first = annotator.classify_difficulty(q)
    second = annotator.classify_difficulty(q)
    assert first is second is Difficulty.REASONING
    assert client.meter.calls == 1

    # a second annotator over the same cache file pays nothing
    fresh_client = MockLlmClient()
    again = Annotator(fresh_client, AnnotationCache(tmp_path / "c.jsonl"))
    assert again.classify_difficulty(q) is Difficulty.REASONING
    assert fresh_client.meter.calls == 0


def test_invalid_label_is_rejected_and_cached(tmp_path):
    cache = AnnotationCache(tmp_path / "c.jsonl")
    client = ScriptedClient(["surely \\boxed{galactic}"])
    annotator = Annotator(client, cache)
    assert annotator.classify_difficulty("Q?") is None
    assert cache.get("difficulty", "Q?") == {"label": None}
    # the cached rejection short-circuits the next call
    assert Annotator(ScriptedClient([]), cache).classify_difficulty("Q?") is None


def test_missing_boxed_requeries_once_then_fails():
    client = ScriptedClient(["no box", "still no box"])
    with pytest.raises(AnnotationError, match="no boxed label"):
        Annotator(client).classify_difficulty("Q?")
    assert len(client.requests) == 2

    recovered = ScriptedClient(["no box", "ok \\boxed{reasoning}"])
    assert Annotator(recovered).classify_difficulty("Q?") is Difficulty.REASONING
    assert len(recovered.requests) == 2


def test_label_requests_use_prompt_assets():
    client = ScriptedClient(["\\boxed{understanding}"])
    Annotator(client).classify_difficulty("Q?")
    request = client.requests[0]
    assert request.prompt_id == "difficulty"
    assert request.system_prompt == load_prompt("difficulty")
    assert request.user_content == "Q?"
    assert request.temperature == 0.0


def test_translate_text_rejects_empty(tmp_path):
    annotator = Annotator(MockLlmClient({"disparait": "   "}))
    with pytest.raises(AnnotationError, match="empty translation"):
        annotator.translate_text("disparait")


def test_translate_text_cached(tmp_path):
    client = MockLlmClient()
    annotator = Annotator(client, AnnotationCache(tmp_path / "c.jsonl"))
    out1 = annotator.translate_text("the plan")
    out2 = annotator.translate_text("the plan")
    assert out1 == out2 == "le plan"
    assert client.meter.calls == 1


def test_thinking_chain_content_format(tmp_path):
    client = ScriptedClient(["  a chain of thought  "])
    annotator = Annotator(client, AnnotationCache(tmp_path / "c.jsonl"))
    chain = annotator.thinking_chain("Why?", "Because.")
    assert chain == "a chain of thought"
    assert client.requests[0].user_content == "Question:\nWhy?\n\nAnswer:\nBecause."
    # cached under the combined content
    assert annotator.thinking_chain("Why?", "Because.") == chain
    assert len(client.requests) == 1


def test_translate_to_french_rewrites_sample():
    sample = make_sample(
        "Where is the answer to the question?",
        "The answer is in the book.",
        language=Language.EN,
        difficulty="understanding",
        task_type="information_retrieval",
        purity_score=1.0,
    )
    annotator = Annotator(MockLlmClient())
    out = translate_to_french(sample, annotator, TOK)
    assert out.language is Language.FR
    assert out.lineage == sample.id
    assert out.id != sample.id
    assert FLAG_TRANSLATED in out.provenance_flags
    assert out.purity_score is None  # must be re-validated
    assert out.difficulty == "understanding"
    assert out.task_type == "information_retrieval"
    assert "réponse" in out.messages[1].content
    assert out.token_count == TOK.count("user: " + out.question_text) + TOK.count(
        "assistant: " + out.messages[1].content
    )


def test_translate_to_french_requires_english():
    sample = make_sample("Déjà en français ?", "Oui.", language=Language.FR)
    with pytest.raises(ValueError, match="not English"):
        translate_to_french(sample, Annotator(MockLlmClient()), TOK)


def test_translate_reinfers_interaction_type():
    sample = make_sample(
        "Is the plan for the day ready now?",
        "Yes, the plan is ready.",
        language=Language.EN,
    )
    assert sample.interaction_type is InteractionType.SINGLE_TURN
    out = translate_to_french(sample, Annotator(MockLlmClient()), TOK, long_prompt_threshold=3)
    assert out.interaction_type is InteractionType.LONG_CONTEXT


def test_has_think_span():
    assert has_think_span(en_reasoning_sample(0))
    bare = make_sample("Plain question?", "Plain answer.")
    assert not has_think_span(bare)


def test_augment_is_noop_when_already_thinking():
    sample = en_reasoning_sample(1)
    out = augment_reasoning(sample, Annotator(MockLlmClient()), TOK)
    assert out is sample


def test_augment_prefixes_bare_assistant_turns():
    sample = make_sample(
        "Why does the kettle sing?",
        "Steam escapes through the whistle.",
        language=Language.EN,
        purity_score=0.97,
    )
    out = augment_reasoning(sample, Annotator(MockLlmClient()), TOK)
    content = out.messages[1].content
    assert content.startswith("<think>\n")
    assert content.endswith("</think>\nSteam escapes through the whistle.")
    assert FLAG_THINK_AUGMENTED in out.provenance_flags
    assert out.lineage == sample.id
    assert out.purity_score == 0.97  # measured before augmentation, carried through
    assert out.interaction_type is sample.interaction_type
    assert out.question_text == sample.question_text


def test_augment_multi_turn_touches_only_bare_turns():
    messages = [
        Message(Role.USER, "First question here?"),
        Message(Role.ASSISTANT, "<think>\nalready reasoned\n</think>\nFirst answer."),
        Message(Role.USER, "Second question here?"),
        Message(Role.ASSISTANT, "Second answer."),
    ]
    sample = build_sample(messages, source="unit", tokenizer=TOK, language=Language.EN)
    out = augment_reasoning(sample, Annotator(MockLlmClient()), TOK)
    assert out.messages[1].content == messages[1].content
    assert out.messages[3].content.startswith("<think>\n")
    assert has_think_span(out)


def test_augment_overflow_raises():
    sample = make_sample("Tiny?", "Tiny.", language=Language.EN)
    with pytest.raises(SampleTooLongError) as info:
        augment_reasoning(sample, Annotator(MockLlmClient()), TOK, max_tokens=10)
    assert info.value.sample_id == sample.id
    assert info.value.token_count > 10
