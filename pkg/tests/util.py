"""Shared sample builders and randomized-input generators for the test suite."""

from __future__ import annotations

import random
import string

from duocorpus import (
    Finish,
    Language,
    Message,
    ReferenceTokenizer,
    Role,
    Sample,
    TraceRecord,
    build_sample,
)

TOK = ReferenceTokenizer()

# tokens that exercise keyword matching: punctuation variants, case, phrases,
# near-misses that must not match, and plain filler
REFLECTIVE_SOUP = [
    "wait",
    "Wait,",
    "WAIT.",
    '"wait,"',
    "(wait)",
    "wait!?",
    "however",
    "However,",
    "verify",
    "verify.",
    "Verify:",
    "actually",
    "actually!",
    "recheck",
    "retry,",
    "alternatively",
    "Alternatively,",
    "let me think",
    "Let me think.",
    "let me verify",
    "Let me verify,",
    "await",
    "waiting",
    "reverify",
    "actuallyy",
    "rechecked",
    "therefore",
    "the",
    "answer",
    "so",
    "hmm...",
    "«wait»",
]

SEPARATORS = [" ", "  ", "\n", " \n ", "\t"]


def random_think_body(rng: random.Random, max_tokens: int = 40) -> str:
    n = rng.randint(0, max_tokens)
    parts = []
    for i in range(n):
        if i:
            parts.append(rng.choice(SEPARATORS))
        parts.append(rng.choice(REFLECTIVE_SOUP))
    return "".join(parts)


def random_trace(rng: random.Random) -> TraceRecord:
    """A randomized raw trace covering tag, answer, and truncation shapes."""
    task_kind = rng.choice(["boxed_math", "multiple_choice", "free_text"])
    think = random_think_body(rng)

    if task_kind == "boxed_math":
        gold = rng.choice(["42", "4.5", "x+1"])
        answer_bit = rng.choice(
            [
                "The result is \\boxed{42}.",
                "First \\boxed{7}, finally \\boxed{42}",
                "We get \\boxed{4,5} in the end.",
                "So \\boxed{x + 1} holds.",
                "Ran out of \\boxed{42",  # unbalanced: no answer
                "No final value given.",
                "",
            ]
        )
    elif task_kind == "multiple_choice":
        gold = rng.choice(["A", "B", "C"])
        answer_bit = rng.choice(
            [
                "The answer is (B).",
                "answer: C",
                "Option A it is.\nB\n",
                "I cannot decide.",
                "",
            ]
        )
    else:
        gold = rng.choice(["paris", "blue whales"])
        answer_bit = rng.choice(
            ["Some context.\nParis\n", "  \n", "Blue Whales", "It depends entirely.", ""]
        )

    shape = rng.choice(["normal", "normal", "normal", "no_think", "unterminated", "prefixed"])
    if shape == "no_think":
        raw = answer_bit
    elif shape == "unterminated":
        raw = f"<think>{think} and then it just stops"
    elif shape == "prefixed":
        raw = f"Preamble first. <think>{think}</think>{answer_bit}"
    else:
        raw = f"<think>{think}</think>{answer_bit}"

    return TraceRecord(
        raw_output=raw,
        gold_label=gold,
        id=f"t{rng.randrange(10**6)}",
        benchmark=rng.choice(["bench-a", "bench-b"]),
        model=rng.choice(["model-x", "model-y"]),
        finish=rng.choice([Finish.STOPPED, Finish.STOPPED, Finish.LENGTH_TRUNCATED]),
        task_kind=task_kind,
    )


def letters(i: int) -> str:
    """Deterministic letter-only code for unique, digit-free questions."""
    out = []
    i += 1
    while i:
        i, rem = divmod(i - 1, 26)
        out.append(string.ascii_lowercase[rem])
    return "".join(reversed(out))


def make_sample(
    question: str,
    answer: str,
    *,
    source: str = "unit",
    language: Language = Language.UNKNOWN,
    chain: str | None = None,
    difficulty: str | None = None,
    task_type: str | None = None,
    purity_score: float | None = None,
    lineage: str | None = None,
) -> Sample:
    content = f"<think>\n{chain}\n</think>\n{answer}" if chain is not None else answer
    return build_sample(
        [Message(Role.USER, question), Message(Role.ASSISTANT, content)],
        source=source,
        tokenizer=TOK,
        language=language,
        difficulty=difficulty,
        task_type=task_type,
        purity_score=purity_score,
        lineage=lineage,
    )


def en_reasoning_sample(i: int, **kw) -> Sample:
    kw.setdefault("language", Language.EN)
    kw.setdefault("difficulty", "reasoning")
    kw.setdefault("purity_score", 1.0)
    return make_sample(
        f"Solve the puzzle of the {letters(i)} ledger and report the value.",
        "The value is \\boxed{4}.",
        chain="First the ledger, then the value. Wait, let me verify the total.",
        **kw,
    )


def en_daily_sample(i: int, **kw) -> Sample:
    kw.setdefault("language", Language.EN)
    kw.setdefault("difficulty", "understanding")
    kw.setdefault("purity_score", 1.0)
    return make_sample(
        f"How do we arrange the {letters(i)} corner for the family?",
        "Start with the part you enjoy and keep the plan simple.",
        chain="The request is about arranging a corner; a short answer will do.",
        **kw,
    )


def fr_reasoning_sample(i: int, **kw) -> Sample:
    kw.setdefault("language", Language.FR)
    kw.setdefault("difficulty", "reasoning")
    kw.setdefault("purity_score", 1.0)
    return make_sample(
        f"Résoudre le casse-tête du registre {letters(i)} et donner la valeur.",
        "La valeur est \\boxed{4}.",
        chain="D'abord le registre, ensuite la valeur. Vérifions le total encore une fois.",
        **kw,
    )


def fr_daily_sample(i: int, **kw) -> Sample:
    kw.setdefault("language", Language.FR)
    kw.setdefault("difficulty", "understanding")
    kw.setdefault("purity_score", 1.0)
    return make_sample(
        f"Comment préparer le coin {letters(i)} pour toute la famille ?",
        "Commence par la partie la plus simple et garde le cap.",
        chain="La demande concerne un coin de la maison ; une réponse courte suffit.",
        **kw,
    )
