"""Deterministic synthetic corpus generator for demos and end-to-end tests.

Produces five source files (~5,000 records, mixed English/French, single and
multi turn plus long-context), a benchmark question list, and a ready config.
Defects are planted with exact bookkeeping: duplicate questions, over-length
records, benchmark-contaminated questions, mixed-language and unidentifiable
text, and malformed lines. The returned spec states every planted count so
tests can assert pipeline tallies precisely.

Text is built so the bundled stopword scorer and the mock annotator behave
predictably: reasoning questions carry digits (classified "reasoning"),
daily questions carry none (classified "understanding"), and each language's
text uses only that language's function words.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import yaml

EN_REASONING = 2_200
EN_DAILY = 1_600
EN_MULTI = 120
EN_LONG = 60
FR_REASONING = 420
FR_DAILY = 290
FR_MULTI = 60
FR_LONG = 30

DUP_REASONING_EN = 60
DUP_DAILY_EN = 40
DUP_REASONING_FR = 25
DUP_DAILY_FR = 25
OVERLENGTH_REASONING_EN = 25
OVERLENGTH_DAILY_EN = 15
CONTAMINATED_EN = 15
CONTAMINATED_FR = 15
IMPURE_EN = 20
IMPURE_FR = 10
MALFORMED_PER_FILE = 5  # in four of the five files

OVERLENGTH_WORDS = 17_000  # reference tokens, comfortably past 16,384

_EN_SUBJECTS = [
    "a small herb garden", "a cozy reading corner", "a weekend picnic",
    "a family game evening", "a quiet morning routine", "a shared pantry",
    "a balcony flower box", "a neighborhood book swap", "a rainy day at home",
    "a simple breakfast table", "a walk along the river", "a tidy work desk",
    "a handmade gift for a friend", "a small birthday gathering",
    "a calm bedtime routine", "a kitchen spice shelf", "a weekend bread bake",
    "a letter to an old friend", "a houseplant watering habit",
    "a shoebox photo archive",
]
_EN_ASPECTS = [
    "for beginners", "on a tight budget", "during the rainy season",
    "with young children around", "in a very small apartment",
    "without any special tools", "when time is short", "for the whole family",
    "with things we already have", "in the early morning",
    "over a single weekend", "without making a mess", "for a picky eater",
    "when guests arrive early", "during the hot summer weeks",
    "with a curious cat nearby", "for someone who travels often",
    "while keeping it cheerful", "in a shared household", "at a gentle pace",
]
_EN_FRAMES = [
    "How do I plan {s} {a}?",
    "What is the best way to arrange {s} {a}?",
    "Write a short story about {s} {a}.",
    "Explain why {s} {a} can matter so much to people.",
    "Act as a friendly coach and walk me through {s} {a}.",
    "Which little habits make {s} {a} easier to keep up?",
    "Describe how you would set up {s} {a}.",
    "What should we remember about {s} {a}?",
]
_EN_DAILY_ANSWERS = [
    "That sounds lovely. Start with the part you enjoy most, keep the plan "
    "simple, and give yourself room to adjust along the way.",
    "Begin with what you already have at home. A short list helps, and so "
    "does doing one small thing each day rather than everything at once.",
    "Keep it gentle and unhurried. Pick a corner to start from, tidy as you "
    "go, and let the rest of the household join in when they are ready.",
    "The trick is to make it pleasant. Put on some music, set out what you "
    "need beforehand, and stop while it still feels like fun.",
]

_FR_SUBJECTS = [
    "un petit jardin de plantes", "un coin de lecture", "un déjeuner champêtre",
    "une soirée de jeux en famille", "une routine du matin", "un garde-manger partagé",
    "une jardinière de balcon", "un échange de livres entre voisins",
    "une journée pluvieuse à la maison", "une table de petit déjeuner",
    "une promenade le long de la rivière", "un bureau bien rangé",
    "un cadeau fait main pour une amie", "une petite fête d'anniversaire",
    "une routine du soir toute douce", "une étagère à épices",
    "une fournée de pain du dimanche", "une lettre à une vieille amie",
    "une habitude d'arrosage des plantes", "une boîte de photos de famille",
]
_FR_ASPECTS = [
    "pour les novices", "avec un petit budget", "pendant la saison des pluies",
    "avec des enfants à la maison", "dans un tout petit logement",
    "sans outils particuliers", "quand le temps manque", "pour toute la famille",
    "avec ce que nous avons déjà", "au petit matin", "sur un seul week-end",
    "sans mettre le désordre", "pour un gourmand difficile",
    "quand les invités arrivent tôt", "pendant les grandes chaleurs",
    "avec un chat curieux à côté", "pour une personne souvent en voyage",
    "en gardant la bonne humeur", "dans une maison partagée", "à un rythme tranquille",
]
_FR_FRAMES = [
    "Comment préparer {s} {a} ?",
    "Quelle est la meilleure façon d'organiser {s} {a} ?",
    "Écris une petite histoire sur {s} {a}.",
    "Dis-moi pourquoi {s} {a} peut tenir une telle place dans nos vies.",
    "Joue le rôle d'un ami de confiance et guide-moi pour {s} {a}.",
    "Quelles petites habitudes rendent {s} {a} facile à garder ?",
    "Décris comment tu mettrais en place {s} {a}.",
    "Que faut-il retenir au sujet de {s} {a} ?",
]
_FR_DAILY_ANSWERS = [
    "C'est une belle idée. Commence par la partie la plus agréable, garde un "
    "plan simple et laisse-toi le temps de bien faire les choses.",
    "Pars de ce que tu as déjà chez toi. Une courte liste aide beaucoup, et "
    "il vaut mieux avancer un peu chaque jour que tout faire d'un coup.",
    "Reste dans la douceur. Choisis un coin pour débuter, range au fur et à "
    "mesure, et laisse le reste de la maison se joindre à toi plus tard.",
    "Le secret est d'en faire un moment plaisant. Mets un peu de musique, "
    "prépare ce qu'il te faut à l'avance et arrête-toi tant que c'est encore léger.",
]

_EN_FILLER = [
    "The house was quiet in the morning and the kettle warmed slowly on the stove.",
    "We keep the garden notes in a drawer by the door so that everyone can read them.",
    "There was a soft light over the table and the children were still asleep upstairs.",
    "The neighbors brought bread again and we talked for a while about the weather.",
    "Most of the shelves are tidy now because we sorted them together on Sunday.",
    "A walk after dinner has become a habit that the whole family seems to enjoy.",
    "The old clock in the hall is slow but nobody wants to be the one to fix it.",
    "When it rains we move the chairs inside and the cat watches from the window.",
]
_FR_FILLER = [
    "La maison était calme le matin et la bouilloire chauffait doucement sur le feu.",
    "Nous gardons les notes du jardin dans un tiroir près de la porte pour toute la famille.",
    "Une lumière douce tombait sur la table et les enfants dormaient encore en haut.",
    "Les voisins ont encore apporté du pain et nous avons parlé un moment de la pluie.",
    "La plupart des étagères sont rangées maintenant car nous avons tout trié dimanche.",
    "Une promenade après le dîner est devenue une habitude que toute la famille aime.",
    "La vieille horloge du couloir retarde mais personne ne veut être celui qui la règle.",
    "Quand il pleut nous rentrons les chaises et le chat regarde par la fenêtre.",
]


def _en_daily_question(index: int) -> str:
    frame = _EN_FRAMES[index % len(_EN_FRAMES)]
    rest = index // len(_EN_FRAMES)
    subject = _EN_SUBJECTS[rest % len(_EN_SUBJECTS)]
    aspect = _EN_ASPECTS[(rest // len(_EN_SUBJECTS)) % len(_EN_ASPECTS)]
    return frame.format(s=subject, a=aspect)


def _fr_daily_question(index: int) -> str:
    frame = _FR_FRAMES[index % len(_FR_FRAMES)]
    rest = index // len(_FR_FRAMES)
    subject = _FR_SUBJECTS[rest % len(_FR_SUBJECTS)]
    aspect = _FR_ASPECTS[(rest // len(_FR_SUBJECTS)) % len(_FR_ASPECTS)]
    return frame.format(s=subject, a=aspect)


def _en_reasoning_record(index: int, rng: random.Random) -> dict:
    a = rng.randint(2, 9)
    x = rng.randint(2, 40)
    b = rng.randint(1, 60)
    c = a * x + b
    question = (
        f"Problem {index}: solve the equation {a}x + {b} = {c} and report the value of x."
    )
    chain = (
        f"First, the equation says {a}x plus {b} equals {c}. Wait, I should "
        f"verify the arithmetic before answering. Subtracting {b} from both "
        f"sides gives {c - b}, and dividing by {a} gives {x}. Let me verify "
        f"once more: {a} times {x} plus {b} is indeed {c}. Actually, that settles it."
    )
    answer = f"<think>\n{chain}\n</think>\nThe value of x is \\boxed{{{x}}}."
    return {
        "messages": [
            {"role": "user", "content": question},
            {"role": "assistant", "content": answer},
        ]
    }


def _fr_reasoning_record(index: int, rng: random.Random) -> dict:
    a = rng.randint(2, 9)
    x = rng.randint(2, 40)
    b = rng.randint(1, 60)
    c = a * x + b
    question = (
        f"Problème {index} : résoudre l'équation {a}x + {b} = {c} et donner la valeur de x."
    )
    chain = (
        f"D'abord, l'équation dit que {a}x plus {b} vaut {c}. Je soustrais "
        f"{b} des deux côtés, ce qui donne {c - b}. Ensuite je divise par {a} "
        f"et la valeur est {x}. Vérifions encore : {a} fois {x} plus {b} vaut bien {c}."
    )
    answer = f"<think>\n{chain}\n</think>\nLa valeur de x est \\boxed{{{x}}}."
    return {
        "messages": [
            {"role": "user", "content": question},
            {"role": "assistant", "content": answer},
        ]
    }


def _long_question(index: int, filler: list[str], closing: str, words: int = 2_300) -> str:
    parts = []
    total = 0
    k = index
    while total < words:
        sentence = filler[k % len(filler)]
        parts.append(sentence)
        total += len(sentence.split())
        k += 1
    return f"Household notes, volume {index}:\n" + " ".join(parts) + "\n\n" + closing


@dataclass
class CorpusSpec:
    """Exact bookkeeping of the generated corpus."""

    directory: Path
    config_path: Path
    source_files: list[Path] = field(default_factory=list)
    benchmark_path: Path | None = None
    n_lines: int = 0
    n_parseable: int = 0
    n_malformed: int = 0
    n_duplicates: int = 0
    n_contaminated: int = 0
    n_overlength: int = 0
    n_impure: int = 0
    n_english_valid: int = 0
    n_french_valid: int = 0


def generate_corpus(directory: str | Path, seed: int = 0) -> CorpusSpec:
    """Write the full synthetic corpus plus config; returns its bookkeeping."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    spec = CorpusSpec(directory=directory, config_path=directory / "config.yaml")

    # index ranges into the daily grids are disjoint per use
    en_daily_base = range(0, EN_DAILY)
    en_multi_base = range(EN_DAILY, EN_DAILY + EN_MULTI)
    en_contam_base = range(EN_DAILY + EN_MULTI, EN_DAILY + EN_MULTI + CONTAMINATED_EN)
    en_impure_base = range(
        EN_DAILY + EN_MULTI + CONTAMINATED_EN,
        EN_DAILY + EN_MULTI + CONTAMINATED_EN + IMPURE_EN,
    )
    fr_daily_base = range(0, FR_DAILY)
    fr_multi_base = range(FR_DAILY, FR_DAILY + FR_MULTI)
    fr_contam_base = range(FR_DAILY + FR_MULTI, FR_DAILY + FR_MULTI + CONTAMINATED_FR)

    def en_answer(index: int) -> str:
        return _EN_DAILY_ANSWERS[index % len(_EN_DAILY_ANSWERS)]

    def fr_answer(index: int) -> str:
        return _FR_DAILY_ANSWERS[index % len(_FR_DAILY_ANSWERS)]

    def write_jsonl(name: str, lines: list) -> Path:
        path = directory / name
        with path.open("w", encoding="utf-8") as fh:
            for line in lines:
                if isinstance(line, str):
                    fh.write(line + "\n")
                else:
                    fh.write(json.dumps(line, ensure_ascii=False) + "\n")
        spec.source_files.append(path)
        spec.n_lines += len(lines)
        return path

    malformed_messages = [
        '{"messages": [',
        '{"messages": []}',
        '{"messages": [{"role": "user", "content": "   "}]}',
        '{"messages": [{"role": "oracle", "content": "hello there"}]}',
        '{"messages": [{"role": "user", "content": "only a question, no reply"}]}',
    ]

    # reasoning_en.jsonl
    lines: list = [_en_reasoning_record(i, rng) for i in range(EN_REASONING)]
    base_en_reasoning = [dict(r) for r in lines]
    for j in range(DUP_REASONING_EN):
        original = base_en_reasoning[rng.randrange(EN_REASONING)]
        twin = _en_reasoning_record(rng.randrange(10**6), rng)
        twin["messages"][0]["content"] = original["messages"][0]["content"]
        lines.append(twin)
    for j in range(OVERLENGTH_REASONING_EN):
        rec = _en_reasoning_record(10**7 + j, rng)
        rec["messages"][1]["content"] += "\nAppendix: " + " ".join(
            ["ledger"] * OVERLENGTH_WORDS
        )
        lines.append(rec)
    lines.extend(malformed_messages)
    write_jsonl("reasoning_en.jsonl", lines)
    spec.n_malformed += len(malformed_messages)
    spec.n_duplicates += DUP_REASONING_EN
    spec.n_overlength += OVERLENGTH_REASONING_EN

    # daily_en.jsonl (prompt/completion)
    lines = [
        {"prompt": _en_daily_question(i), "completion": en_answer(i)}
        for i in en_daily_base
    ]
    for j in range(DUP_DAILY_EN):
        src = rng.choice(range(EN_DAILY))
        lines.append(
            {"prompt": _en_daily_question(src), "completion": "A fresh answer, same question."}
        )
    for j in range(OVERLENGTH_DAILY_EN):
        lines.append(
            {
                "prompt": f"Please archive the very long household journal, year {j}.",
                "completion": "Of course. " + " ".join(["journal"] * OVERLENGTH_WORDS),
            }
        )
    contaminated_questions = [_en_daily_question(i) for i in en_contam_base]
    lines.extend(
        {"prompt": q, "completion": en_answer(i)} for i, q in enumerate(contaminated_questions)
    )
    for i in en_impure_base:
        lines.append(
            {
                "prompt": _en_daily_question(i)
                + " Mais la vraie question est dans le jardin et je ne la vois pas encore.",
                "completion": en_answer(i),
            }
        )
    malformed_pc = [
        '{"prompt": "a question with no completion"}',
        '{"completion": "an answer with no prompt"}',
        '{"prompt": 42, "completion": "numbers are not questions"}',
        "not json at all",
        '{"prompt": "", "completion": "empty question"}',
    ]
    lines.extend(malformed_pc)
    write_jsonl("daily_en.jsonl", lines)
    spec.n_malformed += len(malformed_pc)
    spec.n_duplicates += DUP_DAILY_EN
    spec.n_overlength += OVERLENGTH_DAILY_EN
    spec.n_contaminated += CONTAMINATED_EN
    spec.n_impure += IMPURE_EN

    # conversations_mixed.jsonl (multi-turn and long-context, both languages)
    lines = []
    for i in en_multi_base:
        lines.append(
            {
                "messages": [
                    {"role": "user", "content": _en_daily_question(i)},
                    {"role": "assistant", "content": en_answer(i)},
                    {
                        "role": "user",
                        "content": "Thank you, and what should we keep in mind when the weather turns bad?",
                    },
                    {
                        "role": "assistant",
                        "content": "Keep the flexible parts of the plan for later in the day, "
                        "and have one cozy indoor option ready so nobody is disappointed.",
                    },
                ]
            }
        )
    for i in range(EN_LONG):
        lines.append(
            {
                "messages": [
                    {
                        "role": "user",
                        "content": _long_question(
                            i,
                            _EN_FILLER,
                            "Given the notes above, what would be a sensible first step for the household?",
                        ),
                    },
                    {
                        "role": "assistant",
                        "content": "Read the notes once together over tea, then pick the single "
                        "smallest task that helps the whole house and start there.",
                    },
                ]
            }
        )
    for i in fr_multi_base:
        lines.append(
            {
                "messages": [
                    {"role": "user", "content": _fr_daily_question(i)},
                    {"role": "assistant", "content": fr_answer(i)},
                    {
                        "role": "user",
                        "content": "Merci, et que faut-il garder en tête quand le temps se gâte ?",
                    },
                    {
                        "role": "assistant",
                        "content": "Garde les parties souples du plan pour plus tard dans la journée, "
                        "et prévois une activité douce à la maison pour que personne ne soit déçu.",
                    },
                ]
            }
        )
    for i in range(FR_LONG):
        lines.append(
            {
                "messages": [
                    {
                        "role": "user",
                        "content": _long_question(
                            i,
                            _FR_FILLER,
                            "Au vu des notes ci-dessus, quel serait un premier pas raisonnable pour la maison ?",
                        ),
                    },
                    {
                        "role": "assistant",
                        "content": "Relisez les notes ensemble autour d'un thé, puis choisissez la "
                        "plus petite tâche utile à toute la maison et partez de là.",
                    },
                ]
            }
        )
    lines.extend(malformed_messages)
    write_jsonl("conversations_mixed.jsonl", lines)
    spec.n_malformed += len(malformed_messages)

    # reasoning_fr.jsonl
    lines = [_fr_reasoning_record(i, rng) for i in range(FR_REASONING)]
    base_fr_reasoning = [dict(r) for r in lines]
    for j in range(DUP_REASONING_FR):
        original = base_fr_reasoning[rng.randrange(FR_REASONING)]
        twin = _fr_reasoning_record(rng.randrange(10**6), rng)
        twin["messages"][0]["content"] = original["messages"][0]["content"]
        lines.append(twin)
    write_jsonl("reasoning_fr.jsonl", lines)
    spec.n_duplicates += DUP_REASONING_FR

    # daily_fr.jsonl (question/answer)
    lines = [
        {"question": _fr_daily_question(i), "answer": fr_answer(i)} for i in fr_daily_base
    ]
    for j in range(DUP_DAILY_FR):
        src = rng.choice(range(FR_DAILY))
        lines.append(
            {"question": _fr_daily_question(src), "answer": "Une autre réponse, même question."}
        )
    contaminated_fr = [_fr_daily_question(i) for i in fr_contam_base]
    lines.extend(
        {"question": q, "answer": fr_answer(i)} for i, q in enumerate(contaminated_fr)
    )
    for j in range(IMPURE_FR):
        lines.append(
            {
                "question": f"0x{j:04d} 12345 67890 24680 13579 ?",
                "answer": f"0x{j:04d} 99999 88888 77777.",
            }
        )
    malformed_qa = [
        '{"question": "where is the answer?"}',
        "also not json",
        '{"question": null, "answer": "nothing asked"}',
        '{"question": "   ", "answer": "blank question"}',
        '{"answer": "no question at all"}',
    ]
    lines.extend(malformed_qa)
    write_jsonl("daily_fr.jsonl", lines)
    spec.n_malformed += len(malformed_qa)
    spec.n_duplicates += DUP_DAILY_FR
    spec.n_contaminated += CONTAMINATED_FR
    spec.n_impure += IMPURE_FR

    # benchmark questions (plain text, one per line)
    spec.benchmark_path = directory / "benchmark.txt"
    with spec.benchmark_path.open("w", encoding="utf-8") as fh:
        for q in contaminated_questions + contaminated_fr:
            fh.write(q + "\n")

    spec.n_parseable = spec.n_lines - spec.n_malformed
    spec.n_english_valid = EN_REASONING + EN_DAILY + EN_MULTI + EN_LONG
    spec.n_french_valid = FR_REASONING + FR_DAILY + FR_MULTI + FR_LONG

    config = {
        "curation": {"seed": seed},
        "llm": {"mode": "mock"},
        "sources": [
            {"path": "reasoning_en.jsonl", "schema": "messages_json"},
            {"path": "daily_en.jsonl", "schema": "prompt_completion"},
            {"path": "conversations_mixed.jsonl", "schema": "messages_json"},
            {"path": "reasoning_fr.jsonl", "schema": "messages_json"},
            {"path": "daily_fr.jsonl", "schema": "qa_pair"},
        ],
        "benchmarks": ["benchmark.txt"],
        "out_dir": "artifacts",
        "tokenizer": "reference",
        "scorer": "stopword",
    }
    spec.config_path.write_text(
        yaml.safe_dump(config, sort_keys=False, allow_unicode=True), encoding="utf-8"
    )
    return spec
