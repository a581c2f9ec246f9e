"""Annotation clients: a chat-completion HTTP client and a deterministic mock.

Both clients expose ``complete(LlmRequest) -> LlmResponse`` and honor an
optional call budget. The HTTP client speaks the common chat-completion wire
format and retries transient failures with exponential backoff. The mock
recognizes each annotation prompt by a distinctive substring and fabricates a
plausible response, so the whole pipeline runs offline and reproducibly.

Results are memoized through AnnotationCache, an append-only JSONL store
keyed by (prompt_id, content hash); re-runs never re-pay for work already
done.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence, TypeVar

from .ingest import Language
from .langid import StopwordScorer

logger = logging.getLogger(__name__)

ENV_API_KEY = "LLM_API_KEY"
ENV_ENDPOINT = "LLM_ENDPOINT"

DEFAULT_RETRIES = 3
DEFAULT_BACKOFF = 0.5
DEFAULT_CONCURRENCY = 8
RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

T = TypeVar("T")
U = TypeVar("U")


class LlmError(RuntimeError):
    pass


class AnnotationError(LlmError):
    """A call failed permanently (retries exhausted or unusable response)."""


class BudgetExhaustedError(LlmError):
    """The configured call budget was spent."""


@dataclass
class LlmRequest:
    prompt_id: str
    system_prompt: str
    user_content: str
    temperature: float = 0.0
    max_tokens: int = 4096


@dataclass
class LlmResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict | None = None


class LlmClient(Protocol):
    def complete(self, request: LlmRequest) -> LlmResponse: ...


class BudgetMeter:
    """Thread-safe call counter with an optional hard limit."""

    def __init__(self, limit: int | None = None):
        self.limit = limit
        self.calls = 0
        self._lock = threading.Lock()

    def charge(self) -> None:
        with self._lock:
            if self.limit is not None and self.calls >= self.limit:
                raise BudgetExhaustedError(f"call budget of {self.limit} spent")
            self.calls += 1


# one budget unit per logical completion, regardless of retries
class ChatCompletionClient:
    """Minimal chat-completion HTTP client.

    The transport is injectable for tests: a callable taking
    (url, headers, payload) and returning (status_code, body_text).
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        model: str = "default",
        *,
        retries: int = DEFAULT_RETRIES,
        backoff: float = DEFAULT_BACKOFF,
        budget: int | None = None,
        transport: Callable[[str, dict, dict], tuple[int, str]] | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY)
        if not self.endpoint:
            raise LlmError(f"no endpoint configured (set {ENV_ENDPOINT} or pass endpoint=)")
        self.model = model
        self.retries = retries
        self.backoff = backoff
        self.meter = BudgetMeter(budget)
        self._transport = transport or self._requests_transport
        self._sleep = sleep

    @staticmethod
    def _requests_transport(url: str, headers: dict, payload: dict) -> tuple[int, str]:
        import requests

        resp = requests.post(url, headers=headers, json=payload, timeout=120)
        return resp.status_code, resp.text

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.meter.charge()
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_content},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        last_error = "no attempt made"
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                status, body = self._transport(self.endpoint, self._headers(), payload)
            except Exception as exc:
                last_error = f"transport error: {exc}"
                logger.warning("attempt %d failed: %s", attempt + 1, last_error)
                continue
            if status in RETRYABLE_STATUSES:
                last_error = f"retryable status {status}"
                logger.warning("attempt %d failed: %s", attempt + 1, last_error)
                continue
            if status != 200:
                raise AnnotationError(f"status {status}: {body[:200]}")
            try:
                parsed = json.loads(body)
                choice = parsed["choices"][0]
                content = choice["message"]["content"]
            except (json.JSONDecodeError, KeyError, IndexError, TypeError):
                last_error = "malformed response body"
                logger.warning("attempt %d failed: %s", attempt + 1, last_error)
                continue
            if not isinstance(content, str):
                raise AnnotationError("response content is not a string")
            return LlmResponse(
                content,
                finish_reason=choice.get("finish_reason", "stop"),
                usage=parsed.get("usage"),
            )
        raise AnnotationError(
            f"giving up after {self.retries + 1} attempts ({last_error})"
        )


def content_key(prompt_id: str, user_content: str) -> str:
    digest = hashlib.sha256(user_content.encode("utf-8")).hexdigest()[:32]
    return f"{prompt_id}:{digest}"


class AnnotationCache:
    """Append-only JSONL memo of parsed annotation results.

    Entries are {"key": ..., "value": ...}; on load the last write wins.
    Missing file means an empty cache.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        if self.path.is_file():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    self._entries[entry["key"]] = entry["value"]

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, prompt_id: str, user_content: str) -> dict | None:
        return self._entries.get(content_key(prompt_id, user_content))

    def put(self, prompt_id: str, user_content: str, value: dict) -> None:
        key = content_key(prompt_id, user_content)
        line = json.dumps({"key": key, "value": value}, ensure_ascii=False)
        with self._lock:
            self._entries[key] = value
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()


def map_concurrent(
    fn: Callable[[T], U],
    items: Sequence[T],
    concurrency: int = DEFAULT_CONCURRENCY,
) -> list[U]:
    """Apply fn over items with a bounded thread pool, preserving input order."""
    items = list(items)
    if not items:
        return []
    if concurrency <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# deterministic mock

# word-for-word pseudo-translation; must cover every English marker word so
# that translated text carries zero English signal for the stopword scorer
PSEUDO_FRENCH = {
    "the": "le", "and": "et", "of": "de", "to": "à", "in": "dans",
    "is": "est", "are": "sont", "was": "était", "were": "étaient",
    "be": "être", "been": "été", "being": "étant", "it": "cela",
    "that": "que", "this": "ceci", "these": "ceux", "those": "ceux",
    "with": "avec", "for": "pour", "from": "depuis", "by": "par",
    "at": "à", "not": "pas", "have": "avoir", "has": "a", "had": "avait",
    "will": "va", "would": "voudrait", "can": "peut", "could": "pourrait",
    "should": "devrait", "shall": "devra", "there": "là", "their": "leur",
    "they": "ils", "them": "les", "then": "puis", "than": "que",
    "we": "nous", "you": "vous", "he": "il", "she": "elle", "his": "ses",
    "her": "sa", "its": "ses", "my": "mon", "your": "votre", "our": "notre",
    "what": "quoi", "which": "quel", "when": "quand", "where": "où",
    "how": "comment", "why": "pourquoi", "all": "tout", "each": "chaque",
    "some": "des", "more": "plus", "most": "plupart", "other": "autre",
    "into": "dans", "because": "parce", "if": "si", "so": "donc",
    "do": "faire", "does": "fait", "did": "fait", "also": "aussi",
    "only": "seulement", "just": "juste", "now": "maintenant",
    "very": "très", "such": "tel", "no": "non", "yes": "oui",
    "any": "tout", "both": "deux", "between": "entre", "during": "pendant",
    "after": "après", "before": "avant", "above": "dessus", "under": "sous",
    "again": "encore", "here": "ici", "i": "je", "us": "nous",
    # content words that appear in generated corpora and demos
    "number": "nombre", "numbers": "nombres", "question": "question",
    "answer": "réponse", "solve": "résoudre", "compute": "calculer",
    "calculate": "calculer", "find": "trouver", "sum": "somme",
    "prove": "prouver", "first": "premier", "second": "deuxième",
    "explain": "expliquer", "write": "écrire", "story": "histoire",
    "steps": "étapes", "step": "étape", "list": "liste", "value": "valeur",
    "train": "train", "speed": "vitesse", "hours": "heures", "hour": "heure",
    "total": "total", "cost": "coût", "price": "prix", "apples": "pommes",
    "correct": "correct", "result": "résultat", "equation": "équation",
    "digits": "chiffres", "digit": "chiffre", "remainder": "reste",
    "integer": "entier", "integers": "entiers", "positive": "positif",
    "triangle": "triangle", "area": "aire", "capital": "capitale",
    "city": "ville", "country": "pays", "water": "eau", "light": "lumière",
    "people": "gens", "day": "jour", "year": "année", "time": "temps",
    "money": "argent", "book": "livre", "words": "mots", "word": "mot",
    "best": "meilleur", "way": "façon", "make": "faire", "good": "bon",
    "many": "beaucoup", "much": "beaucoup", "new": "nouveau",
    "plan": "plan", "name": "nom", "long": "long", "small": "petit",
    "large": "grand", "give": "donner", "gives": "donne", "take": "prendre",
    "takes": "prend", "leaves": "part", "travels": "parcourt",
    "per": "par", "same": "même", "left": "reste", "store": "magasin",
    "buys": "achète", "sells": "vend", "costs": "coûte", "needs": "faut",
    "work": "travail", "works": "marche", "get": "obtenir",
    "show": "montrer", "true": "vrai", "false": "faux",
}

_PT_TOKEN_RE = re.compile(r"\w+|\W+", re.UNICODE)


def pseudo_translate(text: str) -> str:
    """Dictionary-based English-to-French token substitution.

    Deterministic and reversibility-free: known words are swapped, casing of
    an initial capital is kept, everything else passes through.
    """
    out = []
    for token in _PT_TOKEN_RE.findall(text):
        repl = PSEUDO_FRENCH.get(token.lower())
        if repl is None:
            out.append(token)
        elif token[:1].isupper():
            out.append(repl[:1].upper() + repl[1:])
        else:
            out.append(repl)
    return "".join(out)


# substrings that identify each annotation prompt
_KIND_MARKERS = (
    ("translate", "expert en linguistique"),
    ("augment", "highly critical and analytical"),
    ("difficulty", "expert in question analysis"),
    ("task_type", "expert librarian"),
)

_MATHY_RE = re.compile(
    r"\d|\bsolve\b|\bcompute\b|\bcalculate\b|\bprove\b|\bequation\b"
    r"|\brésoudre\b|\bcalculer\b|\bcombien\b|\béquation\b",
    re.IGNORECASE,
)

_TASK_TYPE_HINTS = (
    ("Mathematical Reasoning", ("solve", "equation", "compute", "calculate", "résoudre", "calculer", "combien")),
    ("Creative Generation", ("write a", "story", "poem", "écrire", "histoire", "poème")),
    ("Procedural Guidance", ("how do i", "steps", "step by step", "étapes", "comment faire")),
    ("Critical Evaluation", ("reliable", "is this", "evaluate", "évaluer", "fiable")),
    ("Conceptual Explanation", ("explain", "expliquer", "pourquoi", "why does")),
    ("Analysis", ("compare", "comparer", "analyze", "analyser")),
    ("Synthesis", ("create a", "combine", "plan from", "créer un")),
    ("Interactive Simulation", ("act as", "role", "pretend", "joue le rôle")),
    ("Problem-Solving", ("troubleshoot", "fix", "problem", "problème", "réparer")),
)


class MockLlmClient:
    """Offline stand-in that fabricates deterministic annotations.

    The prompt kind is detected from the system prompt; unknown prompts fail
    loudly. A fixture dict (user content -> response content) can pin exact
    responses for tests.
    """

    def __init__(self, fixture: dict[str, str] | None = None, budget: int | None = None):
        self.fixture = dict(fixture or {})
        self.meter = BudgetMeter(budget)
        self.calls_by_kind: dict[str, int] = {}
        self._lock = threading.Lock()
        self._scorer = StopwordScorer()

    @classmethod
    def from_fixture_file(cls, path: str | Path, budget: int | None = None) -> "MockLlmClient":
        with Path(path).open("r", encoding="utf-8") as fh:
            return cls(json.load(fh), budget=budget)

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.meter.charge()
        kind = self._detect_kind(request.system_prompt)
        with self._lock:
            self.calls_by_kind[kind] = self.calls_by_kind.get(kind, 0) + 1
        if request.user_content in self.fixture:
            content = self.fixture[request.user_content]
        else:
            content = self._synthesize(kind, request.user_content)
        usage = {
            "prompt_tokens": len(request.system_prompt.split()) + len(request.user_content.split()),
            "completion_tokens": len(content.split()),
        }
        return LlmResponse(content, usage=usage)

    @staticmethod
    def _detect_kind(system_prompt: str) -> str:
        for kind, marker in _KIND_MARKERS:
            if marker in system_prompt:
                return kind
        raise AnnotationError("mock client does not recognize this prompt")

    def _synthesize(self, kind: str, content: str) -> str:
        if kind == "translate":
            return pseudo_translate(content)
        if kind == "augment":
            return self._thinking_chain(content)
        if kind == "difficulty":
            label = "reasoning" if _MATHY_RE.search(content) else "understanding"
            return (
                "The question's cognitive demands point one way. "
                f"Final classification: \\boxed{{{label}}}"
            )
        if kind == "task_type":
            lowered = content.lower()
            label = "Information Retrieval"
            for candidate, hints in _TASK_TYPE_HINTS:
                if any(h in lowered for h in hints):
                    label = candidate
                    break
            return (
                "The intent is clear from the phrasing, and the subject fits one "
                f"category best. \\boxed{{{label}}}"
            )
        raise AnnotationError(f"unhandled prompt kind {kind!r}")

    def _thinking_chain(self, content: str) -> str:
        # chains are always English, mirroring the augmentation instructions
        question = content.strip().splitlines()[0][:120] if content.strip() else "this"
        lang, _ = self._scorer.score(content)
        origin = "French" if lang is Language.FR else "plain"
        return (
            f"Oh, let's see. The request here is: {question}\n"
            f"Hmm, the {origin} phrasing asks for one concrete thing, so I should "
            "pin down the core requirement first.\n"
            "Wait, I need to double-check what is actually being asked rather than "
            "what it superficially resembles.\n"
            "Let me verify the essentials once more: identify the subject, the "
            "constraint, and the expected form of the reply.\n"
            "Actually, that covers it. A direct, well-grounded response is what "
            "is needed."
        )


def make_client(
    mode: str,
    *,
    endpoint: str | None = None,
    api_key: str | None = None,
    model: str = "default",
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    budget: int | None = None,
) -> LlmClient:
    """Build a client from a mode string: ``live``, ``mock`` or ``mock:<fixture>``."""
    if mode == "live":
        return ChatCompletionClient(
            endpoint, api_key, model, retries=retries, backoff=backoff, budget=budget
        )
    if mode == "mock":
        return MockLlmClient(budget=budget)
    if mode.startswith("mock:"):
        return MockLlmClient.from_fixture_file(mode[len("mock:"):], budget=budget)
    raise ValueError(f"unknown llm mode: {mode!r}")
