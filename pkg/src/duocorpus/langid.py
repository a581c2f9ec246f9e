"""Language identification for English/French text.

The default scorer needs no model file: it counts function-word markers for
each language and reports the winner with a confidence equal to the winner's
share of all marker hits. Marker lists deliberately exclude words that are
common in both languages ("a", "as", "on", "or", "but", "car", "son", "plus")
and single letters that collide with math variable names.

A fastText-backed scorer can be swapped in when a model file is available;
both satisfy the same protocol.
"""

from __future__ import annotations

import re
from typing import Protocol, runtime_checkable

from .ingest import Language

ENGLISH_MARKERS = frozenset(
    """
    the and of to in is are was were be been being it that this these those
    with for from by at not have has had will would can could should shall
    there their they them then than we you he she his her its my your our
    what which when where how why all each some more most other into because
    if so do does did also only just now very such no yes any both between
    during after before above under again here i us
    """.split()
)

FRENCH_MARKERS = frozenset(
    """
    le la les un une des du de au aux et où est sont était été être avoir
    dans sur avec pour par pas ne je tu il elle nous vous ils elles ce cette
    ces cet se sa ses mon ma qui que quoi dont mais donc si très bien tout
    tous toute toutes comme aussi alors ainsi cela ça même leur leurs votre
    notre vos nos mes tes quel quelle quels quelles chaque sans sous entre
    vers chez déjà encore toujours jamais rien quand pourquoi comment parce
    puis ensuite enfin voici voilà cependant toutefois néanmoins doit peut
    faut fait va ont ai avons avez suis es en
    """.split()
)

assert not (ENGLISH_MARKERS & FRENCH_MARKERS)

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


@runtime_checkable
class LanguageIdScorer(Protocol):
    name: str

    def score(self, text: str) -> tuple[Language, float]:
        """Return (language, confidence in [0, 1])."""
        ...


class StopwordScorer:
    """Marker-ratio scorer. Deterministic, dependency-free.

    Confidence is winner_hits / (en_hits + fr_hits). Text with no marker hits
    in either language scores (unknown, 0.0); an exact tie scores
    (unknown, 0.5).
    """

    name = "stopword"

    def score(self, text: str) -> tuple[Language, float]:
        en = fr = 0
        for word in _WORD_RE.findall(text.lower()):
            if word in ENGLISH_MARKERS:
                en += 1
            elif word in FRENCH_MARKERS:
                fr += 1
        total = en + fr
        if total == 0:
            return Language.UNKNOWN, 0.0
        if en == fr:
            return Language.UNKNOWN, 0.5
        if en > fr:
            return Language.EN, en / total
        return Language.FR, fr / total


class FastTextScorer:
    """Scorer backed by a fastText language-id model file.

    Requires the ``fasttext`` package; import is deferred. Labels other than
    en/fr map to unknown while keeping the model's confidence.
    """

    def __init__(self, model_path: str):
        import fasttext

        self._model = fasttext.load_model(str(model_path))
        self.name = f"fasttext:{model_path}"

    def score(self, text: str) -> tuple[Language, float]:
        labels, probs = self._model.predict(text.replace("\n", " "))
        if not labels:
            return Language.UNKNOWN, 0.0
        label = labels[0].removeprefix("__label__")
        confidence = float(probs[0])
        if label in (Language.EN.value, Language.FR.value):
            return Language(label), confidence
        return Language.UNKNOWN, confidence


def make_scorer(spec: str) -> LanguageIdScorer:
    """Build a scorer from a config string: ``stopword`` or ``fasttext:<path>``."""
    if spec == "stopword":
        return StopwordScorer()
    if spec.startswith("fasttext:"):
        return FastTextScorer(spec[len("fasttext:"):])
    raise ValueError(f"unknown scorer spec: {spec!r}")
