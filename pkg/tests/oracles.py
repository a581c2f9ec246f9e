"""Independent reference implementations used to verify derived behavior.

These deliberately use different algorithms and data structures than the
package (character masks instead of span lists, recursion instead of dynamic
programs, exhaustive enumeration instead of sampling) so agreement is
meaningful.
"""

from __future__ import annotations

from functools import lru_cache

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"
BOXED = "\\boxed{"

LEADING_PUNCT = "\"'`([{«¿¡"


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def naive_think_split(text: str) -> tuple[str | None, str | None, bool]:
    """(think, rest, terminated) via explicit position scanning."""
    open_at = None
    for i in range(len(text) - len(THINK_OPEN) + 1):
        if text.startswith(THINK_OPEN, i):
            open_at = i
            break
    if open_at is None:
        return None, text, True
    body_start = open_at + len(THINK_OPEN)
    close_at = None
    for i in range(body_start, len(text) - len(THINK_CLOSE) + 1):
        if text.startswith(THINK_CLOSE, i):
            close_at = i
            break
    if close_at is None:
        return text[body_start:], None, False
    think = text[body_start:close_at]
    rest = text[:open_at] + text[close_at + len(THINK_CLOSE):]
    return think, rest, True


def naive_boxed_spans(text: str) -> list[str]:
    """Balanced boxed payloads via per-position scanning with backtracking."""
    spans = []
    i = 0
    while i <= len(text) - len(BOXED):
        if not text.startswith(BOXED, i):
            i += 1
            continue
        depth = 1
        j = i + len(BOXED)
        end = None
        while j < len(text):
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
                if depth == 0:
                    end = j
                    break
            j += 1
        if end is None:
            i += 1
        else:
            spans.append(text[i + len(BOXED):end])
            i = end + 1
    return spans


def naive_reflection_counts(text: str, keywords) -> dict[str, int]:
    """Keyword counting with a per-character coverage mask."""
    lowered = text.lower()
    phrases = sorted((k for k in keywords if " " in k), key=len, reverse=True)
    singles = {k for k in keywords if " " not in k}
    covered = [False] * len(lowered)
    counts: dict[str, int] = {}

    for phrase in phrases:
        for i in range(len(lowered) - len(phrase) + 1):
            if lowered.startswith(phrase, i) and not any(covered[i:i + len(phrase)]):
                counts[phrase] = counts.get(phrase, 0) + 1
                for j in range(i, i + len(phrase)):
                    covered[j] = True

    if singles:
        i = 0
        n = len(lowered)
        while i < n:
            if lowered[i].isspace():
                i += 1
                continue
            j = i
            while j < n and not lowered[j].isspace():
                j += 1
            token = lowered[i:j]
            if not any(covered[i:j]):
                s, e = 0, len(token)
                while s < e and not _is_word_char(token[s]):
                    s += 1
                while e > s and not _is_word_char(token[e - 1]):
                    e -= 1
                if token[s:e] in singles:
                    k = 0
                    while k < len(token) and token[k] in LEADING_PUNCT:
                        k += 1
                    variant = token[k:]
                    counts[variant] = counts.get(variant, 0) + 1
            i = j
    return counts


def naive_aggregate(records) -> dict:
    """Second-pass aggregation over analyzed trace records.

    Returns the same dict shape as ReflectionReport.to_dict().
    """
    OOC = "incorrect_out_of_context"
    classes = ["correct", "incorrect", OOC]
    variants: dict[str, list[int]] = {}
    class_counts = {c: 0 for c in classes}
    reflections = {c: 0 for c in classes}
    groups: dict[tuple[str, str], dict[str, int]] = {}
    n = 0
    for rec in records:
        n += 1
        cls = rec.correctness.value
        class_counts[cls] += 1
        total_here = sum(rec.reflection_counts.values())
        reflections[cls] += total_here
        g = groups.setdefault((rec.model, rec.benchmark), {c: 0 for c in classes})
        g[cls] += 1
        for variant, count in rec.reflection_counts.items():
            cell = variants.setdefault(variant, [0, 0])
            if cls == "correct":
                cell[0] += count
            else:
                cell[1] += count
    rows = [
        {"variant": v, "correct": c, "incorrect": i, "total": c + i}
        for v, (c, i) in variants.items()
    ]
    rows.sort(key=lambda r: (-r["total"], r["variant"]))
    return {
        "n_traces": n,
        "class_counts": class_counts,
        "class_means": {
            c: reflections[c] / class_counts[c] for c in classes if class_counts[c]
        },
        "total_reflections": sum(r["total"] for r in rows),
        "variants": rows,
        "distributions": [
            {
                "model": model,
                "benchmark": benchmark,
                "n_traces": sum(counts.values()),
                "counts": counts,
                "fractions": {c: k / sum(counts.values()) for c, k in counts.items()},
            }
            for (model, benchmark), counts in sorted(groups.items())
        ],
    }


def enumerate_inclusion_probs(weights: list[float], n_draws: int) -> list[float]:
    """Exact inclusion probability per item for sequential weighted draws."""
    probs = [0.0] * len(weights)

    def recurse(remaining: tuple[int, ...], p: float, k: int) -> None:
        if k == n_draws:
            return
        total = sum(weights[i] for i in remaining)
        for i in remaining:
            p_i = p * weights[i] / total
            probs[i] += p_i
            recurse(tuple(j for j in remaining if j != i), p_i, k + 1)

    recurse(tuple(range(len(weights))), 1.0, 0)
    return probs


def recursive_expected_reasoning(r: int, o: int, draws: int, w: float) -> float:
    """E[# reasoning draws] by direct recursion over pool states."""

    @lru_cache(maxsize=None)
    def expect(rr: int, oo: int, d: int) -> float:
        if d == 0 or rr + oo == 0:
            return 0.0
        total = w * rr + oo
        out = 0.0
        if rr:
            out += (w * rr / total) * (1.0 + expect(rr - 1, oo, d - 1))
        if oo:
            out += (oo / total) * expect(rr, oo - 1, d - 1)
        return out

    return expect(r, o, draws)
