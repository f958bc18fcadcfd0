"""Tokenization and a small deterministic English lemmatizer.

The lemmatizer is a table of irregulars plus ordered suffix rules. It is
intentionally approximate: the goal is a pure, dependency-free function so
that index builds and overlap scoring are reproducible byte-for-byte, not
linguistic perfection.
"""
from __future__ import annotations

import re
from typing import Iterable, Mapping

TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z]+)?")

_IRREGULAR = {
    "men": "man",
    "women": "woman",
    "children": "child",
    "people": "person",
    "feet": "foot",
    "teeth": "tooth",
    "mice": "mouse",
    "went": "go",
    "gone": "go",
    "said": "say",
    "made": "make",
    "took": "take",
    "taken": "take",
    "gave": "give",
    "given": "give",
    "got": "get",
    "held": "hold",
    "found": "find",
    "left": "leave",
    "paid": "pay",
    "sold": "sell",
    "bought": "buy",
    "brought": "bring",
    "thought": "think",
    "began": "begin",
    "begun": "begin",
    "wrote": "write",
    "written": "write",
    "met": "meet",
    "was": "be",
    "were": "be",
    "is": "be",
    "are": "be",
    "been": "be",
    "has": "have",
    "had": "have",
    "did": "do",
    "does": "do",
    # e-final verbs the suffix rules would clip
    "fined": "fine",
    "fines": "fine",
    "fining": "fine",
    "declared": "declare",
    "declares": "declare",
    "declaring": "declare",
    "sentenced": "sentence",
    "sentences": "sentence",
    "sentencing": "sentence",
}

_VOWELS = set("aeiou")


def tokenize(text: str, lower: bool = True) -> list[str]:
    """Split text into word tokens; lowercased by default."""
    tokens = TOKEN_RE.findall(text)
    return [t.lower() for t in tokens] if lower else tokens


def _strip_double(stem: str) -> str:
    # planned -> plan, running -> run; keep legitimate doubles like "fall"
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "sl":
        return stem[:-1]
    return stem


def lemmatize(token: str, extra: Mapping[str, str] | None = None) -> str:
    """Map an inflected lowercase token to a base form.

    One rule fires per token; rules are ordered most-specific first.
    """
    t = token.lower()
    if extra and t in extra:
        return extra[t]
    if t in _IRREGULAR:
        return _IRREGULAR[t]
    if len(t) > 4 and t.endswith("ies"):
        return t[:-3] + "y"
    if len(t) > 4 and t.endswith("ied"):
        return t[:-3] + "y"
    if len(t) > 5 and t.endswith("ing"):
        return _strip_double(t[:-3])
    if len(t) > 4 and t.endswith("ed"):
        return _strip_double(t[:-2])
    if len(t) > 3 and t.endswith("es") and t[-3] in "sxz":
        return t[:-2]
    if len(t) > 4 and (t.endswith("ches") or t.endswith("shes")):
        return t[:-2]
    if len(t) > 3 and t.endswith("s") and not t.endswith("ss") and not t.endswith("us") and not t.endswith("is"):
        return t[:-1]
    return t


NORMALIZATION_MODES = ("exact", "lowercase", "lemmatized")


def normalize_tokens(
    text: str, mode: str, extra_lemmas: Mapping[str, str] | None = None
) -> list[str]:
    """Tokenize and normalize per the index normalization mode."""
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode: {mode!r}")
    if mode == "exact":
        return tokenize(text, lower=False)
    tokens = tokenize(text, lower=True)
    if mode == "lowercase":
        return tokens
    return [lemmatize(t, extra_lemmas) for t in tokens]


def overlap_ratio(premise: str, hypothesis: str) -> float:
    """Fraction of distinct hypothesis tokens that also occur in the premise.

    Directional by construction: swapping arguments changes the score. An
    empty hypothesis is vacuously covered (1.0).
    """
    hyp = set(tokenize(hypothesis))
    if not hyp:
        return 1.0
    prem = set(tokenize(premise))
    ratio = len(hyp & prem) / len(hyp)
    return min(1.0, max(0.0, ratio))


def first_sentence(text: str) -> str:
    """Truncate to the first sentence boundary.

    A boundary is .!? followed by whitespace and an uppercase letter, which
    leaves abbreviations like "Inc. declared" intact.
    """
    match = re.search(r"(?<=[.!?])\s+(?=[A-Z\"'])", text)
    if match:
        return text[: match.start()].rstrip()
    return text


def unique_preserving_order(items: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out
