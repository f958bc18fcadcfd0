"""Deterministic heuristics behind the four inference routes.

Every function here is a pure function of its text inputs, so the server
returns identical bytes for identical requests. The contracts mirror the
pipeline's in-process stubs exactly; keep the two in lockstep.
"""
from __future__ import annotations

import hashlib
import re
from typing import Mapping, NamedTuple

TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z]+)?")

_IRREGULAR = {
    "men": "man",
    "women": "woman",
    "children": "child",
    "people": "person",
    "went": "go",
    "said": "say",
    "made": "make",
    "took": "take",
    "paid": "pay",
    "held": "hold",
    "found": "find",
    "left": "leave",
    "was": "be",
    "were": "be",
    "is": "be",
    "are": "be",
    "has": "have",
    "had": "have",
    "fined": "fine",
    "fines": "fine",
    "fining": "fine",
    "declared": "declare",
    "declares": "declare",
    "declaring": "declare",
}

_VOWELS = set("aeiou")


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in TOKEN_RE.findall(text)]


def _strip_double(stem: str) -> str:
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "sl":
        return stem[:-1]
    return stem


def lemmatize(token: str, extra: Mapping[str, str] | None = None) -> str:
    """Table + suffix-rule lemmatizer, available to plugged model providers."""
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


class Entity(NamedTuple):
    text: str
    label: str
    start: int
    end: int


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def gazetteer_tag(sentence: str, gazetteer: Mapping[str, str]) -> list[Entity]:
    """Longest-match gazetteer lookup with word-boundary guards."""
    surfaces = sorted(gazetteer, key=len, reverse=True)
    entities: list[Entity] = []
    i = 0
    n = len(sentence)
    while i < n:
        if i > 0 and _is_word_char(sentence[i - 1]) and _is_word_char(sentence[i]):
            i += 1
            continue
        matched = None
        for surface in surfaces:
            end = i + len(surface)
            if sentence.startswith(surface, i):
                if end < n and _is_word_char(sentence[end - 1]) and _is_word_char(sentence[end]):
                    continue
                matched = surface
                break
        if matched is None:
            i += 1
        else:
            entities.append(Entity(matched, gazetteer[matched], i, i + len(matched)))
            i += len(matched)
    return entities


def overlap_entailment(premise: str, hypothesis: str) -> float:
    """Fraction of distinct hypothesis tokens covered by the premise."""
    hyp = set(tokenize(hypothesis))
    if not hyp:
        return 1.0
    prem = set(tokenize(premise))
    return min(1.0, max(0.0, len(hyp & prem) / len(hyp)))


def hashed_embedding(sentence: str, dim: int) -> list[float]:
    """Bag-of-words hashed into a fixed dimension, L2-normalized."""
    vec = [0.0] * dim
    for tok in tokenize(sentence):
        idx = int.from_bytes(hashlib.sha256(tok.encode("utf-8")).digest()[:8], "big")
        vec[idx % dim] += 1.0
    norm = sum(x * x for x in vec) ** 0.5
    if norm > 0:
        vec = [x / norm for x in vec]
    return vec


# Template echo with slot fill and polarity rewrite rules. The markers and
# frames match the pipeline's stub agent character for character.

_REWRITE_SENT_RE = re.compile(
    r"Given the generated sentence(?: you provide)?, ['\"](.*?)['\"], change it into",
    re.DOTALL,
)
_REWRITE_KIND_MARKERS = (
    ("negative expression", "negative"),
    ("believed event sentence", "believed"),
    ("hypothetical event sentence", "hypothetical"),
    ("promised event sentence", "promised"),
    ("Desired event sentence", "desired"),
)
_TEMPLATE_RE = re.compile(r"Event trigger is (.+?)\.\s+(.*)$", re.DOTALL)

_REWRITE_FRAMES = {
    "negative": "It did not happen that {sent}",
    "believed": "It is believed that {sent}",
    "hypothetical": "Hypothetically, it could happen that {sent}",
    "promised": "It was promised that {sent}",
    "desired": "They desired that {sent}",
}

_FALLBACK_SENTENCE = "No event information was provided."


def echo_completion(prompt_text: str) -> str:
    """Deterministic completion: polarity frame for rewrite prompts, filled
    template echoed with the trigger appended for generation prompts."""
    sent_match = _REWRITE_SENT_RE.search(prompt_text)
    if sent_match:
        sentence = sent_match.group(1)
        for marker, kind in _REWRITE_KIND_MARKERS:
            if marker in prompt_text:
                return _REWRITE_FRAMES[kind].format(sent=sentence)
        return sentence
    template_match = _TEMPLATE_RE.search(prompt_text)
    if template_match:
        trigger = template_match.group(1)
        passage = template_match.group(2).strip().rstrip(".")
        return f'{passage}, triggered by "{trigger}".'
    return _FALLBACK_SENTENCE
