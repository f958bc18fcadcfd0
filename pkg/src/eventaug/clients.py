"""Clients for the NER / NLI / embedding endpoints, plus in-process stubs.

Each protocol has an HTTP implementation speaking the documented wire format
and a deterministic stub so the whole pipeline runs offline. The stubs are
pure functions of their inputs: identical requests give identical responses.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple, Protocol, Sequence

import requests

from .text import overlap_ratio, tokenize


class ClientError(RuntimeError):
    """An endpoint could not be reached or kept answering badly."""


class TaggedEntity(NamedTuple):
    text: str
    label: str
    start: int
    end: int


class NliScores(NamedTuple):
    entail: float
    neutral: float
    contradict: float


class NerClient(Protocol):
    def tag_batch(self, sentences: Sequence[str]) -> list[list[TaggedEntity]]: ...


class NliClient(Protocol):
    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[NliScores]: ...


class EmbedClient(Protocol):
    def embed(self, sentences: Sequence[str]) -> list[list[float]]: ...


@dataclass(frozen=True)
class RetryPolicy:
    retries: int = 2          # re-attempts after the first try
    backoff_s: float = 0.25
    backoff_factor: float = 2.0


def post_json(
    session: requests.Session,
    url: str,
    payload: Mapping[str, Any],
    timeout: float,
    retry: RetryPolicy,
) -> Any:
    """POST JSON with retry on transport errors, 429 and 5xx."""
    delay = retry.backoff_s
    last: Exception | None = None
    for attempt in range(retry.retries + 1):
        try:
            resp = session.post(url, json=payload, timeout=timeout)
            if resp.status_code == 429 or resp.status_code >= 500:
                last = ClientError(f"{url} answered {resp.status_code}")
            else:
                resp.raise_for_status()
                return resp.json()
        except requests.RequestException as exc:
            last = exc
        if attempt < retry.retries:
            time.sleep(delay)
            delay *= retry.backoff_factor
    raise ClientError(f"{url} failed after {retry.retries + 1} attempts: {last}")


# ---------------------------------------------------------------------------
# HTTP implementations


class HttpNerClient:
    """POST /ner with {"sentences": [...]}, returns per-sentence entity lists."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 10.0,
        retry: RetryPolicy = RetryPolicy(),
        session: requests.Session | None = None,
    ):
        self.url = base_url.rstrip("/") + "/ner"
        self.timeout = timeout
        self.retry = retry
        self.session = session or requests.Session()

    def tag_batch(self, sentences: Sequence[str]) -> list[list[TaggedEntity]]:
        body = post_json(self.session, self.url, {"sentences": list(sentences)}, self.timeout, self.retry)
        out: list[list[TaggedEntity]] = []
        for ents in body["results"]:
            out.append(
                [TaggedEntity(e["text"], e["label"], int(e["start"]), int(e["end"])) for e in ents]
            )
        if len(out) != len(sentences):
            raise ClientError(f"{self.url}: expected {len(sentences)} results, got {len(out)}")
        return out


class HttpNliClient:
    """POST /nli with premise/hypothesis pairs, returns entail/neutral/contradict."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 10.0,
        retry: RetryPolicy = RetryPolicy(),
        session: requests.Session | None = None,
    ):
        self.url = base_url.rstrip("/") + "/nli"
        self.timeout = timeout
        self.retry = retry
        self.session = session or requests.Session()

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[NliScores]:
        payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in pairs]}
        body = post_json(self.session, self.url, payload, self.timeout, self.retry)
        scores = [
            NliScores(float(s["entail"]), float(s["neutral"]), float(s["contradict"]))
            for s in body["scores"]
        ]
        if len(scores) != len(pairs):
            raise ClientError(f"{self.url}: expected {len(pairs)} scores, got {len(scores)}")
        return scores


class HttpEmbedClient:
    """POST /embed with {"sentences": [...]}, returns fixed-dimension vectors."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 10.0,
        retry: RetryPolicy = RetryPolicy(),
        session: requests.Session | None = None,
    ):
        self.url = base_url.rstrip("/") + "/embed"
        self.timeout = timeout
        self.retry = retry
        self.session = session or requests.Session()

    def embed(self, sentences: Sequence[str]) -> list[list[float]]:
        body = post_json(self.session, self.url, {"sentences": list(sentences)}, self.timeout, self.retry)
        vectors = [[float(x) for x in v] for v in body["vectors"]]
        if len(vectors) != len(sentences):
            raise ClientError(f"{self.url}: expected {len(sentences)} vectors, got {len(vectors)}")
        return vectors


# ---------------------------------------------------------------------------
# Deterministic stubs


def load_gazetteer(path: str | Path) -> dict[str, str]:
    """Read a surface<TAB>label file; blank lines and #comments are skipped."""
    table: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            surface, label = line.split("\t")
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: expected 'surface<TAB>label'") from exc
        table[surface] = label
    return table


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def gazetteer_tag(sentence: str, gazetteer: Mapping[str, str]) -> list[TaggedEntity]:
    """Longest-match gazetteer lookup with word-boundary guards."""
    surfaces = sorted(gazetteer, key=len, reverse=True)
    entities: list[TaggedEntity] = []
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
            entities.append(TaggedEntity(matched, gazetteer[matched], i, i + len(matched)))
            i += len(matched)
    return entities


class GazetteerNer:
    """Deterministic NER: longest-match lookup against a fixed gazetteer."""

    def __init__(self, gazetteer: Mapping[str, str]):
        self.gazetteer = dict(gazetteer)

    @classmethod
    def from_file(cls, path: str | Path) -> "GazetteerNer":
        return cls(load_gazetteer(path))

    def tag_batch(self, sentences: Sequence[str]) -> list[list[TaggedEntity]]:
        return [gazetteer_tag(s, self.gazetteer) for s in sentences]


class OverlapNli:
    """Entail score = fraction of hypothesis tokens covered by the premise.

    Directionally asymmetric on purpose: back-validation relies on the two
    directions scoring differently. Requests are logged on .calls so tests
    can audit which side carried the premise.
    """

    def __init__(self) -> None:
        self.calls: list[tuple[str, str]] = []

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[NliScores]:
        out: list[NliScores] = []
        for premise, hypothesis in pairs:
            self.calls.append((premise, hypothesis))
            entail = overlap_ratio(premise, hypothesis)
            out.append(NliScores(entail=entail, neutral=1.0 - entail, contradict=0.0))
        return out


class HashedEmbedder:
    """Bag-of-words hashed into a fixed dimension, L2-normalized."""

    def __init__(self, dim: int = 64):
        if dim < 1:
            raise ValueError("embedding dimension must be >= 1")
        self.dim = dim

    def embed(self, sentences: Sequence[str]) -> list[list[float]]:
        out: list[list[float]] = []
        for sentence in sentences:
            vec = [0.0] * self.dim
            for tok in tokenize(sentence):
                idx = int.from_bytes(hashlib.sha256(tok.encode("utf-8")).digest()[:8], "big")
                vec[idx % self.dim] += 1.0
            norm = sum(x * x for x in vec) ** 0.5
            if norm > 0:
                vec = [x / norm for x in vec]
            out.append(vec)
        return out


@dataclass
class RecordingNli:
    """Test double wrapping fixed scores while logging request pairs."""

    scores: dict[tuple[str, str], float] = field(default_factory=dict)
    default: float = 0.0
    calls: list[tuple[str, str]] = field(default_factory=list)

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[NliScores]:
        out = []
        for pair in pairs:
            self.calls.append(pair)
            entail = self.scores.get(pair, self.default)
            out.append(NliScores(entail=entail, neutral=1.0 - entail, contradict=0.0))
        return out
