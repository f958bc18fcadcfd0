"""Inverted index over a sentence-per-line corpus and dependent context retrieval.

Sentences that share the event trigger token are retrieved, then a NER
endpoint turns them into context candidates (entity lists) for enrichment.
"""
from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .clients import ClientError, NerClient
from .model import EventStructure
from .text import NORMALIZATION_MODES, normalize_tokens
from .util import canonical_json, sha256_file

log = logging.getLogger(__name__)

INDEX_FORMAT = "eventaug-corpus-index"
INDEX_VERSION = 1


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class ContextCandidate:
    """Entities extracted from one retrieved corpus sentence."""

    source_sentence_id: int
    entities: tuple[tuple[str, str], ...]  # (surface_text, entity_type)

    def __post_init__(self) -> None:
        if not self.entities:
            raise CorpusError("context candidate must carry at least one entity")


@dataclass(frozen=True)
class CorpusIndex:
    sentences: Mapping[int, str]            # sentence id (1-based line number) -> raw text
    postings: Mapping[str, tuple[int, ...]]  # normalized token -> sorted unique ids
    mode: str
    corpus_sha256: str = ""

    def __post_init__(self) -> None:
        if self.mode not in NORMALIZATION_MODES:
            raise CorpusError(f"unknown normalization mode {self.mode!r}")

    def sentence(self, sentence_id: int) -> str:
        return self.sentences[sentence_id]

    def lookup(self, token: str) -> tuple[int, ...]:
        """Posting list for one already-normalized token."""
        return self.postings.get(token, ())


def build_index(corpus_path: str | Path, normalization_mode: str = "lemmatized") -> CorpusIndex:
    """Index a UTF-8, one-sentence-per-line corpus.

    Sentence ids are 1-based line numbers; blank lines keep their number but
    are not stored. Encoding problems are reported with the line number.
    """
    corpus_path = Path(corpus_path)
    sentences: dict[int, str] = {}
    postings: dict[str, set[int]] = {}
    raw = corpus_path.read_bytes()
    for lineno, line_bytes in enumerate(raw.split(b"\n"), 1):
        try:
            line = line_bytes.decode("utf-8").rstrip("\r")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{corpus_path}: line {lineno}: not valid UTF-8: {exc}") from exc
        if not line.strip():
            continue
        sentences[lineno] = line
        for token in normalize_tokens(line, normalization_mode):
            postings.setdefault(token, set()).add(lineno)
    return CorpusIndex(
        sentences=sentences,
        postings={tok: tuple(sorted(ids)) for tok, ids in postings.items()},
        mode=normalization_mode,
        corpus_sha256=sha256_file(corpus_path),
    )


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Persist in the versioned line-oriented format (deterministic bytes)."""
    lines = [
        canonical_json(
            {
                "format": INDEX_FORMAT,
                "version": INDEX_VERSION,
                "mode": index.mode,
                "corpus_sha256": index.corpus_sha256,
            }
        )
    ]
    for sid in sorted(index.sentences):
        lines.append(canonical_json(["s", sid, index.sentences[sid]]))
    for token in sorted(index.postings):
        lines.append(canonical_json(["p", token, list(index.postings[token])]))
    Path(path).write_bytes(("".join(line + "\n" for line in lines)).encode("utf-8"))


def load_index(path: str | Path) -> CorpusIndex:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: bad index header: {exc}") from exc
        if header.get("format") != INDEX_FORMAT or header.get("version") != INDEX_VERSION:
            raise CorpusError(f"{path}: not a version-{INDEX_VERSION} {INDEX_FORMAT} file")
        sentences: dict[int, str] = {}
        postings: dict[str, tuple[int, ...]] = {}
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            kind, key, value = json.loads(line)
            if kind == "s":
                sentences[int(key)] = value
            elif kind == "p":
                postings[key] = tuple(int(i) for i in value)
            else:
                raise CorpusError(f"{path}: line {lineno}: unknown record kind {kind!r}")
    return CorpusIndex(
        sentences=sentences,
        postings=postings,
        mode=header["mode"],
        corpus_sha256=header.get("corpus_sha256", ""),
    )


def load_or_build(
    corpus_path: str | Path, normalization_mode: str, index_path: str | Path
) -> CorpusIndex:
    """Reuse the on-disk index unless the corpus hash or mode changed."""
    index_path = Path(index_path)
    if index_path.exists():
        try:
            index = load_index(index_path)
        except (CorpusError, json.JSONDecodeError, ValueError):
            index = None
        if (
            index is not None
            and index.mode == normalization_mode
            and index.corpus_sha256 == sha256_file(corpus_path)
        ):
            return index
        log.info("index at %s is stale, rebuilding", index_path)
    index = build_index(corpus_path, normalization_mode)
    save_index(index, index_path)
    return index


def retrieve_by_trigger(
    index: CorpusIndex,
    structure: EventStructure,
    limit: int,
    rng: random.Random | None = None,
) -> list[int]:
    """Ids of sentences containing every (normalized) trigger token.

    Multi-token triggers intersect posting lists. Default order is ascending
    id truncated to `limit`; passing a seeded rng samples uniformly instead.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    tokens = normalize_tokens(structure.trigger, index.mode)
    if not tokens:
        return []
    matches: set[int] | None = None
    for token in tokens:
        ids = set(index.lookup(token))
        matches = ids if matches is None else matches & ids
        if not matches:
            return []
    ordered = sorted(matches or ())
    if len(ordered) <= limit:
        return ordered
    if rng is None:
        return ordered[:limit]
    return sorted(rng.sample(ordered, limit))


def extract_context(
    index: CorpusIndex,
    sentence_ids: Sequence[int],
    ner_client: NerClient,
    allowed_labels: Iterable[str] | None = None,
    batch_size: int = 16,
    concurrency: int = 1,
) -> list[ContextCandidate]:
    """Tag retrieved sentences and keep those yielding at least one entity.

    One candidate is emitted per input id occurrence (callers dedup). A
    failed NER batch is logged and skipped; the pipeline continues. Results
    are returned in input order regardless of request concurrency.
    """
    texts = [index.sentence(sid) for sid in sentence_ids]
    batches = [
        (sentence_ids[i : i + batch_size], texts[i : i + batch_size])
        for i in range(0, len(texts), batch_size)
    ]

    def tag(batch: tuple[Sequence[int], list[str]]):
        ids, chunk = batch
        try:
            return ner_client.tag_batch(chunk)
        except ClientError as exc:
            log.warning("NER failed for sentences %s: %s", list(ids), exc)
            return [None] * len(chunk)

    if concurrency > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            tagged_batches = list(pool.map(tag, batches))
    else:
        tagged_batches = [tag(b) for b in batches]

    allowed = frozenset(allowed_labels) if allowed_labels is not None else None
    candidates: list[ContextCandidate] = []
    for (ids, _), tagged in zip(batches, tagged_batches):
        for sid, entities in zip(ids, tagged):
            if entities is None or not entities:
                continue
            if allowed is not None:
                unknown = {e.label for e in entities} - allowed
                if unknown:
                    raise CorpusError(
                        f"NER returned labels outside the configured set: {sorted(unknown)}"
                    )
            candidates.append(
                ContextCandidate(
                    source_sentence_id=sid,
                    entities=tuple((e.text, e.label) for e in entities),
                )
            )
    return candidates
