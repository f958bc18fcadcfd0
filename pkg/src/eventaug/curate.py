"""Few-shot episode sampling, epoch batch planning, centroid discard, audits.

The sampler walks event types in decreasing mention frequency so that
multi-mention sentences picked for a frequent type count toward the quotas
of rarer types seen later; no novel type ever exceeds K mentions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from .clients import EmbedClient
from .generate import GeneratedExample
from .model import AnnotatedSentence, DatasetPartition
from .util import substream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FewShotConfig:
    n: int
    k: int
    seed: int = 0
    split_name: str = ""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("N must be >= 1")
        if self.k < 0:
            raise ValueError("K must be >= 0")


@dataclass(frozen=True)
class FewShotResult:
    partition: DatasetPartition
    type_order: tuple[str, ...]  # processing order, frequency-descending
    per_type_counts: Mapping[str, int]
    warnings: tuple[str, ...] = ()


def _mention_count(sentence: AnnotatedSentence, event_type: str) -> int:
    return sum(1 for m in sentence.mentions if m.event_type == event_type)


def sample_few_shot(full_novel: DatasetPartition, config: FewShotConfig) -> FewShotResult:
    """Sample at most K mentions for each of the N most frequent novel types.

    Types are processed in decreasing frequency (ties alphabetical); a
    sentence is taken only if it pushes no selected type past K, and its
    mentions of every selected type count toward their quotas immediately.
    Deterministic under the configured seed.
    """
    freq = full_novel.mentions_per_type()
    if len(freq) < config.n:
        raise ValueError(
            f"need at least {config.n} novel event types, data has {len(freq)}"
        )
    order = sorted(freq, key=lambda t: (-freq[t], t))
    selected_types = order[: config.n]
    type_order = tuple(selected_types)

    counts = {t: 0 for t in selected_types}
    chosen: list[AnnotatedSentence] = []
    chosen_ids: set[str] = set()
    warnings: list[str] = []

    if config.k > 0:
        for etype in type_order:
            candidates = [
                s
                for s in full_novel.examples
                if s.sentence_id not in chosen_ids and _mention_count(s, etype) > 0
            ]
            rng = substream(config.seed, "fewshot", etype)
            rng.shuffle(candidates)
            for sentence in candidates:
                if counts[etype] >= config.k:
                    break
                overflow = any(
                    counts[t] + _mention_count(sentence, t) > config.k
                    for t in selected_types
                )
                if overflow:
                    continue
                chosen.append(sentence)
                chosen_ids.add(sentence.sentence_id)
                for t in selected_types:
                    counts[t] += _mention_count(sentence, t)
            if counts[etype] < config.k:
                msg = (
                    f"{etype}: only {counts[etype]} of {config.k} requested mentions available"
                )
                warnings.append(msg)
                log.warning("few-shot sampling: %s", msg)

    return FewShotResult(
        partition=DatasetPartition(kind="novel", examples=tuple(chosen)),
        type_order=type_order,
        per_type_counts=counts,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Epoch batch planning


@dataclass(frozen=True)
class EpochBatchPlan:
    epoch: int
    base_ids: tuple[str, ...]
    generated_ids: tuple[str, ...]
    novel_ids: tuple[str, ...]
    discarded: tuple[tuple[str, float], ...] = ()

    def to_record(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "base_ids": list(self.base_ids),
            "generated_ids": list(self.generated_ids),
            "novel_ids": list(self.novel_ids),
            "discarded": [[i, d] for i, d in self.discarded],
        }


def plan_epochs(
    base: DatasetPartition,
    novel: DatasetPartition,
    gen_validated: DatasetPartition,
    epochs: int,
    base_batch: int,
    gen_batch: int,
    seed: int = 0,
    discarded: Sequence[tuple[str, float]] = (),
) -> list[EpochBatchPlan]:
    """Per-epoch uniform batches from base and validated generations.

    The full novel set rides along in every plan. Batches larger than their
    pool take the whole pool with a warning. Epoch t draws from the
    (seed, epoch=t) substream, so plans are reproducible and independent.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    base_ids = [s.sentence_id for s in base.examples]
    gen_ids = [s.sentence_id for s in gen_validated.examples]
    novel_ids = tuple(s.sentence_id for s in novel.examples)

    def draw(pool: list[str], want: int, rng, what: str) -> tuple[str, ...]:
        if want > len(pool):
            if pool or want:
                log.warning(
                    "requested %s batch of %d but pool has %d; taking all",
                    what,
                    want,
                    len(pool),
                )
            return tuple(pool)
        return tuple(rng.sample(pool, want))

    plans = []
    for epoch in range(epochs):
        rng = substream(seed, "epoch", epoch)
        plans.append(
            EpochBatchPlan(
                epoch=epoch,
                base_ids=draw(base_ids, base_batch, rng, "base"),
                generated_ids=draw(gen_ids, gen_batch, rng, "generated"),
                novel_ids=novel_ids,
                discarded=tuple(discarded),
            )
        )
    return plans


# ---------------------------------------------------------------------------
# Centroid discard


@dataclass(frozen=True)
class DiscardPolicy:
    metric: str = "cosine"       # cosine | euclidean
    mode: str = "quantile"       # quantile | absolute
    value: float = 0.9
    min_examples: int = 3

    def __post_init__(self) -> None:
        if self.metric not in ("cosine", "euclidean"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.mode not in ("quantile", "absolute"):
            raise ValueError(f"unknown threshold mode {self.mode!r}")
        if self.mode == "quantile" and not 0.0 <= self.value <= 1.0:
            raise ValueError("quantile must be within [0, 1]")


class DiscardRecord(NamedTuple):
    sentence_id: str
    event_type: str
    distance: float


def _distances(vectors: np.ndarray, metric: str) -> np.ndarray:
    center = vectors.mean(axis=0)
    if metric == "euclidean":
        return np.linalg.norm(vectors - center, axis=1)
    norms = np.linalg.norm(vectors, axis=1) * np.linalg.norm(center)
    sims = np.zeros(len(vectors))
    nonzero = norms > 0
    sims[nonzero] = (vectors @ center)[nonzero] / norms[nonzero]
    # zero vector against zero center: identical, distance 0
    if np.linalg.norm(center) == 0:
        sims[np.linalg.norm(vectors, axis=1) == 0] = 1.0
    return 1.0 - sims


def discard_corrupted(
    gen_validated: DatasetPartition,
    embed_client: EmbedClient,
    policy: DiscardPolicy = DiscardPolicy(),
) -> tuple[list[AnnotatedSentence], list[DiscardRecord]]:
    """Drop examples far from their event type's mean embedding.

    Per type: embed all sentences, distance to the centroid, discard above
    the cutoff (absolute value or per-type quantile). Types with fewer than
    min_examples members are kept whole, the centroid being unreliable.
    (kept, discarded) always partitions the input.
    """
    groups: dict[str, list[AnnotatedSentence]] = {}
    for sentence in gen_validated.examples:
        if not sentence.mentions:
            raise ValueError(f"example {sentence.sentence_id} carries no event mention")
        groups.setdefault(sentence.mentions[0].event_type, []).append(sentence)

    discard_ids: dict[str, DiscardRecord] = {}
    for etype in sorted(groups):
        members = groups[etype]
        if len(members) < policy.min_examples:
            log.warning(
                "type %s has %d examples (< %d); skipping centroid discard",
                etype,
                len(members),
                policy.min_examples,
            )
            continue
        vectors = np.asarray(embed_client.embed([s.text for s in members]), dtype=float)
        dists = _distances(vectors, policy.metric)
        cutoff = (
            float(np.quantile(dists, policy.value))
            if policy.mode == "quantile"
            else policy.value
        )
        for sentence, dist in zip(members, dists):
            if dist > cutoff:
                discard_ids[sentence.sentence_id] = DiscardRecord(
                    sentence.sentence_id, etype, float(dist)
                )

    kept = [s for s in gen_validated.examples if s.sentence_id not in discard_ids]
    discarded = [
        discard_ids[s.sentence_id]
        for s in gen_validated.examples
        if s.sentence_id in discard_ids
    ]
    return kept, discarded


# ---------------------------------------------------------------------------
# Diversity / polarity audit


def unique_filler_count(partitions: Sequence[DatasetPartition]) -> int:
    """Distinct (event type, role, normalized filler) triples across partitions."""
    return len(unique_fillers(partitions))


def unique_fillers(partitions: Sequence[DatasetPartition]) -> set[tuple[str, str, str]]:
    out: set[tuple[str, str, str]] = set()
    for partition in partitions:
        for sentence in partition.examples:
            for mention in sentence.mentions:
                for arg in mention.arguments:
                    out.add((mention.event_type, arg.role, arg.filler.strip().lower()))
    return out


@dataclass(frozen=True)
class AuditReport:
    unique_fillers_before: int
    unique_fillers_after: int
    examples_before: int
    examples_added: int
    per_polarity_counts: Mapping[str, int] = field(default_factory=dict)
    pass_rates: Mapping[str, float] = field(default_factory=dict)
    per_type_coverage: Mapping[str, int] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        return {
            "unique_fillers_before": self.unique_fillers_before,
            "unique_fillers_after": self.unique_fillers_after,
            "examples_before": self.examples_before,
            "examples_added": self.examples_added,
            "per_polarity_counts": dict(sorted(self.per_polarity_counts.items())),
            "pass_rates": dict(sorted(self.pass_rates.items())),
            "per_type_coverage": dict(sorted(self.per_type_coverage.items())),
        }

    def render_table(self) -> str:
        lines = [
            "Audit",
            f"  unique argument-role fillers: {self.unique_fillers_before} -> {self.unique_fillers_after}",
            f"  examples: {self.examples_before} before, {self.examples_added} added",
        ]
        if self.per_polarity_counts:
            lines.append("  polarity counts:")
            for polarity in sorted(self.per_polarity_counts):
                rate = self.pass_rates.get(polarity)
                suffix = f" (pass rate {rate:.2f})" if rate is not None else ""
                lines.append(f"    {polarity}: {self.per_polarity_counts[polarity]}{suffix}")
        if self.per_type_coverage:
            lines.append("  mentions per event type (after):")
            for etype in sorted(self.per_type_coverage):
                lines.append(f"    {etype}: {self.per_type_coverage[etype]}")
        return "\n".join(lines)


def audit(
    before: DatasetPartition,
    additions: Sequence[DatasetPartition] = (),
    generated_all: Sequence[GeneratedExample] | None = None,
) -> AuditReport:
    """Diversity and polarity audit of an augmentation round.

    Filler normalization is lowercase plus trim. Pass rates come from
    generated_all (all generations with verdicts), polarity counts from the
    added partitions' provenance records.
    """
    after_parts = [before, *additions]
    polarity_counts: dict[str, int] = {}
    for partition in additions:
        for sentence in partition.examples:
            polarity = (sentence.provenance or {}).get("polarity", "unknown")
            polarity_counts[polarity] = polarity_counts.get(polarity, 0) + 1

    pass_rates: dict[str, float] = {}
    if generated_all:
        totals: dict[str, tuple[int, int]] = {}
        for e in generated_all:
            ok, total = totals.get(e.polarity, (0, 0))
            passed = e.verdict is not None and e.verdict.overall_pass
            totals[e.polarity] = (ok + int(passed), total + 1)
        pass_rates = {p: ok / total for p, (ok, total) in totals.items() if total}

    coverage: dict[str, int] = {}
    for partition in after_parts:
        for etype, count in partition.mentions_per_type().items():
            coverage[etype] = coverage.get(etype, 0) + count

    return AuditReport(
        unique_fillers_before=unique_filler_count([before]),
        unique_fillers_after=unique_filler_count(after_parts),
        examples_before=len(before.examples),
        examples_added=sum(len(p.examples) for p in additions),
        per_polarity_counts=polarity_counts,
        pass_rates=pass_rates,
        per_type_coverage=coverage,
    )
