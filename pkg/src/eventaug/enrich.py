"""Add-or-replace enrichment of event structures with retrieved entities.

Each candidate entity is folded into the structure in order: it fills the
first compatible vacant role, otherwise replaces the first occurrence of the
first compatible occupied role (when the policy allows), otherwise it is
skipped. The trigger is never edited. Every change is recorded as a
replayable edit.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .corpus import ContextCandidate
from .model import Argument, EventOntology, EventStructure, mention_from_record, mention_to_record
from .util import substream

POLICY_MODES = ("add_only", "add_or_replace")


@dataclass(frozen=True)
class EnrichPolicy:
    mode: str = "add_or_replace"
    replace_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown enrich policy mode {self.mode!r}")
        if not 0.0 <= self.replace_probability <= 1.0:
            raise ValueError("replace_probability must be within [0, 1]")


@dataclass(frozen=True)
class Edit:
    kind: str  # add | replace
    role: str
    old_filler: str  # empty for add
    new_filler: str
    entity_type: str


def apply_edits(base: EventStructure, edits: Sequence[Edit]) -> EventStructure:
    """Replay an edit log against a base structure."""
    args = list(base.arguments)
    for edit in edits:
        if edit.kind == "add":
            args.append(Argument(role=edit.role, filler=edit.new_filler))
        elif edit.kind == "replace":
            idx = next((i for i, a in enumerate(args) if a.role == edit.role), None)
            if idx is None or args[idx].filler != edit.old_filler:
                raise ValueError(f"edit log does not replay: {edit}")
            args[idx] = Argument(role=edit.role, filler=edit.new_filler)
        else:
            raise ValueError(f"unknown edit kind {edit.kind!r}")
    return EventStructure(
        event_type=base.event_type,
        trigger=base.trigger,
        trigger_span=base.trigger_span,
        arguments=tuple(args),
    )


@dataclass(frozen=True)
class EnrichedStructure:
    base: EventStructure
    edits: tuple[Edit, ...]
    result: EventStructure
    context: ContextCandidate | None = None
    origin_sentence_id: str | None = None

    def __post_init__(self) -> None:
        replayed = apply_edits(self.base, self.edits)
        if replayed.signature() != self.result.signature():
            raise ValueError("edits do not replay to the recorded result")


def enrich(
    structure: EventStructure,
    candidate: ContextCandidate,
    ontology: EventOntology,
    policy: EnrichPolicy = EnrichPolicy(),
    rng: random.Random | None = None,
    origin_sentence_id: str | None = None,
) -> EnrichedStructure:
    """Tailor one structure with one candidate's entities, in entity order.

    Entities whose type is compatible with no role are skipped; worst case
    the result equals the base with an empty edit log.
    """
    rng = rng or random.Random(0)
    etype = ontology.get(structure.event_type)
    args = list(structure.arguments)
    edits: list[Edit] = []
    for surface, entity_type in candidate.entities:
        compatible = [r for r in etype.roles if entity_type in r.allowed_entity_types]
        if not compatible:
            continue
        occupied = {a.role for a in args}
        vacant = [r for r in compatible if r.name not in occupied]
        if vacant:
            args.append(Argument(role=vacant[0].name, filler=surface))
            edits.append(Edit("add", vacant[0].name, "", surface, entity_type))
        elif policy.mode == "add_or_replace" and rng.random() < policy.replace_probability:
            target = compatible[0].name
            idx = next(i for i, a in enumerate(args) if a.role == target)
            edits.append(Edit("replace", target, args[idx].filler, surface, entity_type))
            args[idx] = Argument(role=target, filler=surface)
    result = EventStructure(
        event_type=structure.event_type,
        trigger=structure.trigger,
        trigger_span=structure.trigger_span,
        arguments=tuple(args),
    )
    return EnrichedStructure(
        base=structure,
        edits=tuple(edits),
        result=result,
        context=candidate,
        origin_sentence_id=origin_sentence_id,
    )


def enrich_batch(
    structures: Sequence[EventStructure],
    candidates_per_structure: Sequence[Sequence[ContextCandidate]],
    ontology: EventOntology,
    policy: EnrichPolicy = EnrichPolicy(),
    seed: int = 0,
    max_variants: int = 3,
    origin_sentence_ids: Sequence[str | None] | None = None,
) -> list[EnrichedStructure]:
    """Enrich every structure with its candidates, bounded and deduplicated.

    At most max_variants distinct results survive per structure; duplicates
    (identical resulting structures by type/trigger/argument sequence) are
    dropped. Each structure draws from its own (seed, index) substream, so
    parallel evaluation order cannot change the output.
    """
    if max_variants < 1:
        raise ValueError("max_variants must be >= 1")
    if len(structures) != len(candidates_per_structure):
        raise ValueError("structures and candidate lists must align")
    out: list[EnrichedStructure] = []
    for i, (structure, candidates) in enumerate(zip(structures, candidates_per_structure)):
        rng = substream(seed, "enrich", i)
        origin = origin_sentence_ids[i] if origin_sentence_ids else None
        seen: set[tuple] = set()
        kept = 0
        for candidate in candidates:
            enriched = enrich(structure, candidate, ontology, policy, rng, origin)
            sig = enriched.result.signature()
            if sig in seen:
                continue
            seen.add(sig)
            out.append(enriched)
            kept += 1
            if kept >= max_variants:
                break
    return out


# ---------------------------------------------------------------------------
# Provenance serialization


def enriched_to_record(e: EnrichedStructure) -> dict[str, Any]:
    return {
        "base": mention_to_record(e.base),
        "edits": [
            {
                "kind": ed.kind,
                "role": ed.role,
                "old": ed.old_filler,
                "new": ed.new_filler,
                "entity_type": ed.entity_type,
            }
            for ed in e.edits
        ],
        "result": mention_to_record(e.result),
        "context": None
        if e.context is None
        else {
            "source_sentence_id": e.context.source_sentence_id,
            "entities": [list(pair) for pair in e.context.entities],
        },
        "origin_sentence_id": e.origin_sentence_id,
    }


def enriched_from_record(rec: Mapping[str, Any]) -> EnrichedStructure:
    context = rec.get("context")
    return EnrichedStructure(
        base=mention_from_record(rec["base"]),
        edits=tuple(
            Edit(ed["kind"], ed["role"], ed["old"], ed["new"], ed["entity_type"])
            for ed in rec.get("edits", [])
        ),
        result=mention_from_record(rec["result"]),
        context=None
        if context is None
        else ContextCandidate(
            source_sentence_id=int(context["source_sentence_id"]),
            entities=tuple((str(t), str(l)) for t, l in context["entities"]),
        ),
        origin_sentence_id=rec.get("origin_sentence_id"),
    )
