"""Domain types for events, sentences and dataset partitions, plus JSONL I/O.

All types are frozen dataclasses: once constructed they are safe to share
across concurrent pipeline workers. Character offsets are the source of
truth for annotations; token indices are derived when needed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

import yaml

from .util import canonical_json

# Reserved non-event label: legal in partition metadata, never declared in an
# ontology file.
OTHER_LABEL = "Other"

PARTITION_KINDS = ("base", "novel", "generated", "generated_validated")


class OntologyError(ValueError):
    """Raised when an ontology file fails to parse or violates an invariant."""


class DatasetError(ValueError):
    """Raised when dataset records fail validation; carries a per-record report."""

    def __init__(self, message: str, record_errors: Sequence[tuple[int, str]] = ()):
        super().__init__(message)
        self.record_errors = list(record_errors)


class Span(NamedTuple):
    start: int
    end: int


@dataclass(frozen=True)
class RoleDef:
    """One argument role of an event type."""

    name: str
    allowed_entity_types: frozenset[str]
    slot: str  # the "some-" placeholder wording used inside the template


@dataclass(frozen=True)
class EventTypeDef:
    name: str
    roles: tuple[RoleDef, ...]
    template: str

    def role(self, name: str) -> RoleDef:
        for r in self.roles:
            if r.name == name:
                return r
        raise OntologyError(f"event type {self.name!r} has no role {name!r}")

    @property
    def role_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.roles)


@dataclass(frozen=True)
class EventOntology:
    event_types: tuple[EventTypeDef, ...]

    def __post_init__(self) -> None:
        _validate_ontology(self)

    @property
    def type_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.event_types)

    def get(self, name: str) -> EventTypeDef:
        for t in self.event_types:
            if t.name == name:
                return t
        raise OntologyError(f"unknown event type {name!r}")

    def has(self, name: str) -> bool:
        return any(t.name == name for t in self.event_types)

    @property
    def entity_types(self) -> frozenset[str]:
        out: set[str] = set()
        for t in self.event_types:
            for r in t.roles:
                out |= r.allowed_entity_types
        return frozenset(out)


@dataclass(frozen=True)
class Argument:
    role: str
    filler: str
    span: Span | None = None


@dataclass(frozen=True)
class EventStructure:
    """One trigger plus its (role, filler) arguments for a single event type.

    A role may appear several times (two Adjudicators) or not at all. Spans
    are optional: structures produced by enrichment or generation carry
    fillers without source offsets.
    """

    event_type: str
    trigger: str
    arguments: tuple[Argument, ...] = ()
    trigger_span: Span | None = None

    def fillers(self, role: str) -> tuple[str, ...]:
        return tuple(a.filler for a in self.arguments if a.role == role)

    def filled_roles(self) -> tuple[str, ...]:
        seen: list[str] = []
        for a in self.arguments:
            if a.role not in seen:
                seen.append(a.role)
        return tuple(seen)

    def signature(self) -> tuple:
        """Structural identity ignoring spans: type, trigger, (role, filler) sequence."""
        return (self.event_type, self.trigger, tuple((a.role, a.filler) for a in self.arguments))


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence_id: str
    text: str
    tokens: tuple[str, ...]
    mentions: tuple[EventStructure, ...] = ()
    provenance: Mapping[str, Any] | None = None

    @staticmethod
    def from_text(
        sentence_id: str,
        text: str,
        mentions: Sequence[EventStructure] = (),
        provenance: Mapping[str, Any] | None = None,
    ) -> "AnnotatedSentence":
        return AnnotatedSentence(
            sentence_id=sentence_id,
            text=text,
            tokens=tuple(text.split()),
            mentions=tuple(mentions),
            provenance=provenance,
        )


@dataclass(frozen=True)
class DatasetPartition:
    kind: str
    examples: tuple[AnnotatedSentence, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in PARTITION_KINDS:
            raise DatasetError(f"unknown partition kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def event_types(self) -> frozenset[str]:
        return frozenset(m.event_type for s in self.examples for m in s.mentions)

    def mentions_per_type(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for sent in self.examples:
            for m in sent.mentions:
                counts[m.event_type] = counts.get(m.event_type, 0) + 1
        return counts

    def with_examples(self, examples: Sequence[AnnotatedSentence]) -> "DatasetPartition":
        return replace(self, examples=tuple(examples))


# ---------------------------------------------------------------------------
# Validation


def _validate_ontology(ontology: EventOntology) -> None:
    if not ontology.event_types:
        raise OntologyError("ontology declares no event types")
    seen_types: set[str] = set()
    for etype in ontology.event_types:
        if not etype.name:
            raise OntologyError("event type with empty name")
        if etype.name == OTHER_LABEL:
            raise OntologyError(f"{OTHER_LABEL!r} is reserved and must not be declared")
        if etype.name in seen_types:
            raise OntologyError(f"duplicate event type {etype.name!r}")
        seen_types.add(etype.name)
        if not etype.template:
            raise OntologyError(f"event type {etype.name!r} has an empty template")
        seen_roles: set[str] = set()
        seen_slots: set[str] = set()
        for role in etype.roles:
            if role.name in seen_roles:
                raise OntologyError(f"duplicate role {role.name!r} in {etype.name!r}")
            seen_roles.add(role.name)
            if not role.allowed_entity_types:
                raise OntologyError(
                    f"role {role.name!r} of {etype.name!r} allows no entity types"
                )
            if not role.slot:
                raise OntologyError(f"role {role.name!r} of {etype.name!r} has an empty slot phrase")
            if role.slot in seen_slots:
                raise OntologyError(
                    f"slot phrase {role.slot!r} maps to more than one role in {etype.name!r}"
                )
            seen_slots.add(role.slot)
            if etype.template.count(role.slot) != 1:
                raise OntologyError(
                    f"slot phrase {role.slot!r} of {etype.name!r} must occur exactly once "
                    f"in the template"
                )
        spans = sorted(
            (etype.template.index(r.slot), etype.template.index(r.slot) + len(r.slot), r.name)
            for r in etype.roles
        )
        for (_, prev_end, prev_name), (start, _, name) in zip(spans, spans[1:]):
            if start < prev_end:
                raise OntologyError(
                    f"slot phrases of {prev_name!r} and {name!r} overlap in the "
                    f"{etype.name!r} template"
                )


def validate_structure(structure: EventStructure, ontology: EventOntology) -> None:
    if not ontology.has(structure.event_type):
        raise OntologyError(f"unknown event type {structure.event_type!r}")
    if not structure.trigger:
        raise OntologyError("trigger must be nonempty")
    declared = set(ontology.get(structure.event_type).role_names)
    for arg in structure.arguments:
        if arg.role not in declared:
            raise OntologyError(
                f"role {arg.role!r} is not declared for {structure.event_type!r}"
            )


def _check_span(text: str, span: Span | None, expected: str, what: str) -> None:
    if span is None:
        return
    if not (0 <= span.start <= span.end <= len(text)):
        raise DatasetError(f"{what} span {span} outside text of length {len(text)}")
    actual = text[span.start : span.end]
    if actual != expected:
        raise DatasetError(
            f"{what} span {span} reads {actual!r}, annotation says {expected!r}"
        )


def validate_sentence(
    sentence: AnnotatedSentence, ontology: EventOntology | None = None
) -> None:
    """Check offset integrity and, when an ontology is given, mention validity."""
    for m in sentence.mentions:
        _check_span(sentence.text, m.trigger_span, m.trigger, "trigger")
        for arg in m.arguments:
            _check_span(sentence.text, arg.span, arg.filler, f"argument {arg.role!r}")
        if ontology is not None:
            validate_structure(m, ontology)


def check_disjoint(base: DatasetPartition, novel: DatasetPartition) -> None:
    """Base and novel event-type sets may only share the reserved Other label."""
    overlap = (base.event_types() & novel.event_types()) - {OTHER_LABEL}
    if overlap:
        raise DatasetError(
            f"base and novel partitions share event types: {sorted(overlap)}"
        )


# ---------------------------------------------------------------------------
# Ontology file format


def load_ontology(path: str | Path) -> EventOntology:
    """Load and validate an ontology config (YAML, schema in the README)."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.MarkedYAMLError as exc:  # carries line/column info
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise OntologyError(f"{path}: parse error{where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise OntologyError(f"{path}: parse error: {exc}") from exc
    if not isinstance(raw, dict) or "event_types" not in raw:
        raise OntologyError(f"{path}: expected a mapping with an 'event_types' list")
    types: list[EventTypeDef] = []
    for entry in raw["event_types"] or []:
        try:
            roles = tuple(
                RoleDef(
                    name=str(r["name"]),
                    allowed_entity_types=frozenset(str(x) for x in (r.get("entity_types") or [])),
                    slot=str(r.get("slot", "")),
                )
                for r in entry.get("roles") or []
            )
            types.append(
                EventTypeDef(
                    name=str(entry["name"]),
                    roles=roles,
                    template=str(entry.get("template", "")),
                )
            )
        except KeyError as exc:
            raise OntologyError(f"{path}: event type entry missing key {exc}") from exc
    return EventOntology(event_types=tuple(types))


# ---------------------------------------------------------------------------
# Dataset JSONL format


def _span_fields(span: Span | None) -> dict[str, int]:
    return {} if span is None else {"start": span.start, "end": span.end}


def mention_to_record(m: EventStructure) -> dict[str, Any]:
    return {
        "event_type": m.event_type,
        "trigger": {"text": m.trigger, **_span_fields(m.trigger_span)},
        "arguments": [
            {"role": a.role, "text": a.filler, **_span_fields(a.span)} for a in m.arguments
        ],
    }


def _span_from(obj: Mapping[str, Any]) -> Span | None:
    if "start" in obj and "end" in obj:
        return Span(int(obj["start"]), int(obj["end"]))
    return None


def mention_from_record(rec: Mapping[str, Any]) -> EventStructure:
    trig = rec["trigger"]
    return EventStructure(
        event_type=str(rec["event_type"]),
        trigger=str(trig["text"]),
        trigger_span=_span_from(trig),
        arguments=tuple(
            Argument(role=str(a["role"]), filler=str(a["text"]), span=_span_from(a))
            for a in rec.get("arguments", [])
        ),
    )


def sentence_to_record(s: AnnotatedSentence) -> dict[str, Any]:
    rec: dict[str, Any] = {
        "id": s.sentence_id,
        "text": s.text,
        "tokens": list(s.tokens),
        "mentions": [mention_to_record(m) for m in s.mentions],
    }
    if s.provenance is not None:
        rec["provenance"] = s.provenance
    return rec


def sentence_from_record(rec: Mapping[str, Any]) -> AnnotatedSentence:
    text = str(rec["text"])
    tokens = tuple(str(t) for t in rec["tokens"]) if "tokens" in rec else tuple(text.split())
    return AnnotatedSentence(
        sentence_id=str(rec["id"]),
        text=text,
        tokens=tokens,
        mentions=tuple(mention_from_record(m) for m in rec.get("mentions", [])),
        provenance=rec.get("provenance"),
    )


def load_dataset(
    path: str | Path,
    ontology: EventOntology | None,
    kind: str = "base",
    fail_fast: bool = False,
) -> DatasetPartition:
    """Load a JSONL partition, validating every record.

    Record errors are collected into a DatasetError report (index + reason);
    with fail_fast the first error raises immediately. Input order is
    preserved. Passing ontology=None skips mention/role checks but keeps
    offset-integrity checks.
    """
    path = Path(path)
    examples: list[AnnotatedSentence] = []
    errors: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                sentence = sentence_from_record(json.loads(line))
                validate_sentence(sentence, ontology)
                examples.append(sentence)
            except (ValueError, KeyError, TypeError) as exc:
                if fail_fast:
                    raise DatasetError(f"{path}: record {idx}: {exc}", [(idx, str(exc))]) from exc
                errors.append((idx, str(exc)))
    if errors:
        head = "; ".join(f"record {i}: {msg}" for i, msg in errors[:5])
        raise DatasetError(f"{path}: {len(errors)} invalid record(s): {head}", errors)
    return DatasetPartition(kind=kind, examples=tuple(examples))


def partition_to_bytes(partition: DatasetPartition) -> bytes:
    """Canonical serialization; identical partitions yield identical bytes."""
    lines = [canonical_json(sentence_to_record(s)) for s in partition.examples]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def write_dataset(partition: DatasetPartition, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_bytes(partition_to_bytes(partition))
    except OSError as exc:
        raise DatasetError(f"cannot write dataset to {path}: {exc}") from exc
