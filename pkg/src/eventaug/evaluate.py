"""Micro-F1 scoring of event-extraction predictions against gold annotations.

Tri-I: trigger span match. Tri-C: span plus event type. Arg-I: argument span
plus the enclosing event's type. Arg-C: additionally the role. Duplicate
predictions count once (set semantics).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .model import DatasetPartition, EventStructure, mention_from_record, mention_to_record
from .util import canonical_json


@dataclass(frozen=True)
class PredictionRecord:
    sentence_id: str
    mentions: tuple[EventStructure, ...]


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(
                PredictionRecord(
                    sentence_id=str(rec["id"]),
                    mentions=tuple(mention_from_record(m) for m in rec.get("mentions", [])),
                )
            )
    return records


def write_predictions(records: Sequence[PredictionRecord], path: str | Path) -> None:
    lines = [
        canonical_json({"id": r.sentence_id, "mentions": [mention_to_record(m) for m in r.mentions]})
        for r in records
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    matched: int  # matched predicted items (the precision numerator)
    gold: int
    predicted: int


@dataclass(frozen=True)
class Scores:
    tri_id: PRF
    tri_cls: PRF
    arg_id: PRF
    arg_cls: PRF

    def to_record(self) -> dict[str, Any]:
        def rec(p: PRF) -> dict[str, Any]:
            return {
                "precision": p.precision,
                "recall": p.recall,
                "f1": p.f1,
                "matched": p.matched,
                "gold": p.gold,
                "predicted": p.predicted,
            }

        return {
            "tri_id": rec(self.tri_id),
            "tri_cls": rec(self.tri_cls),
            "arg_id": rec(self.arg_id),
            "arg_cls": rec(self.arg_cls),
        }


def _prf(gold_items: set, pred_items: set, project) -> PRF:
    """Micro PRF over items deduplicated at the classification key.

    Identification projects the key (drops type/role) when matching but keeps
    per-item counting, so classification can never outscore identification,
    even when one span carries two event types.
    """
    if not gold_items and not pred_items:
        return PRF(1.0, 1.0, 1.0, 0, 0, 0)
    gold_keys = {project(g) for g in gold_items}
    pred_keys = {project(p) for p in pred_items}
    matched_pred = sum(1 for p in pred_items if project(p) in gold_keys)
    matched_gold = sum(1 for g in gold_items if project(g) in pred_keys)
    precision = matched_pred / len(pred_items) if pred_items else 0.0
    recall = matched_gold / len(gold_items) if gold_items else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision, recall, f1, matched_pred, len(gold_items), len(pred_items))


def _mention_items(sid: str, mentions: Iterable[EventStructure], what: str):
    """Distinct trigger items (sid, span, type) and argument items
    (sid, span, type, role); duplicates collapse here."""
    triggers, arguments = set(), set()
    offenders = []
    for m in mentions:
        if m.trigger_span is None:
            offenders.append(f"{what} {sid}: trigger {m.trigger!r} has no span")
            continue
        triggers.add((sid, m.trigger_span, m.event_type))
        for a in m.arguments:
            if a.span is None:
                offenders.append(f"{what} {sid}: argument {a.filler!r} has no span")
                continue
            arguments.add((sid, a.span, m.event_type, a.role))
    return triggers, arguments, offenders


def score(gold: DatasetPartition, predictions: Sequence[PredictionRecord]) -> Scores:
    """Micro precision/recall/F1 for the four standard metrics."""
    gold_ids = {s.sentence_id for s in gold.examples}
    unknown = sorted({p.sentence_id for p in predictions} - gold_ids)
    if unknown:
        raise ValueError(f"predictions reference unknown sentence ids: {unknown}")

    gold_tri, gold_arg = set(), set()
    pred_tri, pred_arg = set(), set()
    offenders: list[str] = []
    for sentence in gold.examples:
        tri, arg, bad = _mention_items(sentence.sentence_id, sentence.mentions, "gold")
        gold_tri |= tri
        gold_arg |= arg
        offenders.extend(bad)
    for record in predictions:
        tri, arg, bad = _mention_items(record.sentence_id, record.mentions, "prediction")
        pred_tri |= tri
        pred_arg |= arg
        offenders.extend(bad)
    if offenders:
        raise ValueError("unscorable mentions: " + "; ".join(offenders[:5]))

    return Scores(
        tri_id=_prf(gold_tri, pred_tri, lambda t: (t[0], t[1])),
        tri_cls=_prf(gold_tri, pred_tri, lambda t: t),
        arg_id=_prf(gold_arg, pred_arg, lambda a: (a[0], a[1], a[2])),
        arg_cls=_prf(gold_arg, pred_arg, lambda a: a),
    )


def gold_as_predictions(gold: DatasetPartition) -> list[PredictionRecord]:
    return [PredictionRecord(s.sentence_id, s.mentions) for s in gold.examples]


REPORT_FORMATS = ("table", "machine")


def report(scores: Scores, format: str = "table") -> str:
    """Render scores; table mirrors the standard column layout, machine is JSON."""
    if format == "machine":
        return canonical_json(scores.to_record())
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")
    header = f"{'':<10}{'Tri-I':>8}{'Tri-C':>8}{'Arg-I':>8}{'Arg-C':>8}"
    metrics = (scores.tri_id, scores.tri_cls, scores.arg_id, scores.arg_cls)
    rows = [
        ("P", [m.precision for m in metrics]),
        ("R", [m.recall for m in metrics]),
        ("F1", [m.f1 for m in metrics]),
    ]
    lines = [header]
    for name, values in rows:
        lines.append(f"{name:<10}" + "".join(f"{v * 100:>8.1f}" for v in values))
    return "\n".join(lines)


def parse_machine_report(text: str) -> Scores:
    rec = json.loads(text)

    def prf(d: Mapping[str, Any]) -> PRF:
        return PRF(
            precision=float(d["precision"]),
            recall=float(d["recall"]),
            f1=float(d["f1"]),
            matched=int(d["matched"]),
            gold=int(d["gold"]),
            predicted=int(d["predicted"]),
        )

    return Scores(
        tri_id=prf(rec["tri_id"]),
        tri_cls=prf(rec["tri_cls"]),
        arg_id=prf(rec["arg_id"]),
        arg_cls=prf(rec["arg_cls"]),
    )
