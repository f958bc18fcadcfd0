"""Forward-and-backward entailment validation of generated examples.

Accuracy: the generated sentence must entail the filled template passage of
its source structure. Coherence: the unspecific-filled template and the
sentence must entail each other, so extraneous or omitted arguments fail.
Also builds entail/not-entail training pairs for fine-tuning a validator.
"""
from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .clients import ClientError, NliClient
from .generate import GeneratedExample
from .model import DatasetPartition, EventOntology
from .prompts import POSITIVE, textualize

log = logging.getLogger(__name__)

# Prefix applied to templates when judging negative/asserted polarities: a
# literal occurrence template would (correctly) fail entailment against a
# sentence saying the event did not happen. Toggleable via polarity_adjust.
ASSERTED_PREFIX = "It is asserted but did not necessarily occur that "

FAIL_MODES = ("closed", "open")

PAIR_CONSTRUCTIONS = ("paired", "unpaired_shuffle", "unspecific_replacement")


@dataclass(frozen=True)
class Thresholds:
    accuracy: float = 0.5
    coherence: float = 0.5


@dataclass(frozen=True)
class ValidationVerdict:
    accuracy_score: float
    coherence_forward_score: float
    coherence_backward_score: float
    accuracy_pass: bool
    coherence_pass: bool
    accuracy_threshold: float
    coherence_threshold: float
    indeterminate: bool = False

    def __post_init__(self) -> None:
        for score in (
            self.accuracy_score,
            self.coherence_forward_score,
            self.coherence_backward_score,
        ):
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"entailment score {score} outside [0, 1]")
        if not self.indeterminate:
            if self.accuracy_pass != (self.accuracy_score >= self.accuracy_threshold):
                raise ValueError("accuracy_pass inconsistent with score and threshold")
            coh = (
                self.coherence_forward_score >= self.coherence_threshold
                and self.coherence_backward_score >= self.coherence_threshold
            )
            if self.coherence_pass != coh:
                raise ValueError("coherence_pass inconsistent with scores and threshold")

    @property
    def overall_pass(self) -> bool:
        return self.accuracy_pass and self.coherence_pass


@dataclass(frozen=True)
class ValidatorTrainingPair:
    premise: str
    hypothesis: str
    label: str  # entail | not_entail
    construction: str

    def __post_init__(self) -> None:
        if self.construction not in PAIR_CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}")
        expected = "entail" if self.construction == "paired" else "not_entail"
        if self.label != expected:
            raise ValueError(
                f"label {self.label!r} inconsistent with construction {self.construction!r}"
            )


@dataclass(frozen=True)
class PairCounts:
    paired: int = 0
    unpaired_shuffle: int = 0
    unspecific_replacement: int = 0


def _template_text(
    example: GeneratedExample,
    ontology: EventOntology,
    mode: str,
    polarity_adjust: bool,
) -> str:
    if example.source is None:
        raise ValueError(f"example {example.id} has no source structure")
    passage = textualize(example.source.result, ontology, mode=mode).text
    if polarity_adjust and example.polarity != POSITIVE:
        return ASSERTED_PREFIX + passage
    return passage


def accuracy_pair(
    example: GeneratedExample, ontology: EventOntology, polarity_adjust: bool = True
) -> tuple[str, str]:
    """(premise, hypothesis): the sentence must entail its filled template."""
    return example.sentence, _template_text(example, ontology, "strict", polarity_adjust)


def coherence_pairs(
    example: GeneratedExample, ontology: EventOntology, polarity_adjust: bool = True
) -> tuple[tuple[str, str], tuple[str, str]]:
    """Forward (template premise, sentence hypothesis) and backward pairs."""
    template = _template_text(example, ontology, "unspecific_fill", polarity_adjust)
    return (template, example.sentence), (example.sentence, template)


def check_accuracy(
    example: GeneratedExample,
    ontology: EventOntology,
    nli_client: NliClient,
    threshold: float = 0.5,
    polarity_adjust: bool = True,
) -> tuple[float, bool]:
    score = nli_client.score_pairs([accuracy_pair(example, ontology, polarity_adjust)])[0].entail
    return score, score >= threshold


def check_coherence(
    example: GeneratedExample,
    ontology: EventOntology,
    nli_client: NliClient,
    threshold: float = 0.5,
    polarity_adjust: bool = True,
) -> tuple[float, float, bool]:
    forward, backward = coherence_pairs(example, ontology, polarity_adjust)
    scores = nli_client.score_pairs([forward, backward])
    fwd, bwd = scores[0].entail, scores[1].entail
    return fwd, bwd, fwd >= threshold and bwd >= threshold


def _indeterminate_verdict(thresholds: Thresholds, fail_mode: str) -> ValidationVerdict:
    passed = fail_mode == "open"
    return ValidationVerdict(
        accuracy_score=0.0,
        coherence_forward_score=0.0,
        coherence_backward_score=0.0,
        accuracy_pass=passed,
        coherence_pass=passed,
        accuracy_threshold=thresholds.accuracy,
        coherence_threshold=thresholds.coherence,
        indeterminate=True,
    )


def validate_batch(
    examples: Sequence[GeneratedExample],
    ontology: EventOntology,
    nli_client: NliClient,
    thresholds: Thresholds = Thresholds(),
    polarity_adjust: bool = True,
    fail_mode: str = "closed",
    batch_size: int = 32,
    concurrency: int = 1,
) -> tuple[list[GeneratedExample], list[GeneratedExample]]:
    """Annotate every example with a verdict; return (annotated, passing).

    The passing subset contains exactly the examples whose overall verdict
    holds; failed generations and (under fail-closed, the default)
    indeterminate verdicts are excluded. Output is sorted by example id.
    """
    if fail_mode not in FAIL_MODES:
        raise ValueError(f"unknown fail mode {fail_mode!r}")
    judgeable = [e for e in examples if not e.failed]
    pairs: list[tuple[str, str]] = []
    for example in judgeable:
        pairs.append(accuracy_pair(example, ontology, polarity_adjust))
        forward, backward = coherence_pairs(example, ontology, polarity_adjust)
        pairs.extend((forward, backward))

    chunks = [pairs[i : i + batch_size] for i in range(0, len(pairs), batch_size)]

    def score(chunk: list[tuple[str, str]]):
        try:
            return nli_client.score_pairs(chunk)
        except ClientError as exc:
            log.warning("NLI scoring failed for %d pairs: %s", len(chunk), exc)
            return [None] * len(chunk)

    if concurrency > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            scored_chunks = list(pool.map(score, chunks))
    else:
        scored_chunks = [score(c) for c in chunks]
    flat = [s for chunk in scored_chunks for s in chunk]

    annotated: list[GeneratedExample] = []
    for i, example in enumerate(judgeable):
        triple = flat[3 * i : 3 * i + 3]
        if any(s is None for s in triple):
            verdict = _indeterminate_verdict(thresholds, fail_mode)
        else:
            acc, fwd, bwd = (s.entail for s in triple)
            verdict = ValidationVerdict(
                accuracy_score=acc,
                coherence_forward_score=fwd,
                coherence_backward_score=bwd,
                accuracy_pass=acc >= thresholds.accuracy,
                coherence_pass=fwd >= thresholds.coherence and bwd >= thresholds.coherence,
                accuracy_threshold=thresholds.accuracy,
                coherence_threshold=thresholds.coherence,
            )
        annotated.append(example.with_verdict(verdict))
    annotated.extend(e for e in examples if e.failed)
    annotated.sort(key=lambda e: e.id)

    passing = [e for e in annotated if e.verdict is not None and e.verdict.overall_pass]
    counts: dict[str, tuple[int, int]] = {}
    for e in annotated:
        ok, total = counts.get(e.polarity, (0, 0))
        passed = e.verdict is not None and e.verdict.overall_pass
        counts[e.polarity] = (ok + int(passed), total + 1)
    for polarity in sorted(counts):
        ok, total = counts[polarity]
        log.info("back-validation %s: %d/%d passed", polarity, ok, total)
    return annotated, passing


# ---------------------------------------------------------------------------
# Validator fine-tuning pairs


def build_validator_pairs(
    base: DatasetPartition,
    ontology: EventOntology,
    rng: random.Random,
    counts: PairCounts,
) -> list[ValidatorTrainingPair]:
    """Construct entailment training pairs from base-data annotations.

    Positives pair a sentence with its own mention's template. Negatives are
    (1) unpaired shuffles, where the template comes from a different
    sentence's mention, and (2) unspecific replacements, where one filled
    role of the own template is rewritten to "an unspecific <role>".
    """
    pool = [(s, m) for s in base.examples for m in s.mentions]
    if not pool:
        raise ValueError("base partition has no mentions")

    def template(mention, force=()) -> str:
        return textualize(mention, ontology, mode="strict", force_unspecific_roles=force).text

    def sample(items: list, n: int) -> list:
        if n <= len(items):
            return rng.sample(items, n)
        return [items[rng.randrange(len(items))] for _ in range(n)]

    out: list[ValidatorTrainingPair] = []
    for sentence, mention in sample(pool, counts.paired):
        out.append(
            ValidatorTrainingPair(
                premise=sentence.text,
                hypothesis=template(mention),
                label="entail",
                construction="paired",
            )
        )

    if counts.unpaired_shuffle:
        sentence_ids = {s.sentence_id for s, _ in pool}
        if len(sentence_ids) < 2:
            raise ValueError("unpaired shuffle requires mentions from at least two examples")
        pool_templates = [template(m) for _, m in pool]
        own_templates: dict[str, set[str]] = {}
        for (s, _), text in zip(pool, pool_templates):
            own_templates.setdefault(s.sentence_id, set()).add(text)
        for _ in range(counts.unpaired_shuffle):
            s_idx = rng.randrange(len(pool))
            sid = pool[s_idx][0].sentence_id
            for _ in range(1000):
                t_idx = rng.randrange(len(pool))
                # a foreign mention with an identical template would make the
                # not_entail label wrong, so reject it too
                if (
                    pool[t_idx][0].sentence_id != sid
                    and pool_templates[t_idx] not in own_templates[sid]
                ):
                    break
            else:
                raise ValueError(
                    "could not draw an unpaired template: every candidate matches the premise's own"
                )
            out.append(
                ValidatorTrainingPair(
                    premise=pool[s_idx][0].text,
                    hypothesis=pool_templates[t_idx],
                    label="not_entail",
                    construction="unpaired_shuffle",
                )
            )

    if counts.unspecific_replacement:
        fillable = [(s, m) for s, m in pool if m.filled_roles()]
        if not fillable:
            raise ValueError("no mention has a filled role to rewrite")
        for sentence, mention in sample(fillable, counts.unspecific_replacement):
            role = rng.choice(list(mention.filled_roles()))
            out.append(
                ValidatorTrainingPair(
                    premise=sentence.text,
                    hypothesis=template(mention, force={role}),
                    label="not_entail",
                    construction="unspecific_replacement",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Serialization


def pair_to_record(p: ValidatorTrainingPair) -> dict[str, Any]:
    return {
        "premise": p.premise,
        "hypothesis": p.hypothesis,
        "label": p.label,
        "construction": p.construction,
    }


def verdict_to_record(v: ValidationVerdict) -> dict[str, Any]:
    return {
        "accuracy_score": v.accuracy_score,
        "coherence_forward_score": v.coherence_forward_score,
        "coherence_backward_score": v.coherence_backward_score,
        "accuracy_pass": v.accuracy_pass,
        "coherence_pass": v.coherence_pass,
        "accuracy_threshold": v.accuracy_threshold,
        "coherence_threshold": v.coherence_threshold,
        "indeterminate": v.indeterminate,
    }


def verdict_from_record(rec: Mapping[str, Any]) -> ValidationVerdict:
    return ValidationVerdict(
        accuracy_score=float(rec["accuracy_score"]),
        coherence_forward_score=float(rec["coherence_forward_score"]),
        coherence_backward_score=float(rec["coherence_backward_score"]),
        accuracy_pass=bool(rec["accuracy_pass"]),
        coherence_pass=bool(rec["coherence_pass"]),
        accuracy_threshold=float(rec["accuracy_threshold"]),
        coherence_threshold=float(rec["coherence_threshold"]),
        indeterminate=bool(rec.get("indeterminate", False)),
    )
