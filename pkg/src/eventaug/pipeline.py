"""End-to-end orchestration: index, retrieve, enrich, generate, validate,
curate, audit, and a run manifest that pins everything needed for a rerun."""
from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import curate as curation
from . import validate as validation
from .clients import (
    EmbedClient,
    GazetteerNer,
    HashedEmbedder,
    HttpEmbedClient,
    HttpNerClient,
    HttpNliClient,
    NerClient,
    NliClient,
    OverlapNli,
    RetryPolicy,
)
from .config import ConfigError, PipelineConfig, config_snapshot
from .corpus import ContextCandidate, extract_context, load_or_build, retrieve_by_trigger
from .curate import FewShotConfig
from .enrich import EnrichedStructure, enrich_batch
from .generate import (
    GeneratedExample,
    cost_report,
    example_to_record,
    generate,
    generate_negative_set,
    make_agent,
)
from .model import (
    AnnotatedSentence,
    Argument,
    DatasetPartition,
    EventStructure,
    Span,
    check_disjoint,
    load_dataset,
    load_ontology,
    write_dataset,
)
from .prompts import build_positive_prompt
from .util import canonical_json, sha256_file, substream

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.stage = stage
        self.exit_code = exit_code


@dataclass
class RunManifest:
    config: Mapping[str, Any]
    seed: int
    corpus_sha256: str = ""
    agent: str = ""
    endpoints: Mapping[str, str] = field(default_factory=dict)
    stage_counts: dict[str, int] = field(default_factory=dict)
    stage_seconds: dict[str, float] = field(default_factory=dict)
    output_hashes: dict[str, str] = field(default_factory=dict)
    cost: list[dict[str, Any]] = field(default_factory=list)

    def to_record(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "seed": self.seed,
            "corpus_sha256": self.corpus_sha256,
            "agent": self.agent,
            "endpoints": dict(self.endpoints),
            "stage_counts": dict(sorted(self.stage_counts.items())),
            "stage_seconds": dict(sorted(self.stage_seconds.items())),
            "output_hashes": dict(sorted(self.output_hashes.items())),
            "cost": self.cost,
        }


def _require_file(path: str, what: str, stage: str) -> Path:
    if not path:
        raise PipelineError(stage, f"config is missing the {what} path")
    p = Path(path)
    if not p.exists():
        raise PipelineError(stage, f"{what} file not found: {p}", exit_code=2)
    return p


def make_ner_client(config: PipelineConfig) -> NerClient:
    ep = config.endpoint("ner")
    if ep.mode == "http":
        return HttpNerClient(ep.url, timeout=ep.timeout, retry=RetryPolicy(retries=ep.retries))
    gaz = _require_file(config.gazetteer, "gazetteer", "setup")
    return GazetteerNer.from_file(gaz)


def make_nli_client(config: PipelineConfig) -> NliClient:
    ep = config.endpoint("nli")
    if ep.mode == "http":
        return HttpNliClient(ep.url, timeout=ep.timeout, retry=RetryPolicy(retries=ep.retries))
    return OverlapNli()


def make_embed_client(config: PipelineConfig) -> EmbedClient:
    ep = config.endpoint("embed")
    if ep.mode == "http":
        return HttpEmbedClient(ep.url, timeout=ep.timeout, retry=RetryPolicy(retries=ep.retries))
    return HashedEmbedder(dim=config.embed_dim)


def _locate(text: str, fragment: str) -> Span | None:
    """First word-boundary occurrence of fragment in text, if any."""
    pattern = r"(?<![A-Za-z0-9])" + re.escape(fragment) + r"(?![A-Za-z0-9])"
    match = re.search(pattern, text)
    if match is None:
        return None
    return Span(match.start(), match.end())


def example_to_sentence(example: GeneratedExample) -> AnnotatedSentence:
    """Wrap a generated example as an annotated sentence with located spans."""
    assert example.source is not None
    mention = example.source.result
    trigger_span = _locate(example.sentence, mention.trigger)
    arguments = tuple(
        Argument(a.role, a.filler, _locate(example.sentence, a.filler))
        for a in mention.arguments
    )
    located = EventStructure(
        event_type=mention.event_type,
        trigger=mention.trigger,
        trigger_span=trigger_span,
        arguments=arguments,
    )
    return AnnotatedSentence.from_text(
        sentence_id=example.id,
        text=example.sentence,
        mentions=[located],
        provenance=example_to_record(example),
    )


def examples_to_partition(
    examples: Sequence[GeneratedExample], kind: str
) -> DatasetPartition:
    sentences = [example_to_sentence(e) for e in examples if not e.failed and e.sentence]
    return DatasetPartition(kind=kind, examples=tuple(sentences))


class Stopwatch:
    def __init__(self) -> None:
        self.seconds: dict[str, float] = {}

    def run(self, name: str):
        outer = self

        class _Timer:
            def __enter__(self_inner):
                self_inner.start = time.monotonic()
                return self_inner

            def __exit__(self_inner, exc_type, exc, tb):
                outer.seconds[name] = outer.seconds.get(name, 0.0) + (
                    time.monotonic() - self_inner.start
                )
                return False

        return _Timer()


def run_pipeline(config: PipelineConfig, workdir: str | Path | None = None) -> RunManifest:
    """Run every stage on the configured inputs; writes all artifacts + manifest.

    With the stub agent and stub endpoints the entire output is a pure
    function of (config, seed, input files).
    """
    out = Path(workdir or config.workdir)
    out.mkdir(parents=True, exist_ok=True)
    timer = Stopwatch()
    counts: dict[str, int] = {}

    ontology_path = _require_file(config.ontology, "ontology", "setup")
    corpus_path = _require_file(config.corpus, "corpus", "setup")
    base_path = _require_file(config.base_data, "base dataset", "setup")
    novel_path = _require_file(config.novel_data, "novel dataset", "setup")

    with timer.run("setup"):
        ontology = load_ontology(ontology_path)
        missing = ontology.entity_types - set(config.ner_labels)
        if missing:
            raise PipelineError(
                "setup",
                f"ner_labels must cover every ontology entity type; missing {sorted(missing)}",
            )
        ner = make_ner_client(config)
        nli = make_nli_client(config)
        embedder = make_embed_client(config)
        agent = make_agent(config.agent_config(config.generation.agent))

    with timer.run("index"):
        index = load_or_build(corpus_path, config.index.normalization, config.index_path())
        counts["corpus_sentences"] = len(index.sentences)

    with timer.run("load"):
        base = load_dataset(base_path, ontology, kind="base")
        novel_full = load_dataset(novel_path, ontology, kind="novel")
        check_disjoint(base, novel_full)
        counts["base_examples"] = len(base)
        counts["novel_pool_examples"] = len(novel_full)

    with timer.run("fewshot"):
        fewshot = curation.sample_few_shot(
            novel_full,
            FewShotConfig(n=config.curation.n, k=config.curation.k, seed=config.seed),
        )
        novel = fewshot.partition
        write_dataset(novel, out / "d_novel.jsonl")
        counts["novel_examples"] = len(novel)
        counts["novel_mentions"] = sum(len(s.mentions) for s in novel.examples)

    with timer.run("retrieve"):
        structures: list[EventStructure] = []
        origins: list[str] = []
        candidates_per: list[list[ContextCandidate]] = []
        for sentence in novel.examples:
            for m_idx, mention in enumerate(sentence.mentions):
                rng = (
                    substream(config.seed, "retrieve", sentence.sentence_id, m_idx)
                    if config.retrieval.sample
                    else None
                )
                ids = retrieve_by_trigger(index, mention, config.retrieval.limit, rng)
                cands = extract_context(
                    index,
                    ids,
                    ner,
                    allowed_labels=config.ner_labels,
                    batch_size=config.retrieval.ner_batch_size,
                    concurrency=config.retrieval.concurrency,
                )
                structures.append(mention)
                origins.append(sentence.sentence_id)
                candidates_per.append(cands)
        counts["structures"] = len(structures)
        counts["retrieved_candidates"] = sum(len(c) for c in candidates_per)

    with timer.run("enrich"):
        enriched = enrich_batch(
            structures,
            candidates_per,
            ontology,
            config.enrichment.as_policy(),
            seed=config.seed,
            max_variants=config.enrichment.max_variants,
            origin_sentence_ids=origins,
        )
        counts["enriched"] = len(enriched)

    with timer.run("generate"):
        positives: list[GeneratedExample] = []
        for i, es in enumerate(enriched):
            for s in range(config.generation.samples_per_structure):
                prompt = build_positive_prompt(es, es.context, ontology)
                suffix = f"-{s}" if config.generation.samples_per_structure > 1 else ""
                positives.append(generate(prompt, agent, example_id=f"pos{i:05d}{suffix}"))
        counts["generated_positive"] = len(positives)

    thresholds = config.validation.thresholds()
    with timer.run("validate"):
        positives_checked, positives_passing = validation.validate_batch(
            positives,
            ontology,
            nli,
            thresholds,
            polarity_adjust=config.validation.polarity_adjusted_templates,
            fail_mode=config.validation.fail_mode,
            batch_size=config.validation.batch_size,
            concurrency=config.validation.concurrency,
        )
        rewrite_parents = (
            positives_passing
            if config.generation.rewrite_requires_validated_parent
            else [e for e in positives_checked if not e.failed]
        )
        negatives: list[GeneratedExample] = []
        for parent in rewrite_parents:
            negatives.extend(
                generate_negative_set(parent, config.generation.negative_kinds, agent)
            )
        negatives_checked, negatives_passing = validation.validate_batch(
            negatives,
            ontology,
            nli,
            thresholds,
            polarity_adjust=config.validation.polarity_adjusted_templates,
            fail_mode=config.validation.fail_mode,
            batch_size=config.validation.batch_size,
            concurrency=config.validation.concurrency,
        )
        all_generated = positives_checked + negatives_checked
        all_passing = positives_passing + negatives_passing
        counts["generated_total"] = len(all_generated)
        counts["validated_pass"] = len(all_passing)

        d_gen = examples_to_partition(all_generated, kind="generated")
        write_dataset(d_gen, out / "d_gen.jsonl")
        pairs = validation.build_validator_pairs(
            base,
            ontology,
            substream(config.seed, "validator-pairs"),
            config.validation.counts(),
        )
        pairs_path = out / "validator_pairs.jsonl"
        pairs_path.write_text(
            "".join(canonical_json(validation.pair_to_record(p)) + "\n" for p in pairs),
            encoding="utf-8",
        )
        counts["validator_pairs"] = len(pairs)

    with timer.run("curate"):
        d_gen_valid = examples_to_partition(all_passing, kind="generated_validated")
        kept, discarded = curation.discard_corrupted(
            d_gen_valid, embedder, config.curation.discard_policy()
        )
        counts["discarded"] = len(discarded)
        kept_partition = DatasetPartition(kind="generated_validated", examples=tuple(kept))
        write_dataset(kept_partition, out / "d_gen_validated.jsonl")
        plans = curation.plan_epochs(
            base,
            novel,
            kept_partition,
            epochs=config.curation.epochs,
            base_batch=config.curation.base_batch,
            gen_batch=config.curation.gen_batch,
            seed=config.seed,
            discarded=[(r.sentence_id, r.distance) for r in discarded],
        )
        (out / "epoch_plans.jsonl").write_text(
            "".join(canonical_json(p.to_record()) + "\n" for p in plans),
            encoding="utf-8",
        )
        counts["epochs"] = len(plans)

    with timer.run("audit"):
        report = curation.audit(novel, [kept_partition], generated_all=all_generated)
        (out / "audit.json").write_text(
            canonical_json(report.to_record()) + "\n", encoding="utf-8"
        )
        (out / "audit.txt").write_text(report.render_table() + "\n", encoding="utf-8")

    costs = cost_report(all_generated)

    manifest = RunManifest(
        config=config_snapshot(config),
        seed=config.seed,
        corpus_sha256=index.corpus_sha256,
        agent=agent.name,
        endpoints={
            name: (config.endpoint(name).url or "stub") for name in ("ner", "nli", "embed")
        },
        stage_counts=counts,
        stage_seconds={k: round(v, 6) for k, v in timer.seconds.items()},
        cost=costs.to_records(),
    )
    for artifact in sorted(out.glob("*")):
        if artifact.name == "manifest.json" or artifact.is_dir():
            continue
        manifest.output_hashes[str(artifact.relative_to(out))] = sha256_file(artifact)
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_record(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return manifest
