"""Command-line entry point: stage subcommands plus the chained pipeline."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import curate as curation
from . import validate as validation
from .config import ConfigError, load_config
from .corpus import build_index, extract_context, load_or_build, retrieve_by_trigger, save_index
from .curate import FewShotConfig
from .enrich import enrich_batch, enriched_from_record, enriched_to_record
from .evaluate import load_predictions, report, score
from .generate import (
    cost_report,
    example_from_record,
    example_to_record,
    generate,
    generate_negative_set,
    make_agent,
)
from .model import (
    DatasetError,
    DatasetPartition,
    OntologyError,
    load_dataset,
    load_ontology,
    mention_from_record,
    mention_to_record,
    write_dataset,
)
from .pipeline import (
    PipelineError,
    examples_to_partition,
    make_embed_client,
    make_ner_client,
    make_nli_client,
    run_pipeline,
)
from .prompts import build_positive_prompt
from .util import canonical_json, substream

log = logging.getLogger(__name__)


def _read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _write_jsonl(records: Sequence[dict[str, Any]], path: str | Path) -> None:
    Path(path).write_text(
        "".join(canonical_json(r) + "\n" for r in records), encoding="utf-8"
    )


def _load(args: argparse.Namespace):
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "workdir", None):
        overrides["workdir"] = args.workdir
    config = load_config(args.config, overrides)
    if getattr(args, "agent", None):
        config = replace(config, generation=replace(config.generation, agent=args.agent))
    if getattr(args, "samples_per_structure", None) is not None:
        config = replace(
            config,
            generation=replace(
                config.generation, samples_per_structure=args.samples_per_structure
            ),
        )
    agent_name = config.generation.agent
    agent_cfg = config.agent_config(agent_name)
    updates = {}
    if getattr(args, "retries", None) is not None:
        updates["retries"] = args.retries
    if getattr(args, "concurrency", None) is not None:
        updates["concurrency"] = args.concurrency
    if getattr(args, "temperature", None) is not None:
        updates["temperature"] = args.temperature
    if updates:
        agents = dict(config.agents)
        agents[agent_name] = replace(agent_cfg, **updates)
        config = replace(config, agents=agents)
    return config


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_index(args) -> int:
    config = _load(args)
    out = Path(args.out) if args.out else config.index_path()
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.force:
        index = build_index(config.corpus, config.index.normalization)
        save_index(index, out)
    else:
        index = load_or_build(config.corpus, config.index.normalization, out)
    print(f"indexed {len(index.sentences)} sentences -> {out}")
    return 0


def cmd_retrieve(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    index = load_or_build(config.corpus, config.index.normalization, config.index_path())
    ner = make_ner_client(config)
    partition = load_dataset(args.data, ontology, kind="novel")
    records = []
    for sentence in partition.examples:
        for m_idx, mention in enumerate(sentence.mentions):
            rng = (
                substream(config.seed, "retrieve", sentence.sentence_id, m_idx)
                if config.retrieval.sample
                else None
            )
            ids = retrieve_by_trigger(index, mention, config.retrieval.limit, rng)
            candidates = extract_context(
                index,
                ids,
                ner,
                allowed_labels=config.ner_labels,
                batch_size=config.retrieval.ner_batch_size,
                concurrency=config.retrieval.concurrency,
            )
            records.append(
                {
                    "origin_sentence_id": sentence.sentence_id,
                    "mention_index": m_idx,
                    "structure": mention_to_record(mention),
                    "sentence_ids": ids,
                    "candidates": [
                        {
                            "source_sentence_id": c.source_sentence_id,
                            "entities": [list(p) for p in c.entities],
                        }
                        for c in candidates
                    ],
                }
            )
    _write_jsonl(records, args.out)
    print(f"retrieved context for {len(records)} structures -> {args.out}")
    return 0


def cmd_enrich(args) -> int:
    from .corpus import ContextCandidate

    config = _load(args)
    ontology = load_ontology(config.ontology)
    rows = _read_jsonl(args.input)
    structures = [mention_from_record(r["structure"]) for r in rows]
    origins = [r.get("origin_sentence_id") for r in rows]
    candidates = [
        [
            ContextCandidate(
                source_sentence_id=int(c["source_sentence_id"]),
                entities=tuple((str(t), str(l)) for t, l in c["entities"]),
            )
            for c in r.get("candidates", [])
        ]
        for r in rows
    ]
    enriched = enrich_batch(
        structures,
        candidates,
        ontology,
        config.enrichment.as_policy(),
        seed=config.seed,
        max_variants=config.enrichment.max_variants,
        origin_sentence_ids=origins,
    )
    _write_jsonl([enriched_to_record(e) for e in enriched], args.out)
    print(f"enriched {len(structures)} structures into {len(enriched)} variants -> {args.out}")
    return 0


def cmd_generate(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    agent = make_agent(config.agent_config(config.generation.agent))
    enriched = [enriched_from_record(r) for r in _read_jsonl(args.input)]
    examples = []
    for i, es in enumerate(enriched):
        prompt = build_positive_prompt(es, es.context, ontology)
        examples.append(generate(prompt, agent, example_id=f"pos{i:05d}"))
    if args.negatives:
        for parent in [e for e in examples if not e.failed]:
            examples.extend(
                generate_negative_set(parent, config.generation.negative_kinds, agent)
            )
    _write_jsonl([example_to_record(e) for e in examples], args.out)
    failed = sum(1 for e in examples if e.failed)
    print(f"generated {len(examples)} examples ({failed} failed) -> {args.out}")
    print(cost_report(examples).render_table())
    return 0


def cmd_validate(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    nli = make_nli_client(config)
    examples = [example_from_record(r) for r in _read_jsonl(args.input)]
    annotated, passing = validation.validate_batch(
        examples,
        ontology,
        nli,
        config.validation.thresholds(),
        polarity_adjust=config.validation.polarity_adjusted_templates,
        fail_mode=config.validation.fail_mode,
        batch_size=config.validation.batch_size,
        concurrency=config.validation.concurrency,
    )
    _write_jsonl([example_to_record(e) for e in annotated], args.out)
    _write_jsonl([example_to_record(e) for e in passing], args.passing)
    if args.pairs:
        base = load_dataset(config.base_data, ontology, kind="base")
        pairs = validation.build_validator_pairs(
            base, ontology, substream(config.seed, "validator-pairs"), config.validation.counts()
        )
        _write_jsonl([validation.pair_to_record(p) for p in pairs], args.pairs)
    print(f"validated {len(annotated)} examples, {len(passing)} passed -> {args.passing}")
    return 0


def cmd_curate(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    embedder = make_embed_client(config)
    base = load_dataset(config.base_data, ontology, kind="base")
    novel = load_dataset(args.novel, ontology, kind="novel")
    passing = [example_from_record(r) for r in _read_jsonl(args.passing)]
    partition = examples_to_partition(passing, kind="generated_validated")
    kept, discarded = curation.discard_corrupted(
        partition, embedder, config.curation.discard_policy()
    )
    kept_partition = DatasetPartition(kind="generated_validated", examples=tuple(kept))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dataset(kept_partition, out_dir / "d_gen_validated.jsonl")
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
    (out_dir / "epoch_plans.jsonl").write_text(
        "".join(canonical_json(p.to_record()) + "\n" for p in plans), encoding="utf-8"
    )
    print(f"kept {len(kept)}, discarded {len(discarded)}; {len(plans)} epoch plans -> {out_dir}")
    return 0


def cmd_sample_fewshot(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    full = load_dataset(config.novel_data, ontology, kind="novel")
    n = args.n if args.n is not None else config.curation.n
    k = args.k if args.k is not None else config.curation.k
    result = curation.sample_few_shot(full, FewShotConfig(n=n, k=k, seed=config.seed))
    write_dataset(result.partition, args.out)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"sampled {len(result.partition)} sentences for {n}-way {k}-shot "
        f"(order: {', '.join(result.type_order)}) -> {args.out}"
    )
    return 0


def cmd_audit(args) -> int:
    config = _load(args)
    ontology = load_ontology(config.ontology)
    before = load_dataset(args.before, ontology, kind="novel")
    additions = [load_dataset(p, ontology, kind="generated_validated") for p in args.after]
    result = curation.audit(before, additions)
    if args.out:
        Path(args.out).write_text(canonical_json(result.to_record()) + "\n", encoding="utf-8")
    print(result.render_table())
    return 0


def cmd_score(args) -> int:
    ontology = load_ontology(args.ontology) if args.ontology else None
    gold = load_dataset(args.gold, ontology, kind="base")
    predictions = load_predictions(args.pred)
    print(report(score(gold, predictions), format=args.format))
    return 0


def cmd_pipeline(args) -> int:
    config = _load(args)
    manifest = run_pipeline(config)
    out = Path(config.workdir)
    print(f"pipeline complete; manifest -> {out / 'manifest.json'}")
    for stage in sorted(manifest.stage_counts):
        print(f"  {stage}: {manifest.stage_counts[stage]}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config YAML")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--agent", default=None, help="agent name (e.g. stub)")
    parser.add_argument("--retries", type=int, default=None)
    parser.add_argument("--concurrency", type=int, default=None)
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--samples-per-structure", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventaug",
        description="Targeted data augmentation for low-resource event extraction.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build or refresh the corpus index")
    _add_config_arg(p)
    p.add_argument("--out", default=None)
    p.add_argument("--force", action="store_true", help="rebuild even if fresh")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="retrieve trigger-sharing sentences + NER context")
    _add_config_arg(p)
    p.add_argument("--data", required=True, help="novel partition JSONL")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("enrich", help="add-or-replace enrichment of retrieved structures")
    _add_config_arg(p)
    p.add_argument("--in", dest="input", required=True, help="retrieve output JSONL")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("generate", help="generate sentences for enriched structures")
    _add_config_arg(p)
    p.add_argument("--in", dest="input", required=True, help="enrich output JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--negatives", action="store_true", help="also rewrite into negative kinds")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="back-validate generated examples")
    _add_config_arg(p)
    p.add_argument("--in", dest="input", required=True, help="generate output JSONL")
    p.add_argument("--out", required=True, help="all examples annotated with verdicts")
    p.add_argument("--passing", required=True, help="the passing subset")
    p.add_argument("--pairs", default=None, help="also write validator training pairs here")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curate", help="centroid discard + epoch batch plans")
    _add_config_arg(p)
    p.add_argument("--passing", required=True, help="validate --passing output")
    p.add_argument("--novel", required=True, help="few-shot novel partition JSONL")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("sample-fewshot", help="frequency-ordered K-shot episode sampling")
    _add_config_arg(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_fewshot)

    p = sub.add_parser("audit", help="diversity/polarity audit of an augmentation round")
    _add_config_arg(p)
    p.add_argument("--before", required=True)
    p.add_argument("--after", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("score", help="score prediction files (Tri-I/Tri-C/Arg-I/Arg-C)")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--format", choices=("table", "machine"), default="table")
    p.add_argument("--ontology", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pipeline", help="run every stage and write a run manifest")
    _add_config_arg(p)
    p.add_argument("--workdir", default=None, help="override config workdir")
    p.set_defaults(func=cmd_pipeline)

    return parser


def _fail(stage: str, error: Exception, code: int) -> int:
    sys.stderr.write(canonical_json({"stage": stage, "error": str(error)}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    stage = args.command
    try:
        return args.func(args)
    except PipelineError as exc:
        return _fail(exc.stage, exc, exc.exit_code)
    except FileNotFoundError as exc:
        return _fail(stage, exc, 2)
    except (ConfigError, OntologyError, DatasetError, ValueError) as exc:
        return _fail(stage, exc, 1)


if __name__ == "__main__":
    sys.exit(main())
