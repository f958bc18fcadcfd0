"""Acceptance suite: one test per release criterion, offline, stub clients.

Each test prints a PASS line with its runtime; stated time bounds are
asserted. Run with `pytest tests/test_acceptance.py -v -s`.
"""
import itertools
import json
import math
import random
import time
from pathlib import Path

import pytest
import yaml

from eventaug.cli import main
from eventaug.clients import OverlapNli
from eventaug.corpus import ContextCandidate
from eventaug.curate import (
    DiscardPolicy,
    FewShotConfig,
    discard_corrupted,
    sample_few_shot,
    unique_fillers,
)
from eventaug.enrich import EnrichPolicy, enrich
from eventaug.evaluate import PredictionRecord, gold_as_predictions, score
from eventaug.generate import StubAgent, generate
from eventaug.model import (
    AnnotatedSentence,
    Argument,
    DatasetPartition,
    EventStructure,
    Span,
    load_dataset,
)
from eventaug.prompts import (
    DEFAULT_REWRITE_PROMPTS,
    REWRITE_KINDS,
    build_positive_prompt,
    build_rewrite_prompt,
    textualize,
)
from eventaug.util import sha256_file, substream
from eventaug.validate import (
    PairCounts,
    Thresholds,
    build_validator_pairs,
    check_accuracy,
    check_coherence,
    validate_batch,
)

from conftest import FIXTURES

import test_enrich as enrich_oracle
from test_validate import _sweep_examples, example_for, FULL_PARDON, NO_PLACE_PARDON


class Criterion:
    """Context manager asserting a wall-clock bound and printing a PASS line."""

    def __init__(self, name: str, budget_s: float):
        self.name = name
        self.budget_s = budget_s

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            assert elapsed < self.budget_s, f"{self.name}: {elapsed:.2f}s over budget"
            print(f"ACCEPTANCE {self.name}: PASS ({elapsed:.2f}s)")
        else:
            print(f"ACCEPTANCE {self.name}: FAIL")
        return False


def test_01_pardon_worked_example(ontology, pardon_structure, laxalt_candidate):
    with Criterion("pardon-worked-example", budget_s=1.0):
        enriched = enrich(pardon_structure, laxalt_candidate, ontology)
        assert [(e.kind, e.role, e.new_filler) for e in enriched.edits] == [
            ("add", "Defendant", "Paul Laxalt"),
            ("add", "Place", "Nevada"),
        ]
        assert all(e.new_filler != "1988" for e in enriched.edits)
        expected = EventStructure(
            event_type="Justice:Pardon",
            trigger="clear",
            arguments=(
                Argument("Adjudicator", "court"),
                Argument("Adjudicator", "board of pardon and paroles"),
                Argument("Defendant", "Paul Laxalt"),
                Argument("Place", "Nevada"),
            ),
        )
        assert enriched.result.signature() == expected.signature()


def test_02_enrichment_decision_table():
    with Criterion("enrichment-decision-table", budget_s=10.0):
        cases = 0
        for base_args, (mode, p), entities in itertools.product(
            enrich_oracle.FILL_STATES,
            enrich_oracle.POLICIES,
            enrich_oracle.all_candidates(),
        ):
            expected_args, expected_edits = enrich_oracle.oracle_enrich(
                base_args, entities, mode, p
            )
            _, got_args, got_edits = enrich_oracle.run_enrich(base_args, entities, mode, p)
            assert got_args == expected_args
            assert got_edits == expected_edits
            cases += 1
        assert cases >= 200


def test_03_back_validation_directions(ontology, pardon_structure, laxalt_candidate):
    with Criterion("back-validation-directions", budget_s=30.0):
        nli = OverlapNli()
        # (a) an unrequested Place fails the backward coherence check
        extraneous = example_for(NO_PLACE_PARDON, "The court in Nevada clear Paul Laxalt.")
        _, bwd, passed = check_coherence(extraneous, ontology, nli)
        assert bwd < 0.5 and not passed
        # (b) a faithful generation passes all three checks
        enriched = enrich(pardon_structure, laxalt_candidate, ontology)
        faithful = generate(build_positive_prompt(enriched, laxalt_candidate, ontology), StubAgent())
        acc, acc_ok = check_accuracy(faithful, ontology, nli)
        fwd, bwd, coh_ok = check_coherence(faithful, ontology, nli)
        assert acc_ok and coh_ok
        # (c) raising any threshold never grows the passing set (100 examples)
        examples = _sweep_examples(ontology)
        assert len(examples) == 100
        previous = None
        for t in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0]:
            _, passing = validate_batch(
                examples, ontology, OverlapNli(), Thresholds(accuracy=t, coherence=t)
            )
            ids = {e.id for e in passing}
            if previous is not None:
                assert ids <= previous
            previous = ids


def test_04_validator_pair_construction(ontology):
    with Criterion("validator-pair-construction", budget_s=10.0):
        rng = random.Random(0)
        sentences = []
        fillers = ["Paul Laxalt", "Maria Alvarez", "Yeltsin", "Skuratov", "Judge Harmon"]
        for i in range(20):
            filler = rng.choice(fillers)
            text = f"Case {i}: the court cleared {filler} of charges."
            mention = EventStructure(
                "Justice:Pardon",
                "cleared",
                (Argument("Defendant", filler),),
            )
            sentences.append(AnnotatedSentence.from_text(f"b{i:02d}", text, [mention]))
        base = DatasetPartition(kind="base", examples=tuple(sentences))
        counts = PairCounts(paired=20, unpaired_shuffle=20, unspecific_replacement=20)
        pairs = build_validator_pairs(base, ontology, substream(7, "pairs"), counts)
        assert len(pairs) == 60
        for p in pairs:
            assert p.label == ("entail" if p.construction == "paired" else "not_entail")
        own = {
            s.text: {textualize(m, ontology).text for m in s.mentions} for s in sentences
        }
        for p in pairs:
            if p.construction == "unpaired_shuffle":
                assert p.hypothesis not in own[p.premise]
        again = build_validator_pairs(base, ontology, substream(7, "pairs"), counts)
        assert again == pairs


def test_05_few_shot_sampler():
    with Criterion("few-shot-sampler", budget_s=10.0):
        import test_curate

        pool = test_curate.synthetic_pool()
        freq = pool.mentions_per_type()
        for n, k in itertools.product((5, 10), (0, 1, 5, 10)):
            result = sample_few_shot(pool, FewShotConfig(n=n, k=k, seed=39))
            counts = test_curate.recount(result.partition, result.type_order)
            assert all(c <= k for c in counts.values()), (n, k)
            assert counts == dict(result.per_type_counts)
            order_freqs = [freq[t] for t in result.type_order]
            assert order_freqs == sorted(order_freqs, reverse=True)


def test_06_centroid_discard():
    with Criterion("centroid-discard", budget_s=5.0):
        import test_curate

        vectors = [[1.0, 0.0, 0.0]] * 4 + [[0.0, 1.0, 0.0]]
        partition, table = test_curate.typed_sentences(vectors)
        policy = DiscardPolicy(metric="cosine", mode="quantile", value=0.8)
        kept, discarded = discard_corrupted(
            partition, test_curate.FixedEmbedder(table), policy
        )
        assert [r.sentence_id for r in discarded] == ["v4"]
        assert discarded[0].distance == pytest.approx(1 - 0.2 / math.sqrt(0.68))
        assert {s.sentence_id for s in kept} | {r.sentence_id for r in discarded} == {
            s.sentence_id for s in partition.examples
        }
        scaled = {s: [x * 11.0 for x in v] for s, v in table.items()}
        _, rescaled = discard_corrupted(partition, test_curate.FixedEmbedder(scaled), policy)
        assert [r.sentence_id for r in rescaled] == ["v4"]


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    """Two full stub-agent pipeline runs over the bundled 50-sentence fixture."""
    outs = []
    for tag in ("run1", "run2"):
        root = tmp_path_factory.mktemp(tag)
        config = {
            "ontology": str(FIXTURES / "ontology.yaml"),
            "corpus": str(FIXTURES / "corpus.txt"),
            "base_data": str(FIXTURES / "base.jsonl"),
            "novel_data": str(FIXTURES / "novel.jsonl"),
            "gazetteer": str(FIXTURES / "gazetteer.tsv"),
            "workdir": str(root / "out"),
            "seed": 42,
            "curation": {"n": 4, "k": 2, "epochs": 3, "base_batch": 4, "gen_batch": 8},
        }
        config_path = root / "config.yaml"
        config_path.write_text(yaml.safe_dump(config), encoding="utf-8")
        started = time.monotonic()
        assert main(["pipeline", "--config", str(config_path), "--agent", "stub", "--seed", "42"]) == 0
        outs.append((root / "out", time.monotonic() - started))
    return outs


def test_07_diversity_audit(pipeline_runs, ontology):
    with Criterion("diversity-audit", budget_s=30.0):
        out, _ = pipeline_runs[0]
        audit = json.loads((out / "audit.json").read_text())
        assert audit["unique_fillers_after"] > audit["unique_fillers_before"]
        # Brute-force set-build over the written partitions.
        before = load_dataset(out / "d_novel.jsonl", ontology, kind="novel")
        added = load_dataset(out / "d_gen_validated.jsonl", ontology, kind="generated_validated")
        brute_before = unique_fillers([before])
        brute_after = unique_fillers([before, added])
        assert audit["unique_fillers_before"] == len(brute_before)
        assert audit["unique_fillers_after"] == len(brute_after)
        # Retrieval really supplied unseen entities.
        assert brute_after - brute_before


def test_08_scorer(ontology, novel_partition):
    with Criterion("scorer", budget_s=10.0):
        import test_evaluate

        text = "now it 's up to the appeals court to officially clear their names."
        gold = DatasetPartition(
            kind="base",
            examples=(
                AnnotatedSentence.from_text(
                    "s1",
                    text,
                    [
                        EventStructure(
                            "Justice:Pardon",
                            "clear",
                            (),
                            Span(text.find("clear"), text.find("clear") + 5),
                        )
                    ],
                ),
            ),
        )
        pred = [
            PredictionRecord(
                "s1",
                (
                    EventStructure(
                        "Justice:Pardon",
                        "clear",
                        (),
                        Span(text.find("clear"), text.find("clear") + 5),
                    ),
                    EventStructure(
                        "Justice:Pardon",
                        "court",
                        (),
                        Span(text.find("court"), text.find("court") + 5),
                    ),
                ),
            )
        ]
        scores = score(gold, pred)
        assert scores.tri_id.f1 == pytest.approx(0.667, abs=1e-3)
        identity = score(novel_partition, gold_as_predictions(novel_partition))
        for prf in (identity.tri_id, identity.tri_cls, identity.arg_id, identity.arg_cls):
            assert prf.f1 == 1.0
        rng = random.Random(123)
        for _ in range(50):
            g, p = test_evaluate.random_fixture(rng)
            s = score(g, p)
            assert s.tri_cls.f1 <= s.tri_id.f1 + 1e-12
            assert s.arg_cls.f1 <= s.arg_id.f1 + 1e-12


def test_09_end_to_end_determinism(pipeline_runs):
    with Criterion("end-to-end-determinism", budget_s=1.0):
        (out_a, secs_a), (out_b, secs_b) = pipeline_runs
        assert secs_a < 120 and secs_b < 120
        names_a = sorted(p.name for p in out_a.glob("*"))
        names_b = sorted(p.name for p in out_b.glob("*"))
        assert names_a == names_b
        for name in names_a:
            if name == "manifest.json":
                continue  # timings differ; hashes are compared below
            assert sha256_file(out_a / name) == sha256_file(out_b / name), name
        manifest_a = json.loads((out_a / "manifest.json").read_text())
        manifest_b = json.loads((out_b / "manifest.json").read_text())
        assert manifest_a["output_hashes"] == manifest_b["output_hashes"]
        on_disk = {n for n in names_a if n != "manifest.json"}
        assert set(manifest_a["output_hashes"]) == on_disk
        for key in ("seed", "corpus_sha256", "agent", "stage_counts"):
            assert manifest_a[key] == manifest_b[key]
        config_a = {k: v for k, v in manifest_a["config"].items() if k != "workdir"}
        config_b = {k: v for k, v in manifest_b["config"].items() if k != "workdir"}
        assert config_a == config_b


def test_10_negative_prompt_fidelity():
    with Criterion("negative-prompt-fidelity", budget_s=1.0):
        source = "Rich received a pardon from Abdullah II during his darkest hours."
        for kind in REWRITE_KINDS:
            prompt = build_rewrite_prompt(kind, source)
            configured = DEFAULT_REWRITE_PROMPTS[kind]
            assert prompt.user_message.replace(source, "[SENT]") == configured
            without_slot = configured.replace("[SENT]", "")
            rebuilt = prompt.user_message.replace(source, "")
            assert rebuilt == without_slot
