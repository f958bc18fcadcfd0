"""Back-validation directions, thresholds, and validator-pair construction."""
import random

import pytest

from eventaug.clients import ClientError, OverlapNli
from eventaug.enrich import EnrichedStructure, enrich
from eventaug.corpus import ContextCandidate
from eventaug.generate import GeneratedExample, StubAgent, generate, generate_negative_set
from eventaug.model import Argument, EventStructure
from eventaug.prompts import build_positive_prompt, textualize
from eventaug.validate import (
    ASSERTED_PREFIX,
    PairCounts,
    Thresholds,
    ValidationVerdict,
    ValidatorTrainingPair,
    build_validator_pairs,
    check_accuracy,
    check_coherence,
    validate_batch,
)

PAPER_PARDON_SENTENCE = (
    "The court in Nevada clear Paul Laxalt, as advised by the board of pardon and paroles."
)

FULL_PARDON = EventStructure(
    event_type="Justice:Pardon",
    trigger="clear",
    arguments=(
        Argument("Adjudicator", "court"),
        Argument("Adjudicator", "board of pardon and paroles"),
        Argument("Defendant", "Paul Laxalt"),
        Argument("Place", "Nevada"),
    ),
)

NO_PLACE_PARDON = EventStructure(
    event_type="Justice:Pardon",
    trigger="clear",
    arguments=(
        Argument("Adjudicator", "court"),
        Argument("Defendant", "Paul Laxalt"),
    ),
)


def example_for(structure, sentence, polarity="positive", example_id="x1"):
    enriched = EnrichedStructure(base=structure, edits=(), result=structure)
    return GeneratedExample(
        id=example_id,
        sentence=sentence,
        polarity=polarity,
        source=enriched,
        agent="test",
        prompt_hash="0" * 64,
    )


def test_accuracy_paper_sentence_entails_own_template(ontology):
    example = example_for(FULL_PARDON, PAPER_PARDON_SENTENCE)
    score, passed = check_accuracy(example, ontology, OverlapNli())
    # Hand arithmetic: 12 of the 17 distinct template tokens appear in the
    # sentence (all but event/trigger/is/was/pardoned).
    assert score == pytest.approx(12 / 17)
    assert passed


def test_accuracy_reflexive(ontology):
    template = textualize(FULL_PARDON, ontology).text
    example = example_for(FULL_PARDON, template)
    score, passed = check_accuracy(example, ontology, OverlapNli())
    assert score == 1.0
    assert passed


def test_accuracy_unrelated_event_fails(ontology):
    example = example_for(
        FULL_PARDON, "Militants attacked a convoy near the Pentagon this morning."
    )
    score, passed = check_accuracy(example, ontology, OverlapNli())
    # Hand arithmetic: zero token overlap with the Pardon template.
    assert score == 0.0
    assert not passed


def test_coherence_extraneous_place_fails_backward(ontology):
    # Place is vacant in the structure; the sentence asserts Nevada anyway.
    example = example_for(NO_PLACE_PARDON, "The court in Nevada clear Paul Laxalt.")
    fwd, bwd, passed = check_coherence(example, ontology, OverlapNli())
    # Backward: 5 of the 14 unspecific-template tokens appear in the sentence.
    assert bwd == pytest.approx(5 / 14)
    assert fwd == pytest.approx(5 / 7)
    assert not passed


def test_coherence_omitted_defendant_fails_forward(ontology):
    example = example_for(NO_PLACE_PARDON, "The court decided to clear the defendants quickly.")
    fwd, bwd, passed = check_coherence(example, ontology, OverlapNli())
    # Forward: only court/clear of the 7 sentence tokens appear in the template.
    assert fwd == pytest.approx(2 / 7)
    assert not passed


def test_faithful_generation_passes_all_three(ontology, pardon_structure, laxalt_candidate):
    enriched = enrich(pardon_structure, laxalt_candidate, ontology)
    prompt = build_positive_prompt(enriched, laxalt_candidate, ontology)
    example = generate(prompt, StubAgent())
    nli = OverlapNli()
    acc, acc_ok = check_accuracy(example, ontology, nli)
    fwd, bwd, coh_ok = check_coherence(example, ontology, nli)
    assert acc_ok and coh_ok
    assert min(acc, fwd, bwd) >= 0.5


def test_direction_convention_in_request_log(ontology):
    sentence = "The court in Nevada clear Paul Laxalt."
    example = example_for(FULL_PARDON, sentence)
    nli = OverlapNli()
    check_accuracy(example, ontology, nli)
    strict_template = textualize(FULL_PARDON, ontology, mode="strict").text
    assert nli.calls[-1] == (sentence, strict_template)

    nli = OverlapNli()
    check_coherence(example, ontology, nli)
    unspecific_template = textualize(FULL_PARDON, ontology, mode="unspecific_fill").text
    assert nli.calls == [
        (unspecific_template, sentence),  # forward
        (sentence, unspecific_template),  # backward
    ]


def test_polarity_adjusted_template_for_rewrites(ontology):
    example = example_for(
        FULL_PARDON, "It did not happen that the court cleared him.", polarity="negative"
    )
    nli = OverlapNli()
    check_accuracy(example, ontology, nli, polarity_adjust=True)
    _, hypothesis = nli.calls[-1]
    assert hypothesis.startswith(ASSERTED_PREFIX)

    nli = OverlapNli()
    check_accuracy(example, ontology, nli, polarity_adjust=False)
    _, hypothesis = nli.calls[-1]
    assert not hypothesis.startswith(ASSERTED_PREFIX)


def _sweep_examples(ontology):
    """100 examples with sentences of graded overlap against one template."""
    base_tokens = textualize(FULL_PARDON, ontology).text.replace(".", " ").split()
    examples = []
    rng = random.Random(13)
    for i in range(100):
        keep = rng.randint(1, len(base_tokens))
        words = base_tokens[:keep] + ["padding"] * rng.randint(0, 4)
        examples.append(example_for(FULL_PARDON, " ".join(words) + ".", example_id=f"e{i:03d}"))
    return examples


def test_threshold_monotonicity_over_sweep(ontology):
    examples = _sweep_examples(ontology)
    nli = OverlapNli()
    sizes = []
    for threshold in [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 0.9, 1.0]:
        _, passing = validate_batch(
            examples, ontology, nli, Thresholds(accuracy=threshold, coherence=threshold)
        )
        sizes.append(len(passing))
    assert sizes == sorted(sizes, reverse=True)
    assert sizes[0] == len(examples)  # zero thresholds pass everything


def test_validate_batch_matches_serial_recompute(ontology):
    examples = _sweep_examples(ontology)
    thresholds = Thresholds(accuracy=0.6, coherence=0.55)
    annotated, passing = validate_batch(examples, ontology, OverlapNli(), thresholds)
    assert len(annotated) == len(examples)
    expected_pass = set()
    for example in examples:
        nli = OverlapNli()
        _, acc_ok = check_accuracy(example, ontology, nli, threshold=thresholds.accuracy)
        _, _, coh_ok = check_coherence(example, ontology, nli, threshold=thresholds.coherence)
        if acc_ok and coh_ok:
            expected_pass.add(example.id)
    assert {e.id for e in passing} == expected_pass
    assert [e.id for e in annotated] == sorted(e.id for e in annotated)


def test_validate_batch_filter_soundness(ontology):
    examples = _sweep_examples(ontology)[:20]
    annotated, passing = validate_batch(examples, ontology, OverlapNli())
    ids = {e.id for e in annotated}
    for e in passing:
        assert e.id in ids
        assert e.verdict is not None and e.verdict.overall_pass


def test_validate_batch_empty(ontology):
    annotated, passing = validate_batch([], ontology, OverlapNli())
    assert annotated == [] and passing == []


def test_indeterminate_fail_closed_and_open(ontology):
    class DownNli:
        def score_pairs(self, pairs):
            raise ClientError("unreachable")

    examples = _sweep_examples(ontology)[:4]
    annotated, passing = validate_batch(examples, ontology, DownNli(), fail_mode="closed")
    assert passing == []
    assert all(e.verdict is not None and e.verdict.indeterminate for e in annotated)

    annotated, passing = validate_batch(examples, ontology, DownNli(), fail_mode="open")
    assert len(passing) == len(examples)


def test_failed_generations_never_pass(ontology):
    failed = GeneratedExample(
        id="f1",
        sentence="",
        polarity="positive",
        source=EnrichedStructure(FULL_PARDON, (), FULL_PARDON),
        agent="test",
        prompt_hash="0" * 64,
        error="empty completion",
    )
    annotated, passing = validate_batch([failed], ontology, OverlapNli())
    assert passing == []
    assert annotated[0].verdict is None


def test_verdict_flags_must_match_scores():
    with pytest.raises(ValueError, match="inconsistent"):
        ValidationVerdict(
            accuracy_score=0.9,
            coherence_forward_score=0.9,
            coherence_backward_score=0.9,
            accuracy_pass=False,
            coherence_pass=True,
            accuracy_threshold=0.5,
            coherence_threshold=0.5,
        )


# ---------------------------------------------------------------------------
# Validator training pairs


def test_pair_labels_match_constructions(base_partition, ontology):
    pairs = build_validator_pairs(
        base_partition, ontology, random.Random(1), PairCounts(2, 1, 1)
    )
    assert len(pairs) == 4
    assert [p.construction for p in pairs] == [
        "paired",
        "paired",
        "unpaired_shuffle",
        "unspecific_replacement",
    ]
    for p in pairs:
        assert p.label == ("entail" if p.construction == "paired" else "not_entail")


def test_shuffle_never_pairs_own_template(base_partition, ontology):
    own_templates = {
        s.sentence_id: {textualize(m, ontology).text for m in s.mentions}
        for s in base_partition.examples
    }
    text_to_id = {s.text: s.sentence_id for s in base_partition.examples}
    pairs = build_validator_pairs(
        base_partition, ontology, random.Random(3), PairCounts(0, 60, 0)
    )
    for p in pairs:
        sid = text_to_id[p.premise]
        assert p.hypothesis not in own_templates[sid]


def test_unspecific_replacement_rewrites_exactly_one_filled_role(ontology):
    from eventaug.model import AnnotatedSentence, DatasetPartition, Span

    text = "The storied club declared bankruptcy after the season collapsed."
    mention = EventStructure(
        event_type="Business:Declare-Bankruptcy",
        trigger="bankruptcy",
        trigger_span=Span(text.find("bankruptcy"), text.find("bankruptcy") + len("bankruptcy")),
        arguments=(Argument("Org", "club", Span(text.find("club"), text.find("club") + 4)),),
    )
    base = DatasetPartition(
        kind="base",
        examples=(AnnotatedSentence.from_text("b1", text, [mention]),),
    )
    # Force a second sentence so the partition is valid for other tests' use.
    [pair] = build_validator_pairs(base, ontology, random.Random(2), PairCounts(0, 0, 1))
    plain = textualize(mention, ontology).text
    # String-diff oracle: exactly the single filled role is rewritten.
    assert pair.hypothesis == plain.replace("club", "an unspecific Org")
    assert "an unspecific Org" in pair.hypothesis


def test_pairs_deterministic_under_seed(base_partition, ontology):
    a = build_validator_pairs(base_partition, ontology, random.Random(9), PairCounts(4, 4, 4))
    b = build_validator_pairs(base_partition, ontology, random.Random(9), PairCounts(4, 4, 4))
    assert a == b


def test_shuffle_impossible_with_single_example(ontology):
    from eventaug.model import AnnotatedSentence, DatasetPartition

    text = "The storied club declared bankruptcy after the season collapsed."
    mention = EventStructure(
        event_type="Business:Declare-Bankruptcy",
        trigger="bankruptcy",
        arguments=(Argument("Org", "club"),),
    )
    base = DatasetPartition(
        kind="base", examples=(AnnotatedSentence.from_text("b1", text, [mention]),)
    )
    with pytest.raises(ValueError, match="two examples"):
        build_validator_pairs(base, ontology, random.Random(0), PairCounts(0, 1, 0))


def test_pair_label_consistency_enforced():
    with pytest.raises(ValueError, match="inconsistent"):
        ValidatorTrainingPair("p", "h", "entail", "unpaired_shuffle")
