"""Textualization and prompt construction fidelity."""
import re

import pytest

from eventaug.corpus import ContextCandidate
from eventaug.enrich import enrich
from eventaug.model import Argument, EventStructure, OntologyError
from eventaug.prompts import (
    DEFAULT_POSITIVE_SYSTEM,
    DEFAULT_POSITIVE_USER,
    DEFAULT_REWRITE_PROMPTS,
    REWRITE_KINDS,
    build_positive_prompt,
    build_rewrite_prompt,
    textualize,
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


def test_textualize_full_structure_exact_wording(ontology):
    # Hand-verified against the fixture template string.
    passage = textualize(FULL_PARDON, ontology, mode="strict")
    assert passage.text == (
        "Event trigger is clear. Paul Laxalt in Nevada was pardoned by "
        "court and board of pardon and paroles."
    )
    assert passage.unspecified_roles == ()


def test_textualize_unspecific_fill_for_vacant_place(ontology):
    structure = EventStructure(
        event_type="Justice:Pardon",
        trigger="clear",
        arguments=(
            Argument("Adjudicator", "court"),
            Argument("Defendant", "Paul Laxalt"),
        ),
    )
    passage = textualize(structure, ontology, mode="unspecific_fill")
    assert "an unspecific Place" in passage.text
    assert passage.unspecified_roles == ("Place",)


def test_textualize_strict_keeps_generic_phrases(ontology):
    bare = EventStructure(event_type="Justice:Pardon", trigger="clear")
    passage = textualize(bare, ontology, mode="strict")
    assert passage.text == (
        "Event trigger is clear. some people in somewhere was pardoned by "
        "some adjudicator."
    )


def test_modes_differ_exactly_on_vacant_roles(ontology):
    structure = EventStructure(
        event_type="Justice:Pardon",
        trigger="clear",
        arguments=(Argument("Defendant", "Paul Laxalt"),),
    )
    strict = textualize(structure, ontology, mode="strict").text
    unspecific = textualize(structure, ontology, mode="unspecific_fill").text
    assert strict.replace("somewhere", "an unspecific Place").replace(
        "some adjudicator", "an unspecific Adjudicator"
    ) == unspecific


def test_textualize_no_residual_placeholders(ontology, novel_partition):
    for sentence in novel_partition.examples:
        for mention in sentence.mentions:
            for mode in ("strict", "unspecific_fill"):
                text = textualize(mention, ontology, mode=mode).text
                assert "{" not in text and "}" not in text
                assert "[SENT]" not in text


def test_textualize_unknown_event_type(ontology):
    with pytest.raises(OntologyError, match="unknown event type"):
        textualize(EventStructure("No:Such", "x"), ontology)


def test_force_unspecific_overrides_filled_role(ontology):
    passage = textualize(
        FULL_PARDON, ontology, mode="strict", force_unspecific_roles={"Defendant"}
    )
    assert "an unspecific Defendant" in passage.text
    assert "Paul Laxalt" not in passage.text
    assert passage.unspecified_roles == ("Defendant",)


def test_positive_prompt_matches_instruction_with_substitutions(
    ontology, pardon_structure, laxalt_candidate
):
    enriched = enrich(pardon_structure, laxalt_candidate, ontology)
    prompt = build_positive_prompt(enriched, laxalt_candidate, ontology)
    assert prompt.system_preamble == DEFAULT_POSITIVE_SYSTEM
    expected = (
        f"{DEFAULT_POSITIVE_SYSTEM} {DEFAULT_POSITIVE_USER}"
        .replace("{event_type_name}", "Justice:Pardon")
        .replace("{list_of_context_entities}", "Paul Laxalt, 1988, Nevada")
        .replace("{event_template}", textualize(enriched.result, ontology).text)
    )
    assert prompt.text == expected
    assert "Generate a sentence with Justice:Pardon event" in prompt.text
    assert "Paul Laxalt, 1988, Nevada" in prompt.text


def test_positive_prompt_with_empty_context(ontology, pardon_structure, laxalt_candidate):
    enriched = enrich(pardon_structure, laxalt_candidate, ontology)
    prompt = build_positive_prompt(enriched, None, ontology)
    assert "context information: . " in prompt.text  # list rendered empty
    assert "Generate a sentence with Justice:Pardon event" in prompt.text


def test_positive_prompt_deterministic(ontology, pardon_structure, laxalt_candidate):
    enriched = enrich(pardon_structure, laxalt_candidate, ontology)
    a = build_positive_prompt(enriched, laxalt_candidate, ontology)
    b = build_positive_prompt(enriched, laxalt_candidate, ontology)
    assert a == b
    assert a.content_hash() == b.content_hash()


@pytest.mark.parametrize("kind", REWRITE_KINDS)
def test_rewrite_prompt_differs_only_at_sent_slot(kind):
    source = (
        "Hazelhurst & Associates Inc. declared bankruptcy yesterday, "
        "with $22.5 million in debts."
    )
    prompt = build_rewrite_prompt(kind, source)
    configured = DEFAULT_REWRITE_PROMPTS[kind]
    assert prompt.user_message == configured.replace("[SENT]", source)
    # String-diff check: removing the substituted sentence restores the
    # configured prompt exactly.
    assert prompt.user_message.replace(source, "[SENT]") == configured
    assert prompt.system_preamble == ""
    assert prompt.source == source


def test_negative_prompt_instructs_nonoccurrence():
    prompt = build_rewrite_prompt(
        "negative",
        "Hazelhurst & Associates Inc. declared bankruptcy yesterday, with $22.5 million in debts.",
    )
    assert "change it into a negative expression that the Event did not occur" in prompt.user_message


def test_believed_prompt_embeds_both_exemplars():
    prompt = build_rewrite_prompt("believed", "Something happened.")
    assert "Rumors of 'arrests' circulated in Vancouver." in prompt.user_message
    assert "The charity was suspected of 'giving' money to al Qaeda." in prompt.user_message


def test_rewrite_prompt_rejects_empty_source():
    with pytest.raises(ValueError, match="nonempty"):
        build_rewrite_prompt("negative", "")


def test_rewrite_prompt_rejects_unknown_kind():
    with pytest.raises(ValueError, match="unknown rewrite kind"):
        build_rewrite_prompt("sarcastic", "Something happened.")


def test_multi_filler_roles_join_with_and(ontology):
    text = textualize(FULL_PARDON, ontology).text
    assert "court and board of pardon and paroles" in text
    assert not re.search(r"\bsome adjudicator\b", text)
