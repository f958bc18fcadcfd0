"""Event-structure textualization and generation-prompt construction.

Templates live in the ontology config, one per event type; the trigger
clause and all instruction strings default to fixed wording but can be
overridden from the prompt config.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Mapping

from .corpus import ContextCandidate
from .enrich import EnrichedStructure
from .model import EventOntology, EventStructure, OntologyError
from .util import sha256_text

POSITIVE = "positive"
REWRITE_KINDS = ("negative", "believed", "hypothetical", "promised", "desired")
PROMPT_KINDS = (POSITIVE,) + REWRITE_KINDS

TEXTUALIZE_MODES = ("strict", "unspecific_fill")

TRIGGER_CLAUSE = "Event trigger is {trigger}."
UNSPECIFIC_PHRASE = "an unspecific {role}"

DEFAULT_POSITIVE_SYSTEM = (
    "You are a helpful assistant in generating fluent and reasonable sentences "
    "with event mentions."
)

DEFAULT_POSITIVE_USER = (
    "An Event is a specific occurrence involving participants. An Event is "
    "something that happens. An Event can frequently be described as a change "
    "of state. Please be sure the given event information is in the generated "
    "sentence. However, the given context information is optional in "
    "generation. Generate a sentence with {event_type_name} event, with "
    "optional context information: {list_of_context_entities}. "
    "{event_template}."
)

DEFAULT_REWRITE_PROMPTS: dict[str, str] = {
    "negative": (
        "An Event is NEGATIVE when it is explicitly indicated that the Event "
        "did not occur. Negative example 1: His wife was sitting in the "
        "backseat and was 'not hurt'. Negative example 2: Yeltsin ordered "
        "Skuratov's suspension, but parliament repeatedly 'refused to sack' "
        "him. Given the generated sentence, \"[SENT]\", change it into a "
        "negative expression that the Event did not occur."
    ),
    "believed": (
        "Believed Events are event mentions that some people or organizations "
        "think or believe would happen but are not necessarily real or true "
        "event occurrences. Example 1: Rumors of 'arrests' circulated in "
        "Vancouver. Example 2: The charity was suspected of 'giving' money to "
        "al Qaeda. Given the generated sentence you provide, '[SENT]', change "
        "it into a believed event sentence:"
    ),
    "hypothetical": (
        "Hypothetical events are event mentions that are supposed to happen "
        "but are not necessarily real or true event occurrences. Example 1: "
        "Should he not 'pay' the money, they would 'kill' him. Example 2: A "
        "demonstration of how he would behave if he were to 'become' "
        "President. Given the generated sentence you provide, '[SENT]', "
        "change it into a hypothetical event sentence:"
    ),
    "promised": (
        "Promised Events are event mentions that are promised to happen but "
        "are not necessarily real or true event occurrences. Example 1: He "
        "said he would 'leave' town. Example 2: Promises of 'aid' made by "
        "Arab and European countries. Given the generated sentence you "
        "provide, '[SENT]', change it into a promised event sentence:"
    ),
    "desired": (
        "Desired events are event mentions that are desired to happen but not "
        "necessarily real or true event occurrences. Example: They wanted to "
        "'acquire' the company last year. Given the generated sentence you "
        "provide, \"[SENT]\", change it into a Desired event sentence:"
    ),
}


@dataclass(frozen=True)
class PromptConfig:
    """Overridable prompt strings; defaults are the stock instructions."""

    positive_system: str = DEFAULT_POSITIVE_SYSTEM
    positive_user: str = DEFAULT_POSITIVE_USER
    rewrite_prompts: Mapping[str, str] = field(
        default_factory=lambda: dict(DEFAULT_REWRITE_PROMPTS)
    )


DEFAULT_PROMPT_CONFIG = PromptConfig()


@dataclass(frozen=True)
class TemplatePassage:
    event_type: str
    text: str
    unspecified_roles: tuple[str, ...] = ()


@dataclass(frozen=True)
class GenerationPrompt:
    kind: str
    system_preamble: str
    user_message: str
    source: EnrichedStructure | str | None = None

    @property
    def text(self) -> str:
        """Full instruction text: preamble and user message joined."""
        if self.system_preamble:
            return f"{self.system_preamble} {self.user_message}"
        return self.user_message

    def content_hash(self) -> str:
        return sha256_text(f"{self.kind}\x00{self.system_preamble}\x00{self.user_message}")


def textualize(
    structure: EventStructure,
    ontology: EventOntology,
    mode: str = "strict",
    force_unspecific_roles: Collection[str] = (),
) -> TemplatePassage:
    """Render a structure as trigger clause plus the filled argument template.

    Filled slots take their fillers (multiple fillers joined with "and");
    vacant slots keep the generic "some-" phrase in strict mode and read
    "an unspecific <role>" in unspecific_fill mode. force_unspecific_roles
    renders the named roles unspecific regardless of their fill state.
    """
    if mode not in TEXTUALIZE_MODES:
        raise ValueError(f"unknown textualize mode {mode!r}")
    etype = ontology.get(structure.event_type)  # raises OntologyError if unknown
    forced = set(force_unspecific_roles)
    unknown_forced = forced - set(etype.role_names)
    if unknown_forced:
        raise OntologyError(f"cannot force unknown roles {sorted(unknown_forced)}")

    unspecified: list[str] = []
    replacements: dict[str, str] = {}
    for role in etype.roles:
        fillers = structure.fillers(role.name)
        if role.name in forced:
            replacements[role.name] = UNSPECIFIC_PHRASE.format(role=role.name)
            unspecified.append(role.name)
        elif fillers:
            replacements[role.name] = " and ".join(fillers)
        elif mode == "unspecific_fill":
            replacements[role.name] = UNSPECIFIC_PHRASE.format(role=role.name)
            unspecified.append(role.name)
        else:
            replacements[role.name] = role.slot

    # Splice by slot position in the raw template; never rescan substituted
    # text, so fillers that happen to contain a slot phrase stay intact.
    positions = sorted(
        ((etype.template.index(r.slot), r) for r in etype.roles), key=lambda t: t[0]
    )
    parts: list[str] = []
    cursor = 0
    for idx, role in positions:
        parts.append(etype.template[cursor:idx])
        parts.append(replacements[role.name])
        cursor = idx + len(role.slot)
    parts.append(etype.template[cursor:])
    argument_text = "".join(parts)

    text = f"{TRIGGER_CLAUSE.format(trigger=structure.trigger)} {argument_text}"
    return TemplatePassage(
        event_type=structure.event_type,
        text=text,
        unspecified_roles=tuple(unspecified),
    )


def render_entity_list(context: ContextCandidate | None) -> str:
    if context is None:
        return ""
    return ", ".join(surface for surface, _ in context.entities)


def build_positive_prompt(
    enriched: EnrichedStructure,
    context: ContextCandidate | None,
    ontology: EventOntology,
    prompts: PromptConfig = DEFAULT_PROMPT_CONFIG,
) -> GenerationPrompt:
    """Instruction for generating one positive mention of the enriched structure."""
    passage = textualize(enriched.result, ontology, mode="strict")
    user = (
        prompts.positive_user.replace("{event_type_name}", enriched.result.event_type)
        .replace("{list_of_context_entities}", render_entity_list(context))
        .replace("{event_template}", passage.text)
    )
    return GenerationPrompt(
        kind=POSITIVE,
        system_preamble=prompts.positive_system,
        user_message=user,
        source=enriched,
    )


def build_rewrite_prompt(
    kind: str,
    source_sentence: str,
    prompts: PromptConfig = DEFAULT_PROMPT_CONFIG,
) -> GenerationPrompt:
    """Instruction that rewrites a generated sentence into the given polarity.

    The configured prompt is used verbatim except for the "[SENT]" slot.
    """
    if kind not in REWRITE_KINDS:
        raise ValueError(f"unknown rewrite kind {kind!r}; expected one of {REWRITE_KINDS}")
    if not source_sentence:
        raise ValueError("source sentence must be nonempty")
    template = prompts.rewrite_prompts[kind]
    return GenerationPrompt(
        kind=kind,
        system_preamble="",
        user_message=template.replace("[SENT]", source_sentence),
        source=source_sentence,
    )
