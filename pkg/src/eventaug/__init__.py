"""Targeted data augmentation for low-resource event extraction."""

from .clients import (
    GazetteerNer,
    HashedEmbedder,
    HttpEmbedClient,
    HttpNerClient,
    HttpNliClient,
    OverlapNli,
)
from .corpus import ContextCandidate, CorpusIndex, build_index, extract_context, retrieve_by_trigger
from .curate import (
    AuditReport,
    DiscardPolicy,
    EpochBatchPlan,
    FewShotConfig,
    audit,
    discard_corrupted,
    plan_epochs,
    sample_few_shot,
)
from .enrich import EnrichedStructure, EnrichPolicy, enrich, enrich_batch
from .evaluate import PredictionRecord, Scores, report, score
from .generate import (
    AgentConfig,
    GeneratedExample,
    StubAgent,
    cost_report,
    generate,
    generate_negative_set,
)
from .model import (
    AnnotatedSentence,
    Argument,
    DatasetPartition,
    EventOntology,
    EventStructure,
    EventTypeDef,
    RoleDef,
    Span,
    load_dataset,
    load_ontology,
    write_dataset,
)
from .prompts import GenerationPrompt, TemplatePassage, build_positive_prompt, build_rewrite_prompt, textualize
from .validate import (
    PairCounts,
    Thresholds,
    ValidationVerdict,
    ValidatorTrainingPair,
    build_validator_pairs,
    check_accuracy,
    check_coherence,
    validate_batch,
)

__version__ = "0.1.0"
