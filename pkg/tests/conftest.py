import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(ROOT / "scripts"))

from eventaug.corpus import ContextCandidate
from eventaug.model import Argument, EventStructure, load_dataset, load_ontology


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def ontology():
    return load_ontology(FIXTURES / "ontology.yaml")


@pytest.fixture(scope="session")
def novel_partition(ontology):
    return load_dataset(FIXTURES / "novel.jsonl", ontology, kind="novel")


@pytest.fixture(scope="session")
def base_partition(ontology):
    return load_dataset(FIXTURES / "base.jsonl", ontology, kind="base")


@pytest.fixture
def pardon_structure() -> EventStructure:
    """The worked Justice:Pardon example: two Adjudicators, rest vacant."""
    return EventStructure(
        event_type="Justice:Pardon",
        trigger="clear",
        arguments=(
            Argument("Adjudicator", "court"),
            Argument("Adjudicator", "board of pardon and paroles"),
        ),
    )


@pytest.fixture
def laxalt_candidate() -> ContextCandidate:
    """Context entities from 'Paul Laxalt retired in 1988 in Nevada.'"""
    return ContextCandidate(
        source_sentence_id=1,
        entities=(("Paul Laxalt", "PER"), ("1988", "DATE"), ("Nevada", "GPE")),
    )
