"""Inverted index build/persist/retrieve and NER context extraction."""
import random

import pytest

from eventaug.clients import ClientError, GazetteerNer, TaggedEntity
from eventaug.corpus import (
    ContextCandidate,
    CorpusError,
    build_index,
    extract_context,
    load_index,
    load_or_build,
    retrieve_by_trigger,
    save_index,
)
from eventaug.model import EventStructure
from eventaug.text import lemmatize, normalize_tokens
from eventaug.util import sha256_file


@pytest.fixture(scope="module")
def index(fixtures_dir):
    return build_index(fixtures_dir / "corpus.txt", "lemmatized")


@pytest.fixture(scope="module")
def ner(fixtures_dir):
    return GazetteerNer.from_file(fixtures_dir / "gazetteer.tsv")


def structure(trigger, etype="Justice:Pardon"):
    return EventStructure(event_type=etype, trigger=trigger)


def test_postings_direct_containment(tmp_path):
    corpus = tmp_path / "tiny.txt"
    corpus.write_text(
        "The dog slept.\nThe king granted a pardon today.\nNothing happened.\n",
        encoding="utf-8",
    )
    idx = build_index(corpus, "lowercase")
    assert idx.postings["pardon"] == (2,)


def test_index_build_is_deterministic(tmp_path, fixtures_dir):
    # Hash oracle: indexing the same corpus twice gives identical files.
    a, b = tmp_path / "a.idx", tmp_path / "b.idx"
    save_index(build_index(fixtures_dir / "corpus.txt", "lemmatized"), a)
    save_index(build_index(fixtures_dir / "corpus.txt", "lemmatized"), b)
    assert sha256_file(a) == sha256_file(b)


def test_index_round_trip(tmp_path, index):
    path = tmp_path / "corpus.idx"
    save_index(index, path)
    loaded = load_index(path)
    assert loaded == index


def test_load_or_build_reuses_fresh_index(tmp_path, fixtures_dir):
    path = tmp_path / "corpus.idx"
    load_or_build(fixtures_dir / "corpus.txt", "lemmatized", path)
    stamp = path.stat().st_mtime_ns
    again = load_or_build(fixtures_dir / "corpus.txt", "lemmatized", path)
    assert path.stat().st_mtime_ns == stamp
    assert len(again.sentences) == 50


def test_lemmatized_mode_matches_inflected_surface(index):
    # Oracle: lemmatize both sides and compare.
    assert lemmatize("cleared") == lemmatize("clear")
    ids = retrieve_by_trigger(index, structure("clear"), limit=100)
    texts = [index.sentence(i) for i in ids]
    assert any("cleared the suspects" in t for t in texts)


def test_retrieval_soundness(index):
    for trigger in ("clear", "pardon", "convicted", "fined", "bankruptcy"):
        want = set(normalize_tokens(trigger, index.mode))
        for sid in retrieve_by_trigger(index, structure(trigger), limit=1000):
            have = set(normalize_tokens(index.sentence(sid), index.mode))
            assert want <= have, (trigger, sid)


def test_retrieval_completeness_matches_brute_force(index):
    # Brute-force oracle over the whole fixture corpus.
    for trigger in ("clear", "pardoned", "attacked", "absent-token"):
        want = normalize_tokens(trigger, index.mode)
        expected = sorted(
            sid
            for sid, text in index.sentences.items()
            if set(want) <= set(normalize_tokens(text, index.mode))
        )
        got = retrieve_by_trigger(index, structure(trigger), limit=10_000)
        assert got == expected


def test_retrieve_limit_truncates_ascending(index):
    all_ids = retrieve_by_trigger(index, structure("clear"), limit=1000)
    assert len(all_ids) >= 5
    assert retrieve_by_trigger(index, structure("clear"), limit=3) == all_ids[:3]


def test_retrieve_absent_trigger_returns_empty(index):
    assert retrieve_by_trigger(index, structure("zzzunseen"), limit=5) == []


def test_retrieve_limit_beyond_matches_gives_all(index):
    ids = retrieve_by_trigger(index, structure("bankruptcy"), limit=10_000)
    assert ids == retrieve_by_trigger(index, structure("bankruptcy"), limit=len(ids) + 50)


def test_multi_token_trigger_requires_all_tokens(tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text("they declare things\nthey declare bankruptcy\nbankruptcy looms\n", encoding="utf-8")
    idx = build_index(corpus, "lowercase")
    assert retrieve_by_trigger(idx, structure("declare bankruptcy"), limit=10) == [2]


def test_sampled_retrieval_is_seeded(index):
    a = retrieve_by_trigger(index, structure("clear"), limit=2, rng=random.Random(7))
    b = retrieve_by_trigger(index, structure("clear"), limit=2, rng=random.Random(7))
    c = retrieve_by_trigger(index, structure("clear"), limit=2, rng=random.Random(8))
    assert a == b
    assert len(a) == 2
    assert a == sorted(a)
    assert a != c or True  # different seeds may collide; only determinism is contractual


def test_encoding_error_reports_line(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"fine line\n\xff\xfe broken\n")
    with pytest.raises(CorpusError, match="line 2"):
        build_index(bad, "lowercase")


def test_extract_context_paper_entity_list(index, ner):
    # Sentence 1 of the fixture corpus is the retirement sentence.
    [candidate] = extract_context(index, [1], ner)
    assert candidate.entities == (
        ("Paul Laxalt", "PER"),
        ("1988", "DATE"),
        ("Nevada", "GPE"),
    )


def test_extract_context_drops_entityless_sentences(index, ner):
    # "The senate calendar is clear for the rest of the week." has no entities.
    sid = next(i for i, t in index.sentences.items() if t.startswith("The senate calendar"))
    assert extract_context(index, [sid], ner) == []


def test_extract_context_duplicate_ids_kept(index, ner):
    candidates = extract_context(index, [1, 1], ner)
    assert len(candidates) == 2
    assert candidates[0] == candidates[1]


def test_extract_context_label_set_enforced(index, ner):
    with pytest.raises(CorpusError, match="outside the configured set"):
        extract_context(index, [1], ner, allowed_labels=["PER"])


def test_extract_context_survives_ner_failure(index):
    class FlakyNer:
        def tag_batch(self, sentences):
            raise ClientError("down")

    assert extract_context(index, [1, 2], FlakyNer()) == []


def test_extract_context_concurrent_order_preserved(index, ner):
    ids = [1, 5, 8, 11, 13, 16]
    serial = extract_context(index, ids, ner, batch_size=2, concurrency=1)
    parallel = extract_context(index, ids, ner, batch_size=2, concurrency=4)
    assert serial == parallel


def test_candidate_requires_entities():
    with pytest.raises(CorpusError):
        ContextCandidate(source_sentence_id=1, entities=())


def test_gazetteer_longest_match(ner):
    [entities] = ner.tag_batch(["Marc Rich met Abdullah II in Jordan."])
    assert [e.text for e in entities] == ["Marc Rich", "Abdullah II", "Jordan"]
    assert [e.label for e in entities] == ["PER", "PER", "GPE"]
    for e in entities:
        assert "Marc Rich met Abdullah II in Jordan."[e.start : e.end] == e.text
