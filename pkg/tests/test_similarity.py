from __future__ import annotations

import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synth import SynthDoc, planted_corpus, random_corpus, random_sentence
from winnowscreen.index import build_index, mark_common
from winnowscreen.oracle import OracleParams, similar_documents
from winnowscreen.similarity import (
    DocumentPair,
    ScreenError,
    SentenceMatch,
    SimilarityParams,
    aggregate_pairs,
    detect,
    find_sentence_matches,
    screen_document,
    verify_matches,
)

PARAMS = SimilarityParams()


def indexed(docs, L=4):
    index = build_index(docs)
    mark_common(index, L, {d.doc_id: d for d in docs})
    return index


def pair_keys(pairs):
    return {(p.doc_a, p.doc_b) for p in pairs}


def test_params():
    assert (PARAMS.mu, PARAMS.L, PARAMS.nu, PARAMS.m) == (7, 4, 12, 4)
    assert PARAMS.cap == 800
    assert SimilarityParams(posting_cap=0).cap == 0
    with pytest.raises(ValueError):
        SimilarityParams(mu=5).check(build_index([]).params)


def test_common_hash_is_not_a_witness():
    rng = random.Random(1)
    boiler = random_sentence(rng, 14, 14)
    docs = [SynthDoc(f"d{i}", [random_sentence(rng), boiler], [f"A Q{i}"]).document() for i in range(4)]
    index = indexed(docs)
    assert index.common_hashes
    assert list(find_sentence_matches(index)) == []


def test_shared_long_sentence_matches():
    rng = random.Random(2)
    shared = random_sentence(rng, 12, 12)
    a = SynthDoc("a", [random_sentence(rng), shared], ["A Qa"]).document()
    b = SynthDoc("b", [shared], ["B Qb"]).document()
    matches = list(find_sentence_matches(indexed([a, b])))
    assert [(m.doc_a, m.doc_b, m.sentence_a, m.sentence_b) for m in matches] == [("a", "b", 1, 0)]


def test_three_documents_one_hash_three_matches():
    rng = random.Random(3)
    shared = random_sentence(rng, 12, 12)
    docs = [SynthDoc(f"d{i}", [shared], [f"A Q{i}"]).document() for i in range(3)]
    index = indexed(docs)
    (h,) = [h for h, ps in index.entries.items() if len(ps) == 3]
    expected = {(a.doc_id, b.doc_id) for a, b in combinations(index.entries[h], 2)}
    got = {(m.doc_a, m.doc_b) for m in find_sentence_matches(index) if h in m.shared_hashes}
    assert got == expected and len(got) == 3


def _matches(pairs_of_sentences):
    return [SentenceMatch("a", "b", sa, sb, frozenset({sa * 100 + sb})) for sa, sb in pairs_of_sentences]


def test_aggregate_threshold():
    assert aggregate_pairs(_matches([(i, i) for i in range(3)]), 4) == []
    (pair,) = aggregate_pairs(_matches([(i, i) for i in range(4)]), 4)
    assert pair.overlap_size == 4
    assert pair.matched_sentences_a == frozenset(range(4))


def test_aggregate_needs_both_sides():
    # five sentences of a all match two sentences of b
    assert aggregate_pairs(_matches([(i, i % 2) for i in range(5)]), 4) == []
    (pair,) = aggregate_pairs(_matches([(i, i % 2) for i in range(5)]), 2)
    assert pair.overlap_size == 2


def test_aggregate_excluded_sentences_do_not_count():
    from winnowscreen.index import Posting

    matches = _matches([(i, i) for i in range(4)])
    assert aggregate_pairs(matches, 4, {Posting("a", 0)}) == []


def test_document_pair_ordering():
    with pytest.raises(ValueError):
        DocumentPair("b", "a", frozenset({1}), frozenset({1}))


def _copy_fixture(seed=4, n_copied=4, indexed_docs=6):
    rng = random.Random(seed)
    corpus = random_corpus(rng, indexed_docs, 300)
    source = corpus.docs[2]
    long_ones = [s for s in source.sentences if len(s) >= 12][:n_copied]
    assert len(long_ones) == n_copied
    fresh = SynthDoc("new", [random_sentence(rng) for _ in range(5)] + long_ones, ["Nu Qnew"])
    return corpus, source, fresh


def test_screen_clean_document():
    corpus, _, _ = _copy_fixture()
    index = indexed(corpus.documents())
    clean = SynthDoc("clean", [random_sentence(random.Random(99)) for _ in range(10)], ["C Qc"])
    assert screen_document(clean.document(), index) == []


def test_screen_finds_copied_sentences_and_matches_rebuild():
    corpus, source, fresh = _copy_fixture()
    docs = corpus.documents()
    index = indexed(docs)
    before = index.entries.copy(), set(index.common_hashes)
    found = screen_document(fresh.document(), index)
    assert pair_keys(found) == {(source.doc_id, "new")}
    assert found[0].overlap_size == 4
    assert (index.entries, index.common_hashes) == before

    rebuilt = detect(indexed(docs + [fresh.document()]))
    assert [p for p in rebuilt if "new" in p.key] == found
    assert screen_document(fresh.document(), index) == found


def test_screen_rejects_known_id():
    corpus, _, _ = _copy_fixture()
    docs = corpus.documents()
    with pytest.raises(ScreenError):
        screen_document(docs[0], indexed(docs))


def test_posting_cap_skips_widespread_hashes():
    rng = random.Random(6)
    shared = [random_sentence(rng, 14, 14) for _ in range(4)]
    # same author everywhere, so never L-common
    docs = [SynthDoc(f"d{i}", shared, ["Same Qauthor"]).document() for i in range(5)]
    index = indexed(docs)
    assert len(detect(index, SimilarityParams(posting_cap=0))) == 10
    assert detect(index, SimilarityParams(posting_cap=4)) == []


def test_verify_matches_drops_collisions():
    rng = random.Random(7)
    shared = random_sentence(rng, 12, 12)
    a = SynthDoc("a", [shared], ["A Qa"]).document()
    b = SynthDoc("b", [random_sentence(rng, 12, 12)], ["B Qb"]).document()
    docs = {"a": a, "b": b}
    from winnowscreen.winnow import kgram_hashes

    forged = SentenceMatch("a", "b", 0, 0, frozenset({kgram_hashes(shared, 7)[0]}))
    assert list(verify_matches([forged], docs, 7)) == []
    real = SentenceMatch("a", "a", 0, 0, forged.shared_hashes)
    assert list(verify_matches([real], docs, 7)) == [real]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_sound_against_oracle(seed):
    rng = random.Random(seed)
    corpus = planted_corpus(rng, rng.randint(2, 8), rng.randint(4, 25))
    docs = corpus.documents()
    for m in (1, 2):
        params = SimilarityParams(m=m, posting_cap=0)
        found = pair_keys(detect(indexed(docs), params, {d.doc_id: d for d in docs}, verify=True))
        certified = pair_keys(similar_documents(docs, OracleParams(m=m)))
        assert certified <= found
        loose = pair_keys(similar_documents(docs, OracleParams(nu=7, L=None, m=m)))
        assert found <= loose


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_screen_equals_rebuild(seed):
    rng = random.Random(seed)
    corpus = planted_corpus(rng, rng.randint(3, 8), rng.randint(5, 25))
    fresh = corpus.docs.pop(rng.randrange(len(corpus.docs)))
    fresh.doc_id = rng.choice(["aaa", "m", "zzz"]) + fresh.doc_id
    # sometimes reuse an author so commonness can shift either way
    if rng.random() < 0.5:
        fresh.authors = list(rng.choice(corpus.docs).authors)
    docs = corpus.documents()
    new = fresh.document()
    for m, L in ((1, 2), (2, 3), (1, 4)):
        params = SimilarityParams(L=L, m=m)
        screened = screen_document(new, indexed(docs, L), params)
        rebuilt = detect(indexed(docs + [new], L), params)
        assert screened == [p for p in rebuilt if fresh.doc_id in p.key]


def test_screen_handles_hash_becoming_common():
    rng = random.Random(12)
    boiler = random_sentence(rng, 13, 13)
    copies = [random_sentence(rng, 15, 15) for _ in range(2)]
    docs = [
        SynthDoc(f"d{i}", [boiler, *copies] if i == 0 else [boiler], [f"A Q{i}"]).document()
        for i in range(3)
    ]
    fresh = SynthDoc("n", [boiler, *copies], ["A Qnew"]).document()
    params = SimilarityParams(L=4, m=1)
    index = indexed(docs)
    assert not index.common_hashes
    screened = screen_document(fresh, index, params)
    rebuilt = [p for p in detect(indexed(docs + [fresh]), params) if "n" in p.key]
    assert screened == rebuilt
    (pair,) = screened
    assert pair.key == ("d0", "n")
    # the boilerplate sentence became common once the fourth document arrived
    assert 0 not in pair.matched_sentences_a and 0 not in pair.matched_sentences_b


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9))
def test_ingestion_order_symmetry(seed):
    rng = random.Random(seed)
    docs = planted_corpus(rng, 6, 15).documents()
    params = SimilarityParams(m=1)
    forward = detect(indexed(docs), params)
    shuffled = docs[:]
    rng.shuffle(shuffled)
    assert detect(indexed(shuffled), params) == forward
