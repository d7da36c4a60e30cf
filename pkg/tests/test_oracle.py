from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from synth import SynthDoc, random_corpus, random_sentence
from winnowscreen.oracle import (
    OracleParams,
    common_sequences,
    longest_common_run,
    max_disjoint_authorship,
    nu_similar_sentences,
    similar_documents,
)


def test_longest_common_run():
    assert longest_common_run("a b c d".split(), "x b c d y".split()) == 3
    assert longest_common_run([], ["a"]) == 0
    assert longest_common_run(list("abab"), list("baba")) == 3


def test_identical_12_word_sentences_match():
    s = random_sentence(random.Random(1), 12, 12)
    a = SynthDoc("a", [s], ["A Qa"]).document()
    b = SynthDoc("b", [s], ["B Qb"]).document()
    (m,) = nu_similar_sentences([a, b], 12)
    assert (m.doc_a, m.doc_b, m.sentence_a, m.sentence_b, m.run_length) == ("a", "b", 0, 0, 12)


def test_eleven_word_run_is_not_enough():
    rng = random.Random(2)
    run = random_sentence(rng, 11, 11)
    a = SynthDoc("a", [["xaa"] + run + ["yaa"]], ["A Qa"]).document()
    b = SynthDoc("b", [["xee"] + run + ["yee"]], ["B Qb"]).document()
    assert nu_similar_sentences([a, b], 12) == []
    assert len(nu_similar_sentences([a, b], 11)) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_planted_runs_found_exactly(seed):
    rng = random.Random(seed)
    corpus = random_corpus(rng, 5, 80)
    truth = set()
    for _ in range(6):
        a, b = sorted(rng.sample(corpus.docs, 2), key=lambda d: d.doc_id)
        length = rng.choice([6, 9, 11, 12, 13, 18])
        run = random_sentence(rng, length, length)
        ia, ib = len(a.sentences), len(b.sentences)
        a.sentences.append(random_sentence(rng, 1, 3) + run)
        b.sentences.append(run + random_sentence(rng, 1, 3))
        if length >= 12:
            truth.add((a.doc_id, b.doc_id, ia, ib))
    # planted sentences go at the end so the recorded ordinals stay valid
    found = {(m.doc_a, m.doc_b, m.sentence_a, m.sentence_b) for m in nu_similar_sentences(corpus.documents(), 12)}
    assert found == truth


def test_shared_long_sentences_reported():
    rng = random.Random(3)
    shared = [random_sentence(rng, 15, 15) for _ in range(4)]
    a = SynthDoc("a", [random_sentence(rng), *shared], ["A Qa"]).document()
    b = SynthDoc("b", [*shared], ["B Qb"]).document()
    (pair,) = similar_documents([a, b])
    assert pair.overlap_size == 4


def test_common_sentences_excluded():
    rng = random.Random(4)
    shared = [random_sentence(rng, 15, 15) for _ in range(4)]
    docs = [
        SynthDoc("a", shared, ["A Qa"]).document(),
        SynthDoc("b", shared, ["B Qb"]).document(),
    ]
    # each shared sentence also appears in two more author-disjoint documents
    docs += [SynthDoc(f"x{i}", shared, [f"X Q{i}"]).document() for i in range(2)]
    assert similar_documents(docs, OracleParams(L=4)) == []
    assert len(similar_documents(docs, OracleParams(L=5))) == 6


def test_common_needs_disjoint_authors():
    rng = random.Random(5)
    s = random_sentence(rng, 10, 10)
    same = [SynthDoc(f"d{i}", [s], ["Same Qone"]).document() for i in range(4)]
    assert common_sequences(same, 7, 4) == set()
    distinct = [SynthDoc(f"d{i}", [s], [f"Au Q{i}"]).document() for i in range(4)]
    assert len(common_sequences(distinct, 7, 4)) == 4


def test_max_disjoint_is_exact():
    # greedy in id order would pick d0 and then be stuck; the optimum skips it
    docs = [
        SynthDoc("d0", [], ["A Qa", "B Qb"]).document(),
        SynthDoc("d1", [], ["A Qa", "C Qc"]).document(),
        SynthDoc("d2", [], ["B Qb", "D Qd"]).document(),
    ]
    assert max_disjoint_authorship(docs, 5) == 2


def test_asymmetric_pair_not_reported():
    rng = random.Random(6)
    shared = [random_sentence(rng, 15, 15) for _ in range(3)]
    glued = shared[2] + shared[0]
    # a holds four matching sentences, b only three distinct ones
    a = SynthDoc("a", [*shared, glued], ["A Qa"]).document()
    b = SynthDoc("b", shared, ["B Qb"]).document()
    assert similar_documents([a, b], OracleParams(m=4)) == []
    (pair,) = similar_documents([a, b], OracleParams(m=3))
    assert len(pair.sentences_a) == 4 and len(pair.sentences_b) == 3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9))
def test_independent_of_sentence_order(seed):
    rng = random.Random(seed)
    corpus = random_corpus(rng, 4, 80)
    shared = [random_sentence(rng, 13, 16) for _ in range(3)]
    for d in corpus.docs[:2]:
        d.sentences += shared
    params = OracleParams(m=2)
    before = {(p.doc_a, p.doc_b, p.overlap_size) for p in similar_documents(corpus.documents(), params)}
    for d in corpus.docs:
        rng.shuffle(d.sentences)
    after = {(p.doc_a, p.doc_b, p.overlap_size) for p in similar_documents(corpus.documents(), params)}
    assert before == after and before
