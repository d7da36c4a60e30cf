"""Candidate document pairs from shared uncommon fingerprints.

Overlap between two documents is measured in sentences: a sentence counts
once for its side when it shares at least one uncommon fingerprint with a
sentence of the other document, however many fingerprints it shares.
"""

from __future__ import annotations

from collections import ChainMap, defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .index import DocMeta, FingerprintIndex, Posting, is_common, mark_common
from .ingest import Document
from .winnow import WinnowParams, kgram_hashes, sentence_hash_sets


class ScreenError(ValueError):
    """The screened document cannot be compared against the index."""


@dataclass(frozen=True, slots=True)
class SimilarityParams:
    mu: int = 7
    L: int = 4
    nu: int = 12
    m: int = 4
    posting_cap: int | None = None

    def __post_init__(self) -> None:
        if self.L < 1 or self.m < 1:
            raise ValueError("L and m must be >= 1")
        if self.posting_cap is not None and self.posting_cap < 0:
            raise ValueError("posting_cap must be >= 0")

    @classmethod
    def for_winnow(cls, params: WinnowParams, **kw) -> SimilarityParams:
        return cls(mu=params.k, nu=params.t, **kw)

    @property
    def cap(self) -> int:
        """Document-count cap on witness hashes; 0 disables it."""
        return 2 * self.L * 100 if self.posting_cap is None else self.posting_cap

    def check(self, params: WinnowParams) -> None:
        if (self.mu, self.nu) != (params.k, params.t):
            raise ValueError(
                f"similarity lengths (mu={self.mu}, nu={self.nu}) must equal the "
                f"index winnowing parameters (k={params.k}, t={params.t})"
            )


@dataclass(frozen=True, slots=True)
class SentenceMatch:
    doc_a: str
    doc_b: str
    sentence_a: int
    sentence_b: int
    shared_hashes: frozenset[int]


@dataclass(frozen=True, slots=True)
class DocumentPair:
    doc_a: str
    doc_b: str
    matched_sentences_a: frozenset[int]
    matched_sentences_b: frozenset[int]
    shared_fingerprints: int = 0

    def __post_init__(self) -> None:
        if not self.doc_a < self.doc_b:
            raise ValueError(f"pair must be ordered: {self.doc_a!r} !< {self.doc_b!r}")

    @property
    def overlap_size(self) -> int:
        return min(len(self.matched_sentences_a), len(self.matched_sentences_b))

    @property
    def key(self) -> tuple[str, str]:
        return self.doc_a, self.doc_b


def find_sentence_matches(index: FingerprintIndex, posting_cap: int = 0) -> Iterator[SentenceMatch]:
    """Sentence pairs across documents that share uncommon fingerprints.

    Hashes marked common are never witnesses; neither are hashes found in
    more than ``posting_cap`` documents when the cap is non-zero.
    """
    common = index.common_hashes
    acc: dict[tuple[str, str, int, int], set[int]] = defaultdict(set)
    for h, postings in index.entries.items():
        if len(postings) < 2 or h in common:
            continue
        doc_ids = {p.doc_id for p in postings}
        if len(doc_ids) < 2 or (posting_cap and len(doc_ids) > posting_cap):
            continue
        # postings are sorted, so pa.doc_id <= pb.doc_id
        for i, pa in enumerate(postings):
            for pb in postings[i + 1 :]:
                if pa.doc_id != pb.doc_id:
                    acc[(pa.doc_id, pb.doc_id, pa.sentence_ordinal, pb.sentence_ordinal)].add(h)
    for key in sorted(acc):
        yield SentenceMatch(*key, frozenset(acc[key]))


def aggregate_pairs(
    matches: Iterable[SentenceMatch],
    m: int,
    excluded: frozenset[Posting] | set[Posting] = frozenset(),
) -> list[DocumentPair]:
    """Keep document pairs with at least ``m`` matched sentences on each side.

    Sentences listed in ``excluded`` (those holding a common fingerprint)
    never count towards their own side.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    sides: dict[tuple[str, str], tuple[set[int], set[int], set[int]]] = {}
    for sm in matches:
        sa, sb, hs = sides.setdefault((sm.doc_a, sm.doc_b), (set(), set(), set()))
        if Posting(sm.doc_a, sm.sentence_a) not in excluded:
            sa.add(sm.sentence_a)
        if Posting(sm.doc_b, sm.sentence_b) not in excluded:
            sb.add(sm.sentence_b)
        hs |= sm.shared_hashes
    return [
        DocumentPair(a, b, frozenset(sa), frozenset(sb), len(hs))
        for (a, b), (sa, sb, hs) in sorted(sides.items())
        if len(sa) >= m and len(sb) >= m
    ]


def _shares_gram(tokens_a, tokens_b, hashes: frozenset[int], k: int) -> frozenset[int]:
    grams_a = {
        h: tuple(tokens_a[i : i + k]) for i, h in enumerate(kgram_hashes(tokens_a, k)) if h in hashes
    }
    confirmed = set()
    for i, h in enumerate(kgram_hashes(tokens_b, k)):
        if h in grams_a and grams_a[h] == tuple(tokens_b[i : i + k]):
            confirmed.add(h)
    return frozenset(confirmed)


def verify_matches(
    matches: Iterable[SentenceMatch], docs: Mapping[str, Document], k: int
) -> Iterator[SentenceMatch]:
    """Drop witness hashes whose k-word runs differ, i.e. hash collisions."""
    for sm in matches:
        a = docs[sm.doc_a].sentences[sm.sentence_a].tokens
        b = docs[sm.doc_b].sentences[sm.sentence_b].tokens
        confirmed = _shares_gram(a, b, sm.shared_hashes, k)
        if confirmed:
            yield SentenceMatch(sm.doc_a, sm.doc_b, sm.sentence_a, sm.sentence_b, confirmed)


def _ensure_marked(index: FingerprintIndex, params: SimilarityParams) -> None:
    params.check(index.params)
    if index.L != params.L:
        mark_common(index, params.L)


def detect(
    index: FingerprintIndex,
    params: SimilarityParams | None = None,
    docs: Mapping[str, Document] | None = None,
    verify: bool = False,
) -> list[DocumentPair]:
    """All candidate pairs in an index, sorted by (doc_a, doc_b)."""
    params = params or SimilarityParams.for_winnow(index.params)
    _ensure_marked(index, params)
    matches: Iterable[SentenceMatch] = find_sentence_matches(index, params.cap)
    if verify:
        if docs is None:
            raise ValueError("match verification needs the documents")
        matches = verify_matches(matches, docs, index.params.k)
    return aggregate_pairs(matches, params.m, index.common_sentences)


def screen_document(
    doc: Document,
    index: FingerprintIndex,
    params: SimilarityParams | None = None,
    docs: Mapping[str, Document] | None = None,
    verify: bool = False,
) -> list[DocumentPair]:
    """Pairs involving ``doc`` as if it had been indexed with the corpus.

    Commonness is recomputed only for the hashes of ``doc``; the index is
    not modified.
    """
    params = params or SimilarityParams.for_winnow(index.params)
    _ensure_marked(index, params)
    if doc.doc_id in index.docs:
        raise ScreenError(f"doc_id {doc.doc_id!r} is already in the index")

    new_id = doc.doc_id
    meta = ChainMap({new_id: DocMeta.of(doc)}, index.docs)
    per_sentence = sentence_hash_sets(doc, index.params)
    doc_hashes = set().union(*(hs for _, hs in per_sentence))

    # commonness of doc's hashes in the corpus extended by doc
    common_now: dict[int, bool] = {}
    for h in doc_hashes:
        ids = {p.doc_id for p in index.entries.get(h, ())}
        ids.add(new_id)
        common_now[h] = is_common(ids, meta, params.L)

    def indexed_sentence_common(p: Posting) -> bool:
        held = index.common_by_sentence.get(p, ())
        return any(h not in common_now or common_now[h] for h in held)

    newly_common_sentences = {
        p for h, c in common_now.items() if c for p in index.entries.get(h, ())
    }

    cap = params.cap
    excluded: set[Posting] = set()
    acc: dict[tuple[str, str, int, int], set[int]] = defaultdict(set)
    for ordinal, hashes in per_sentence:
        if any(common_now[h] for h in hashes):
            excluded.add(Posting(new_id, ordinal))
        for h in hashes:
            if common_now[h]:
                continue
            postings = index.entries.get(h)
            if not postings:
                continue
            if cap and len({p.doc_id for p in postings}) + 1 > cap:
                continue
            for p in postings:
                if p.doc_id < new_id:
                    key = (p.doc_id, new_id, p.sentence_ordinal, ordinal)
                else:
                    key = (new_id, p.doc_id, ordinal, p.sentence_ordinal)
                acc[key].add(h)
                if p in newly_common_sentences or indexed_sentence_common(p):
                    excluded.add(p)

    matches: Iterable[SentenceMatch] = (
        SentenceMatch(*key, frozenset(acc[key])) for key in sorted(acc)
    )
    if verify:
        if docs is None:
            raise ValueError("match verification needs the documents")
        matches = verify_matches(matches, ChainMap({new_id: doc}, docs), index.params.k)
    return aggregate_pairs(matches, params.m, excluded)
