"""Brute-force reference for small corpora.

Works on token equality only: no fingerprints, no winnowing, no index.
Every document pair and every sentence pair is compared directly, and
commonness uses an exact maximum set of author-disjoint documents.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .ingest import Document


@dataclass(frozen=True, slots=True)
class OracleMatch:
    doc_a: str
    doc_b: str
    sentence_a: int
    sentence_b: int
    run_length: int


@dataclass(frozen=True, slots=True)
class OraclePair:
    doc_a: str
    doc_b: str
    sentences_a: frozenset[int]
    sentences_b: frozenset[int]

    @property
    def overlap_size(self) -> int:
        return min(len(self.sentences_a), len(self.sentences_b))


@dataclass(frozen=True, slots=True)
class OracleParams:
    mu: int = 7
    L: int | None = 4
    nu: int = 12
    m: int = 4


def longest_common_run(a: Sequence[str], b: Sequence[str]) -> int:
    best = 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def _runs(tokens: Sequence[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def nu_similar_sentences(corpus: Sequence[Document], nu: int) -> list[OracleMatch]:
    """Every cross-document sentence pair sharing a run of at least ``nu`` words."""
    runs = {d.doc_id: [_runs(s.tokens, nu) for s in d.sentences] for d in corpus}
    out = []
    for a, b in combinations(sorted(corpus, key=lambda d: d.doc_id), 2):
        for sa, ra in zip(a.sentences, runs[a.doc_id]):
            if not ra:
                continue
            for sb, rb in zip(b.sentences, runs[b.doc_id]):
                if rb and not ra.isdisjoint(rb):
                    run = longest_common_run(sa.tokens, sb.tokens)
                    out.append(OracleMatch(a.doc_id, b.doc_id, sa.ordinal, sb.ordinal, run))
    return out


def _disjoint(x: Document, y: Document) -> bool:
    if x.is_collaboration or y.is_collaboration:
        return True
    return x.author_names.isdisjoint(y.author_names)


def max_disjoint_authorship(docs: Sequence[Document], target: int) -> int:
    """Size of the largest author-disjoint subset, searched up to ``target``."""
    docs = sorted(docs, key=lambda d: d.doc_id)
    best = 0

    def search(start: int, chosen: list[Document]) -> bool:
        nonlocal best
        best = max(best, len(chosen))
        if best >= target:
            return True
        if len(chosen) + len(docs) - start <= best:
            return False
        for i in range(start, len(docs)):
            if all(_disjoint(docs[i], c) for c in chosen):
                chosen.append(docs[i])
                if search(i + 1, chosen):
                    return True
                chosen.pop()
        return False

    search(0, [])
    return best


def common_sequences(corpus: Sequence[Document], mu: int, L: int) -> set[tuple[str, ...]]:
    """All mu-word sequences shared by L documents of disjoint authorship."""
    holders: dict[tuple[str, ...], set[str]] = defaultdict(set)
    for d in corpus:
        for s in d.sentences:
            for run in _runs(s.tokens, mu):
                holders[run].add(d.doc_id)
    by_id = {d.doc_id: d for d in corpus}
    return {
        run
        for run, ids in holders.items()
        if len(ids) >= L and max_disjoint_authorship([by_id[i] for i in ids], L) >= L
    }


def similar_documents(corpus: Sequence[Document], params: OracleParams = OracleParams()) -> list[OraclePair]:
    """Pairs with at least m uncommon sentences per side that are nu-similar
    to some sentence of the other document. ``L=None`` disables commonness."""
    common = common_sequences(corpus, params.mu, params.L) if params.L else set()

    def uncommon(s) -> bool:
        return common.isdisjoint(_runs(s.tokens, params.mu))

    eligible = {
        d.doc_id: {s.ordinal for s in d.sentences if uncommon(s)} for d in corpus
    }
    side_a: dict[tuple[str, str], set[int]] = defaultdict(set)
    side_b: dict[tuple[str, str], set[int]] = defaultdict(set)
    for match in nu_similar_sentences(corpus, params.nu):
        key = (match.doc_a, match.doc_b)
        if match.sentence_a in eligible[match.doc_a]:
            side_a[key].add(match.sentence_a)
        if match.sentence_b in eligible[match.doc_b]:
            side_b[key].add(match.sentence_b)
    out = []
    for key in sorted(side_a.keys() | side_b.keys()):
        sa, sb = side_a.get(key, set()), side_b.get(key, set())
        if len(sa) >= params.m and len(sb) >= params.m:
            out.append(OraclePair(key[0], key[1], frozenset(sa), frozenset(sb)))
    return out
