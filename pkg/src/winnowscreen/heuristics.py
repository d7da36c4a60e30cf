"""Authorship heuristics that separate likely plagiarism from benign reuse."""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Protocol

from .ingest import AuthorRecord, Document
from .similarity import DocumentPair

MIN_SURNAME_LEN = 4


class Flag(str, enum.Enum):
    COAUTHOR = "coauthor"
    REFERENCED = "referenced"
    MENTIONED = "mentioned"
    COLLABORATION = "collaboration"
    MENTIONED_AND_COLLABORATION = "mentioned_and_collaboration"


class PairClass(str, enum.Enum):
    SELF_REUSE = "self_reuse"
    DISCARDED = "discarded"
    SECONDARY = "secondary"
    PRIMARY = "primary"


DISCARDING = frozenset({Flag.COAUTHOR, Flag.MENTIONED_AND_COLLABORATION})
DEMOTING = frozenset({Flag.REFERENCED, Flag.MENTIONED, Flag.COLLABORATION})


class _Authored(Protocol):
    authors: frozenset[AuthorRecord]
    is_collaboration: bool


@dataclass(slots=True)
class CoauthorGraph:
    adjacency: dict[str, set[str]] = field(default_factory=dict)

    def neighbors(self, name: str) -> set[str]:
        return self.adjacency.get(name, set())

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            return
        self.adjacency.setdefault(a, set()).add(b)
        self.adjacency.setdefault(b, set()).add(a)


def build_coauthor_graph(docs: Iterable[_Authored]) -> CoauthorGraph:
    """Link every pair of authors listed together on a non-collaboration document."""
    graph = CoauthorGraph()
    for doc in docs:
        if doc.is_collaboration:
            continue
        names = sorted({a.canonical_name for a in doc.authors})
        for a, b in combinations(names, 2):
            graph.add_edge(a, b)
    return graph


@dataclass(frozen=True, slots=True)
class PairVerdict:
    pair: DocumentPair
    flags: frozenset[Flag]
    klass: PairClass

    @property
    def overlap_size(self) -> int:
        return self.pair.overlap_size


def classify_flags(flags: frozenset[Flag], shares_author: bool) -> PairClass:
    if shares_author:
        return PairClass.SELF_REUSE
    if flags & DISCARDING:
        return PairClass.DISCARDED
    if flags & DEMOTING:
        return PairClass.SECONDARY
    return PairClass.PRIMARY


def _token_text(text: str) -> str:
    return " " + " ".join(re.sub(r"[.!?]", " ", text).split()) + " "


def _contains(haystack: str, tokens: Iterable[str]) -> bool:
    needle = " ".join(tokens)
    return bool(needle) and f" {needle} " in haystack


def _referenced(author: AuthorRecord, refs: str) -> bool:
    tokens = author.name_tokens
    if _contains(refs, tokens):
        return True
    if len(tokens) >= 2:
        initial, surname = tokens[0][0], tokens[-1]
        return _contains(refs, (initial, surname)) or _contains(refs, (surname, initial))
    return False


def _mentioned(author: AuthorRecord, body: str) -> bool:
    surname = author.surname
    if len(surname) >= MIN_SURNAME_LEN:
        return _contains(body, (surname,))
    return _contains(body, author.name_tokens)


def flag_pair(
    pair: DocumentPair, docs: Mapping[str, Document], graph: CoauthorGraph
) -> PairVerdict:
    a, b = docs[pair.doc_a], docs[pair.doc_b]
    flags: set[Flag] = set()

    a_names, names_b = a.author_names, b.author_names
    if any(graph.neighbors(x) & names_b for x in a_names):
        flags.add(Flag.COAUTHOR)

    refs_a, refs_b = _token_text(a.reference_text), _token_text(b.reference_text)
    if any(_referenced(x, refs_b) for x in a.authors) or any(
        _referenced(y, refs_a) for y in b.authors
    ):
        flags.add(Flag.REFERENCED)

    body_a, body_b = _token_text(a.body_text), _token_text(b.body_text)
    if any(_mentioned(x, body_b) for x in a.authors) or any(
        _mentioned(y, body_a) for y in b.authors
    ):
        flags.add(Flag.MENTIONED)

    if a.is_collaboration or b.is_collaboration:
        flags.add(Flag.COLLABORATION)
    if Flag.MENTIONED in flags and Flag.COLLABORATION in flags:
        flags.add(Flag.MENTIONED_AND_COLLABORATION)

    frozen = frozenset(flags)
    return PairVerdict(pair, frozen, classify_flags(frozen, bool(a_names & names_b)))


@dataclass(frozen=True, slots=True)
class ImpactRow:
    rule: int
    flag: Flag
    affected: int
    percent: float


@dataclass(slots=True)
class Classification:
    primary: list[PairVerdict] = field(default_factory=list)
    secondary: list[PairVerdict] = field(default_factory=list)
    discarded: list[PairVerdict] = field(default_factory=list)
    self_reuse: list[PairVerdict] = field(default_factory=list)
    impact: list[ImpactRow] = field(default_factory=list)
    candidates: int = 0

    @property
    def verdicts(self) -> list[PairVerdict]:
        return self.primary + self.secondary + self.discarded + self.self_reuse

    def of(self, klass: PairClass) -> list[PairVerdict]:
        return {
            PairClass.PRIMARY: self.primary,
            PairClass.SECONDARY: self.secondary,
            PairClass.DISCARDED: self.discarded,
            PairClass.SELF_REUSE: self.self_reuse,
        }[klass]


RULE_ORDER = (
    Flag.COAUTHOR,
    Flag.REFERENCED,
    Flag.MENTIONED,
    Flag.COLLABORATION,
    Flag.MENTIONED_AND_COLLABORATION,
)


def impact_table(verdicts: Iterable[PairVerdict]) -> tuple[list[ImpactRow], int]:
    """Per-rule counts over pairs without shared authors."""
    counts: dict[Flag, int] = defaultdict(int)
    candidates = 0
    for v in verdicts:
        if v.klass is PairClass.SELF_REUSE:
            continue
        candidates += 1
        for f in v.flags:
            counts[f] += 1
    rows = [
        ImpactRow(i, f, counts[f], 100.0 * counts[f] / candidates if candidates else 0.0)
        for i, f in enumerate(RULE_ORDER, 1)
    ]
    return rows, candidates


def classify_all(
    pairs: Iterable[DocumentPair], docs: Mapping[str, Document], graph: CoauthorGraph
) -> Classification:
    out = Classification()
    for pair in pairs:
        v = flag_pair(pair, docs, graph)
        out.of(v.klass).append(v)
    out.impact, out.candidates = impact_table(out.verdicts)
    return out
