"""Sentence-restricted word winnowing.

Each sentence is hashed into overlapping k-word grams and a window of
``w = t - k + 1`` consecutive gram hashes slides over them. The minimum of
every window is kept, so any run of at least ``t`` words shared by two
sentences yields at least one common fingerprint.
"""

from __future__ import annotations

from dataclasses import dataclass
from hashlib import blake2b
from typing import Sequence

from .ingest import Document, Sentence

# Fixed personalization acts as the hash seed; changing it invalidates indexes.
_HASH_PERSON = b"winnowscreen.k1"
_SEP = "\x1f"


@dataclass(frozen=True, slots=True)
class WinnowParams:
    k: int = 7
    t: int = 12

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.t < self.k:
            raise ValueError(f"t must be >= k, got t={self.t}, k={self.k}")

    @property
    def w(self) -> int:
        """Window size counted in k-gram hashes."""
        return self.t - self.k + 1


@dataclass(frozen=True, slots=True)
class Fingerprint:
    hash: int
    doc_id: str
    sentence_ordinal: int
    token_offset: int


def gram_hash(tokens: Sequence[str]) -> int:
    """Stable unsigned 64-bit hash of a token sequence."""
    data = _SEP.join(tokens).encode("utf-8")
    return int.from_bytes(
        blake2b(data, digest_size=8, person=_HASH_PERSON).digest(), "little"
    )


def kgram_hashes(sentence: Sentence | Sequence[str], k: int) -> list[int]:
    tokens = sentence.tokens if isinstance(sentence, Sentence) else sentence
    return [gram_hash(tokens[i : i + k]) for i in range(len(tokens) - k + 1)]


def select_positions(hashes: Sequence[int], w: int) -> list[int]:
    """Winnow a hash sequence, returning the selected positions in order.

    Ties go to the rightmost minimum, except that a minimum already selected
    for the previous window is kept while it stays in the window.
    """
    g = len(hashes)
    if g == 0:
        return []
    if g < w:
        lo = min(hashes)
        return [max(i for i in range(g) if hashes[i] == lo)]

    selected: list[int] = []
    prev = -1
    for start in range(g - w + 1):
        window = hashes[start : start + w]
        lo = min(window)
        if prev >= start and hashes[prev] == lo:
            continue
        pos = start + w - 1 - window[::-1].index(lo)
        if pos != prev:
            selected.append(pos)
            prev = pos
    return selected


def winnow_sentence(
    sentence: Sentence, params: WinnowParams, doc_id: str = ""
) -> list[Fingerprint]:
    hashes = kgram_hashes(sentence, params.k)
    return [
        Fingerprint(hashes[p], doc_id, sentence.ordinal, p)
        for p in select_positions(hashes, params.w)
    ]


def fingerprint_document(doc: Document, params: WinnowParams) -> list[Fingerprint]:
    out: list[Fingerprint] = []
    for sentence in doc.sentences:
        out.extend(winnow_sentence(sentence, params, doc.doc_id))
    return out


def sentence_hash_sets(doc: Document, params: WinnowParams) -> list[tuple[int, frozenset[int]]]:
    """Per-sentence selected hash sets, skipping sentences with none."""
    out = []
    for sentence in doc.sentences:
        hashes = kgram_hashes(sentence, params.k)
        if hashes:
            out.append(
                (sentence.ordinal, frozenset(hashes[p] for p in select_positions(hashes, params.w)))
            )
    return out
