"""Inverted fingerprint index, L-common marking and the ``.fpidx`` file format.

File layout (all integers little-endian)::

    magic        8 bytes   b"WSFPIDX\\0"
    version      u32       currently 1
    k, t         u32, u32  winnowing parameters
    L            u32       commonness threshold used for marking, 0 if unmarked
    n_docs       u32
    n_hashes     u64
    n_postings   u64
    n_grams      u32       number of stored common-gram texts
    doc table    n_docs records, sorted by doc_id:
                   id_len u16, id utf-8, flags u8 (1 = collaboration, 2 = has date),
                   date u32 (proleptic ordinal, 0 if absent), n_authors u16,
                   per author: len u16, raw name utf-8
    hashes       u64[n_hashes]   ascending
    common       u8[n_hashes]    1 if L-common
    counts       u32[n_hashes]   posting-list length per hash
    post_doc     u32[n_postings] doc table row, grouped by hash
    post_sent    u32[n_postings] sentence ordinal
    grams        n_grams records sorted by hash:
                   hash u64, n_tokens u16, per token: len u16, utf-8
    checksum     32 bytes        SHA-256 of every preceding byte
"""

from __future__ import annotations

import datetime as dt
import hashlib
import io
import struct
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .ingest import AuthorRecord, Document
from .winnow import WinnowParams, fingerprint_document, kgram_hashes

MAGIC = b"WSFPIDX\0"
VERSION = 1
_HEADER = struct.Struct("<8sIIIIIQQI")
_CHECKSUM_LEN = 32


class IndexFormatError(Exception):
    """The index file is corrupt, truncated or of an unknown version."""


class Posting(NamedTuple):
    doc_id: str
    sentence_ordinal: int


@dataclass(frozen=True, slots=True)
class DocMeta:
    authors: frozenset[AuthorRecord]
    is_collaboration: bool = False
    submission_date: dt.date | None = None

    @property
    def author_names(self) -> frozenset[str]:
        return frozenset(a.canonical_name for a in self.authors)

    @classmethod
    def of(cls, doc: Document) -> DocMeta:
        return cls(doc.authors, doc.is_collaboration, doc.submission_date)


@dataclass(eq=False)
class FingerprintIndex:
    params: WinnowParams
    entries: dict[int, list[Posting]] = field(default_factory=dict)
    docs: dict[str, DocMeta] = field(default_factory=dict)
    common_hashes: set[int] = field(default_factory=set)
    common_grams: dict[int, tuple[str, ...]] = field(default_factory=dict)
    L: int = 0
    _common_by_sentence: dict[Posting, frozenset[int]] | None = field(default=None, repr=False)

    @property
    def corpus_author_map(self) -> dict[str, frozenset[str]]:
        return {doc_id: m.author_names for doc_id, m in self.docs.items()}

    @property
    def posting_count(self) -> int:
        return sum(len(p) for p in self.entries.values())

    @property
    def common_by_sentence(self) -> dict[Posting, frozenset[int]]:
        """The L-common fingerprints of each sentence that has any."""
        if self._common_by_sentence is None:
            acc: dict[Posting, set[int]] = defaultdict(set)
            for h in self.common_hashes:
                for p in self.entries[h]:
                    acc[p].add(h)
            self._common_by_sentence = {p: frozenset(hs) for p, hs in acc.items()}
        return self._common_by_sentence

    @property
    def common_sentences(self) -> frozenset[Posting]:
        return frozenset(self.common_by_sentence)

    def doc_count(self, h: int) -> int:
        return len({p.doc_id for p in self.entries.get(h, ())})

    def merge(self, other: FingerprintIndex) -> FingerprintIndex:
        """Union of two unmarked partial indexes over disjoint documents."""
        if other.params != self.params:
            raise ValueError("cannot merge indexes with different parameters")
        clash = self.docs.keys() & other.docs.keys()
        if clash:
            raise ValueError(f"duplicate doc_id: {sorted(clash)[0]}")
        entries: dict[int, list[Posting]] = {h: list(p) for h, p in self.entries.items()}
        for h, postings in other.entries.items():
            entries.setdefault(h, []).extend(postings)
        for postings in entries.values():
            postings.sort()
        return FingerprintIndex(self.params, entries, {**self.docs, **other.docs})

    def same_as(self, other: FingerprintIndex) -> bool:
        return (
            self.params == other.params
            and self.L == other.L
            and self.entries == other.entries
            and self.common_hashes == other.common_hashes
            and self.common_grams == other.common_grams
            and self.docs == other.docs
            and all(
                {a.raw_name for a in m.authors} == {a.raw_name for a in other.docs[d].authors}
                for d, m in self.docs.items()
            )
        )


def _doc_fingerprints(args: tuple[Document, WinnowParams]) -> list[tuple[int, int]]:
    doc, params = args
    return [(fp.hash, fp.sentence_ordinal) for fp in fingerprint_document(doc, params)]


def build_index(
    docs: Iterable[Document], params: WinnowParams | None = None, jobs: int = 1
) -> FingerprintIndex:
    """Fingerprint every document and collect the postings per hash."""
    params = params or WinnowParams()
    docs = list(docs)
    meta: dict[str, DocMeta] = {}
    for doc in docs:
        if doc.doc_id in meta:
            raise ValueError(f"duplicate doc_id: {doc.doc_id}")
        meta[doc.doc_id] = DocMeta.of(doc)

    work = [(d, params) for d in docs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_doc = list(pool.map(_doc_fingerprints, work, chunksize=32))
    else:
        per_doc = [_doc_fingerprints(w) for w in work]

    acc: dict[int, set[Posting]] = defaultdict(set)
    for doc, fps in zip(docs, per_doc):
        doc_id = doc.doc_id
        for h, ordinal in fps:
            acc[h].add(Posting(doc_id, ordinal))
    entries = {h: sorted(acc[h]) for h in sorted(acc)}
    return FingerprintIndex(params, entries, dict(sorted(meta.items())))


def count_disjoint(doc_ids: Iterable[str], docs: Mapping[str, DocMeta], limit: int = 0) -> int:
    """Greedy count of documents with pairwise disjoint authorship.

    Documents are scanned in doc_id order. Collaborations are disjoint from
    every other document. Stops early once ``limit`` is reached.
    """
    taken: set[str] = set()
    count = 0
    for doc_id in sorted(set(doc_ids)):
        m = docs[doc_id]
        if m.is_collaboration:
            count += 1
        else:
            names = m.author_names
            if taken.isdisjoint(names):
                taken |= names
                count += 1
        if limit and count >= limit:
            break
    return count


def is_common(doc_ids: Iterable[str], docs: Mapping[str, DocMeta], L: int) -> bool:
    ids = set(doc_ids)
    if len(ids) < L:
        return False
    return count_disjoint(ids, docs, limit=L) >= L


def gram_tokens(doc: Document, sentence_ordinal: int, h: int, k: int) -> tuple[str, ...] | None:
    tokens = doc.sentences[sentence_ordinal].tokens
    for offset, gh in enumerate(kgram_hashes(tokens, k)):
        if gh == h:
            return tuple(tokens[offset : offset + k])
    return None


def mark_common(
    index: FingerprintIndex, L: int, docs: Mapping[str, Document] | None = None
) -> set[int]:
    """Mark hashes shared by at least L documents of disjoint authorship.

    When ``docs`` is given, the token text of each common gram is kept for
    frequency reports.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    common = {
        h
        for h, postings in index.entries.items()
        if is_common((p.doc_id for p in postings), index.docs, L)
    }
    index.common_hashes = common
    index.L = L
    index._common_by_sentence = None
    grams: dict[int, tuple[str, ...]] = {}
    if docs is not None:
        for h in sorted(common):
            first = index.entries[h][0]
            doc = docs.get(first.doc_id)
            if doc is not None:
                tokens = gram_tokens(doc, first.sentence_ordinal, h, index.params.k)
                if tokens is not None:
                    grams[h] = tokens
    else:
        grams = {h: g for h, g in index.common_grams.items() if h in common}
    index.common_grams = grams
    return common


# --- persistence -------------------------------------------------------------


def _put_str(buf: io.BytesIO, s: str) -> None:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ValueError(f"string too long for index: {s[:40]!r}...")
    buf.write(struct.pack("<H", len(data)))
    buf.write(data)


def dump_index(index: FingerprintIndex) -> bytes:
    doc_ids = sorted(index.docs)
    row = {d: i for i, d in enumerate(doc_ids)}
    hashes = sorted(index.entries)
    n_postings = index.posting_count
    grams = sorted(index.common_grams.items())

    buf = io.BytesIO()
    buf.write(
        _HEADER.pack(
            MAGIC, VERSION, index.params.k, index.params.t, index.L,
            len(doc_ids), len(hashes), n_postings, len(grams),
        )
    )
    for doc_id in doc_ids:
        m = index.docs[doc_id]
        _put_str(buf, doc_id)
        flags = (1 if m.is_collaboration else 0) | (2 if m.submission_date else 0)
        date = m.submission_date.toordinal() if m.submission_date else 0
        authors = sorted(m.authors, key=lambda a: a.canonical_name)
        buf.write(struct.pack("<BIH", flags, date, len(authors)))
        for a in authors:
            _put_str(buf, a.raw_name or a.canonical_name)

    counts = np.fromiter((len(index.entries[h]) for h in hashes), dtype="<u4", count=len(hashes))
    common = np.fromiter(
        (h in index.common_hashes for h in hashes), dtype="u1", count=len(hashes)
    )
    post_doc = np.empty(n_postings, dtype="<u4")
    post_sent = np.empty(n_postings, dtype="<u4")
    i = 0
    for h in hashes:
        for p in index.entries[h]:
            post_doc[i] = row[p.doc_id]
            post_sent[i] = p.sentence_ordinal
            i += 1
    buf.write(np.asarray(hashes, dtype="<u8").tobytes())
    buf.write(common.tobytes())
    buf.write(counts.tobytes())
    buf.write(post_doc.tobytes())
    buf.write(post_sent.tobytes())
    for h, tokens in grams:
        buf.write(struct.pack("<QH", h, len(tokens)))
        for tok in tokens:
            _put_str(buf, tok)
    body = buf.getvalue()
    return body + hashlib.sha256(body).digest()


def save_index(index: FingerprintIndex, path: Path | str) -> None:
    data = dump_index(index)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise IndexFormatError("index file is truncated")
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def unpack(self, fmt: str) -> tuple:
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def string(self) -> str:
        (n,) = self.unpack("<H")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IndexFormatError(f"corrupt string in index: {exc}") from None

    def array(self, dtype: str, n: int) -> np.ndarray:
        dt_ = np.dtype(dtype)
        return np.frombuffer(self.take(dt_.itemsize * n), dtype=dt_)


def verify_checksum(data: bytes) -> None:
    if len(data) < _HEADER.size + _CHECKSUM_LEN:
        raise IndexFormatError("index file is truncated")
    if data[:8] != MAGIC:
        raise IndexFormatError("not an index file (bad magic bytes)")
    body, digest = data[:-_CHECKSUM_LEN], data[-_CHECKSUM_LEN:]
    if hashlib.sha256(body).digest() != digest:
        raise IndexFormatError("checksum mismatch: index file is corrupt or truncated")


def parse_index(data: bytes, verify: bool = True) -> FingerprintIndex:
    if len(data) < _HEADER.size:
        raise IndexFormatError("index file is truncated")
    r = _Reader(data)
    magic, version, k, t, L, n_docs, n_hashes, n_postings, n_grams = r.unpack(_HEADER.format)
    if magic != MAGIC:
        raise IndexFormatError("not an index file (bad magic bytes)")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version} (expected {VERSION})")
    if verify:
        verify_checksum(data)
    try:
        params = WinnowParams(k, t)
    except ValueError as exc:
        raise IndexFormatError(f"bad parameters in index: {exc}") from None

    doc_ids: list[str] = []
    docs: dict[str, DocMeta] = {}
    for _ in range(n_docs):
        doc_id = r.string()
        flags, date, n_authors = r.unpack("<BIH")
        authors = frozenset(AuthorRecord.from_raw(r.string()) for _ in range(n_authors))
        docs[doc_id] = DocMeta(
            authors, bool(flags & 1), dt.date.fromordinal(date) if flags & 2 else None
        )
        doc_ids.append(doc_id)

    hashes = r.array("<u8", n_hashes).tolist()
    common = r.array("u1", n_hashes)
    counts = r.array("<u4", n_hashes).tolist()
    post_doc = r.array("<u4", n_postings).tolist()
    post_sent = r.array("<u4", n_postings).tolist()
    if sum(counts) != n_postings:
        raise IndexFormatError("posting counts do not add up")
    try:
        postings = [Posting(doc_ids[d], s) for d, s in zip(post_doc, post_sent)]
    except IndexError:
        raise IndexFormatError("posting refers to unknown document") from None
    entries: dict[int, list[Posting]] = {}
    i = 0
    for h, c in zip(hashes, counts):
        entries[h] = postings[i : i + c]
        i += c
    common_hashes = {h for h, flag in zip(hashes, common.tolist()) if flag}

    grams: dict[int, tuple[str, ...]] = {}
    for _ in range(n_grams):
        h, n_tok = r.unpack("<QH")
        grams[h] = tuple(r.string() for _ in range(n_tok))
    if r.pos != len(data) - _CHECKSUM_LEN:
        raise IndexFormatError("unexpected trailing data in index file")
    return FingerprintIndex(params, entries, docs, common_hashes, grams, L)


def load_index(path: Path | str, verify: bool = True) -> FingerprintIndex:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IndexFormatError(f"cannot read index {path}: {exc.strerror}") from None
    return parse_index(data, verify=verify)
