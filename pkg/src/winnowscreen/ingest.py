"""Corpus loading, text normalization and sentence segmentation."""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
import unicodedata
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

META_FILENAME = "corpus.meta.jsonl"

_NON_WORD = re.compile(r"[^\w.!?]|_")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_INNER_PUNCT = re.compile(r"[.!?]")
# heading word at a sentence start in normalized text
_REF_HEADING = re.compile(r"(?:^|(?<=[.!?]\s))(references|bibliography)(?=[\s.!?]|$)")
_REF_HEADING_LINE = re.compile(
    r"^\s*(?:\d+\.?\s*|[ivxlc]+\.\s*)?(references|bibliography)\s*:?\s*$",
    re.IGNORECASE | re.MULTILINE,
)


class CorpusError(Exception):
    """Fatal problem with a corpus as a whole (e.g. missing metadata)."""


def canonical_name(raw: str) -> str:
    """Lowercase, fold diacritics and collapse whitespace."""
    decomposed = unicodedata.normalize("NFKD", raw)
    folded = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(folded.lower().split())


@dataclass(frozen=True, slots=True)
class AuthorRecord:
    canonical_name: str
    raw_name: str = field(default="", compare=False)

    @classmethod
    def from_raw(cls, raw: str) -> AuthorRecord:
        name = canonical_name(raw)
        if not name:
            raise ValueError(f"empty author name: {raw!r}")
        return cls(canonical_name=name, raw_name=raw)

    @property
    def name_tokens(self) -> tuple[str, ...]:
        """The name in the token form used for document text."""
        return tuple(normalize_text(self.canonical_name).replace(".", " ").split())

    @property
    def surname(self) -> str:
        tokens = self.name_tokens
        return tokens[-1] if tokens else ""


@dataclass(frozen=True, slots=True)
class Sentence:
    ordinal: int
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, slots=True)
class Document:
    doc_id: str
    authors: frozenset[AuthorRecord]
    sentences: tuple[Sentence, ...]
    is_collaboration: bool = False
    submission_date: dt.date | None = None
    reference_text: str = ""
    body_text: str = ""

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.authors and not self.is_collaboration:
            raise ValueError(f"{self.doc_id}: no authors and not a collaboration")
        for i, s in enumerate(self.sentences):
            if s.ordinal != i:
                raise ValueError(f"{self.doc_id}: sentence ordinals must be dense")

    @property
    def author_names(self) -> frozenset[str]:
        return frozenset(a.canonical_name for a in self.authors)


@dataclass(frozen=True, slots=True)
class Skip:
    name: str
    reason: str


@dataclass(slots=True)
class CorpusLoad:
    documents: list[Document]
    skipped: list[Skip]


def normalize_text(raw: str) -> str:
    """Lowercase and reduce to letters, digits and sentence terminators.

    >>> normalize_text("E=mc^2, obviously!")
    'e mc 2 obviously!'
    """
    return " ".join(_NON_WORD.sub(" ", raw.lower()).split())


def segment_sentences(normalized: str) -> list[Sentence]:
    sentences: list[Sentence] = []
    for segment in _SENTENCE_END.split(normalized):
        tokens = tuple(_INNER_PUNCT.sub(" ", segment).split())
        if tokens:
            sentences.append(Sentence(len(sentences), tokens))
    return sentences


def extract_references(normalized: str) -> tuple[str, str]:
    """Split normalized text at its last references heading.

    A heading is the word ``references`` or ``bibliography`` opening a
    sentence. Returns ``(body, reference_text)``; the reference text is
    empty when there is no heading.
    """
    last = None
    for last in _REF_HEADING.finditer(normalized):
        pass
    if last is None:
        return normalized, ""
    body = normalized[: last.start()].strip()
    refs = normalized[last.end():].lstrip(" .!?").strip()
    return body, refs


def _split_raw_references(raw: str) -> tuple[str, str] | None:
    last = None
    for last in _REF_HEADING_LINE.finditer(raw):
        pass
    if last is None:
        return None
    return raw[: last.start()], raw[last.end():]


def build_document(
    doc_id: str,
    raw_text: str,
    authors: Iterable[str] = (),
    *,
    collaboration: bool = False,
    date: dt.date | None = None,
) -> Document:
    """Normalize and segment raw text into a Document."""
    split = _split_raw_references(raw_text)
    if split is not None:
        body = normalize_text(split[0])
        refs = normalize_text(split[1])
    else:
        body, refs = extract_references(normalize_text(raw_text))
    return Document(
        doc_id=doc_id,
        authors=frozenset(AuthorRecord.from_raw(a) for a in authors if a.strip()),
        sentences=tuple(segment_sentences(body)),
        is_collaboration=collaboration,
        submission_date=date,
        reference_text=refs,
        body_text=body,
    )


@dataclass(frozen=True, slots=True)
class MetaRecord:
    doc_id: str
    authors: tuple[str, ...]
    collaboration: bool
    date: dt.date | None


def parse_meta_line(line: str) -> MetaRecord:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    doc_id = rec.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise ValueError("missing doc_id")
    if "/" in doc_id or "\\" in doc_id or doc_id in (".", ".."):
        raise ValueError(f"doc_id not usable as a file name: {doc_id!r}")
    authors = rec.get("authors", [])
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        raise ValueError("authors must be an array of strings")
    date = rec.get("date")
    return MetaRecord(
        doc_id=doc_id,
        authors=tuple(authors),
        collaboration=bool(rec.get("collaboration", False)),
        date=dt.date.fromisoformat(date[:10]) if date else None,
    )


def read_metadata(corpus_path: Path) -> tuple[list[MetaRecord], list[Skip]]:
    meta_path = Path(corpus_path) / META_FILENAME
    if not meta_path.is_file():
        raise CorpusError(f"metadata file not found: {meta_path}")
    records: list[MetaRecord] = []
    skipped: list[Skip] = []
    seen: set[str] = set()
    with open(meta_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = parse_meta_line(line)
            except (ValueError, TypeError) as exc:
                skipped.append(Skip(f"{META_FILENAME}:{lineno}", f"bad metadata: {exc}"))
                continue
            if rec.doc_id in seen:
                skipped.append(Skip(rec.doc_id, "duplicate doc_id in metadata"))
                continue
            seen.add(rec.doc_id)
            records.append(rec)
    return records, skipped


def _load_one(args: tuple[Path, MetaRecord]) -> Document | Skip:
    corpus_path, rec = args
    path = corpus_path / f"{rec.doc_id}.txt"
    if not path.is_file():
        return Skip(rec.doc_id, "file missing")
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        return Skip(rec.doc_id, f"invalid encoding: {exc.reason} at byte {exc.start}")
    except OSError as exc:
        return Skip(rec.doc_id, f"unreadable: {exc.strerror}")
    try:
        return build_document(
            rec.doc_id, raw, rec.authors, collaboration=rec.collaboration, date=rec.date
        )
    except ValueError as exc:
        return Skip(rec.doc_id, str(exc))


def load_documents(
    corpus_path: Path, records: Sequence[MetaRecord], jobs: int = 1
) -> CorpusLoad:
    corpus_path = Path(corpus_path)
    work = [(corpus_path, r) for r in records]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_load_one, work, chunksize=64))
    else:
        results = [_load_one(w) for w in work]
    docs = [r for r in results if isinstance(r, Document)]
    skips = [r for r in results if isinstance(r, Skip)]
    docs.sort(key=lambda d: d.doc_id)
    return CorpusLoad(docs, skips)


def load_corpus(corpus_path: Path | str, jobs: int = 1) -> CorpusLoad:
    """Load every document listed in the corpus metadata file.

    Documents that cannot be read are skipped and reported; a missing
    metadata file raises CorpusError. Text files with no metadata entry
    are reported as skipped too.
    """
    corpus_path = Path(corpus_path)
    records, skipped = read_metadata(corpus_path)
    loaded = load_documents(corpus_path, records, jobs)
    listed = {r.doc_id for r in records}
    for path in sorted(corpus_path.glob("*.txt")):
        if path.stem not in listed:
            skipped.append(Skip(path.stem, "no metadata entry"))
    loaded.skipped = skipped + loaded.skipped
    for s in loaded.skipped:
        logger.warning("skipped %s: %s", s.name, s.reason)
    return loaded
