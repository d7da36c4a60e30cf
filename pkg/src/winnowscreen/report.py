"""Ranked pair reports, common-gram tables and overlap-graph export."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .heuristics import Flag, ImpactRow, PairClass, PairVerdict
from .index import FingerprintIndex
from .similarity import DocumentPair

PAIR_COLUMNS = ("doc_a", "doc_b", "overlap", "class", "flags", "sentences_a", "sentences_b")
TIER_COLORS = {PairClass.PRIMARY: "black", PairClass.SECONDARY: "grey"}


def rank_pairs(verdicts: Iterable[PairVerdict]) -> list[PairVerdict]:
    return sorted(verdicts, key=lambda v: (-v.overlap_size, v.pair.doc_a, v.pair.doc_b))


@dataclass(frozen=True, slots=True)
class CommonGramStat:
    gram_tokens: tuple[str, ...] | None
    document_count: int
    author_count: int
    occurrence_count: int
    hash: int = 0

    @property
    def text(self) -> str:
        return " ".join(self.gram_tokens) if self.gram_tokens else f"<{self.hash:016x}>"


def top_common_grams(index: FingerprintIndex, n: int = 10) -> list[CommonGramStat]:
    """Most widespread L-common grams, counted as winnowed fingerprints.

    Counts only see a gram where it was selected as a fingerprint, so they
    can fall short of the true number of appearances.
    """
    stats = []
    for h in index.common_hashes:
        postings = index.entries[h]
        doc_ids = {p.doc_id for p in postings}
        signatures = {
            index.docs[d].author_names or frozenset({f"collaboration:{d}"}) for d in doc_ids
        }
        stats.append(
            CommonGramStat(
                index.common_grams.get(h), len(doc_ids), len(signatures), len(postings), h
            )
        )
    stats.sort(key=lambda s: (-s.document_count, -s.occurrence_count, s.text))
    return stats[:n]


def format_common_grams(stats: Sequence[CommonGramStat]) -> str:
    rows = [(s.text, str(s.document_count), str(s.author_count), str(s.occurrence_count)) for s in stats]
    return _table(("gram", "documents", "authors", "all_occurrences"), rows)


# --- pair reports -----------------------------------------------------------


def pair_record(v: PairVerdict) -> dict:
    return {
        "doc_a": v.pair.doc_a,
        "doc_b": v.pair.doc_b,
        "overlap": v.overlap_size,
        "class": v.klass.value,
        "flags": sorted(f.value for f in v.flags),
        "sentences_a": sorted(v.pair.matched_sentences_a),
        "sentences_b": sorted(v.pair.matched_sentences_b),
    }


def verdict_from_record(rec: Mapping) -> PairVerdict:
    pair = DocumentPair(
        rec["doc_a"],
        rec["doc_b"],
        frozenset(rec["sentences_a"]),
        frozenset(rec["sentences_b"]),
    )
    return PairVerdict(pair, frozenset(Flag(f) for f in rec["flags"]), PairClass(rec["class"]))


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = []
    for row in (header, *rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _ordinals(xs: Iterable[int]) -> str:
    return ",".join(str(x) for x in sorted(xs)) or "-"


def format_pair_table(verdicts: Iterable[PairVerdict]) -> str:
    rows = [
        (
            v.pair.doc_a,
            v.pair.doc_b,
            str(v.overlap_size),
            v.klass.value,
            ",".join(sorted(f.value for f in v.flags)) or "-",
            _ordinals(v.pair.matched_sentences_a),
            _ordinals(v.pair.matched_sentences_b),
        )
        for v in rank_pairs(verdicts)
    ]
    return _table(PAIR_COLUMNS, rows)


def format_pair_jsonl(verdicts: Iterable[PairVerdict]) -> str:
    return "".join(
        json.dumps(pair_record(v), sort_keys=True) + "\n" for v in rank_pairs(verdicts)
    )


def emit_pair_report(verdicts: Iterable[PairVerdict], fmt: str, path: Path | str) -> Path:
    """Write a pair report as ``table`` (aligned text) or ``jsonl``."""
    verdicts = list(verdicts)
    if fmt == "table":
        text = format_pair_table(verdicts)
    elif fmt == "jsonl":
        text = format_pair_jsonl(verdicts)
    else:
        raise ValueError(f"unknown report format: {fmt!r}")
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def read_pair_report(path: Path | str) -> list[PairVerdict]:
    with open(path, encoding="utf-8") as fh:
        return [verdict_from_record(json.loads(line)) for line in fh if line.strip()]


def format_impact(rows: Sequence[ImpactRow], candidates: int) -> str:
    body = [
        (f"{r.rule}. {r.flag.value}", str(r.affected), f"{r.percent:.1f}%") for r in rows
    ]
    return _table(("heuristic", "affected_cases", "impact"), body) + (
        f"candidate pairs (non-overlapping authorship): {candidates}\n"
    )


# --- overlap graph ---------------------------------------------------------


def _letters(i: int, alphabet: str) -> str:
    # bijective base-26: 0 -> A, 25 -> Z, 26 -> AA
    out = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        out = alphabet[r] + out
    return out


_UP = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_DOWN = _UP[::-1]


def edge_direction(
    a: str, b: str, dates: Mapping[str, dt.date | None]
) -> tuple[str, str] | None:
    """``(source, copy)`` when both dates exist and differ, else None."""
    da, db = dates.get(a), dates.get(b)
    if da is None or db is None or da == db:
        return None
    return (a, b) if da < db else (b, a)


def anonymize_labels(
    verdicts: Sequence[PairVerdict], dates: Mapping[str, dt.date | None]
) -> dict[str, str]:
    """Map doc ids to short codes: sources from A upward, copies from Z down.

    A document is a copy if it is the later one in any dated pair. Codes are
    assigned in rank order of first appearance.
    """
    order: list[str] = []
    copies: set[str] = set()
    for v in rank_pairs(verdicts):
        for d in (v.pair.doc_a, v.pair.doc_b):
            if d not in order:
                order.append(d)
        direction = edge_direction(v.pair.doc_a, v.pair.doc_b, dates)
        if direction:
            copies.add(direction[1])
    labels: dict[str, str] = {}
    used: set[str] = set()
    for group, alphabet in (([d for d in order if d not in copies], _UP), ([d for d in order if d in copies], _DOWN)):
        i = 0
        for d in group:
            while _letters(i, alphabet) in used:
                i += 1
            labels[d] = _letters(i, alphabet)
            used.add(labels[d])
    return labels


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(
    verdicts: Iterable[PairVerdict],
    anonymize: bool = False,
    dates: Mapping[str, dt.date | None] | None = None,
) -> str:
    """Overlap graph in Graphviz DOT.

    Primary pairs are black edges, secondary pairs grey; other classes are
    left out. Edge labels carry the overlap in sentences.
    """
    dates = dates or {}
    tiers = [v for v in rank_pairs(verdicts) if v.klass in TIER_COLORS]
    labels = anonymize_labels(tiers, dates) if anonymize else {}
    name = (lambda d: labels[d]) if anonymize else (lambda d: d)

    nodes: list[str] = []
    for v in tiers:
        for d in (v.pair.doc_a, v.pair.doc_b):
            if d not in nodes:
                nodes.append(d)

    lines = ["graph overlaps {", "  node [shape=circle];"]
    for d in nodes:
        lines.append(f"  {_quote(name(d))};")
    for v in tiers:
        direction = edge_direction(v.pair.doc_a, v.pair.doc_b, dates)
        src, dst = direction or (v.pair.doc_a, v.pair.doc_b)
        attrs = [f'label="{v.overlap_size}"', f'color="{TIER_COLORS[v.klass]}"']
        if direction:
            attrs.append('dir="forward"')
        lines.append(f"  {_quote(name(src))} -- {_quote(name(dst))} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
