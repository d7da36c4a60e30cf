"""Command-line entry point: index, detect, screen, graph, common-grams, oracle."""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import Config, ConfigError, read_config_file
from .heuristics import Classification, PairClass, build_coauthor_graph, classify_all
from .index import (
    FingerprintIndex,
    IndexFormatError,
    build_index,
    load_index,
    mark_common,
    save_index,
    verify_checksum,
)
from .ingest import (
    CorpusError,
    CorpusLoad,
    Document,
    MetaRecord,
    build_document,
    load_corpus,
    load_documents,
)
from .oracle import OracleParams, similar_documents
from .report import (
    emit_pair_report,
    export_graph,
    format_common_grams,
    format_impact,
    format_pair_jsonl,
    format_pair_table,
    read_pair_report,
    top_common_grams,
)
from .similarity import detect, screen_document

logger = logging.getLogger("winnowscreen")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class DataError(Exception):
    """Bad or missing input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- commands ---------------------------------------------------------------


@dataclass
class IndexRun:
    index: FingerprintIndex
    load: CorpusLoad

    def summary(self) -> str:
        n_docs = len(self.load.documents)
        n_fp = self.index.posting_count
        per_doc = n_fp / n_docs if n_docs else 0.0
        lines = [
            f"documents indexed: {n_docs}",
            f"fingerprints: {n_fp} ({per_doc:.0f} per document)",
            f"distinct hashes: {len(self.index.entries)}",
            f"common hashes (L={self.index.L}): {len(self.index.common_hashes)}",
            f"skipped: {len(self.load.skipped)}",
        ]
        lines += [f"  {s.name}: {s.reason}" for s in self.load.skipped]
        return "\n".join(lines) + "\n"


def _load_corpus(config: Config) -> CorpusLoad:
    try:
        return load_corpus(config.corpus_path, jobs=config.jobs)
    except CorpusError as exc:
        raise DataError(str(exc)) from None


def _load_index(config: Config) -> FingerprintIndex:
    if not Path(config.index_path).is_file():
        raise DataError(f"index not found: {config.index_path}")
    try:
        return load_index(config.index_path)
    except IndexFormatError as exc:
        raise DataError(f"{config.index_path}: {exc}") from None


def cmd_index(config: Config) -> IndexRun:
    load = _load_corpus(config)
    index = build_index(load.documents, config.winnow_params, jobs=config.jobs)
    mark_common(index, config.L, {d.doc_id: d for d in load.documents})
    save_index(index, config.index_path)
    return IndexRun(index, load)


def cmd_verify_index(config: Config) -> None:
    try:
        verify_checksum(Path(config.index_path).read_bytes())
    except OSError as exc:
        raise DataError(f"cannot read index {config.index_path}: {exc.strerror}") from None
    except IndexFormatError as exc:
        raise DataError(f"{config.index_path}: {exc}") from None


REPORT_CLASSES = (PairClass.PRIMARY, PairClass.SECONDARY, PairClass.DISCARDED, PairClass.SELF_REUSE)


def write_reports(result: Classification, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for klass in REPORT_CLASSES:
        verdicts = result.of(klass)
        written.append(emit_pair_report(verdicts, "table", out / f"{klass.value}.txt"))
        written.append(emit_pair_report(verdicts, "jsonl", out / f"{klass.value}.jsonl"))
    impact = out / "impact.txt"
    impact.write_text(format_impact(result.impact, result.candidates), encoding="utf-8")
    written.append(impact)
    return written


def cmd_detect(config: Config) -> Classification:
    index = _load_index(config)
    load = _load_corpus(config)
    docs = {d.doc_id: d for d in load.documents}
    missing = sorted(index.docs.keys() - docs.keys())
    if missing:
        raise DataError(
            f"{len(missing)} indexed documents are missing from the corpus "
            f"(first: {missing[0]}); rebuild the index"
        )
    try:
        pairs = detect(index, config.similarity_params, docs, verify=config.verify_matches)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    graph = build_coauthor_graph(docs[d] for d in index.docs)
    result = classify_all(pairs, docs, graph)
    write_reports(result, Path(config.output_dir))
    return result


def read_screen_document(
    path: Path,
    doc_id: str | None = None,
    authors: Sequence[str] = (),
    collaboration: bool = False,
    date: dt.date | None = None,
) -> Document:
    try:
        raw = Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: invalid UTF-8 ({exc.reason})") from None
    try:
        return build_document(
            doc_id or Path(path).stem, raw, authors, collaboration=collaboration, date=date
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None


def cmd_screen(config: Config, doc: Document) -> Classification:
    """Screen one document against the index; the index file is only read."""
    index = _load_index(config)
    try:
        pairs = screen_document(doc, index, config.similarity_params)
    except ValueError as exc:  # includes ScreenError
        raise DataError(str(exc)) from None

    others = sorted(({p.doc_a for p in pairs} | {p.doc_b for p in pairs}) - {doc.doc_id})
    records = [
        MetaRecord(
            d,
            tuple(a.raw_name or a.canonical_name for a in index.docs[d].authors),
            index.docs[d].is_collaboration,
            index.docs[d].submission_date,
        )
        for d in others
    ]
    loaded = load_documents(config.corpus_path, records)
    if loaded.skipped:
        s = loaded.skipped[0]
        raise DataError(f"cannot read indexed document {s.name}: {s.reason}")
    docs = {d.doc_id: d for d in loaded.documents}
    docs[doc.doc_id] = doc
    if config.verify_matches:
        pairs = screen_document(doc, index, config.similarity_params, docs, verify=True)
    graph = build_coauthor_graph([*index.docs.values(), doc])
    return classify_all(pairs, docs, graph)


def cmd_graph(config: Config) -> Path:
    out = Path(config.output_dir)
    verdicts = []
    for klass in (PairClass.PRIMARY, PairClass.SECONDARY):
        path = out / f"{klass.value}.jsonl"
        if not path.is_file():
            raise DataError(f"detect output not found: {path} (run detect first)")
        try:
            verdicts += read_pair_report(path)
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: malformed record: {exc}") from None
    dates = {}
    if Path(config.index_path).is_file():
        dates = {d: m.submission_date for d, m in _load_index(config).docs.items()}
    target = out / "overlaps.dot"
    target.write_text(export_graph(verdicts, config.anonymize, dates), encoding="utf-8")
    return target


# --- argument parsing -------------------------------------------------------


def _common_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters")
    g.add_argument("--config", type=Path, help="key = value config file")
    g.add_argument("--k", type=int, help="words per k-gram (default 7)")
    g.add_argument("--t", type=int, help="guarantee threshold in words (default 12)")
    g.add_argument("--m", type=int, help="minimum similar sentences per side (default 4)")
    g.add_argument("--L", dest="L", type=int, help="commonness threshold in documents (default 4)")
    g.add_argument("--corpus", dest="corpus_path", type=Path, help="corpus directory")
    g.add_argument("--index", dest="index_path", type=Path, help="index file (.fpidx)")
    g.add_argument("--out", dest="output_dir", type=Path, help="report directory")
    g.add_argument("--jobs", type=int, help="worker processes (default 1)")
    g.add_argument("--posting-cap", dest="posting_cap", type=int,
                   help="skip witness hashes in more documents than this; 0 = off (default 2*L*100)")
    g.add_argument("--anonymize", action="store_const", const=True, default=None,
                   help="replace document ids with letter codes in the graph")
    g.add_argument("--verify-matches", dest="verify_matches", action="store_const", const=True,
                   default=None, help="re-check matched token runs to rule out hash collisions")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="winnowscreen", description="Sentence-level text overlap detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="fingerprint a corpus and write the index")
    _common_flags(p)
    p.add_argument("--verify", action="store_true", help="only check the checksum of an existing index")

    p = sub.add_parser("detect", help="find and classify overlapping document pairs")
    _common_flags(p)

    p = sub.add_parser("screen", help="screen one new document against the index")
    _common_flags(p)
    p.add_argument("file", type=Path)
    p.add_argument("--doc-id", help="id for the document (default: file name stem)")
    p.add_argument("--author", dest="authors", action="append", default=[], help="author name; repeatable")
    p.add_argument("--collaboration", action="store_true")
    p.add_argument("--date", type=dt.date.fromisoformat, help="submission date, YYYY-MM-DD")
    p.add_argument("--json", action="store_true", help="print line-delimited records instead of a table")

    p = sub.add_parser("graph", help="export the overlap graph from detect output")
    _common_flags(p)

    p = sub.add_parser("common-grams", help="most widespread common grams in the index")
    _common_flags(p)
    p.add_argument("--top", type=int, default=10)

    p = sub.add_parser("oracle", help="brute-force similar pairs for a small corpus")
    _common_flags(p)
    return parser


_CONFIG_KEYS = ("k", "t", "m", "L", "corpus_path", "index_path", "output_dir",
                "posting_cap", "anonymize", "verify_matches", "jobs")


def resolve_config(args: argparse.Namespace) -> Config:
    config = Config()
    if args.config is not None:
        config = config.updated(read_config_file(args.config))
    return config.updated({k: getattr(args, k, None) for k in _CONFIG_KEYS})


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"winnowscreen: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "index":
            if args.verify:
                cmd_verify_index(config)
                print(f"{config.index_path}: checksum ok")
            else:
                print(cmd_index(config).summary(), end="")
        elif args.command == "detect":
            result = cmd_detect(config)
            print(
                f"pairs: {len(result.verdicts)}  primary: {len(result.primary)}  "
                f"secondary: {len(result.secondary)}  discarded: {len(result.discarded)}  "
                f"self-reuse: {len(result.self_reuse)}"
            )
            print(format_impact(result.impact, result.candidates), end="")
            print(f"reports written to {config.output_dir}")
        elif args.command == "screen":
            doc = read_screen_document(
                args.file, args.doc_id, args.authors, args.collaboration, args.date
            )
            result = cmd_screen(config, doc)
            if args.json:
                print(format_pair_jsonl(result.verdicts), end="")
            else:
                print(format_pair_table(result.verdicts), end="")
        elif args.command == "graph":
            print(f"graph written to {cmd_graph(config)}")
        elif args.command == "common-grams":
            index = _load_index(config)
            if index.L != config.L:
                mark_common(index, config.L)
            print(format_common_grams(top_common_grams(index, args.top)), end="")
        elif args.command == "oracle":
            load = _load_corpus(config)
            params = OracleParams(mu=config.k, L=config.L, nu=config.t, m=config.m)
            for pair in similar_documents(load.documents, params):
                print(json.dumps({
                    "doc_a": pair.doc_a,
                    "doc_b": pair.doc_b,
                    "overlap": pair.overlap_size,
                    "sentences_a": sorted(pair.sentences_a),
                    "sentences_b": sorted(pair.sentences_b),
                }, sort_keys=True))
    except DataError as exc:
        print(f"winnowscreen: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
