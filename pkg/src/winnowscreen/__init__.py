"""Sentence-aware winnowing for corpus-scale text overlap detection."""

from .heuristics import Flag, PairClass, PairVerdict, build_coauthor_graph, classify_all, flag_pair
from .index import FingerprintIndex, build_index, load_index, mark_common, save_index
from .ingest import Document, Sentence, build_document, load_corpus, normalize_text, segment_sentences
from .similarity import DocumentPair, SimilarityParams, detect, screen_document
from .winnow import Fingerprint, WinnowParams, fingerprint_document, winnow_sentence

__version__ = "0.1.0"

__all__ = [
    "Document",
    "DocumentPair",
    "Fingerprint",
    "FingerprintIndex",
    "Flag",
    "PairClass",
    "PairVerdict",
    "Sentence",
    "SimilarityParams",
    "WinnowParams",
    "build_coauthor_graph",
    "build_document",
    "build_index",
    "classify_all",
    "detect",
    "fingerprint_document",
    "flag_pair",
    "load_corpus",
    "load_index",
    "mark_common",
    "normalize_text",
    "save_index",
    "screen_document",
    "segment_sentences",
    "winnow_sentence",
]
