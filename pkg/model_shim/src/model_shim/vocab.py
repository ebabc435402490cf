"""Locally constructed WordPiece vocabulary.

The shim never downloads a checkpoint, so the vocabulary is built from
scratch: special tokens, every lowercase letter and digit as both a
word-initial piece and a ``##`` continuation (any ASCII word therefore
tokenizes without [UNK]), standalone punctuation, and a set of whole
words common in evacuation notices so those surface as single tokens.
"""

from __future__ import annotations

import string
from pathlib import Path

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

PUNCTUATION = list(".,!?;:'\"-()/&")

# Whole-word entries; frequent notice terms become single embeddings.
DOMAIN_WORDS = [
    "evacuation",
    "evacuate",
    "evacuating",
    "evacuees",
    "mandatory",
    "voluntary",
    "voluntarily",
    "order",
    "ordered",
    "orders",
    "must",
    "shall",
    "encouraged",
    "advised",
    "recommended",
    "urged",
    "residents",
    "county",
    "parish",
    "zone",
    "zones",
    "area",
    "areas",
    "hurricane",
    "storm",
    "surge",
    "shelter",
    "shelters",
    "notice",
    "issued",
    "effect",
    "effective",
    "immediately",
    "lifted",
    "rescinded",
    "officials",
    "emergency",
    "coastal",
    "flood",
    "flooding",
    "the",
    "an",
    "for",
    "of",
    "in",
    "to",
    "is",
    "are",
    "and",
    "all",
    "has",
    "have",
    "will",
    "be",
    "been",
    "by",
    "at",
    "no",
    "not",
    "now",
    "this",
    "that",
]


def build_vocab() -> list[str]:
    """Deterministic token list; index order is the token id."""
    singles = list(string.ascii_lowercase) + list(string.digits)
    tokens = list(SPECIAL_TOKENS)
    tokens += singles
    tokens += [f"##{c}" for c in singles]
    tokens += PUNCTUATION
    tokens += DOMAIN_WORDS
    assert len(tokens) == len(set(tokens)), "duplicate vocab entry"
    return tokens


def write_vocab(path: str | Path) -> int:
    """Write one token per line (the WordPiece file format); returns size."""
    tokens = build_vocab()
    Path(path).write_text("".join(t + "\n" for t in tokens), encoding="utf-8")
    return len(tokens)
