"""Text normalisation shared by the index, the concordance matcher and the reference parser."""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache
from importlib import resources

_SPLIT = re.compile(r"[^0-9a-z]+")


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    raw = resources.files("vjournal").joinpath("data/stopwords.txt").read_text("utf-8")
    words = [w.strip() for w in raw.splitlines() if w.strip() and not w.startswith("#")]
    return frozenset(words)


def fold(text: str) -> str:
    """Case-fold and strip diacritics (NFKD, combining marks removed)."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    # sharp s and similar expand under casefold, so fold after stripping
    return stripped.casefold()


def split_words(text: str) -> list[str]:
    """Folded alphanumeric runs, no filtering."""
    return [w for w in _SPLIT.split(fold(text)) if w]


def tokenize(text: str) -> list[str]:
    """Index tokens: folded words of length >= 2 that are not stopwords."""
    stop = stopwords()
    return [w for w in split_words(text) if len(w) >= 2 and w not in stop]


def normalize_last(last: str) -> str:
    return " ".join(split_words(last))


def normalize_initials(initials: str) -> str:
    return "".join(c for c in fold(initials) if c.isalpha())
