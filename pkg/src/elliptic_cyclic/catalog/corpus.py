"""Access to the built-in identity corpus shipped with the package."""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources

from .model import CatalogFile
from .parser import parse_catalog

__all__ = ["builtin_corpus", "corpus_text", "corpus_sha256", "DATA_FILE"]

DATA_FILE = "builtin.cyc"


@lru_cache(maxsize=1)
def corpus_text() -> str:
    """Raw text of the built-in catalog data file."""
    return (resources.files(__package__) / "data" / DATA_FILE).read_text(
        encoding="utf-8")


@lru_cache(maxsize=1)
def corpus_sha256() -> str:
    """Content hash of the data file, recorded in reports for provenance."""
    return hashlib.sha256(corpus_text().encode("utf-8")).hexdigest()


@lru_cache(maxsize=1)
def builtin_corpus() -> CatalogFile:
    """Parsed built-in catalog (cached)."""
    return parse_catalog(corpus_text())
