"""Access to bundled data files (lexicon, fixtures, synthetic corpora)."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path


def data_path(*parts: str) -> Path:
    return Path(str(files("darkwatch").joinpath("data", *parts)))
