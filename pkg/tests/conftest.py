from __future__ import annotations

import math

import pytest

from darkwatch.store import CorpusStore, make_document
from darkwatch.textfeat import TermVector


@pytest.fixture
def store(tmp_path):
    return CorpusStore(tmp_path / "store")


def put_doc(store: CorpusStore, url: str, text: str, *, source: str = "manual",
            fetched_at: int = 0, category: str | None = None,
            lang: str | None = None) -> str:
    doc, raw = make_document(url, text.encode("utf-8"), source=source,
                             fetched_at=fetched_at, text=text,
                             category=category, lang=lang)
    return store.put_document(doc, raw)


def unit_vector(angle_rad: float, axis_a: int = 0, axis_b: int = 1) -> TermVector:
    return TermVector(weights={axis_a: math.cos(angle_rad),
                               axis_b: math.sin(angle_rad)})


def separable_20() -> list[tuple[TermVector, int]]:
    """Unit vectors on either side of the 45-degree line: separable by w=(-1,1)."""
    pairs = []
    for i in range(10):
        pairs.append((unit_vector(math.radians(5 + 4 * i)), 0))
        pairs.append((unit_vector(math.radians(50 + 4 * i)), 1))
    return pairs


def three_blobs() -> tuple[list[TermVector], list[int]]:
    """Three orthogonal arcs of 5 unit vectors each; trivially separable."""
    vectors, truth = [], []
    for blob in range(3):
        for theta in (0.05, 0.10, 0.15, 0.20, 0.25):
            vectors.append(unit_vector(theta, 2 * blob, 2 * blob + 1))
            truth.append(blob)
    return vectors, truth
