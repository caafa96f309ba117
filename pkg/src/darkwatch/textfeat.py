"""Text representation: tokens, vocabulary, TF-IDF vectors, keyword tags.

Weighting: tf(t,d) = count(t,d) / |tokens(d)|, smoothed
idf(t) = ln((1+N)/(1+df(t))) + 1, vectors L2-normalized. The smoothing
keeps every weight strictly positive, so ubiquitous terms never vanish.

No stemming and no stop words beyond the minimum-length rule; input is
NFC-normalized and case-folded so non-Latin content stays representable.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyCorpusError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_MIN_TOKEN_LEN = 2


def _text_of(item) -> str:
    return item if isinstance(item, str) else item.text


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric runs; length < 2 dropped."""
    normalized = unicodedata.normalize("NFC", text).casefold()
    return [t for t in _TOKEN_RE.findall(normalized) if len(t) >= _MIN_TOKEN_LEN]


@dataclass
class Vocabulary:
    terms: list[str]                 # index -> term
    index: dict[str, int]            # term -> index
    df: dict[str, int]               # term -> document frequency
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[term])) + 1.0

    def vocab_hash(self) -> str:
        payload = json.dumps(
            [self.terms, [self.df[t] for t in self.terms], self.n_docs],
            ensure_ascii=False, separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_payload(self) -> dict:
        return {"terms": self.terms, "df": [self.df[t] for t in self.terms],
                "n_docs": self.n_docs}

    @classmethod
    def from_payload(cls, payload: dict) -> "Vocabulary":
        terms = list(payload["terms"])
        df = dict(zip(terms, payload["df"]))
        return cls(terms=terms, index={t: i for i, t in enumerate(terms)},
                   df=df, n_docs=int(payload["n_docs"]))


def build_vocabulary(corpus) -> Vocabulary:
    """Vocabulary over a corpus of documents (or plain strings).

    df(t) counts documents whose token set contains t. Indices are
    assigned by descending df, ties lexicographic, so the layout is a
    pure function of the corpus.
    """
    texts = [_text_of(item) for item in corpus]
    if not texts:
        raise EmptyCorpusError("empty corpus")
    df: dict[str, int] = {}
    for text in texts:
        for term in set(tokenize(text)):
            df[term] = df.get(term, 0) + 1
    terms = sorted(df, key=lambda t: (-df[t], t))
    return Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)},
                      df=df, n_docs=len(texts))


@dataclass
class TermVector:
    """Sparse index -> weight map; unit L2 norm when nonempty."""

    weights: dict[int, float] = field(default_factory=dict)
    vocab_hash: str | None = None

    def __len__(self) -> int:
        return len(self.weights)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))

    def dot_dense(self, dense) -> float:
        return float(sum(dense[i] * w for i, w in self.weights.items()))


def tfidf_vector(doc, vocab: Vocabulary) -> TermVector:
    """TF-IDF vector over vocabulary terms; out-of-vocabulary tokens ignored."""
    tokens = tokenize(_text_of(doc))
    if not tokens:
        return TermVector(vocab_hash=vocab.vocab_hash())
    counts: dict[int, int] = {}
    for token in tokens:
        idx = vocab.index.get(token)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return TermVector(vocab_hash=vocab.vocab_hash())
    n_tokens = len(tokens)
    weights = {idx: (c / n_tokens) * vocab.idf(vocab.terms[idx])
               for idx, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return TermVector(weights={i: w / norm for i, w in weights.items()},
                      vocab_hash=vocab.vocab_hash())


@dataclass
class KeywordLexicon:
    """Class -> phrase list; phrases lowercase and matched on raw text."""

    classes: dict[str, list[str]]

    def __post_init__(self):
        cleaned: dict[str, list[str]] = {}
        for name, phrases in self.classes.items():
            normalized = [p.strip().casefold() for p in phrases]
            if any(not p for p in normalized):
                raise ValueError(f"empty phrase in lexicon class {name!r}")
            cleaned[name] = normalized
        self.classes = cleaned

    @classmethod
    def from_file(cls, path: Path | str) -> "KeywordLexicon":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def class_names(self) -> list[str]:
        return sorted(self.classes)


def tag_keywords(doc, lexicon: KeywordLexicon) -> dict[str, int]:
    """Non-overlapping phrase occurrence counts per class; zero counts omitted.

    Matching runs on the raw lowercased text, not on tokens, so
    multiword phrases count too.
    """
    text = unicodedata.normalize("NFC", _text_of(doc)).casefold()
    tags: dict[str, int] = {}
    for name, phrases in lexicon.classes.items():
        count = sum(text.count(phrase) for phrase in phrases)
        if count:
            tags[name] = count
    return tags


def default_lexicon() -> KeywordLexicon:
    from .resources import data_path

    return KeywordLexicon.from_file(data_path("lexicon.json"))
