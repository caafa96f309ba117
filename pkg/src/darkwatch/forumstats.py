"""Per-forum keyword-discussion statistics and their CSV export.

One discussion = one post. Shares are exact rationals; nothing is
accumulated in floating point, and the CSV renders them at a fixed six
fractional digits.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path

from .errors import EmptyForumError, StorageIOError, UnknownForumError
from .textfeat import KeywordLexicon, tag_keywords

STATS_CSV_HEADER = ["forum", "total_posts", "matching_posts", "share"]


@dataclass(frozen=True)
class Post:
    forum: str
    post_id: str
    text: str
    posted_at: int

    @classmethod
    def from_record(cls, rec: dict) -> "Post":
        return cls(forum=rec["forum"], post_id=rec["post_id"],
                   text=rec["text"], posted_at=int(rec["posted_at"]))


def load_posts(path: Path | str) -> list[Post]:
    posts = []
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            if line.strip():
                posts.append(Post.from_record(json.loads(line)))
    return posts


@dataclass(frozen=True)
class ForumStats:
    forum: str
    total_posts: int
    matching_posts: int

    def __post_init__(self):
        if self.total_posts <= 0:
            raise EmptyForumError(f"forum {self.forum!r} has no posts")
        if not 0 <= self.matching_posts <= self.total_posts:
            raise ValueError("matching_posts out of range")

    @property
    def share(self) -> Fraction:
        return Fraction(self.matching_posts, self.total_posts)


def render_fraction(value: Fraction) -> str:
    """Fixed six fractional digits, half-even on the rare inexact case."""
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return str(dec.quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def forum_keyword_stats(posts, lexicon: KeywordLexicon, keyword_class: str,
                        forums: list[str] | None = None) -> list[ForumStats]:
    """Matching-post counts per forum for one lexicon class.

    ``posts`` are (forum, text) pairs. With an explicit forum roster,
    every named forum must have at least one post. Output is sorted by
    forum name.
    """
    grouped: dict[str, list[str]] = {}
    for forum, text in posts:
        grouped.setdefault(forum, []).append(text)

    if forums is not None:
        missing = [f for f in forums if not grouped.get(f)]
        if missing:
            raise EmptyForumError(f"forums without posts: {', '.join(missing)}")
        grouped = {f: grouped[f] for f in forums}

    stats = []
    for forum in sorted(grouped):
        texts = grouped[forum]
        matching = sum(1 for t in texts
                       if tag_keywords(t, lexicon).get(keyword_class, 0) > 0)
        stats.append(ForumStats(forum=forum, total_posts=len(texts),
                                matching_posts=matching))
    return stats


def table2_counts(posts, queries: list[tuple[str, list[str]]]) -> list[tuple[str, int]]:
    """Posts per (forum, keyword set) matching any keyword in the set.

    A post matching several keywords counts once. Query order is
    preserved in the output.
    """
    grouped: dict[str, list[str]] = {}
    for forum, text in posts:
        grouped.setdefault(forum, []).append(text.casefold())

    out = []
    for forum, keywords in queries:
        if forum not in grouped:
            raise UnknownForumError(forum)
        lowered = [k.casefold() for k in keywords]
        hits = sum(1 for text in grouped[forum]
                   if any(k in text for k in lowered))
        out.append((forum, hits))
    return out


def export_stats_csv(stats: list[ForumStats], path: Path | str) -> None:
    try:
        with Path(path).open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(STATS_CSV_HEADER)
            for s in stats:
                writer.writerow([s.forum, s.total_posts, s.matching_posts,
                                 render_fraction(s.share)])
    except OSError as exc:
        raise StorageIOError(str(exc)) from exc


def read_stats_csv(path: Path | str) -> list[ForumStats]:
    """Parse an exported stats file back into ForumStats.

    Shares are reconstructed exactly from the integer columns; the
    rendered share column is verified against them.
    """
    stats = []
    with Path(path).open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != STATS_CSV_HEADER:
            raise ValueError(f"unexpected header: {header}")
        for row in reader:
            s = ForumStats(forum=row[0], total_posts=int(row[1]),
                           matching_posts=int(row[2]))
            if render_fraction(s.share) != row[3]:
                raise ValueError(f"share column mismatch for {s.forum!r}")
            stats.append(s)
    return stats
