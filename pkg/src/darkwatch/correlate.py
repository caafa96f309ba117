"""Per-class risk: forum interest crossed with device exposure.

risk = sqrt(mention_share * exposure_share) — the geometric mean, so a
class nobody discusses or with nothing exposed scores zero. A threat
needs both an interested attacker and a reachable target.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ClassMismatchError, StorageIOError
from .forumstats import ForumStats, render_fraction

RISK_CSV_HEADER = ["class", "mention_share", "exposure_share", "risk"]


@dataclass(frozen=True)
class RiskReport:
    class_name: str
    mention_share: Fraction
    exposure_share: Fraction

    @property
    def risk(self) -> float:
        return math.sqrt(float(self.mention_share * self.exposure_share))


def correlate_risk(stats_by_class: dict[str, list[ForumStats]],
                   exposure: dict[str, int]) -> list[RiskReport]:
    """Cross per-class forum stats with per-class device counts.

    mention_share = matching posts / total posts over the analyzed
    forums; exposure_share = class device count / all device counts.
    Output sorted by risk descending, class name on ties.
    """
    if set(stats_by_class) != set(exposure):
        raise ClassMismatchError(
            f"classes differ: {sorted(stats_by_class)} vs {sorted(exposure)}")
    if any(count < 0 for count in exposure.values()):
        raise ValueError("negative device count")

    total_devices = sum(exposure.values())
    reports = []
    for name in stats_by_class:
        stats = stats_by_class[name]
        matching = sum(s.matching_posts for s in stats)
        total = sum(s.total_posts for s in stats)
        mention = Fraction(matching, total) if total else Fraction(0)
        share = Fraction(exposure[name], total_devices) if total_devices else Fraction(0)
        reports.append(RiskReport(class_name=name, mention_share=mention,
                                  exposure_share=share))
    reports.sort(key=lambda r: (-r.risk, r.class_name))
    return reports


def export_risk_csv(reports: list[RiskReport], path: Path | str) -> None:
    try:
        with Path(path).open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(RISK_CSV_HEADER)
            for r in reports:
                writer.writerow([r.class_name, render_fraction(r.mention_share),
                                 render_fraction(r.exposure_share), f"{r.risk:.6f}"])
    except OSError as exc:
        raise StorageIOError(str(exc)) from exc


def risk_to_payload(reports: list[RiskReport]) -> list[dict]:
    return [
        {
            "class": r.class_name,
            "mention_share": render_fraction(r.mention_share),
            "exposure_share": render_fraction(r.exposure_share),
            "risk": round(r.risk, 6),
        }
        for r in reports
    ]
