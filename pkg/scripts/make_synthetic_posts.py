#!/usr/bin/env python3
"""Regenerate the bundled synthetic forum-post fixtures.

Counts are load-bearing: tests and the acceptance suite assert the exact
matching/total ratios below. Rerun this script only when the plan
changes, then commit the regenerated files.

    python scripts/make_synthetic_posts.py
"""

from __future__ import annotations

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "darkwatch" / "data"

# Phrases the default lexicon counts for the iot-exploit class; filler
# posts must not contain any of them.
IOT_PHRASES = [
    "internet of things", "iot hacking", "iot device", "hack devices",
    "botnet", "malware", "rats", "sensor", "smart thermostat",
    "firmware", "xmpp",
]

MATCHING_TEMPLATES = [
    "New botnet build targeting routers spotted in the wild, source inside",
    "Tutorial: iot hacking for beginners, start with default creds",
    "Is the internet of things still the softest target this year?",
    "Dumping sensor readings from exposed web panels, writeup",
    "Custom malware builds for embedded boards, taking requests",
    "Old firmware downgrade trick still works on half the cameras out there",
    "Selling rats with builder, stub and support, escrow ok",
    "Control any iot device over xmpp, proof of concept attached",
]

FILLER_TEMPLATES = [
    "Weekly thread: what are you all working on this month?",
    "That password dump from last week is fake, stop reposting it",
    "Looking for a mentor in reverse engineering, will trade notes",
    "Which vpn actually keeps no logs? asking for a friend",
    "Conference talks worth watching from this quarter, list inside",
    "Rate my keyboard build, photos in the thread",
    "Sql injection on legacy login forms, classic examples",
    "Mods deleted my thread again, where do appeals go?",
    "Archive of old zines is back online, mirror links inside",
    "Crypto payment questions megathread, read before posting",
]

# forum -> (total posts, matching posts)
FIG2_PLAN = {
    "HackerWeb": (1000, 33),          # 3.3%
    "HackHound": (50, 12),            # 24%
    "Hackers Tribe": (40, 8),         # 20%
    "School-of-HackNet": (25, 3),     # 12%
    "TorChan": (30, 9),               # 30%
    "Intel Exchange": (60, 10),       # ~16.7%
    "iC0de": (80, 20),                # 25%
}

# forum -> (total, matching, query phrase). Matching posts carry the
# query phrase verbatim; hit counts are 4/5/1/1 in this order.
TABLE2_PLAN = [
    ("HackHound", 10, 4, "internet of things",
     "Thread {i}: selling access related to the {q}, details inside"),
    ("Hackers Tribe", 12, 5, "hack internet of things",
     "Thread {i}: how to {q} gear in a home lab"),
    ("School-of-HackNet", 8, 1, "hack devices",
     "Thread {i}: anyone able to {q} listening on the local network?"),
    ("HackerWeb", 15, 1, "hack internet of things",
     "Thread {i}: knife to {q} endpoints, xmpp angle"),
]


def slug(name: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in name.lower()).strip("-")


def check_filler(text: str) -> str:
    lowered = text.lower()
    for phrase in IOT_PHRASES:
        assert phrase not in lowered, f"filler contains {phrase!r}: {text}"
    return text


def write_posts(path: Path, rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"wrote {len(rows):5d} posts -> {path}")


def gen_fig2() -> list[dict]:
    rows = []
    for forum, (total, matching) in FIG2_PLAN.items():
        base = 1717000000
        for i in range(total):
            if i < matching:
                text = MATCHING_TEMPLATES[i % len(MATCHING_TEMPLATES)]
            else:
                text = check_filler(FILLER_TEMPLATES[i % len(FILLER_TEMPLATES)])
            rows.append({
                "forum": forum,
                "post_id": f"{slug(forum)}-{i:04d}",
                "text": text,
                "posted_at": base + i * 3600,
            })
    return rows


def gen_table2() -> list[dict]:
    rows = []
    for forum, total, matching, query, template in TABLE2_PLAN:
        base = 1717100000
        for i in range(total):
            if i < matching:
                text = template.format(i=i, q=query)
                assert query in text.lower()
            else:
                text = FILLER_TEMPLATES[i % len(FILLER_TEMPLATES)]
                assert query not in text.lower()
            rows.append({
                "forum": forum,
                "post_id": f"{slug(forum)}-t2-{i:04d}",
                "text": text,
                "posted_at": base + i * 3600,
            })
    # One HackHound hit doubles as the multi-keyword tagging sample.
    for row in rows:
        if row["post_id"] == "hackhound-t2-0000":
            row["text"] = ("Thread 0: botnet, malware and rats for android devices, "
                           "full internet of things setup inside")
    return rows


def main() -> None:
    write_posts(DATA / "fig2_posts.jsonl", gen_fig2())
    write_posts(DATA / "table2_posts.jsonl", gen_table2())
    queries = [[forum, [query]] for forum, _, _, query, _ in TABLE2_PLAN]
    (DATA / "table2_queries.json").write_text(
        json.dumps(queries, indent=2) + "\n", encoding="utf-8")
    print(f"wrote queries      -> {DATA / 'table2_queries.json'}")


if __name__ == "__main__":
    main()
