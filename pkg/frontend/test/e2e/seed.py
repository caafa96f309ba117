"""Seed a store and run directory for the UI end-to-end test.

Usage: python3 seed.py <base_dir>

Creates: 3 labeled relevant docs, 3 labeled irrelevant docs, 3 unlabeled
queue docs, plus computed forum stats / scan exposure / risk artifacts.
"""

import json
import sys
from pathlib import Path

from darkwatch.pipeline import load_config, stage_correlate, stage_scan, stage_stats
from darkwatch.resources import data_path
from darkwatch.store import CorpusStore, make_document

base = Path(sys.argv[1])
base.mkdir(parents=True, exist_ok=True)
store = CorpusStore(base / "store")

def put(url, text):
    doc, raw = make_document(url, text.encode(), source="manual", fetched_at=0, text=text)
    return store.put_document(doc, raw)

for i in range(3):
    doc_id = put(f"http://e2e.test/rel{i}", f"botnet rental with sensor dumps {i}")
    store.apply_label(doc_id, "relevant", analyst="seed", at=0)
    doc_id = put(f"http://e2e.test/irr{i}", f"quiet book club notes {i}")
    store.apply_label(doc_id, "irrelevant", analyst="seed", at=0)
for i in range(3):
    put(f"http://e2e.test/queue{i}", f"fresh botnet chatter number {i}")

config_path = base / "config.json"
config_path.write_text(data_path("config.sample.json").read_text())
cfg = load_config(config_path)
run_dir = base / "run"
stage_stats(cfg, run_dir)
stage_scan(cfg, run_dir)
stage_correlate(cfg, run_dir)
print(json.dumps({"store": str(base / "store"), "run_dir": str(run_dir)}))
