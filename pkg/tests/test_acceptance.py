"""Acceptance suite: one test per release criterion, with stated budgets.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion.
"""

from __future__ import annotations

import filecmp
import json
import math
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from sklearn.metrics import adjusted_rand_score

from darkwatch import cli
from darkwatch.cluster import assign, kmeans_fit
from darkwatch.collection import CrawlConfig, FixtureFetcher, VirtualClock, crawl
from darkwatch.devicescan import (
    FixtureTransport,
    export_device_csv,
    filter_by_port,
    query_devices,
)
from darkwatch.forumstats import forum_keyword_stats, load_posts, table2_counts
from darkwatch.resources import data_path
from darkwatch.scoring import Hyperparams, ThreatModel, loss_and_gradient, predict_score, train
from darkwatch.service import TriageService, create_app
from darkwatch.store import CorpusStore
from darkwatch.textfeat import TermVector, build_vocabulary, default_lexicon, tfidf_vector
from darkwatch.urls import host_of

from conftest import put_doc, separable_20, three_blobs
from test_collection import CountingFetcher
from test_scoring import fd_gradient, max_rel_error, tiny_vocab
from test_textfeat import brute_force_tfidf


@contextmanager
def criterion(name: str, budget: float | None = None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None and elapsed >= budget:
            raise AssertionError(f"{name}: {elapsed:.3f}s over budget {budget}s")
        ok = True
        print(f"[acceptance] {name}: PASS ({elapsed:.3f}s)")
    finally:
        if not ok:
            print(f"[acceptance] {name}: FAIL")


# ----------------------------------------------------------------------
# 1. Table-II reproduction
# ----------------------------------------------------------------------
def test_table2_reproduction():
    with criterion("table2-counts 4/5/1/1", budget=1.0):
        posts = [(p.forum, p.text) for p in load_posts(data_path("table2_posts.jsonl"))]
        queries = [(forum, list(kws)) for forum, kws in json.loads(
            data_path("table2_queries.json").read_text(encoding="utf-8"))]
        counts = table2_counts(posts, queries)
        assert counts == [("HackHound", 4), ("Hackers Tribe", 5),
                          ("School-of-HackNet", 1), ("HackerWeb", 1)]


# ----------------------------------------------------------------------
# 2. Fig.-2 reproduction
# ----------------------------------------------------------------------
def test_fig2_reproduction():
    with criterion("fig2 shares: HackerWeb 3.3%, others in [12%,30%]", budget=1.0):
        posts = [(p.forum, p.text) for p in load_posts(data_path("fig2_posts.jsonl"))]
        stats = forum_keyword_stats(posts, default_lexicon(), "iot-exploit")
        by_forum = {s.forum: s.share for s in stats}
        assert len(by_forum) == 7
        assert by_forum.pop("HackerWeb") == Fraction(33, 1000)
        for share in by_forum.values():
            assert Fraction(12, 100) <= share <= Fraction(30, 100)


# ----------------------------------------------------------------------
# 3. Device-scan fixture
# ----------------------------------------------------------------------
def test_scan_fixture(tmp_path):
    with criterion("scan: total 582, port filter, bit-exact CSV header", budget=1.0):
        result = query_devices("sensor", FixtureTransport(data_path("shodan")))
        assert result.total == 582
        kept = filter_by_port(result.records, 8080)
        assert kept and all(r.port == 8080 for r in kept)
        path = tmp_path / "devices.csv"
        export_device_csv(kept, path)
        assert path.read_bytes().startswith(b"IP,Data\r\n")


# ----------------------------------------------------------------------
# 4. Scorer numerics
# ----------------------------------------------------------------------
def test_scorer_numerics():
    with criterion("scorer: FD gradients <=1e-5, separable accuracy 1.0, "
                   "monotone loss", budget=5.0):
        # Analytic vs central finite differences on 20 random small instances.
        for seed in range(20):
            rng = np.random.default_rng(seed)
            dim = int(rng.integers(2, 9))
            model = ThreatModel(
                weights=rng.normal(0.0, 0.5, dim), bias=float(rng.normal(0, 0.3)),
                vocab_hash=tiny_vocab(dim).vocab_hash(), version=1,
                hyperparams=Hyperparams(l2_lambda=float(rng.uniform(0, 1e-2))))
            n = int(rng.integers(2, 11))
            batch = [(TermVector(weights={i: float(rng.uniform(-1, 1))
                                          for i in range(dim)}),
                      1 if j % 2 == 0 else 0) for j in range(n)]
            _, grad_w, grad_b = loss_and_gradient(model, batch)
            fd_w, fd_b = fd_gradient(model, batch, h=1e-5)
            assert max_rel_error(grad_w, fd_w) <= 1e-5
            assert max_rel_error([grad_b], [fd_b]) <= 1e-5

        # Separable 20-point fixture: perfect accuracy within 500 epochs.
        pairs = separable_20()
        vocab = tiny_vocab(2)
        hp = Hyperparams(learning_rate=0.5, epochs=500, l2_lambda=0.0)
        model = train(pairs, vocab, hp)
        correct = sum((predict_score(model, v) >= 0.5) == (y == 1) for v, y in pairs)
        assert correct == len(pairs)

        # Loss non-increasing across every epoch at lambda=0.
        w = np.zeros(2)
        b = 0.0
        losses = []
        for _ in range(500):
            probe = ThreatModel(weights=w, bias=b, vocab_hash=vocab.vocab_hash(),
                                version=0, hyperparams=hp)
            loss, grad_w, grad_b = loss_and_gradient(probe, pairs)
            losses.append(loss)
            w = w - hp.learning_rate * grad_w
            b = b - hp.learning_rate * grad_b
        assert all(nxt <= cur + 1e-15 for cur, nxt in zip(losses, losses[1:]))


# ----------------------------------------------------------------------
# 5. TF-IDF oracle
# ----------------------------------------------------------------------
def test_tfidf_oracle():
    with criterion("tf-idf matches brute force <=1e-12, unit norms <=1e-12"):
        corpus = [
            "botnet malware listing with escrow",
            "forum thread about malware and rats",
            "market escrow vendor listing",
            "sensor exposure writeup for the forum",
            "ideology manifesto about the free world",
        ]
        vocab = build_vocabulary(corpus)
        for text in corpus:
            vec = tfidf_vector(text, vocab)
            expected = brute_force_tfidf(text, corpus)
            got = {vocab.terms[i]: w for i, w in vec.weights.items()}
            assert set(got) == set(expected)
            for term, weight in expected.items():
                assert abs(got[term] - weight) <= 1e-12
            if vec.weights:
                assert abs(vec.norm() - 1.0) <= 1e-12


# ----------------------------------------------------------------------
# 6. k-means
# ----------------------------------------------------------------------
def test_kmeans():
    with criterion("k-means: blob ARI 1.0, monotone inertia, k=n zero inertia",
                   budget=2.0):
        vectors, truth = three_blobs()
        model = kmeans_fit(vectors, k=3, seed=0, dim=6)
        predicted = [assign(model, v) for v in vectors]
        assert adjusted_rand_score(truth, predicted) == 1.0
        history = model.inertia_history
        assert all(nxt <= cur + 1e-12 for cur, nxt in zip(history, history[1:]))
        saturated = kmeans_fit(vectors, k=len(vectors), seed=1, dim=6)
        assert saturated.inertia == 0.0


# ----------------------------------------------------------------------
# 7. Crawler
# ----------------------------------------------------------------------
def test_crawler():
    with criterion("crawler: exact 5 pages, no duplicate fetch, scope, politeness"):
        clock = VirtualClock()
        fetcher = CountingFetcher(FixtureFetcher(data_path("crawl_site")), clock)
        config = CrawlConfig(seeds=["http://fixture.test/"], max_depth=2,
                             max_pages=100, per_host_delay_ms=200, scope="same-host")
        result = crawl(config, fetcher, clock=clock)
        assert {d.url for d in result.documents} == {
            "http://fixture.test/", "http://fixture.test/a.html",
            "http://fixture.test/b.html", "http://fixture.test/c.html",
            "http://fixture.test/d.html"}
        urls = [u for u, _ in fetcher.log]
        assert len(urls) == len(set(urls))
        assert all(host_of(u) == "fixture.test" for u in urls)
        times = [t for _, t in fetcher.log]
        assert all(later - earlier >= 0.200 - 1e-9
                   for earlier, later in zip(times, times[1:]))


# ----------------------------------------------------------------------
# 8. End-to-end determinism
# ----------------------------------------------------------------------
_STAGES = (["seed"], ["crawl"], ["metasearch", "--fetch"], ["backlinks"],
           ["train", "--bootstrap-synthetic"], ["filter"], ["cluster"],
           ["stats"], ["stats", "--fixtures", "table2"], ["scan"],
           ["correlate"], ["report"])


def _full_run(base: Path) -> Path:
    base.mkdir()
    config_path = base / "config.json"
    config_path.write_text(data_path("config.sample.json").read_text())
    run_dir = base / "out"
    for stage in _STAGES:
        code = cli.main(["--config", str(config_path), "--run-dir", str(run_dir),
                         *stage])
        assert code == 0, f"stage {stage} failed"
    return base


def _assert_trees_identical(a: Path, b: Path) -> None:
    cmp = filecmp.dircmp(a, b)
    assert not cmp.left_only and not cmp.right_only, (cmp.left_only, cmp.right_only)
    mismatch = []
    _, mismatched, errors = filecmp.cmpfiles(
        a, b, cmp.common_files, shallow=False)
    mismatch += mismatched + errors
    assert not mismatch, mismatch
    for sub in cmp.common_dirs:
        _assert_trees_identical(a / sub, b / sub)


def test_pipeline_determinism(tmp_path):
    with criterion("two identical pipeline runs are byte-identical"):
        run_a = _full_run(tmp_path / "A")
        run_b = _full_run(tmp_path / "B")
        _assert_trees_identical(run_a / "out", run_b / "out")
        _assert_trees_identical(run_a / "store", run_b / "store")


# ----------------------------------------------------------------------
# 9. Triage loop via the API only
# ----------------------------------------------------------------------
def test_triage_loop_api_only(tmp_path):
    with criterion("triage loop: 6 labels, retrain, restamp, queue excludes labeled"):
        store = CorpusStore(tmp_path / "store")
        to_label = []
        for i in range(3):
            to_label.append((put_doc(
                store, f"http://h.test/rel{i}",
                f"botnet rental with sensor dumps {i}"), "relevant"))
        for i in range(3):
            to_label.append((put_doc(
                store, f"http://h.test/irr{i}",
                f"harmless knitting circle notes {i}"), "irrelevant"))
        keep_queued = [put_doc(store, f"http://h.test/q{i}",
                               f"fresh botnet chatter {i}") for i in range(3)]

        service = TriageService(store, run_dir=tmp_path / "run",
                                hyperparams=Hyperparams(epochs=50))
        client = TestClient(create_app(service))

        before = client.get("/api/queue").json()
        assert before["model_version"] == 0
        assert len(before["items"]) == 9

        for doc_id, label in to_label:
            resp = client.post("/api/label", json={"doc_id": doc_id, "label": label},
                               headers={"X-Analyst": "analyst-1"})
            assert resp.status_code == 200

        retrain = client.post("/api/retrain")
        assert retrain.status_code == 200
        assert retrain.json() == {"model_version": 1, "train_size": 6}

        after = client.get("/api/queue").json()
        assert after["model_version"] == 1
        queued_ids = [item["doc_id"] for item in after["items"]]
        assert sorted(queued_ids) == sorted(keep_queued)
        labeled_ids = {doc_id for doc_id, _ in to_label}
        assert labeled_ids.isdisjoint(queued_ids)
        for item in after["items"]:
            assert item["score_model_version"] == 1
            assert 0.0 <= item["score"] <= 1.0
