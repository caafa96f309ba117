"""Pipeline stages wired together by the CLI and the HTTP service.

Every stage reads its inputs from the config/store, writes its outputs
under a run directory, and is deterministic for fixture-backed inputs:
identical config plus identical fixtures gives byte-identical files.
Paths inside output files are always relative for the same reason.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import cluster as clustering
from . import collection, correlate, devicescan, forumstats, scoring, textfeat
from .errors import (
    ClassMismatchError,
    ConfigError,
    DarkwatchError,
    NotComputedError,
    TransportError,
)
from .resources import data_path
from .store import CorpusStore, make_document

TABLE2_CSV_HEADER = ["forum", "hit_posts"]

REPORT_SECTIONS = ("forum_stats", "cluster_report", "exposure_summary", "risk_reports")
_SECTION_FILES = {
    "forum_stats": "forum_stats.json",
    "cluster_report": "cluster_report.json",
    "exposure_summary": "exposure.json",
    "risk_reports": "risk.json",
}


# ----------------------------------------------------------------------
# Config
# ----------------------------------------------------------------------
@dataclass
class Config:
    store: Path
    lexicon_path: Path | None
    crawl: dict
    providers: list[dict]
    backlink_domains: list[str]
    stats: dict
    scan: dict
    train: dict
    cluster: dict
    service: dict
    base_dir: Path = field(default_factory=Path)

    def load_lexicon(self) -> textfeat.KeywordLexicon:
        if self.lexicon_path:
            return textfeat.KeywordLexicon.from_file(self.lexicon_path)
        return textfeat.default_lexicon()

    def hyperparams(self) -> scoring.Hyperparams:
        return scoring.Hyperparams(
            learning_rate=float(self.train.get("learning_rate", 0.1)),
            epochs=int(self.train.get("epochs", 1000)),
            l2_lambda=float(self.train.get("l2_lambda", 1e-4)),
            seed=int(self.train.get("seed", 0)),
        )


def _interpolate(value):
    if isinstance(value, str):
        return os.path.expandvars(value)
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    return value


def load_config(path: Path | str) -> Config:
    """Parse the config file; ${VAR} in string values is expanded from the
    environment, with ${DARKWATCH_DATA} bound to the bundled data dir.
    Relative paths resolve against the config file's directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    os.environ.setdefault("DARKWATCH_DATA", str(data_path()))
    try:
        raw = _interpolate(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")

    base = path.resolve().parent

    def respath(value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        return Config(
            store=respath(raw.get("store", "store")),
            lexicon_path=respath(raw.get("lexicon")),
            crawl=raw.get("crawl", {}),
            providers=raw.get("providers", []),
            backlink_domains=raw.get("backlink_domains", []),
            stats=raw.get("stats", {}),
            scan=raw.get("scan", {}),
            train=raw.get("train", {}),
            cluster=raw.get("cluster", {}),
            service=raw.get("service", {}),
            base_dir=base,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def build_fetcher(cfg: Config, clock=None):
    conf = cfg.crawl.get("fetcher", {})
    mode = conf.get("mode", "fixture")
    if mode == "fixture":
        root = conf.get("root")
        if not root:
            raise ConfigError("fixture fetcher needs a root directory")
        return collection.FixtureFetcher(_resolve(cfg.base_dir, root))
    if mode == "live":
        return collection.LiveFetcher(
            proxy=conf.get("proxy"),
            timeout=float(conf.get("timeout", 30.0)),
            honor_robots=bool(conf.get("honor_robots", False)),
        )
    raise ConfigError(f"unknown fetcher mode {mode!r}")


def build_providers(cfg: Config) -> list:
    providers = []
    for conf in cfg.providers:
        mode = conf.get("mode", "fixture")
        if mode == "fixture":
            providers.append(
                collection.FixtureSearchProvider.from_file(_resolve(cfg.base_dir, conf["path"])))
        elif mode == "http":
            providers.append(collection.HttpSearchProvider(
                name=conf["name"],
                endpoint_template=conf["endpoint"],
                result_path=conf["result_path"],
                backlink_template=conf.get("backlink_template", "link:{domain}"),
            ))
        else:
            raise ConfigError(f"unknown provider mode {mode!r}")
    return providers


def build_scan_transport(cfg: Config) -> tuple[object, str]:
    conf = cfg.scan
    mode = conf.get("mode", "fixture")
    key_env = conf.get("api_key_env", "DEVICE_SEARCH_KEY")
    if mode == "fixture":
        fixture_dir = conf.get("fixture_dir")
        if not fixture_dir:
            raise ConfigError("fixture scan transport needs fixture_dir")
        key = os.environ.get(key_env) or devicescan.FixtureTransport.DEFAULT_KEY
        return devicescan.FixtureTransport(_resolve(cfg.base_dir, fixture_dir)), key
    if mode == "live":
        key = os.environ.get(key_env)
        if not key:
            raise ConfigError(f"live scan needs the {key_env} environment variable")
        return devicescan.HttpTransport(conf.get("base_url", "https://api.shodan.io")), key
    raise ConfigError(f"unknown scan mode {mode!r}")


# ----------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------
def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")


def _ensure_run_dir(run_dir: Path | str) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


# ----------------------------------------------------------------------
# Stages
# ----------------------------------------------------------------------
def stage_seed(store: CorpusStore, sites_path: Path | None = None,
               fetched_at: int = 1716000000) -> dict:
    """Load the bundled site corpus (or another jsonl of the same shape)."""
    path = sites_path or data_path("sites23.jsonl")
    added = 0
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            doc, raw = make_document(
                rec["url"], rec["text"].encode("utf-8"), source="manual",
                fetched_at=int(rec.get("fetched_at", fetched_at)),
                text=rec["text"], lang=rec.get("lang"), category=rec.get("category"))
            before = len(store)
            store.put_document(doc, raw)
            added += len(store) - before
    return {"added": added, "total": len(store)}


def stage_crawl(cfg: Config, store: CorpusStore, run_dir: Path, clock=None) -> dict:
    fetcher = build_fetcher(cfg, clock)
    if clock is None and cfg.crawl.get("fetcher", {}).get("mode", "fixture") == "fixture":
        clock = collection.VirtualClock()
    config = collection.CrawlConfig(
        seeds=list(cfg.crawl.get("seeds", [])),
        keywords=list(cfg.crawl.get("keywords", [])),
        max_depth=int(cfg.crawl.get("max_depth", 2)),
        max_pages=int(cfg.crawl.get("max_pages", 1000)),
        per_host_delay_ms=int(cfg.crawl.get("per_host_delay_ms", 500)),
        scope=cfg.crawl.get("scope", "same-host"),
    )
    if not config.seeds:
        raise ConfigError("crawl needs at least one seed")
    result = collection.crawl(config, fetcher, clock=clock)
    for doc in result.documents:
        store.put_document(doc, result.raw_bytes[doc.id])
    summary = {
        "fetched": len(result.documents),
        "failures": dict(sorted(result.failures.items())),
        "doc_ids": sorted(d.id for d in result.documents),
    }
    _write_json(_ensure_run_dir(run_dir) / "crawl_summary.json", summary)
    return summary


def _fetch_hits(store: CorpusStore, hits, fetcher, source: str) -> tuple[int, dict]:
    stored, failures = 0, {}
    for hit in hits:
        try:
            raw, fetched_at = fetcher.fetch(hit.url)
        except collection.FetchError as exc:
            failures[hit.url] = str(exc)
            continue
        doc, _ = make_document(hit.url, raw, source=source, fetched_at=fetched_at,
                               text=collection.extract_text(raw))
        before = len(store)
        store.put_document(doc, raw)
        stored += len(store) - before
    return stored, failures


def stage_metasearch(cfg: Config, store: CorpusStore, run_dir: Path,
                     keywords: list[str] | None = None, fetch: bool = False) -> dict:
    providers = build_providers(cfg)
    keywords = keywords or list(cfg.crawl.get("keywords", []))
    outcome = collection.meta_search(keywords, providers)
    run_dir = _ensure_run_dir(run_dir)
    with (run_dir / "metasearch.csv").open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["rank", "url", "provider", "query"])
        for hit in outcome.hits:
            writer.writerow([hit.rank, hit.url, hit.provider, hit.query])
    summary = {"keywords": keywords, "hits": len(outcome.hits),
               "provider_errors": dict(sorted(outcome.errors.items()))}
    if fetch:
        fetcher = build_fetcher(cfg)
        stored, failures = _fetch_hits(store, outcome.hits, fetcher, "metasearch")
        summary["stored"] = stored
        summary["fetch_failures"] = dict(sorted(failures.items()))
    _write_json(run_dir / "metasearch_summary.json", summary)
    return summary


def stage_backlinks(cfg: Config, store: CorpusStore, run_dir: Path,
                    domains: list[str] | None = None, fetch: bool = False) -> dict:
    providers = build_providers(cfg)
    domains = domains or list(cfg.backlink_domains)
    if not domains:
        raise ConfigError("no back-link domains configured")
    run_dir = _ensure_run_dir(run_dir)
    all_hits = []
    errors: dict[str, str] = {}
    for domain in domains:
        outcome = collection.backlink_search(domain, providers)
        all_hits.extend((domain, hit) for hit in outcome.hits)
        errors.update(outcome.errors)
    with (run_dir / "backlinks.csv").open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["domain", "provider", "rank", "url"])
        for domain, hit in all_hits:
            writer.writerow([domain, hit.provider, hit.rank, hit.url])
    summary = {"domains": domains, "hits": len(all_hits),
               "provider_errors": dict(sorted(errors.items()))}
    if fetch:
        fetcher = build_fetcher(cfg)
        stored, failures = _fetch_hits(store, [h for _, h in all_hits], fetcher, "backlink")
        summary["stored"] = stored
        summary["fetch_failures"] = dict(sorted(failures.items()))
    _write_json(run_dir / "backlinks_summary.json", summary)
    return summary


def stage_train(cfg: Config, store: CorpusStore, run_dir: Path,
                bootstrap: bool = False) -> dict:
    """Fit the relevance scorer on every labeled document in the store."""
    if bootstrap:
        _load_training_seed(store)
    labeled = store.labeled_documents()
    vocab = textfeat.build_vocabulary(labeled)
    pairs = [(textfeat.tfidf_vector(d, vocab), 1 if d.label == "relevant" else 0)
             for d in labeled]
    previous = store.load_latest_model()
    model = scoring.train(pairs, vocab, cfg.hyperparams(),
                          previous_version=previous["version"] if previous else 0)
    payload = scoring.model_to_payload(model, vocab)
    payload["train_size"] = len(pairs)
    payload["label_seq"] = len(store.label_events())
    store.save_model(payload)
    summary = {"model_version": model.version, "train_size": len(pairs)}
    _write_json(_ensure_run_dir(run_dir) / "train_summary.json", summary)
    return summary


def _load_training_seed(store: CorpusStore) -> None:
    with data_path("training_seed.jsonl").open(encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            doc, raw = make_document(rec["url"], rec["text"].encode("utf-8"),
                                     source="manual", fetched_at=0, text=rec["text"])
            store.put_document(doc, raw)
            if store.effective_label(doc.id) != rec["label"]:
                store.apply_label(doc.id, rec["label"], analyst="bootstrap", at=0)


def stage_filter(cfg: Config, store: CorpusStore, run_dir: Path) -> dict:
    """Round 1 drops off-topic categories; round 2 scores the survivors."""
    run_dir = _ensure_run_dir(run_dir)
    docs = store.documents()
    kept = [d for d in docs if d.category != "other"]
    dropped = [d for d in docs if d.category == "other"]
    _write_json(run_dir / "filter_round1.json", {
        "kept": [d.id for d in kept],
        "dropped": [d.id for d in dropped],
    })

    payload = store.load_latest_model()
    if payload is None:
        raise DarkwatchError("no trained model in store; run `train` first")
    model, vocab = scoring.model_from_payload(payload)

    scored = 0
    for doc in kept:
        if doc.label is not None:
            continue
        vec = textfeat.tfidf_vector(doc, vocab)
        store.set_score(doc.id, scoring.predict_score(model, vec), model.version)
        scored += 1

    ranked_ids = scoring.rank_documents([store.get_document(d.id) for d in kept])
    with (run_dir / "ranking.csv").open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["doc_id", "url", "score", "label", "suggest"])
        for doc_id in ranked_ids:
            doc = store.get_document(doc_id)
            if doc.label is not None:
                suggest = "keep" if doc.label == "relevant" else "drop"
            elif doc.score is not None:
                suggest = "keep" if doc.score >= scoring.DECISION_THRESHOLD else "drop"
            else:
                suggest = ""
            writer.writerow([doc.id, doc.url,
                             "" if doc.score is None else f"{doc.score:.6f}",
                             doc.label or "", suggest])
    summary = {"kept": len(kept), "dropped": len(dropped), "scored": scored,
               "model_version": model.version}
    _write_json(run_dir / "filter_summary.json", summary)
    return summary


def stage_cluster(cfg: Config, store: CorpusStore, run_dir: Path,
                  k: int | None = None, seed: int | None = None) -> dict:
    """Cluster the post-filter corpus and summarize each group."""
    k = k if k is not None else int(cfg.cluster.get("k", 4))
    seed = seed if seed is not None else int(cfg.cluster.get("seed", 0))
    docs = [d for d in store.documents()
            if d.category != "other" and d.label != "irrelevant"]
    if len(docs) < k:
        raise DarkwatchError(f"need at least k={k} documents to cluster, have {len(docs)}")
    vocab = textfeat.build_vocabulary(docs)
    vectors = [textfeat.tfidf_vector(d, vocab) for d in docs]
    model = clustering.kmeans_fit(vectors, k, seed, dim=len(vocab))
    members: dict[int, list[str]] = {j: [] for j in range(k)}
    for doc, vec in zip(docs, vectors):
        members[clustering.assign(model, vec)].append(doc.id)
    report = {
        "k": k,
        "seed": seed,
        "inertia": round(model.inertia, 9),
        "clusters": [
            {
                "cluster": j,
                "size": len(members[j]),
                "top_terms": clustering.top_terms(model, j, vocab, 10),
                "members": sorted(members[j]),
            }
            for j in range(k)
        ],
    }
    _write_json(_ensure_run_dir(run_dir) / "cluster_report.json", report)
    return report


def stage_stats(cfg: Config, run_dir: Path, fixtures: str | None = None,
                posts_path: Path | str | None = None) -> dict:
    """Forum keyword statistics; `fixtures` picks a bundled posts set."""
    run_dir = _ensure_run_dir(run_dir)
    lexicon = cfg.load_lexicon()

    if fixtures == "table2":
        posts = forumstats.load_posts(data_path("table2_posts.jsonl"))
        queries = [(forum, list(kws)) for forum, kws in
                   json.loads(data_path("table2_queries.json").read_text(encoding="utf-8"))]
        counts = forumstats.table2_counts([(p.forum, p.text) for p in posts], queries)
        with (run_dir / "table2_counts.csv").open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TABLE2_CSV_HEADER)
            for forum, hits in counts:
                writer.writerow([forum, hits])
        return {"table2_counts": {forum: hits for forum, hits in counts}}

    if fixtures == "fig2" or (posts_path is None and not cfg.stats.get("posts")):
        posts_path = data_path("fig2_posts.jsonl")
    elif posts_path is None:
        posts_path = _resolve(cfg.base_dir, cfg.stats["posts"])
    posts = forumstats.load_posts(posts_path)
    pairs = [(p.forum, p.text) for p in posts]

    by_class: dict[str, list] = {}
    for name in lexicon.class_names():
        by_class[name] = forumstats.forum_keyword_stats(pairs, lexicon, name)
    _write_json(run_dir / "forum_stats.json", {
        name: [
            {"forum": s.forum, "total_posts": s.total_posts,
             "matching_posts": s.matching_posts,
             "share": forumstats.render_fraction(s.share)}
            for s in stats
        ]
        for name, stats in by_class.items()
    })
    primary = cfg.stats.get("primary_class", "iot-exploit")
    if primary in by_class:
        forumstats.export_stats_csv(by_class[primary], run_dir / "forum_stats.csv")
    return {"classes": sorted(by_class), "forums": len({p.forum for p in posts})}


def stage_scan(cfg: Config, run_dir: Path, query: str | None = None,
               pages: int = 1, fixture_dir: Path | str | None = None,
               port: int | None = None) -> dict:
    """Query the device search service and summarize the exposure."""
    run_dir = _ensure_run_dir(run_dir)
    if fixture_dir is not None:
        transport = devicescan.FixtureTransport(Path(fixture_dir))
        api_key = os.environ.get(cfg.scan.get("api_key_env", "DEVICE_SEARCH_KEY"),
                                 devicescan.FixtureTransport.DEFAULT_KEY)
    else:
        transport, api_key = build_scan_transport(cfg)

    queries = {query: query} if query else dict(cfg.scan.get("queries", {}))
    if not queries:
        raise ConfigError("no scan queries configured")
    port = port if port is not None else cfg.scan.get("port_filter")

    counts: dict[str, int] = {}
    all_records: list[devicescan.DeviceRecord] = []
    totals: dict[str, int] = {}
    for name in sorted(queries):
        records: list[devicescan.DeviceRecord] = []
        result = devicescan.query_devices(queries[name], transport, api_key)
        records.extend(result.records)
        for page in range(2, max(1, pages) + 1):
            if len(records) >= result.total:
                break
            try:
                more = devicescan.query_devices(queries[name], transport, api_key,
                                                page=page)
            except TransportError:
                break  # recorded fixtures may stop before the requested page
            records.extend(more.records)
        print(f"Results found: {result.total}")
        counts[name] = result.total
        totals[name] = result.total
        all_records.extend(records)
        slug = "".join(c if c.isalnum() else "_" for c in name)
        devicescan.export_device_csv(records, run_dir / f"devices_{slug}.csv")
        if port is not None:
            devicescan.export_device_csv(
                devicescan.filter_by_port(records, int(port)),
                run_dir / f"devices_{slug}_port{port}.csv")

    _write_json(run_dir / "exposure.json", {
        "counts": counts,
        "summary": devicescan.exposure_summary(all_records),
        "port_filter": port,
    })
    return {"totals": totals, "records": len(all_records)}


def stage_correlate(cfg: Config, run_dir: Path) -> dict:
    run_dir = _ensure_run_dir(run_dir)
    stats_path = run_dir / "forum_stats.json"
    exposure_path = run_dir / "exposure.json"
    if not stats_path.exists():
        raise NotComputedError("forum stats not computed; run `stats` first")
    if not exposure_path.exists():
        raise NotComputedError("exposure not computed; run `scan` first")

    stats_raw = json.loads(stats_path.read_text(encoding="utf-8"))
    exposure = json.loads(exposure_path.read_text(encoding="utf-8"))["counts"]
    missing = [c for c in exposure if c not in stats_raw]
    if missing:
        raise ClassMismatchError(f"classes without forum stats: {missing}")
    stats_by_class = {
        name: [forumstats.ForumStats(forum=s["forum"], total_posts=s["total_posts"],
                                     matching_posts=s["matching_posts"])
               for s in stats_raw[name]]
        for name in exposure
    }
    reports = correlate.correlate_risk(stats_by_class, {c: int(n) for c, n in exposure.items()})
    correlate.export_risk_csv(reports, run_dir / "risk.csv")
    _write_json(run_dir / "risk.json", correlate.risk_to_payload(reports))
    return {"classes": len(reports)}


def stage_report(run_dir: Path) -> dict:
    """Consolidate whatever artifacts exist into report.json."""
    run_dir = _ensure_run_dir(run_dir)
    report = collect_reports(run_dir, require_any=False)
    _write_json(run_dir / "report.json", report)
    return report


def collect_reports(run_dir: Path, require_any: bool = True) -> dict:
    """The four report sections; absent stages are marked not-computed."""
    run_dir = Path(run_dir)
    report: dict[str, object] = {}
    found = False
    for section in REPORT_SECTIONS:
        path = run_dir / _SECTION_FILES[section]
        if path.exists():
            report[section] = json.loads(path.read_text(encoding="utf-8"))
            found = True
        else:
            report[section] = {"error": "not-computed"}
    if require_any and not found:
        raise NotComputedError("no pipeline stage has produced reports yet")
    return report
