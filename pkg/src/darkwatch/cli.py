"""Command-line orchestration of the pipeline stages.

Exit codes: 0 success, 1 operational error, 2 configuration error.
A lock file in the store root keeps concurrent runs off the same store.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import pipeline
from .errors import ConfigError, DarkwatchError
from .store import CorpusStore

_STORE_COMMANDS = {"seed", "crawl", "metasearch", "backlinks", "filter",
                   "train", "cluster", "serve"}


@contextmanager
def _store_lock(store_root: Path):
    store_root.mkdir(parents=True, exist_ok=True)
    lock = store_root / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DarkwatchError(f"store is locked by another run: {lock}") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkwatch",
        description="Collect, score, cluster and correlate dark-web threat signals.")
    parser.add_argument("--config", default="config.json", help="config file path")
    parser.add_argument("--run-dir", default="run", help="directory for stage outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    seed = sub.add_parser("seed", help="load the bundled site corpus into the store")
    seed.add_argument("--sites", help="alternative sites jsonl file")

    sub.add_parser("crawl", help="breadth-first crawl from the configured seeds")

    meta = sub.add_parser("metasearch", help="query all providers and merge results")
    meta.add_argument("--query", action="append", help="keyword (repeatable)")
    meta.add_argument("--fetch", action="store_true", help="also fetch and store hits")

    back = sub.add_parser("backlinks", help="find pages linking to target domains")
    back.add_argument("--domain", action="append", help="target domain (repeatable)")
    back.add_argument("--fetch", action="store_true", help="also fetch and store hits")

    sub.add_parser("filter", help="round-1 category drop plus round-2 scoring")

    train = sub.add_parser("train", help="fit the relevance scorer on labeled docs")
    train.add_argument("--bootstrap-synthetic", action="store_true",
                       help="seed the store with the bundled labeled corpus first")

    clus = sub.add_parser("cluster", help="k-means over the filtered corpus")
    clus.add_argument("--k", type=int)
    clus.add_argument("--seed", type=int)

    stats = sub.add_parser("stats", help="per-forum keyword statistics")
    stats.add_argument("--fixtures", choices=["table2", "fig2"],
                       help="use a bundled posts fixture")
    stats.add_argument("--posts", help="posts jsonl file")

    scan = sub.add_parser("scan", help="query the device search service")
    scan.add_argument("--query", help="ad-hoc query instead of configured ones")
    scan.add_argument("--fixture", help="fixture directory with recorded responses")
    scan.add_argument("--pages", type=int, default=1)
    scan.add_argument("--port", type=int, help="also export records on this port")

    sub.add_parser("correlate", help="combine forum stats and exposure into risk")
    sub.add_parser("report", help="consolidate report sections into report.json")

    serve = sub.add_parser("serve", help="run the triage HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)

    return parser


def _dispatch(args, cfg: pipeline.Config, store: CorpusStore | None) -> None:
    run_dir = Path(args.run_dir)
    if args.command == "seed":
        summary = pipeline.stage_seed(store, Path(args.sites) if args.sites else None)
        print(f"seeded {summary['added']} documents ({summary['total']} total)")
    elif args.command == "crawl":
        summary = pipeline.stage_crawl(cfg, store, run_dir)
        print(f"crawled {summary['fetched']} pages, {len(summary['failures'])} failures")
    elif args.command == "metasearch":
        summary = pipeline.stage_metasearch(cfg, store, run_dir,
                                            keywords=args.query, fetch=args.fetch)
        print(f"{summary['hits']} urls from meta-search")
    elif args.command == "backlinks":
        summary = pipeline.stage_backlinks(cfg, store, run_dir,
                                           domains=args.domain, fetch=args.fetch)
        print(f"{summary['hits']} back-link hits")
    elif args.command == "filter":
        summary = pipeline.stage_filter(cfg, store, run_dir)
        print(f"kept {summary['kept']}, dropped {summary['dropped']}, "
              f"scored {summary['scored']} (model v{summary['model_version']})")
    elif args.command == "train":
        summary = pipeline.stage_train(cfg, store, run_dir,
                                       bootstrap=args.bootstrap_synthetic)
        print(f"trained model v{summary['model_version']} "
              f"on {summary['train_size']} examples")
    elif args.command == "cluster":
        report = pipeline.stage_cluster(cfg, store, run_dir, k=args.k, seed=args.seed)
        sizes = [c["size"] for c in report["clusters"]]
        print(f"k={report['k']} clusters, sizes {sizes}, inertia {report['inertia']}")
    elif args.command == "stats":
        summary = pipeline.stage_stats(cfg, run_dir, fixtures=args.fixtures,
                                       posts_path=args.posts)
        if "table2_counts" in summary:
            for forum, hits in summary["table2_counts"].items():
                print(f"{forum}: {hits}")
        else:
            print(f"stats for {len(summary['classes'])} classes "
                  f"over {summary['forums']} forums")
    elif args.command == "scan":
        pipeline.stage_scan(cfg, run_dir, query=args.query, pages=args.pages,
                            fixture_dir=args.fixture, port=args.port)
    elif args.command == "correlate":
        summary = pipeline.stage_correlate(cfg, run_dir)
        print(f"risk report for {summary['classes']} classes")
    elif args.command == "report":
        pipeline.stage_report(run_dir)
        print(f"report written to {run_dir / 'report.json'}")
    elif args.command == "serve":
        _serve(args, cfg, store, run_dir)


def _serve(args, cfg: pipeline.Config, store: CorpusStore, run_dir: Path) -> None:
    import uvicorn

    from .service import TriageService, create_app

    service = TriageService(store, lexicon=cfg.load_lexicon(),
                            hyperparams=cfg.hyperparams(), run_dir=run_dir)
    ui_dir = cfg.service.get("ui_dir")
    if ui_dir:
        ui_dir = Path(ui_dir)
        if not ui_dir.is_absolute():
            ui_dir = cfg.base_dir / ui_dir
    else:
        candidate = cfg.base_dir / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(service, ui_dir=ui_dir)
    host = args.host or cfg.service.get("host", "127.0.0.1")
    port = args.port or int(cfg.service.get("port", 8400))
    uvicorn.run(app, host=host, port=port, log_level="info")


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = pipeline.load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command in _STORE_COMMANDS:
            with _store_lock(cfg.store):
                store = CorpusStore(cfg.store)
                _dispatch(args, cfg, store)
        else:
            _dispatch(args, cfg, None)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DarkwatchError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
