"""Candidate page gathering: focused crawl, back-link discovery, meta-search.

All fetching goes through a pluggable fetcher so tests (and offline
runs) are served from local fixture files; the live fetcher exists for
real collection and supports a SOCKS-style proxy endpoint for onion
routing. Search providers are equally pluggable: a descriptor names the
endpoint and back-link query syntax, a fixture provider answers from a
recorded results file.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urljoin

from .errors import DarkwatchError, InvalidUrlError
from .store import Document, make_document
from .urls import host_of, normalize_url, registrable_domain

SCOPES = {"same-host", "same-registrable-domain", "unrestricted"}


class FetchError(DarkwatchError):
    code = "fetch-error"


# ----------------------------------------------------------------------
# Clocks (politeness is testable against a virtual clock)
# ----------------------------------------------------------------------
class SystemClock:
    def monotonic(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class VirtualClock:
    """Deterministic clock: sleep() advances time instantly."""

    def __init__(self, start: float = 0.0):
        self.now = start

    def monotonic(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += max(0.0, seconds)


# ----------------------------------------------------------------------
# HTML scanning
# ----------------------------------------------------------------------
class _LinkParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.hrefs: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag != "a":
            return
        for name, value in attrs:
            if name == "href" and value:
                self.hrefs.append(value)


class _TextParser(HTMLParser):
    _SKIP = {"script", "style"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth and data.strip():
            self.chunks.append(data.strip())


def extract_links(raw: bytes, base_url: str) -> list[str]:
    """Anchor hrefs only, absolutized against the page URL."""
    parser = _LinkParser()
    parser.feed(raw.decode("utf-8", errors="replace"))
    out = []
    for href in parser.hrefs:
        absolute = urljoin(base_url, href)
        if absolute.startswith(("http://", "https://")):
            out.append(absolute)
    return out


def extract_text(raw: bytes) -> str:
    parser = _TextParser()
    parser.feed(raw.decode("utf-8", errors="replace"))
    return " ".join(parser.chunks)


# ----------------------------------------------------------------------
# Fetchers
# ----------------------------------------------------------------------
class FixtureFetcher:
    """Serves pages from a local directory via an index file.

    Index format (JSON): {"fetched_at": <epoch seconds>,
    "pages": {<normalized url>: <relative file path>}}.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        index = json.loads((self.root / "index.json").read_text(encoding="utf-8"))
        self.pages: dict[str, str] = index["pages"]
        self.fetched_at: int = int(index.get("fetched_at", 0))

    def fetch(self, url: str) -> tuple[bytes, int]:
        rel = self.pages.get(url)
        if rel is None:
            raise FetchError(f"no fixture for {url}")
        return (self.root / rel).read_bytes(), self.fetched_at


class LiveFetcher:
    """HTTP fetcher for real collection runs; never exercised in tests.

    ``proxy`` takes a SOCKS endpoint such as ``socks5h://127.0.0.1:9050``
    for onion routing. robots.txt is ignored unless ``honor_robots`` is
    set; the flag exists for lawful crawling of cooperative sites.
    """

    def __init__(self, proxy: str | None = None, timeout: float = 30.0,
                 user_agent: str = "darkwatch/0.1", honor_robots: bool = False):
        self.proxies = {"http": proxy, "https": proxy} if proxy else None
        self.timeout = timeout
        self.user_agent = user_agent
        self.honor_robots = honor_robots
        self._robots: dict[str, object] = {}

    def fetch(self, url: str) -> tuple[bytes, int]:
        import requests

        if self.honor_robots and not self._robots_allowed(url):
            raise FetchError(f"disallowed by robots.txt: {url}")
        try:
            resp = requests.get(url, proxies=self.proxies, timeout=self.timeout,
                                headers={"User-Agent": self.user_agent})
        except requests.RequestException as exc:
            raise FetchError(str(exc)) from exc
        if resp.status_code >= 400:
            raise FetchError(f"HTTP {resp.status_code} for {url}")
        return resp.content, int(time.time())

    def _robots_allowed(self, url: str) -> bool:
        from urllib import robotparser

        host = host_of(url)
        parser = self._robots.get(host)
        if parser is None:
            parser = robotparser.RobotFileParser(f"http://{host}/robots.txt")
            try:
                parser.read()
            except OSError:
                parser.allow_all = True
            self._robots[host] = parser
        return parser.can_fetch(self.user_agent, url)


# ----------------------------------------------------------------------
# Crawl
# ----------------------------------------------------------------------
@dataclass
class CrawlConfig:
    seeds: list[str]
    keywords: list[str] = field(default_factory=list)
    max_depth: int = 2
    max_pages: int = 1000
    per_host_delay_ms: int = 500
    scope: str = "same-host"

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")
        if self.max_depth < 0 or self.max_pages < 1 or self.per_host_delay_ms < 0:
            raise ValueError("bad crawl limits")


@dataclass
class CrawlResult:
    documents: list[Document]
    raw_bytes: dict[str, bytes]
    failures: dict[str, str]


def _in_scope(url: str, scope: str, seed_hosts: set[str], seed_domains: set[str]) -> bool:
    if scope == "unrestricted":
        return True
    host = host_of(url)
    if scope == "same-host":
        return host in seed_hosts
    return registrable_domain(host) in seed_domains


def crawl(config: CrawlConfig, fetcher, clock=None) -> CrawlResult:
    """Breadth-first crawl from the seeds.

    Each normalized URL is fetched at most once; links beyond max_depth
    or outside scope are never enqueued; fetching stops once max_pages
    documents have been collected. Per-URL failures are recorded and
    skipped, never fatal.
    """
    clock = clock or SystemClock()
    delay = config.per_host_delay_ms / 1000.0

    seeds = [normalize_url(s) for s in config.seeds]
    seed_hosts = {host_of(s) for s in seeds}
    seed_domains = {registrable_domain(h) for h in seed_hosts}

    frontier: deque[tuple[str, int]] = deque()
    seen: set[str] = set()
    for seed in seeds:
        if seed not in seen:
            seen.add(seed)
            frontier.append((seed, 0))

    last_fetch: dict[str, float] = {}
    documents: list[Document] = []
    raw_bytes: dict[str, bytes] = {}
    failures: dict[str, str] = {}

    while frontier and len(documents) < config.max_pages:
        url, depth = frontier.popleft()
        host = host_of(url)

        prev = last_fetch.get(host)
        if prev is not None:
            wait = prev + delay - clock.monotonic()
            if wait > 0:
                clock.sleep(wait)
        last_fetch[host] = clock.monotonic()

        try:
            raw, fetched_at = fetcher.fetch(url)
        except FetchError as exc:
            failures[url] = str(exc)
            continue

        doc, _ = make_document(url, raw, source="seed-crawl",
                               fetched_at=fetched_at, text=extract_text(raw))
        documents.append(doc)
        raw_bytes[doc.id] = raw

        if depth >= config.max_depth:
            continue
        for link in extract_links(raw, url):
            try:
                normalized = normalize_url(link)
            except InvalidUrlError:
                continue
            if normalized in seen:
                continue
            if not _in_scope(normalized, config.scope, seed_hosts, seed_domains):
                continue
            seen.add(normalized)
            frontier.append((normalized, depth + 1))

    return CrawlResult(documents=documents, raw_bytes=raw_bytes, failures=failures)


# ----------------------------------------------------------------------
# Search providers
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SearchHit:
    provider: str
    query: str
    url: str
    rank: int


@dataclass
class SearchOutcome:
    hits: list[SearchHit]
    errors: dict[str, str]


class FixtureSearchProvider:
    """Provider answering from a recorded results file.

    File format (JSON): {"name": ..., "backlink_template": "link:{domain}",
    "results": {<query>: [<url>, ...best first...]}}.
    """

    def __init__(self, name: str, results: dict[str, list[str]],
                 backlink_template: str = "link:{domain}"):
        self.name = name
        self.results = results
        self.backlink_template = backlink_template

    @classmethod
    def from_file(cls, path: Path | str) -> "FixtureSearchProvider":
        conf = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(conf["name"], conf["results"],
                   conf.get("backlink_template", "link:{domain}"))

    def backlink_query(self, domain: str) -> str:
        return self.backlink_template.format(domain=domain)

    def search(self, query: str) -> list[str]:
        return list(self.results.get(query, []))


class HttpSearchProvider:
    """Provider described by an endpoint template and a result path.

    The result path is a dotted selector into the response JSON, with
    ``*`` matching every element of an array, e.g. ``results.*.url``.
    Configuration surface only; tests use fixture providers.
    """

    def __init__(self, name: str, endpoint_template: str, result_path: str,
                 backlink_template: str = "link:{domain}", timeout: float = 30.0):
        self.name = name
        self.endpoint_template = endpoint_template
        self.result_path = result_path
        self.backlink_template = backlink_template
        self.timeout = timeout

    def backlink_query(self, domain: str) -> str:
        return self.backlink_template.format(domain=domain)

    def search(self, query: str) -> list[str]:
        import requests
        from urllib.parse import quote

        url = self.endpoint_template.format(query=quote(query))
        resp = requests.get(url, timeout=self.timeout)
        resp.raise_for_status()
        return [v for v in _select_path(resp.json(), self.result_path.split("."))
                if isinstance(v, str)]


def _select_path(obj, path: list[str]) -> list:
    if not path:
        return [obj]
    head, rest = path[0], path[1:]
    if head == "*":
        if not isinstance(obj, list):
            return []
        out = []
        for item in obj:
            out.extend(_select_path(item, rest))
        return out
    if isinstance(obj, dict) and head in obj:
        return _select_path(obj[head], rest)
    return []


def backlink_search(target_domain: str, providers) -> SearchOutcome:
    """Ask every provider for pages linking to the target domain.

    Failing providers are recorded and skipped; healthy results are kept,
    with provider attribution, ranks 1..n per provider.
    """
    if not target_domain:
        raise ValueError("target_domain is empty")
    hits: list[SearchHit] = []
    errors: dict[str, str] = {}
    for provider in providers:
        query = provider.backlink_query(target_domain)
        try:
            urls = provider.search(query)
        except Exception as exc:
            errors[provider.name] = str(exc)
            continue
        rank = 0
        for url in urls:
            try:
                normalized = normalize_url(url)
            except InvalidUrlError:
                continue
            rank += 1
            hits.append(SearchHit(provider=provider.name, query=query,
                                  url=normalized, rank=rank))
    return SearchOutcome(hits=hits, errors=errors)


def meta_search(keywords: list[str], providers) -> SearchOutcome:
    """Union of provider results, deduplicated by normalized URL.

    A URL seen by several providers keeps its minimum rank (ties go to
    the lexicographically first provider/query pair); output is sorted
    by (rank, url) and is invariant to provider ordering.
    """
    if not keywords:
        raise ValueError("at least one keyword required")
    best: dict[str, tuple[int, str, str]] = {}
    errors: dict[str, str] = {}
    for provider in providers:
        for keyword in keywords:
            try:
                urls = provider.search(keyword)
            except Exception as exc:
                errors[provider.name] = str(exc)
                break
            rank = 0
            for url in urls:
                try:
                    normalized = normalize_url(url)
                except InvalidUrlError:
                    continue
                rank += 1
                candidate = (rank, provider.name, keyword)
                if normalized not in best or candidate < best[normalized]:
                    best[normalized] = candidate
    hits = [SearchHit(provider=p, query=q, url=url, rank=r)
            for url, (r, p, q) in best.items()]
    hits.sort(key=lambda h: (h.rank, h.url))
    return SearchOutcome(hits=hits, errors=errors)
