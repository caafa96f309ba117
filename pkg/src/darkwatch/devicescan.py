"""Client for an internet-device search service plus result analysis.

The wire shape is a GET to ``<base>/shodan/host/search?key=K&query=Q``
returning ``{"total": N, "matches": [...]}``. Tests and offline runs use
a file-backed transport that replays recorded responses; the HTTP
transport exists for live use with a real key. No device is ever
contacted: this module only reads search results.
"""

from __future__ import annotations

import csv
import ipaddress
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AuthError,
    MalformedMatchError,
    MalformedResponseError,
    StorageIOError,
    TransportError,
)

DEVICE_CSV_HEADER = ["IP", "Data"]
SEARCH_PATH = "/shodan/host/search"


@dataclass(frozen=True)
class DeviceRecord:
    ip: str
    port: int
    banner: str
    org: str = ""
    os: str = ""
    product: str = ""
    country: str = ""
    city: str = ""
    observed_at: str | None = None


@dataclass
class ScanResult:
    query: str
    total: int
    records: list[DeviceRecord]

    def __post_init__(self):
        if self.total < 0 or len(self.records) > self.total:
            raise MalformedResponseError(
                f"{len(self.records)} records against total {self.total}")


def parse_match(raw_match: dict) -> DeviceRecord:
    """Map one raw search match onto a DeviceRecord.

    ip_str and port are mandatory; every other field defaults to empty.
    """
    if not isinstance(raw_match, dict):
        raise MalformedMatchError("match is not an object")
    ip = raw_match.get("ip_str")
    port = raw_match.get("port")
    if not ip:
        raise MalformedMatchError("match missing ip_str")
    try:
        ipaddress.ip_address(ip)
    except ValueError as exc:
        raise MalformedMatchError(f"bad ip {ip!r}") from exc
    if not isinstance(port, int) or not 1 <= port <= 65535:
        raise MalformedMatchError(f"bad port {port!r}")

    location = raw_match.get("location") or {}
    return DeviceRecord(
        ip=ip,
        port=port,
        banner=raw_match.get("data") or "",
        org=raw_match.get("org") or "",
        os=raw_match.get("os") or "",
        product=raw_match.get("product") or "",
        country=location.get("country_name") or "",
        city=location.get("city") or "",
        observed_at=raw_match.get("timestamp"),
    )


# ----------------------------------------------------------------------
# Transports
# ----------------------------------------------------------------------
def _query_slug(query: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", query.lower()).strip("_") or "empty"


class FixtureTransport:
    """Replays recorded responses from ``<dir>/<query slug>.json``.

    Rejects requests whose key is not in ``valid_keys`` with the same
    401 body the live service produces.
    """

    DEFAULT_KEY = "fixture-key"

    def __init__(self, fixture_dir: Path | str, valid_keys: tuple[str, ...] = (DEFAULT_KEY,)):
        self.fixture_dir = Path(fixture_dir)
        self.valid_keys = valid_keys

    def get(self, path: str, params: dict) -> tuple[int, bytes]:
        if self.valid_keys and params.get("key") not in self.valid_keys:
            return 401, b'{"error": "Invalid API key"}'
        if path != SEARCH_PATH:
            return 404, b'{"error": "Not found"}'
        slug = _query_slug(params.get("query", ""))
        page = int(params.get("page", 1))
        name = f"{slug}.json" if page == 1 else f"{slug}_p{page}.json"
        fixture = self.fixture_dir / name
        if not fixture.exists():
            return 404, b'{"error": "No recorded response"}'
        return 200, fixture.read_bytes()


class HttpTransport:
    """Live HTTPS transport; never exercised in tests."""

    def __init__(self, base_url: str = "https://api.shodan.io", timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def get(self, path: str, params: dict) -> tuple[int, bytes]:
        import requests

        try:
            resp = requests.get(self.base_url + path, params=params,
                                timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        return resp.status_code, resp.content


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def query_devices(query: str, transport, api_key: str = FixtureTransport.DEFAULT_KEY,
                  page: int = 1) -> ScanResult:
    """Run one search and parse the returned page of matches."""
    params = {"key": api_key, "query": query}
    if page != 1:
        params["page"] = page
    status, body = transport.get(SEARCH_PATH, params)
    if status == 401:
        raise AuthError("invalid API key")
    if status != 200:
        raise TransportError(f"HTTP {status}")
    try:
        payload = json.loads(body)
        total = int(payload["total"])
        matches = payload["matches"]
        records = [parse_match(m) for m in matches]
    except MalformedMatchError as exc:
        raise MalformedResponseError(str(exc)) from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponseError(str(exc)) from exc
    return ScanResult(query=query, total=total, records=records)


def filter_by_port(records: list[DeviceRecord], port: int) -> list[DeviceRecord]:
    return [r for r in records if r.port == port]


def export_device_csv(records: list[DeviceRecord], path: Path | str) -> None:
    """IP/banner pairs with RFC 4180 quoting; banners may embed anything."""
    try:
        with Path(path).open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(DEVICE_CSV_HEADER)
            for r in records:
                writer.writerow([r.ip, r.banner])
    except OSError as exc:
        raise StorageIOError(str(exc)) from exc


def read_device_csv(path: Path | str) -> list[tuple[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != DEVICE_CSV_HEADER:
            raise ValueError(f"unexpected header: {header}")
        return [(row[0], row[1]) for row in reader]


def exposure_summary(records: list[DeviceRecord]) -> dict[str, dict]:
    """Counts grouped by port, country, and org.

    Each dimension is ordered by descending count, then by value, so the
    output is reproducible.
    """
    summary: dict[str, dict] = {}
    for dimension, key in (("port", lambda r: r.port),
                           ("country", lambda r: r.country),
                           ("org", lambda r: r.org)):
        counts: dict = {}
        for record in records:
            value = key(record)
            counts[value] = counts.get(value, 0) + 1
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        summary[dimension] = dict(ordered)
    return summary
